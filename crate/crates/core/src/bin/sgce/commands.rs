use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sgce::eval::{evaluate, format_table, parse_correspondences, EvalMode, EvalReport};
use sgce::losses::{loss_3d_with, total_loss, Reduction};
use sgce::mesh::{gen_synthetic, load_region_mask, SyntheticKind};
use sgce::net::{load_checkpoint_for, save_checkpoint, train_autoencoder_with};
use sgce::{Error, Mesh, MeshDataset, RegionMask};

use crate::config::RunConfig;
use crate::{CliError, EncodeArgs, EvalArgs, GenArgs, LossArgs, TrainArgs};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    kind: SyntheticKind,
    level: u32,
    amplitude: f64,
    seed: u64,
    count: usize,
    topology: String,
    samples: Vec<String>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    if !path.exists() {
        return Err(CliError::io(format!(
            "mesh file {} not found",
            path.display()
        )));
    }
    Ok(Mesh::load(path)?)
}

fn save_mesh(mesh: &Mesh, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    }
    Ok(mesh.save(path)?)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::from(Error::from(e)))
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let kind: SyntheticKind = a.kind.parse()?;
    if a.count == 0 {
        return Err(CliError::usage("--count must be at least 1"));
    }
    let ext = match a.format.as_str() {
        "obj" | "ply" => a.format.as_str(),
        f => {
            return Err(CliError::usage(format!(
                "unsupported format {f:?} (expected obj or ply)"
            )))
        }
    };
    let ds = gen_synthetic(kind, a.level, a.count, a.amplitude, a.seed)?;
    let topology = format!("topology.{ext}");
    save_mesh(&ds.topology, &a.out.join(&topology))?;
    let mut samples = Vec::with_capacity(ds.len());
    for i in 0..ds.len() {
        let name = format!("sample_{i:04}.{ext}");
        save_mesh(&ds.sample_mesh(i), &a.out.join(&name))?;
        samples.push(name);
    }
    let manifest = Manifest {
        kind,
        level: a.level,
        amplitude: a.amplitude,
        seed: a.seed,
        count: a.count,
        topology,
        samples,
    };
    write_file(&a.out.join("manifest.json"), to_json(&manifest)?.as_bytes())?;
    println!(
        "wrote {} samples with {} vertices to {}",
        a.count,
        ds.topology.vertex_count(),
        a.out.display()
    );
    Ok(())
}

fn load_dataset(path: &Path) -> Result<MeshDataset, CliError> {
    if !path.is_file() {
        return Err(CliError::usage(format!(
            "dataset manifest {} not found",
            path.display()
        )));
    }
    let manifest: Manifest = serde_json::from_slice(&read_file(path)?)
        .map_err(|e| CliError::usage(format!("invalid manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let topology = load_mesh(&base.join(&manifest.topology))?;
    let hash = topology.topology_hash();
    let mut samples = Vec::with_capacity(manifest.samples.len());
    for s in &manifest.samples {
        let m = load_mesh(&base.join(s))?;
        if m.topology_hash() != hash {
            return Err(Error::TopologyMismatch {
                expected: hash,
                found: m.topology_hash(),
            }
            .into());
        }
        samples.push(m.vertices);
    }
    Ok(MeshDataset::new(topology, samples, manifest.seed)?)
}

pub fn train(a: &TrainArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let t = &mut cfg.train;
    t.steps = a.steps.unwrap_or(t.steps);
    t.batch_size = a.batch_size.unwrap_or(t.batch_size);
    t.lr = a.lr.unwrap_or(t.lr);
    t.weight_decay = a.weight_decay.unwrap_or(t.weight_decay);
    t.seed = a.seed.unwrap_or(t.seed);
    t.validate()?;

    let manifest = a
        .manifest
        .clone()
        .or(cfg.paths.manifest.clone())
        .ok_or_else(|| {
            CliError::usage("no dataset manifest given (--manifest or paths.manifest)")
        })?;
    let out = a
        .out
        .clone()
        .or(cfg.paths.checkpoint.clone())
        .ok_or_else(|| CliError::usage("no checkpoint path given (--out or paths.checkpoint)"))?;
    let history_path = a
        .history
        .clone()
        .or(cfg.paths.history.clone())
        .unwrap_or_else(|| out.with_extension("csv"));

    let ds = load_dataset(&manifest)?;
    let spec = cfg.network.to_spec(ds.topology.vertex_count());
    let outcome = train_autoencoder_with(&ds, &spec, &cfg.train)?;
    write_file(
        &out,
        &save_checkpoint(&outcome.network, Some(&outcome.optimizer))?,
    )?;
    let mut csv = String::from("step,l1_loss\n");
    for (i, l) in outcome.history.iter().enumerate() {
        csv.push_str(&format!("{i},{l}\n"));
    }
    write_file(&history_path, csv.as_bytes())?;
    let h = &outcome.history;
    println!(
        "trained {} steps: l1 {} -> {} (checkpoint {}, history {})",
        h.len(),
        h[0],
        h[h.len() - 1],
        out.display(),
        history_path.display()
    );
    Ok(())
}

fn load_network_for(checkpoint: &Path, mesh: &Mesh) -> Result<sgce::net::Network, CliError> {
    let bytes = read_file(checkpoint)?;
    Ok(load_checkpoint_for(&bytes, mesh.topology_hash())?.0)
}

pub fn encode(a: &EncodeArgs) -> Result<(), CliError> {
    let mesh = load_mesh(&a.mesh)?;
    let net = load_network_for(&a.checkpoint, &mesh)?;
    let z = net.encode(&mesh.vertices)?;
    let json = serde_json::to_string(z.values()).map_err(Error::from)?;
    match &a.out {
        Some(p) => write_file(p, format!("{json}\n").as_bytes()),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

pub fn loss(a: &LossArgs) -> Result<(), CliError> {
    let mut w = match &a.config {
        Some(p) => RunConfig::load(p)?.loss_weights,
        None => Default::default(),
    };
    w.lambda_2d = a.lambda_2d.unwrap_or(w.lambda_2d);
    w.lambda_3d = a.lambda_3d.unwrap_or(w.lambda_3d);
    w.lambda_1 = a.lambda_1.unwrap_or(w.lambda_1);
    w.lambda_2 = a.lambda_2.unwrap_or(w.lambda_2);
    w.validate()?;
    let reduction = match a.reduction.as_str() {
        "mean" => Reduction::Mean,
        "sum" => Reduction::Sum,
        r => {
            return Err(CliError::usage(format!(
                "unknown reduction {r:?} (expected mean or sum)"
            )))
        }
    };
    let pred = load_mesh(&a.pred)?;
    let gt = load_mesh(&a.gt)?;
    let net = load_network_for(&a.checkpoint, &gt)?;
    if pred.topology_hash() != gt.topology_hash() {
        return Err(Error::TopologyMismatch {
            expected: gt.topology_hash(),
            found: pred.topology_hash(),
        }
        .into());
    }
    let mask = match &a.mask {
        Some(p) => load_region_mask(&read_file(p)?, &gt)?,
        None => RegionMask::uniform(gt.vertex_count()),
    };
    let parts = loss_3d_with(&pred.vertices, &gt.vertices, &mask, &net, &w, reduction)?;
    let report = total_loss(&parts, a.l2d, &w)?;
    println!("{}", to_json(&report)?);
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let modes = match a.mode.as_str() {
        "both" => vec![EvalMode::NonMetrical, EvalMode::Metrical],
        m => vec![m.parse::<EvalMode>()?],
    };
    if a.aligned_out.is_some() && modes.len() != 1 {
        return Err(CliError::usage("--aligned-out needs a single --mode"));
    }
    let pred = load_mesh(&a.pred)?;
    let gt = load_mesh(&a.gt)?;
    let pairs = match &a.correspondences {
        Some(p) => Some(parse_correspondences(&read_file(p)?)?),
        None => None,
    };
    let mut reports = Vec::with_capacity(modes.len());
    for mode in modes {
        let e = evaluate(&pred, &gt, pairs.as_deref(), mode)?;
        if let Some(p) = &a.aligned_out {
            save_mesh(&e.aligned, p)?;
        }
        reports.push(EvalReport::new(mode, &e.stats));
    }
    print!("{}", format_table(&reports));
    if let Some(p) = &a.report {
        let json = if reports.len() == 1 {
            to_json(&reports[0])?
        } else {
            to_json(&reports)?
        };
        write_file(p, format!("{json}\n").as_bytes())?;
    }
    std::io::stdout()
        .flush()
        .map_err(|e| CliError::io(e.to_string()))
}
