use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sgce::mesh::{icosphere, write_obj};
use sgce::net::{save_checkpoint, Network, NetworkSpec};
use sgce::Mesh;
use tempfile::TempDir;

fn sgce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgce"))
        .args(args)
        .output()
        .expect("spawn sgce")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_mesh(path: &Path, mesh: &Mesh) {
    fs::write(path, write_obj(mesh)).unwrap();
}

fn small_config(dir: &Path, manifest: &Path) -> PathBuf {
    let cfg = serde_json::json!({
        "network": {
            "layer_channels": [8, 8],
            "K": [3, 3],
            "pooling_ratios": [0.5, 0.5],
            "latent_dim": 8
        },
        "train": { "batch_size": 4, "steps": 5, "seed": 3 },
        "paths": { "manifest": manifest }
    });
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    path
}

/// Generates 4 level-1 icosphere samples and trains a small checkpoint.
fn trained(dir: &Path, extra: &[&str]) -> (PathBuf, PathBuf) {
    let data = dir.join("data");
    let out = sgce(&[
        "gen",
        "--level",
        "1",
        "--count",
        "4",
        "--seed",
        "5",
        "--out",
        p(&data),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = data.join("manifest.json");
    let cfg = small_config(dir, &manifest);
    let ckpt = dir.join("model.sgce");
    let mut args = vec!["train", "--config", p(&cfg), "--out", p(&ckpt)];
    args.extend_from_slice(extra);
    let out = sgce(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (ckpt, data)
}

fn history_values(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,l1_loss"));
    lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn help_for_every_subcommand() {
    assert_eq!(code(&sgce(&["--help"])), 0);
    for sub in ["gen", "train", "encode", "loss", "eval"] {
        let out = sgce(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub}");
        assert!(stdout(&out).contains("Usage"), "{sub}");
    }
    assert_eq!(code(&sgce(&["frobnicate"])), 2);
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = sgce(&[
            "gen",
            "--level",
            "1",
            "--count",
            "3",
            "--seed",
            "11",
            "--out",
            p(d),
        ]);
        assert_eq!(code(&out), 0);
    }
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap());
    }
    let out = sgce(&["gen", "--count", "0", "--out", p(&dir.path().join("c"))]);
    assert_eq!(code(&out), 2);
    let out = sgce(&["gen", "--kind", "torus", "--out", p(&dir.path().join("c"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn train_with_zero_lr_keeps_loss_constant() {
    let dir = TempDir::new().unwrap();
    let (ckpt, _) = trained(
        dir.path(),
        &["--lr", "0", "--steps", "5", "--batch-size", "4"],
    );
    let hist = history_values(&ckpt.with_extension("csv"));
    assert_eq!(hist.len(), 5);
    assert!(hist[0].is_finite() && hist[0] > 0.0);
    assert!(hist.iter().all(|h| *h == hist[0]), "{hist:?}");
}

#[test]
fn train_usage_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let out = sgce(&[
        "train",
        "--manifest",
        p(&missing),
        "--out",
        p(&dir.path().join("m")),
    ]);
    assert_eq!(code(&out), 2);

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"train": {"steps": 1, "learning_rate": 0.1}}"#).unwrap();
    let out = sgce(&["train", "--config", p(&cfg)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));
}

#[test]
fn train_output_is_thread_independent() {
    let one = TempDir::new().unwrap();
    let four = TempDir::new().unwrap();
    let (a, _) = trained(one.path(), &["--threads", "1"]);
    let (b, _) = trained(four.path(), &["--threads", "4"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(a.with_extension("csv")).unwrap(),
        fs::read(b.with_extension("csv")).unwrap()
    );
    assert_eq!(code(&sgce(&["--threads", "0", "gen", "--out", "x"])), 2);
}

#[test]
fn encode_and_topology_check() {
    let dir = TempDir::new().unwrap();
    let (ckpt, data) = trained(dir.path(), &[]);
    let mesh = data.join("sample_0000.obj");
    let first = sgce(&["encode", "--checkpoint", p(&ckpt), "--mesh", p(&mesh)]);
    assert_eq!(code(&first), 0);
    let z: Vec<f64> = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(z.len(), 8);
    assert!(z.iter().all(|v| v.is_finite()));
    let again = sgce(&["encode", "--checkpoint", p(&ckpt), "--mesh", p(&mesh)]);
    assert_eq!(stdout(&first), stdout(&again));

    let other = dir.path().join("other.obj");
    write_mesh(&other, &icosphere(2));
    let out = sgce(&["encode", "--checkpoint", p(&ckpt), "--mesh", p(&other)]);
    assert_eq!(code(&out), 4);

    let out = sgce(&[
        "encode",
        "--checkpoint",
        p(&dir.path().join("missing")),
        "--mesh",
        p(&mesh),
    ]);
    assert_eq!(code(&out), 5);
}

#[test]
fn loss_of_identical_meshes_is_the_2d_term() {
    let dir = TempDir::new().unwrap();
    let (ckpt, data) = trained(dir.path(), &[]);
    let mesh = data.join("sample_0001.obj");
    let out = sgce(&[
        "loss",
        "--checkpoint",
        p(&ckpt),
        "--pred",
        p(&mesh),
        "--gt",
        p(&mesh),
        "--l2d",
        "2.0",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["l_vertices"], 0.0);
    assert_eq!(r["l_3d_id"], 0.0);
    assert_eq!(r["l_3d"], 0.0);
    assert_eq!(r["total"], 0.4 * 2.0);
}

#[test]
fn loss_with_zero_latent_is_numeric_error() {
    let dir = TempDir::new().unwrap();
    let topo = icosphere(1);
    let mut spec = NetworkSpec::default_for(topo.vertex_count());
    spec.layer_channels = vec![8, 8];
    spec.cheb_order = vec![3, 3];
    spec.pooling_ratios = vec![0.5, 0.5];
    spec.activation.truncate(2);
    spec.latent_dim = 8;
    let net = Network::skeleton(&spec, &topo).unwrap();
    let ckpt = dir.path().join("zero.sgce");
    fs::write(&ckpt, save_checkpoint(&net, None).unwrap()).unwrap();
    let mesh = dir.path().join("m.obj");
    write_mesh(&mesh, &topo);
    let out = sgce(&[
        "loss",
        "--checkpoint",
        p(&ckpt),
        "--pred",
        p(&mesh),
        "--gt",
        p(&mesh),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eval_modes() {
    let dir = TempDir::new().unwrap();
    let gt = icosphere(1);
    let (a, b) = (dir.path().join("a.obj"), dir.path().join("b.obj"));
    write_mesh(&a, &gt);
    let report = dir.path().join("r.json");
    let out = sgce(&[
        "eval",
        "--pred",
        p(&a),
        "--gt",
        p(&a),
        "--report",
        p(&report),
    ]);
    assert_eq!(code(&out), 0);
    let r: Vec<serde_json::Value> = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(r.len(), 2);
    for m in &r {
        for k in ["median_mm", "mean_mm", "std_mm"] {
            assert!(m[k].as_f64().unwrap().abs() < 1e-9, "{m}");
        }
    }

    let scaled = Mesh {
        vertices: gt
            .vertices
            .iter()
            .map(|v| [1.1 * v[0], 1.1 * v[1], 1.1 * v[2]])
            .collect(),
        faces: gt.faces.clone(),
    };
    write_mesh(&b, &scaled);
    let out = sgce(&[
        "eval",
        "--pred",
        p(&b),
        "--gt",
        p(&a),
        "--report",
        p(&report),
    ]);
    assert_eq!(code(&out), 0);
    let table = stdout(&out);
    assert!(table.contains("Non-Metrical") && table.contains("Metrical"));
    let r: Vec<serde_json::Value> = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    let median = |mode: &str| {
        r.iter().find(|m| m["mode"] == mode).unwrap()["median_mm"]
            .as_f64()
            .unwrap()
    };
    assert!(median("non_metrical") < 1e-9);
    assert!(median("metrical") > 1.0);

    let out = sgce(&["eval", "--pred", p(&b), "--gt", p(&a), "--mode", "sideways"]);
    assert_eq!(code(&out), 2);
    let out = sgce(&[
        "eval",
        "--pred",
        p(&b),
        "--gt",
        p(&a),
        "--aligned-out",
        p(&report),
    ]);
    assert_eq!(code(&out), 2);
}
