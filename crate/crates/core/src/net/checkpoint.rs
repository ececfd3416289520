//! Binary checkpoint layout (all integers little-endian):
//!
//! ```text
//! "SGCE" | u32 version | u64 topology hash | u32 len | JSON header
//! u32 tensor count | { u32 name len | name | u32 rank | u64 dims[rank] | f64 data }*
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::adamw::{AdamWConfig, OptimizerState};
use super::network::{InputNorm, Network, NetworkSpec};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SGCE";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    spec: NetworkSpec,
    optimizer: Option<OptimizerHeader>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerHeader {
    step: u64,
    hyper: AdamWConfig,
}

struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn put_tensor(out: &mut Vec<u8>, name: &str, dims: &[usize], data: &[f64]) {
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for x in data {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn save_checkpoint(net: &Network, state: Option<&OptimizerState>) -> Result<Vec<u8>> {
    let header = Header {
        spec: net.spec.clone(),
        optimizer: state.map(|s| OptimizerHeader {
            step: s.step,
            hyper: s.hyper,
        }),
    };
    let json = serde_json::to_vec(&header)?;
    let params = net.parameters();
    if let Some(s) = state {
        if s.m.len() != params.len() || s.v.len() != params.len() {
            return Err(Error::mismatch(
                "optimizer tensor count",
                params.len(),
                s.m.len(),
            ));
        }
    }

    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&net.topology_hash().to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);

    let topo = &net.topology;
    let verts: Vec<f64> = topo.vertices.iter().flatten().copied().collect();
    let faces: Vec<f64> = topo.faces.iter().flatten().map(|&i| i as f64).collect();
    let norm = [
        net.norm.scale,
        net.norm.center[0],
        net.norm.center[1],
        net.norm.center[2],
    ];
    let count = 3 + params.len() * if state.is_some() { 3 } else { 1 };
    out.extend_from_slice(&(count as u32).to_le_bytes());
    put_tensor(
        &mut out,
        "topology.vertices",
        &[topo.vertex_count(), 3],
        &verts,
    );
    put_tensor(&mut out, "topology.faces", &[topo.face_count(), 3], &faces);
    put_tensor(&mut out, "norm", &[4], &norm);
    for (name, dims, data) in &params {
        put_tensor(&mut out, name, dims, data);
    }
    if let Some(s) = state {
        for (i, (name, dims, _)) in params.iter().enumerate() {
            put_tensor(&mut out, &format!("adam.m.{name}"), dims, &s.m[i]);
        }
        for (i, (name, dims, _)) in params.iter().enumerate() {
            put_tensor(&mut out, &format!("adam.v.{name}"), dims, &s.v[i]);
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::Checkpoint(format!(
                    "truncated payload at byte {} (need {n} more)",
                    self.pos
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn tensor(&mut self) -> Result<(String, Tensor)> {
        let len = self.u32()? as usize;
        let name = std::str::from_utf8(self.take(len)?)
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = self.u32()? as usize;
        let mut dims = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            dims.push(
                usize::try_from(self.u64()?)
                    .map_err(|_| Error::Checkpoint("dimension overflow".into()))?,
            );
        }
        let count = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| Error::Checkpoint(format!("tensor {name} is too large")))?;
        let data = self
            .take(count)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok((name, Tensor { dims, data }))
    }
}

fn fetch(tensors: &mut BTreeMap<String, Tensor>, name: &str, dims: &[usize]) -> Result<Vec<f64>> {
    let t = tensors
        .remove(name)
        .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))?;
    if t.dims != dims {
        return Err(Error::Checkpoint(format!(
            "tensor {name} has shape {:?}, expected {dims:?}",
            t.dims
        )));
    }
    if t.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("checkpoint tensor {name}")));
    }
    Ok(t.data)
}

/// Restores a network (and optimizer state when present). Pooling and
/// Laplacians are rebuilt from the stored topology.
pub fn load_checkpoint(bytes: &[u8]) -> Result<(Network, Option<OptimizerState>)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r
        .take(4)
        .map_err(|_| Error::Checkpoint("file too short for SGCE header".into()))?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {magic:?}: not an SGCE checkpoint"
        )));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let stored_hash = r.u64()?;
    let json_len = r.u32()? as usize;
    let header: Header = serde_json::from_slice(r.take(json_len)?)
        .map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
    let count = r.u32()? as usize;
    let mut tensors = BTreeMap::new();
    for _ in 0..count {
        let (name, t) = r.tensor()?;
        if tensors.insert(name.clone(), t).is_some() {
            return Err(Error::Checkpoint(format!("duplicate tensor {name}")));
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }

    let n = header.spec.n_vertices;
    let verts = fetch(&mut tensors, "topology.vertices", &[n, 3])?;
    let fdims = tensors
        .get("topology.faces")
        .map(|t| t.dims.clone())
        .ok_or_else(|| Error::Checkpoint("missing tensor topology.faces".into()))?;
    if fdims.len() != 2 || fdims[1] != 3 {
        return Err(Error::Checkpoint(format!(
            "topology.faces has shape {fdims:?}"
        )));
    }
    let faces_raw = fetch(&mut tensors, "topology.faces", &fdims)?;
    let mut faces = Vec::with_capacity(fdims[0]);
    for f in faces_raw.chunks_exact(3) {
        let mut tri = [0usize; 3];
        for (t, &x) in tri.iter_mut().zip(f) {
            if x < 0.0 || x.fract() != 0.0 || x >= n as f64 {
                return Err(Error::Checkpoint(format!("invalid face index {x}")));
            }
            *t = x as usize;
        }
        faces.push(tri);
    }
    let topology = Mesh::new(
        verts.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        faces,
    )?;
    if topology.topology_hash() != stored_hash {
        return Err(Error::Checkpoint(format!(
            "stored topology hash {stored_hash:016x} does not match stored faces ({:016x})",
            topology.topology_hash()
        )));
    }

    let mut net = Network::skeleton(&header.spec, &topology)?;
    let norm = fetch(&mut tensors, "norm", &[4])?;
    if norm[0].is_nan() || norm[0] <= 0.0 {
        return Err(Error::Checkpoint(format!(
            "normalization scale {} is not positive",
            norm[0]
        )));
    }
    net.norm = InputNorm {
        mode: header.spec.input_normalization,
        scale: norm[0],
        center: [norm[1], norm[2], norm[3]],
    };
    let shapes: Vec<(String, Vec<usize>)> = net
        .parameters()
        .into_iter()
        .map(|(n, d, _)| (n, d))
        .collect();
    for ((name, dims), slot) in shapes.iter().zip(net.parameters_mut()) {
        *slot = fetch(&mut tensors, name, dims)?;
    }
    let state = match header.optimizer {
        None => None,
        Some(h) => {
            let mut m = Vec::with_capacity(shapes.len());
            let mut v = Vec::with_capacity(shapes.len());
            for (name, dims) in &shapes {
                m.push(fetch(&mut tensors, &format!("adam.m.{name}"), dims)?);
                v.push(fetch(&mut tensors, &format!("adam.v.{name}"), dims)?);
            }
            Some(OptimizerState {
                step: h.step,
                m,
                v,
                hyper: h.hyper,
            })
        }
    };
    if let Some(extra) = tensors.keys().next() {
        return Err(Error::Checkpoint(format!("unexpected tensor {extra}")));
    }
    Ok((net, state))
}

/// Loads a checkpoint that must have been trained on the topology with hash
/// `expected_hash`.
pub fn load_checkpoint_for(
    bytes: &[u8],
    expected_hash: u64,
) -> Result<(Network, Option<OptimizerState>)> {
    if bytes.len() >= 16 && &bytes[..4] == CHECKPOINT_MAGIC {
        let found = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        if found != expected_hash {
            return Err(Error::TopologyMismatch {
                expected: expected_hash,
                found,
            });
        }
    }
    load_checkpoint(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::icosphere;
    use crate::net::init_network;

    fn net() -> Network {
        init_network(&NetworkSpec::default_for(42), &icosphere(1), 5).unwrap()
    }

    #[test]
    fn round_trip_with_state() {
        let n = net();
        let sizes: Vec<usize> = n.parameters().iter().map(|p| p.2.len()).collect();
        let mut st = OptimizerState::new(&sizes, AdamWConfig::default());
        st.step = 7;
        st.m[0][0] = 0.25;
        st.v[1][0] = 1e-300;
        let bytes = save_checkpoint(&n, Some(&st)).unwrap();
        let (back, st2) = load_checkpoint(&bytes).unwrap();
        assert_eq!(back, n);
        assert_eq!(st2, Some(st));
        let bytes2 = save_checkpoint(&back, st2.as_ref()).unwrap();
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn corrupted_magic_and_version() {
        let mut bytes = save_checkpoint(&net(), None).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        let e = load_checkpoint(&bad).unwrap_err().to_string();
        assert!(e.contains("magic"), "{e}");
        bytes[4] = 9;
        let e = load_checkpoint(&bytes).unwrap_err().to_string();
        assert!(e.contains("version"), "{e}");
    }

    #[test]
    fn truncation_is_detected() {
        let bytes = save_checkpoint(&net(), None).unwrap();
        for cut in [3, 12, 20, bytes.len() / 2, bytes.len() - 1] {
            assert!(
                matches!(load_checkpoint(&bytes[..cut]), Err(Error::Checkpoint(_))),
                "cut {cut}"
            );
        }
    }

    #[test]
    fn topology_mismatch() {
        let n = init_network(&NetworkSpec::default_for(162), &icosphere(2), 0).unwrap();
        let bytes = save_checkpoint(&n, None).unwrap();
        let other = icosphere(3).topology_hash();
        assert!(matches!(
            load_checkpoint_for(&bytes, other),
            Err(Error::TopologyMismatch { .. })
        ));
        assert!(load_checkpoint_for(&bytes, n.topology_hash()).is_ok());
    }
}
