use std::collections::HashMap;
use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Mesh;
use crate::error::{Error, Result};
use crate::geom::{add, norm, normalize, scale, Vec3};

/// Radius of generated icospheres and side length of generated grids (mm).
pub const SYNTHETIC_EXTENT_MM: f64 = 100.0;

const BUMPS_PER_SAMPLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    Icosphere,
    Grid,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "icosphere" => Ok(SyntheticKind::Icosphere),
            "grid" => Ok(SyntheticKind::Grid),
            other => Err(Error::InvalidArgument(format!(
                "unsupported synthetic kind {other:?} (expected icosphere or grid)"
            ))),
        }
    }
}

/// Reference topology plus vertex arrays that share it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDataset {
    pub topology: Mesh,
    pub samples: Vec<Vec<Vec3>>,
    pub seed: u64,
}

impl MeshDataset {
    pub fn new(topology: Mesh, samples: Vec<Vec<Vec3>>, seed: u64) -> Result<Self> {
        let n = topology.vertex_count();
        if let Some(bad) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::mismatch("dataset sample", n, bad.len()));
        }
        Ok(MeshDataset {
            topology,
            samples,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_mesh(&self, i: usize) -> Mesh {
        Mesh {
            vertices: self.samples[i].clone(),
            faces: self.topology.faces.clone(),
        }
    }
}

/// Generates a base topology and `count` seeded deformations of it.
///
/// Each sample displaces every vertex along the surface normal by a sum of
/// a few random low-frequency sinusoids, normalised so that no displacement
/// exceeds `amplitude` millimetres.
pub fn gen_synthetic(
    kind: SyntheticKind,
    level: u32,
    count: usize,
    amplitude: f64,
    seed: u64,
) -> Result<MeshDataset> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be a finite nonnegative number, got {amplitude}"
        )));
    }
    if level > 8 {
        return Err(Error::InvalidArgument(format!(
            "level {level} is too large"
        )));
    }
    let topology = match kind {
        SyntheticKind::Icosphere => icosphere(level),
        SyntheticKind::Grid => grid(level),
    };

    // unit "shape coordinate" and displacement direction per vertex
    let frame: Vec<(Vec3, Vec3)> = match kind {
        SyntheticKind::Icosphere => topology
            .vertices
            .iter()
            .map(|v| (normalize(*v), normalize(*v)))
            .collect(),
        SyntheticKind::Grid => topology
            .vertices
            .iter()
            .map(|v| (scale(*v, 2.0 / SYNTHETIC_EXTENT_MM), [0.0, 0.0, 1.0]))
            .collect(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let mut bumps = Vec::with_capacity(BUMPS_PER_SAMPLE);
        for _ in 0..BUMPS_PER_SAMPLE {
            let dir = random_direction(&mut rng, kind);
            let freq: f64 = rng.random_range(0.5..2.0);
            let phase: f64 = rng.random_range(0.0..2.0 * PI);
            let weight: f64 = rng.random_range(-1.0..1.0);
            bumps.push((dir, freq, phase, weight));
        }
        let total: f64 = bumps.iter().map(|b| b.3.abs()).sum();
        let samp = topology
            .vertices
            .iter()
            .zip(&frame)
            .map(|(v, (p, n))| {
                if amplitude == 0.0 || total == 0.0 {
                    return *v;
                }
                let field: f64 = bumps
                    .iter()
                    .map(|(d, f, ph, w)| w * (f * PI * crate::geom::dot(*d, *p) + ph).sin())
                    .sum();
                add(*v, scale(*n, amplitude * field / total))
            })
            .collect();
        samples.push(samp);
    }
    MeshDataset::new(topology, samples, seed)
}

fn random_direction(rng: &mut ChaCha8Rng, kind: SyntheticKind) -> Vec3 {
    loop {
        let mut d: Vec3 = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if kind == SyntheticKind::Grid {
            d[2] = 0.0;
        }
        let n = norm(d);
        if n > 1e-3 && n <= 1.0 {
            return scale(d, 1.0 / n);
        }
    }
}

/// Icosahedron refined `level` times by 4-way subdivision and projected to
/// the sphere: `10·4^level + 2` vertices, `20·4^level` faces.
pub fn icosphere(level: u32) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| normalize(*v))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(normalize(scale(add(verts[a], verts[b]), 0.5)));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }

    let vertices = vertices
        .into_iter()
        .map(|v| scale(v, SYNTHETIC_EXTENT_MM))
        .collect();
    Mesh { vertices, faces }
}

/// Square grid in the z = 0 plane centred at the origin with
/// `(2^level + 1)²` vertices, each cell split into two triangles.
pub fn grid(level: u32) -> Mesh {
    let side = (1usize << level) + 1;
    let step = SYNTHETIC_EXTENT_MM / (side - 1) as f64;
    let half = SYNTHETIC_EXTENT_MM / 2.0;
    let mut vertices = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            vertices.push([c as f64 * step - half, r as f64 * step - half, 0.0]);
        }
    }
    let mut faces = Vec::with_capacity(2 * (side - 1) * (side - 1));
    for r in 0..side - 1 {
        for c in 0..side - 1 {
            let i = r * side + c;
            faces.push([i, i + 1, i + side + 1]);
            faces.push([i, i + side + 1, i + side]);
        }
    }
    Mesh { vertices, faces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dist2, sub};

    #[test]
    fn icosphere_counts() {
        for level in 0..=3u32 {
            let m = icosphere(level);
            let p = 4usize.pow(level);
            assert_eq!(m.vertex_count(), 10 * p + 2);
            assert_eq!(m.face_count(), 20 * p);
        }
        let ds = gen_synthetic(SyntheticKind::Icosphere, 2, 1, 1.0, 0).unwrap();
        assert_eq!(
            (ds.topology.vertex_count(), ds.topology.face_count()),
            (162, 320)
        );
    }

    #[test]
    fn zero_amplitude_is_base() {
        let ds = gen_synthetic(SyntheticKind::Grid, 2, 3, 0.0, 9).unwrap();
        for s in &ds.samples {
            assert_eq!(s, &ds.topology.vertices);
        }
    }

    #[test]
    fn deterministic() {
        let a = gen_synthetic(SyntheticKind::Icosphere, 1, 4, 3.0, 42).unwrap();
        let b = gen_synthetic(SyntheticKind::Icosphere, 1, 4, 3.0, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_synthetic(SyntheticKind::Icosphere, 1, 4, 3.0, 43).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn displacement_bounded_by_amplitude() {
        for kind in [SyntheticKind::Icosphere, SyntheticKind::Grid] {
            let ds = gen_synthetic(kind, 2, 5, 2.5, 1).unwrap();
            for s in &ds.samples {
                for (v, b) in s.iter().zip(&ds.topology.vertices) {
                    assert!(dist2(*v, *b).sqrt() <= 2.5 + 1e-12);
                }
            }
            // not all vertices stay put
            assert!(ds.samples[0]
                .iter()
                .zip(&ds.topology.vertices)
                .any(|(v, b)| norm(sub(*v, *b)) > 0.1));
        }
    }

    #[test]
    fn unsupported_kind() {
        assert!("torus".parse::<SyntheticKind>().is_err());
        assert!(gen_synthetic(SyntheticKind::Grid, 1, 0, 1.0, 0).is_err());
        assert!(gen_synthetic(SyntheticKind::Grid, 1, 1, -1.0, 0).is_err());
    }

    #[test]
    fn grid_counts() {
        let g = grid(2);
        assert_eq!(g.vertex_count(), 25);
        assert_eq!(g.face_count(), 32);
        assert!(g.check().is_ok());
    }
}
