//! Fixed-topology triangle meshes and everything needed to get them in and
//! out of the process: OBJ/PLY codecs, validation, region masks and seeded
//! synthetic datasets.

mod mask;
mod obj;
mod ply;
mod synthetic;
mod validate;

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;

pub use mask::{load_region_mask, RegionMask};
pub use obj::{parse_obj, write_obj};
pub use ply::{parse_ply, write_ply};
pub use synthetic::{gen_synthetic, grid, icosphere, MeshDataset, SyntheticKind};
pub use validate::{validate_mesh, ValidationReport, Violation, ZERO_AREA_EPS};

/// Triangle mesh with vertex coordinates in millimetres.
///
/// Fields are public so that malformed meshes can be represented and
/// reported on by [`validate_mesh`]; use [`Mesh::new`] for a checked build.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// Builds a mesh and enforces the structural invariants: at least three
    /// vertices and one face, indices in range, no repeated index in a face.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Mesh { vertices, faces };
        mesh.check()?;
        Ok(mesh)
    }

    pub fn check(&self) -> Result<()> {
        if self.vertices.len() < 3 {
            return Err(Error::InvalidMesh(format!(
                "need at least 3 vertices, found {}",
                self.vertices.len()
            )));
        }
        if self.faces.is_empty() {
            return Err(Error::InvalidMesh("mesh has no faces".into()));
        }
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} references vertex {bad} (vertex count {n})"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} repeats a vertex index: {f:?}"
                )));
            }
        }
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| v.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Same faces, different vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::mismatch(
                "with_vertices",
                self.vertices.len(),
                vertices.len(),
            ));
        }
        Ok(Mesh {
            vertices,
            faces: self.faces.clone(),
        })
    }

    /// 64-bit FNV-1a over the face list, each index as a little-endian u32.
    pub fn topology_hash(&self) -> u64 {
        topology_hash(&self.faces)
    }

    /// Reads an `.obj` or `.ply` file, chosen by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        match extension(path).as_deref() {
            Some("ply") => parse_ply(&bytes),
            Some("obj") => parse_obj(&bytes),
            other => Err(Error::InvalidArgument(format!(
                "unsupported mesh extension {other:?} for {}",
                path.display()
            ))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = match extension(path).as_deref() {
            Some("ply") => write_ply(self),
            Some("obj") => write_obj(self),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unsupported mesh extension {other:?} for {}",
                    path.display()
                )))
            }
        };
        std::fs::write(path, bytes)?;
        Ok(())
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn topology_hash(faces: &[[usize; 3]]) -> u64 {
    let mut h = FNV_OFFSET;
    for f in faces {
        for &i in f {
            for b in (i as u32).to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(FNV_PRIME);
            }
        }
    }
    h
}

/// Formats a coordinate so that parsing it back yields the same bits.
pub(crate) fn fmt_coord(x: f64) -> String {
    // `Display` for f64 emits the shortest representation that round-trips.
    format!("{x}")
}
