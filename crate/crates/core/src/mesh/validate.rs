use super::Mesh;
use crate::geom::triangle_area;

/// Faces with area below this (mm²) are reported as zero-area.
pub const ZERO_AREA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    IndexOutOfRange { face: usize, index: usize },
    DegenerateFace { face: usize },
    ZeroAreaFace { face: usize, area: f64 },
    UnreferencedVertex { vertex: usize },
    NonFiniteVertex { vertex: usize },
    TooFewVertices { count: usize },
    NoFaces,
}

impl Violation {
    /// Unreferenced vertices are warnings; everything else is an error.
    pub fn is_warning(&self) -> bool {
        matches!(self, Violation::UnreferencedVertex { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| !v.is_warning())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.is_warning())
    }

    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }
}

pub fn validate_mesh(mesh: &Mesh) -> ValidationReport {
    let n = mesh.vertices.len();
    let mut violations = Vec::new();
    if n < 3 {
        violations.push(Violation::TooFewVertices { count: n });
    }
    if mesh.faces.is_empty() {
        violations.push(Violation::NoFaces);
    }
    for (i, v) in mesh.vertices.iter().enumerate() {
        if v.iter().any(|c| !c.is_finite()) {
            violations.push(Violation::NonFiniteVertex { vertex: i });
        }
    }

    let mut referenced = vec![false; n];
    for (fi, f) in mesh.faces.iter().enumerate() {
        let mut in_range = true;
        for &idx in f {
            if idx >= n {
                violations.push(Violation::IndexOutOfRange {
                    face: fi,
                    index: idx,
                });
                in_range = false;
            } else {
                referenced[idx] = true;
            }
        }
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            violations.push(Violation::DegenerateFace { face: fi });
            continue;
        }
        if in_range {
            let area = triangle_area(
                mesh.vertices[f[0]],
                mesh.vertices[f[1]],
                mesh.vertices[f[2]],
            );
            if area < ZERO_AREA_EPS {
                violations.push(Violation::ZeroAreaFace { face: fi, area });
            }
        }
    }
    for (i, r) in referenced.iter().enumerate() {
        if !r {
            violations.push(Violation::UnreferencedVertex { vertex: i });
        }
    }
    ValidationReport { violations }
}
