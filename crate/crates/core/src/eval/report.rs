use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::align::{procrustes, Alignment};
use super::bvh::point_to_mesh_distances;
use super::stats::{distance_stats, DistanceStats};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Rigid alignment; the prediction keeps its own scale.
    Metrical,
    /// Similarity alignment; a global scale is fitted.
    NonMetrical,
}

impl EvalMode {
    pub fn label(self) -> &'static str {
        match self {
            EvalMode::Metrical => "Metrical",
            EvalMode::NonMetrical => "Non-Metrical",
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Metrical => "metrical",
            EvalMode::NonMetrical => "non_metrical",
        })
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metrical" => Ok(EvalMode::Metrical),
            "non_metrical" | "non-metrical" => Ok(EvalMode::NonMetrical),
            _ => Err(Error::InvalidArgument(format!(
                "unknown evaluation mode {s:?} (expected metrical or non_metrical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub alignment: Alignment,
    pub stats: DistanceStats,
    /// The prediction after alignment.
    pub aligned: Mesh,
}

/// Aligns `pred` to `gt` on corresponding vertices (identity
/// correspondence when omitted, which requires equal vertex counts), then
/// measures every ground-truth vertex against the aligned predicted surface.
pub fn evaluate(
    pred: &Mesh,
    gt: &Mesh,
    correspondences: Option<&[(usize, usize)]>,
    mode: EvalMode,
) -> Result<Evaluation> {
    pred.check()?;
    gt.check()?;
    let (p, q): (Vec<Vec3>, Vec<Vec3>) = match correspondences {
        None => {
            if pred.vertex_count() != gt.vertex_count() {
                return Err(Error::InvalidArgument(format!(
                    "meshes have {} and {} vertices; correspondences are required",
                    pred.vertex_count(),
                    gt.vertex_count()
                )));
            }
            (pred.vertices.clone(), gt.vertices.clone())
        }
        Some(pairs) => {
            if pairs.len() < 3 {
                return Err(Error::InvalidArgument(format!(
                    "at least 3 correspondences are required (got {})",
                    pairs.len()
                )));
            }
            let mut p = Vec::with_capacity(pairs.len());
            let mut q = Vec::with_capacity(pairs.len());
            for &(i, j) in pairs {
                if i >= pred.vertex_count() || j >= gt.vertex_count() {
                    return Err(Error::InvalidArgument(format!(
                        "correspondence ({i}, {j}) is out of range"
                    )));
                }
                p.push(pred.vertices[i]);
                q.push(gt.vertices[j]);
            }
            (p, q)
        }
    };
    let alignment = procrustes(&p, &q, mode == EvalMode::NonMetrical)?;
    let aligned =
        pred.with_vertices(pred.vertices.iter().map(|v| alignment.apply(*v)).collect())?;
    let d = point_to_mesh_distances(&gt.vertices, &aligned)?;
    Ok(Evaluation {
        alignment,
        stats: distance_stats(&d)?,
        aligned,
    })
}

/// Parses a JSON array of `[pred_index, gt_index]` pairs.
pub fn parse_correspondences(bytes: &[u8]) -> Result<Vec<(usize, usize)>> {
    let pairs: Vec<[usize; 2]> = serde_json::from_slice(bytes)?;
    Ok(pairs.into_iter().map(|[a, b]| (a, b)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub median_mm: f64,
    pub mean_mm: f64,
    pub std_mm: f64,
    pub count: usize,
}

impl EvalReport {
    pub fn new(mode: EvalMode, stats: &DistanceStats) -> Self {
        EvalReport {
            mode,
            median_mm: stats.median,
            mean_mm: stats.mean,
            std_mm: stats.std,
            count: stats.count,
        }
    }
}

/// Plain-text table with columns Median / Mean / Std, one row per mode.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut s = format!(
        "{:<14}{:>13}{:>13}{:>13}\n",
        "Mode", "Median (mm)", "Mean (mm)", "Std (mm)"
    );
    for r in reports {
        s.push_str(&format!(
            "{:<14}{:>13.4}{:>13.4}{:>13.4}\n",
            r.mode.label(),
            r.median_mm,
            r.mean_mm,
            r.std_mm
        ));
    }
    s
}
