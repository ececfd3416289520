use serde::Deserialize;

use super::Mesh;
use crate::error::{Error, Result};

/// Per-vertex nonnegative weights for the vertex L1 loss.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    weights: Vec<f64>,
}

impl RegionMask {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mask weight {i} is negative or non-finite ({})",
                weights[i]
            )));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::InvalidArgument("mask is all zero".into()));
        }
        Ok(RegionMask { weights })
    }

    pub fn uniform(n: usize) -> Self {
        RegionMask {
            weights: vec![1.0; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MaskFile {
    Keyword(String),
    Weights(Vec<f64>),
}

/// Reads a mask file: either a JSON array with one weight per vertex or the
/// JSON string `"uniform"` (a bare `uniform` token is accepted too).
pub fn load_region_mask(bytes: &[u8], mesh: &Mesh) -> Result<RegionMask> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::InvalidArgument(format!("mask is not UTF-8: {e}")))?
        .trim();
    let parsed = if text == "uniform" {
        MaskFile::Keyword(text.to_string())
    } else {
        serde_json::from_str(text)?
    };
    let n = mesh.vertex_count();
    match parsed {
        MaskFile::Keyword(k) if k == "uniform" => Ok(RegionMask::uniform(n)),
        MaskFile::Keyword(k) => Err(Error::InvalidArgument(format!(
            "unknown mask keyword {k:?}"
        ))),
        MaskFile::Weights(w) => {
            if w.len() != n {
                return Err(Error::mismatch("region mask length", n, w.len()));
            }
            RegionMask::new(w)
        }
    }
}
