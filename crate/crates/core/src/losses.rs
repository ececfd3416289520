//! Reconstruction losses with exact gradients with respect to the predicted
//! vertices: masked vertex L1, latent cosine identity loss, their weighted
//! 3D composite and the total with an externally supplied 2D term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::RegionMask;
use crate::net::{Latent, Network};

/// Norm below which a latent is treated as degenerate.
pub const LATENT_EPS_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub lambda_2d: f64,
    pub lambda_3d: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_2d: 0.4,
            lambda_3d: 0.6,
            lambda_1: 0.5,
            lambda_2: 0.5,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("lambda_2d", self.lambda_2d),
            ("lambda_3d", self.lambda_3d),
            ("lambda_1", self.lambda_1),
            ("lambda_2", self.lambda_2),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and ≥ 0 (got {w})"
                )));
            }
        }
        Ok(())
    }
}

/// How the weighted vertex L1 sum is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Divide by `3·Σ K_i`.
    #[default]
    Mean,
    /// Plain weighted sum.
    Sum,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_pair(v: &[Vec3], v_gt: &[Vec3]) -> Result<()> {
    if v.len() != v_gt.len() {
        return Err(Error::mismatch("vertex arrays", v_gt.len(), v.len()));
    }
    if v.iter().chain(v_gt).flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("loss vertices".into()));
    }
    Ok(())
}

/// Mean-reduced masked L1 distance and its gradient with respect to `v`.
pub fn vertices_loss(v: &[Vec3], v_gt: &[Vec3], mask: &RegionMask) -> Result<(f64, Vec<Vec3>)> {
    vertices_loss_with(v, v_gt, mask, Reduction::Mean)
}

pub fn vertices_loss_with(
    v: &[Vec3],
    v_gt: &[Vec3],
    mask: &RegionMask,
    reduction: Reduction,
) -> Result<(f64, Vec<Vec3>)> {
    check_pair(v, v_gt)?;
    let w = mask.weights();
    if w.len() != v.len() {
        return Err(Error::mismatch("region mask length", v.len(), w.len()));
    }
    let norm = match reduction {
        Reduction::Mean => 3.0 * w.iter().sum::<f64>(),
        Reduction::Sum => 1.0,
    };
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::InvalidArgument(
            "region mask weights sum to zero".into(),
        ));
    }
    let mut sum = 0.0;
    let mut grad = Vec::with_capacity(v.len());
    for ((p, q), &k) in v.iter().zip(v_gt).zip(w) {
        let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
        sum += k * (d[0].abs() + d[1].abs() + d[2].abs());
        grad.push([
            k * sign(d[0]) / norm,
            k * sign(d[1]) / norm,
            k * sign(d[2]) / norm,
        ]);
    }
    Ok((sum / norm, grad))
}

/// `1 − cos(η_pred, η_gt)` and its gradient with respect to `η_pred`.
pub fn id3d_loss(eta_pred: &Latent, eta_gt: &Latent) -> Result<(f64, Vec<f64>)> {
    let (a, b) = (eta_pred.values(), eta_gt.values());
    if a.len() != b.len() {
        return Err(Error::mismatch("latent lengths", b.len(), a.len()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("latent".into()));
    }
    let sa = a.iter().map(|x| x * x).sum::<f64>();
    let sb = b.iter().map(|x| x * x).sum::<f64>();
    let (na, nb) = (sa.sqrt(), sb.sqrt());
    if na <= LATENT_EPS_NORM || nb <= LATENT_EPS_NORM {
        return Err(Error::Degenerate(format!(
            "latent norm below {LATENT_EPS_NORM:e} (pred {na:e}, gt {nb:e})"
        )));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    // sqrt(fl(s·s)) == s, so identical latents give exactly cos = 1.
    let cos = dot / (sa * sb).sqrt();
    let grad = a
        .iter()
        .zip(b)
        .map(|(x, y)| -(y / (na * nb) - cos * x / (na * na)))
        .collect();
    Ok((1.0 - cos.clamp(-1.0, 1.0), grad))
}

/// The 3D terms of the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Loss3d {
    pub l_3d: f64,
    pub l_vertices: f64,
    pub l_3d_id: f64,
    pub grad_vertices: Vec<Vec3>,
}

/// `λ1·L_vertices + λ2·L_id` with the encoder frozen: only the input
/// gradient of the identity term flows back to `v`.
pub fn loss_3d(
    v: &[Vec3],
    v_gt: &[Vec3],
    mask: &RegionMask,
    net: &Network,
    w: &LossWeights,
) -> Result<Loss3d> {
    loss_3d_with(v, v_gt, mask, net, w, Reduction::Mean)
}

pub fn loss_3d_with(
    v: &[Vec3],
    v_gt: &[Vec3],
    mask: &RegionMask,
    net: &Network,
    w: &LossWeights,
    reduction: Reduction,
) -> Result<Loss3d> {
    w.validate()?;
    let (l_vertices, gv) = vertices_loss_with(v, v_gt, mask, reduction)?;
    let (eta_pred, cache) = net.encode_with_cache(v)?;
    let eta_gt = net.encode(v_gt)?;
    let (l_3d_id, d_eta) = id3d_loss(&eta_pred, &eta_gt)?;
    let (_, gid) = net.encode_backward(&cache, &d_eta)?;
    let l_3d = w.lambda_1 * l_vertices + w.lambda_2 * l_3d_id;
    let grad_vertices = gv
        .iter()
        .zip(&gid)
        .map(|(a, b)| {
            [
                w.lambda_1 * a[0] + w.lambda_2 * b[0],
                w.lambda_1 * a[1] + w.lambda_2 * b[1],
                w.lambda_1 * a[2] + w.lambda_2 * b[2],
            ]
        })
        .collect();
    Ok(Loss3d {
        l_3d,
        l_vertices,
        l_3d_id,
        grad_vertices,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub total: f64,
    pub l_3d: f64,
    pub l_2d: f64,
    pub l_vertices: f64,
    pub l_3d_id: f64,
    /// Gradient of `total` with respect to the predicted vertices.
    #[serde(skip)]
    pub grad_vertices: Vec<Vec3>,
}

/// `λ_3D·L_3D + λ_2D·L_2D`. The 2D term is an opaque scalar and contributes
/// no vertex gradient.
pub fn total_loss(parts: &Loss3d, l_2d: f64, w: &LossWeights) -> Result<LossReport> {
    w.validate()?;
    if !l_2d.is_finite() {
        return Err(Error::NonFinite("2D loss".into()));
    }
    if !(parts.l_3d.is_finite() && parts.l_vertices.is_finite() && parts.l_3d_id.is_finite()) {
        return Err(Error::NonFinite("3D loss".into()));
    }
    Ok(LossReport {
        total: w.lambda_3d * parts.l_3d + w.lambda_2d * l_2d,
        l_3d: parts.l_3d,
        l_2d,
        l_vertices: parts.l_vertices,
        l_3d_id: parts.l_3d_id,
        grad_vertices: parts
            .grad_vertices
            .iter()
            .map(|g| [w.lambda_3d * g[0], w.lambda_3d * g[1], w.lambda_3d * g[2]])
            .collect(),
    })
}
