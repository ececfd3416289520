use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// `x ↦ scale·R·x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    /// Row-major proper rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: Vec3,
    pub scale: f64,
}

impl Alignment {
    pub fn identity() -> Self {
        Alignment {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let r = &self.rotation;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.scale * (r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2])
                + self.translation[i];
        }
        out
    }

    /// `Σ ‖s·R·p_i + t − q_i‖²`.
    pub fn objective(&self, p: &[Vec3], q: &[Vec3]) -> f64 {
        p.iter()
            .zip(q)
            .map(|(a, b)| {
                let x = self.apply(*a);
                (x[0] - b[0]).powi(2) + (x[1] - b[1]).powi(2) + (x[2] - b[2]).powi(2)
            })
            .sum()
    }
}

fn mean(points: &[Vec3]) -> Vector3<f64> {
    points
        .iter()
        .fold(Vector3::zeros(), |a, p| a + Vector3::from(*p))
        / points.len() as f64
}

/// Least-squares alignment of `p` onto `q`. With `with_scale`
/// false the scale is fixed to 1.
pub fn procrustes(p: &[Vec3], q: &[Vec3], with_scale: bool) -> Result<Alignment> {
    if p.len() != q.len() {
        return Err(Error::mismatch("procrustes point sets", p.len(), q.len()));
    }
    if p.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "procrustes needs at least 3 point pairs (got {})",
            p.len()
        )));
    }
    if p.iter().chain(q).flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("procrustes points".into()));
    }
    let m = p.len() as f64;
    let (mp, mq) = (mean(p), mean(q));
    let mut cov = Matrix3::zeros();
    let mut var_p = 0.0;
    for (a, b) in p.iter().zip(q) {
        let pc = Vector3::from(*a) - mp;
        let qc = Vector3::from(*b) - mq;
        cov += qc * pc.transpose();
        var_p += pc.norm_squared();
    }
    cov /= m;
    var_p /= m;

    // Horn's quaternion form: the optimal rotation is the top eigenvector of a
    // symmetric 4×4 matrix, which stays well conditioned when the singular
    // values of the cross-covariance are nearly equal.
    let s = |a: usize, b: usize| cov[(b, a)];
    #[rustfmt::skip]
    let n = Matrix4::new(
        s(0, 0) + s(1, 1) + s(2, 2), s(1, 2) - s(2, 1), s(2, 0) - s(0, 2), s(0, 1) - s(1, 0),
        s(1, 2) - s(2, 1), s(0, 0) - s(1, 1) - s(2, 2), s(0, 1) + s(1, 0), s(2, 0) + s(0, 2),
        s(2, 0) - s(0, 2), s(0, 1) + s(1, 0), -s(0, 0) + s(1, 1) - s(2, 2), s(1, 2) + s(2, 1),
        s(0, 1) - s(1, 0), s(2, 0) + s(0, 2), s(1, 2) + s(2, 1), -s(0, 0) - s(1, 1) + s(2, 2),
    );
    let eig = SymmetricEigen::new(n);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    let spread = eig.eigenvalues.amax();
    if spread.is_nan() || spread <= 0.0 || top - eig.eigenvalues[order[1]] <= 1e-12 * spread {
        return Err(Error::Degenerate(
            "point configuration is collinear or coincident; rotation is not unique".into(),
        ));
    }
    let qv = eig.eigenvectors.column(order[0]);
    let (w, x, y, z) = (qv[0], qv[1], qv[2], qv[3]);
    #[rustfmt::skip]
    let r = Matrix3::new(
        w * w + x * x - y * y - z * z, 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), w * w - x * x + y * y - z * z, 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), w * w - x * x - y * y + z * z,
    ) / (w * w + x * x + y * y + z * z);
    let scale = if with_scale {
        (r.transpose() * cov).trace() / var_p
    } else {
        1.0
    };
    let t = mq - scale * r * mp;
    Ok(Alignment {
        rotation: [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
        ],
        translation: [t.x, t.y, t.z],
        scale,
    })
}
