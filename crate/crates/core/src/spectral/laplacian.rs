use std::collections::BTreeSet;

use super::{FeatureMatrix, SparseMatrix};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Symmetric 0/1 vertex adjacency: `(i, j) = 1` iff `i ≠ j` share a face edge.
pub fn adjacency_from_faces(mesh: &Mesh) -> Result<SparseMatrix> {
    mesh.check()?;
    face_adjacency(mesh.vertex_count(), &mesh.faces)
}

/// Face-edge adjacency without the mesh-level checks; coarse meshes may
/// have fewer than three vertices or no faces left.
pub(crate) fn face_adjacency(n: usize, faces: &[[usize; 3]]) -> Result<SparseMatrix> {
    let mut edges = BTreeSet::new();
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            edges.insert((a, b));
            edges.insert((b, a));
        }
    }
    SparseMatrix::from_triplets(n, n, edges.into_iter().map(|(a, b)| (a, b, 1.0)).collect())
}

fn check_adjacency(adj: &SparseMatrix) -> Result<()> {
    if adj.rows() != adj.cols() {
        return Err(Error::InvalidArgument(format!(
            "adjacency must be square, got {}×{}",
            adj.rows(),
            adj.cols()
        )));
    }
    if let Some((r, _, _)) = adj.entries().find(|(r, c, _)| r == c) {
        return Err(Error::InvalidArgument(format!(
            "adjacency has a nonzero diagonal at {r}"
        )));
    }
    if !adj.is_symmetric(0.0) {
        return Err(Error::InvalidArgument("adjacency is not symmetric".into()));
    }
    Ok(())
}

/// `L = I − D^{-1/2} A D^{-1/2}`. Isolated vertices are an error.
pub fn normalized_laplacian(adj: &SparseMatrix) -> Result<SparseMatrix> {
    laplacian_impl(adj, false)
}

/// As [`normalized_laplacian`], but an isolated vertex gets `L_ii = 1` and no
/// off-diagonal entries (its `D^{-1/2}` is taken as zero).
pub fn normalized_laplacian_allow_isolated(adj: &SparseMatrix) -> Result<SparseMatrix> {
    laplacian_impl(adj, true)
}

fn laplacian_impl(adj: &SparseMatrix, allow_isolated: bool) -> Result<SparseMatrix> {
    check_adjacency(adj)?;
    let degree = adj.row_sums();
    if !allow_isolated {
        if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedVertex(i));
        }
    }
    let inv_sqrt: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let n = adj.rows();
    let mut trip = Vec::with_capacity(adj.nnz() + n);
    for i in 0..n {
        trip.push((i, i, 1.0));
    }
    for (r, c, v) in adj.entries() {
        trip.push((r, c, -v * inv_sqrt[r] * inv_sqrt[c]));
    }
    SparseMatrix::from_triplets(n, n, trip)
}

/// `L̃ = (2 / λ_max)·L − I`.
pub fn scaled_laplacian(lap: &SparseMatrix, lambda_max: f64) -> Result<SparseMatrix> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    if lap.rows() != lap.cols() {
        return Err(Error::InvalidArgument("Laplacian must be square".into()));
    }
    let s = 2.0 / lambda_max;
    let n = lap.rows();
    let mut trip: Vec<_> = lap.entries().map(|(r, c, v)| (r, c, s * v)).collect();
    trip.extend((0..n).map(|i| (i, i, -1.0)));
    SparseMatrix::from_triplets(n, n, trip)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iter` was exhausted before the relative change fell
    /// below the tolerance; `value` is then the last Rayleigh quotient.
    pub converged: bool,
}

/// Power iteration for the eigenvalue of largest magnitude of a symmetric
/// matrix (the largest eigenvalue for a Laplacian).
///
/// The start vector is a fixed low-discrepancy sequence rather than the
/// constant vector, which lies in the null space of regular-graph Laplacians.
pub fn estimate_lambda_max(
    lap: &SparseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<LambdaEstimate> {
    if !lap.is_symmetric(1e-12) {
        return Err(Error::InvalidArgument(
            "power iteration needs a symmetric matrix".into(),
        ));
    }
    let n = lap.rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    let start: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * GOLDEN).fract())
        .collect();
    let mut v = FeatureMatrix::from_raw(n, 1, start);
    normalize(&mut v);

    let mut lambda = 0.0;
    for it in 1..=max_iter {
        let w = lap.apply(&v)?;
        let rq: f64 = v
            .as_slice()
            .iter()
            .zip(w.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(LambdaEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        let prev = lambda;
        lambda = rq;
        v = w;
        normalize(&mut v);
        if it > 1 && (lambda - prev).abs() <= tol * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(LambdaEstimate {
                value: lambda,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(LambdaEstimate {
        value: lambda,
        iterations: max_iter,
        converged: false,
    })
}

fn norm(v: &FeatureMatrix) -> f64 {
    v.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut FeatureMatrix) {
    let n = norm(v);
    if n > 0.0 {
        v.as_mut_slice().iter_mut().for_each(|x| *x /= n);
    }
}
