//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgce::geom::Vec3;
use sgce::spectral::ChebLayer;
use sgce::{FeatureMatrix, Mesh, SparseMatrix};

pub mod suites;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected random graph on `n ≥ 2` vertices: a random spanning path plus
/// extra edges with probability `p`. Returned as a dense 0/1 matrix.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64) -> DMatrix<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    let mut a = DMatrix::zeros(n, n);
    for w in perm.windows(2) {
        a[(w[0], w[1])] = 1.0;
        a[(w[1], w[0])] = 1.0;
    }
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < p {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    a
}

pub fn dense_to_sparse(a: &DMatrix<f64>) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)] != 0.0 {
                t.push((i, j, a[(i, j)]));
            }
        }
    }
    SparseMatrix::from_triplets(a.nrows(), a.ncols(), t).unwrap()
}

/// `Σ_k T_k(L̃) X Θ_k + b` evaluated spectrally: `L̃ = U Λ Uᵀ` and
/// `T_k(λ) = cos(k·arccos λ)`, with `L̃ = L − I` for the bound `λ_max = 2`.
pub fn spectral_cheb_oracle(
    adj: &DMatrix<f64>,
    x: &DMatrix<f64>,
    layer: &ChebLayer,
) -> DMatrix<f64> {
    let n = adj.nrows();
    let deg: Vec<f64> = (0..n).map(|i| adj.row(i).sum()).collect();
    let lap = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - adj[(i, j)] / (deg[i] * deg[j]).sqrt()
    });
    let scaled = &lap - DMatrix::identity(n, n);
    let eig = SymmetricEigen::new(scaled);
    let mut y = DMatrix::from_fn(n, layer.cout, |_, c| layer.bias[c]);
    for k in 0..layer.k {
        let diag = eig
            .eigenvalues
            .map(|l| (k as f64 * l.clamp(-1.0, 1.0).acos()).cos());
        let tk = &eig.eigenvectors * DMatrix::from_diagonal(&diag) * eig.eigenvectors.transpose();
        let theta = DMatrix::from_row_slice(layer.cin, layer.cout, layer.theta_k(k));
        y += tk * x * theta;
    }
    y
}

pub fn to_dmatrix(f: &FeatureMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(f.rows(), f.cols(), f.as_slice())
}

pub fn random_layer(r: &mut ChaCha8Rng, k: usize, cin: usize, cout: usize) -> ChebLayer {
    let mut l = ChebLayer::zeros(k, cin, cout).unwrap();
    l.theta
        .iter_mut()
        .for_each(|t| *t = r.random_range(-1.0..1.0));
    l.bias
        .iter_mut()
        .for_each(|b| *b = r.random_range(-1.0..1.0));
    l
}

pub fn random_features(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> FeatureMatrix {
    FeatureMatrix::new(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| r.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap()
}

/// Central differences of `f` at `x` with step `h`.
pub fn fd_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖₂ / max(‖a‖₂, ‖b‖₂)`, or the absolute difference when both
/// vectors are tiny.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

fn d(a: Vec3, b: Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1] + (p[2] - a[2]) * ab[2]) / len2)
        .clamp(0.0, 1.0);
    d(p, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

/// Point-to-triangle distance by projection onto the supporting plane with
/// a barycentric inside test, falling back to the three edges.
pub fn brute_triangle_distance(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let u = DMatrix::from_column_slice(3, 1, &[b[0] - a[0], b[1] - a[1], b[2] - a[2]]);
    let v = DMatrix::from_column_slice(3, 1, &[c[0] - a[0], c[1] - a[1], c[2] - a[2]]);
    let w = DMatrix::from_column_slice(3, 1, &[p[0] - a[0], p[1] - a[1], p[2] - a[2]]);
    let m = DMatrix::from_columns(&[u.column(0), v.column(0)]);
    let gram = m.transpose() * &m;
    let rhs = m.transpose() * &w;
    if let Some(sol) = gram.lu().solve(&rhs) {
        let (s, t) = (sol[0], sol[1]);
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            let q = [
                a[0] + s * u[0] + t * v[0],
                a[1] + s * u[1] + t * v[1],
                a[2] + s * u[2] + t * v[2],
            ];
            return d(p, q);
        }
    }
    segment_distance(p, a, b)
        .min(segment_distance(p, b, c))
        .min(segment_distance(p, c, a))
}

/// Exhaustive minimum over all triangles with area ≥ 1e-12.
pub fn brute_mesh_distance(p: Vec3, mesh: &Mesh) -> f64 {
    mesh.faces
        .iter()
        .map(|f| {
            (
                mesh.vertices[f[0]],
                mesh.vertices[f[1]],
                mesh.vertices[f[2]],
            )
        })
        .filter(|(a, b, c)| sgce::geom::triangle_area(*a, *b, *c) >= 1e-12)
        .map(|(a, b, c)| brute_triangle_distance(p, a, b, c))
        .fold(f64::INFINITY, f64::min)
}

/// Random mesh: `n` vertices in a box with `f` random non-repeating faces.
pub fn random_mesh(r: &mut ChaCha8Rng, n: usize, f: usize) -> Mesh {
    let vertices: Vec<Vec3> = (0..n)
        .map(|_| {
            [
                r.random_range(-10.0..10.0),
                r.random_range(-10.0..10.0),
                r.random_range(-10.0..10.0),
            ]
        })
        .collect();
    let faces = (0..f)
        .map(|_| loop {
            let t = [
                r.random_range(0..n),
                r.random_range(0..n),
                r.random_range(0..n),
            ];
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                break t;
            }
        })
        .collect();
    Mesh::new(vertices, faces).unwrap()
}
