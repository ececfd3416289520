mod common;

use common::{
    dense_to_sparse, random_features, random_graph, random_layer, rng, spectral_cheb_oracle,
    to_dmatrix,
};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use sgce::mesh::{grid, icosphere};
use sgce::spectral::{
    adjacency_from_faces, build_pooling, cheb_conv_forward, estimate_lambda_max,
    normalized_laplacian, scaled_laplacian,
};

#[test]
fn cheb_forward_matches_spectral_oracle() {
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..60 {
        let n = rand::Rng::random_range(&mut r, 2..=10);
        let adj = random_graph(&mut r, n, 0.35);
        let lt =
            scaled_laplacian(&normalized_laplacian(&dense_to_sparse(&adj)).unwrap(), 2.0).unwrap();
        let k = rand::Rng::random_range(&mut r, 1..=6);
        let layer = random_layer(&mut r, k, 3, 4);
        let x = random_features(&mut r, n, 3);
        let y = to_dmatrix(&cheb_conv_forward(&lt, &x, &layer).unwrap().0);
        let oracle = spectral_cheb_oracle(&adj, &to_dmatrix(&x), &layer);
        worst = worst.max((y - oracle).abs().max());
    }
    assert!(worst < 1e-8, "max abs error {worst:e}");
}

#[test]
fn power_iteration_matches_dense_spectrum() {
    let mut r = rng(5);
    for _ in 0..20 {
        let n = rand::Rng::random_range(&mut r, 3..=10);
        let adj = random_graph(&mut r, n, 0.4);
        let lap = normalized_laplacian(&dense_to_sparse(&adj)).unwrap();
        let dense = DMatrix::from_row_slice(n, n, &lap.to_dense());
        let lmax = SymmetricEigen::new(dense).eigenvalues.max();
        let est = estimate_lambda_max(&lap, 1e-12, 100_000).unwrap();
        assert!((est.value - lmax).abs() < 1e-5, "{} vs {lmax}", est.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_spectrum_in_bounds(seed in any::<u64>(), n in 2usize..12, p in 0.0f64..1.0) {
        let adj = random_graph(&mut rng(seed), n, p);
        let lap = normalized_laplacian(&dense_to_sparse(&adj)).unwrap();
        prop_assert!(lap.is_symmetric(1e-15));
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &lap.to_dense())).eigenvalues;
        prop_assert!(eig.min() > -1e-12 && eig.max() < 2.0 + 1e-12);
        let lt = scaled_laplacian(&lap, 2.0).unwrap();
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &lt.to_dense())).eigenvalues;
        prop_assert!(eig.min() >= -1.0 - 1e-12 && eig.max() <= 1.0 + 1e-12);
    }

    #[test]
    fn pooling_operators_are_well_formed(level in 0u32..3, ratio in 0.05f64..1.0, use_grid in any::<bool>()) {
        let mesh = if use_grid { grid(level + 1) } else { icosphere(level) };
        let pair = build_pooling(&mesh, ratio).unwrap();
        let (n, m) = (mesh.vertex_count(), pair.coarse_count());
        prop_assert_eq!(m, ((ratio * n as f64).ceil() as usize).clamp(1, n));
        prop_assert_eq!((pair.down.rows(), pair.down.cols()), (m, n));
        prop_assert_eq!((pair.up.rows(), pair.up.cols()), (n, m));
        for r in 0..m {
            let (cols, vals) = pair.down.row(r);
            prop_assert_eq!(cols.len(), 1);
            prop_assert_eq!(vals[0], 1.0);
        }
        for s in pair.up.row_sums() {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
        prop_assert!(pair.up.entries().all(|(_, _, v)| v >= 0.0));
        prop_assert!(pair.coarse_adjacency.is_symmetric(0.0));
    }

    #[test]
    fn adjacency_is_symmetric_binary(level in 0u32..3) {
        let a = adjacency_from_faces(&icosphere(level)).unwrap();
        prop_assert!(a.is_symmetric(0.0));
        prop_assert!(a.entries().all(|(i, j, v)| v == 1.0 && i != j));
    }
}
