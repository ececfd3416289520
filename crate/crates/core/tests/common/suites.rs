//! Finite-difference gradient suites. Each returns the number of random
//! instances checked and the worst relative error seen.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sgce::geom::Vec3;
use sgce::losses::{id3d_loss, loss_3d, vertices_loss, LossWeights};
use sgce::mesh::icosphere;
use sgce::net::{
    init_network, Activation, LambdaMaxMode, Latent, Network, NetworkSpec, Normalization,
};
use sgce::spectral::{normalized_laplacian, scaled_laplacian};
use sgce::{FeatureMatrix, RegionMask};

use super::{
    dense_to_sparse, fd_gradient, random_features, random_graph, random_layer, rel_err, rng,
};

pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct SuiteResult {
    pub instances: usize,
    pub worst: f64,
}

impl SuiteResult {
    fn new() -> Self {
        SuiteResult {
            instances: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, e: f64) {
        self.instances += 1;
        self.worst = self.worst.max(e);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cheb_backward(instances: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::new();
    while res.instances < instances {
        let n = r.random_range(2..=10);
        let adj = random_graph(&mut r, n, 0.3);
        let lt =
            scaled_laplacian(&normalized_laplacian(&dense_to_sparse(&adj)).unwrap(), 2.0).unwrap();
        let (k, cin, cout) = (
            r.random_range(1..=5),
            r.random_range(1..=4),
            r.random_range(1..=4),
        );
        let layer = random_layer(&mut r, k, cin, cout);
        let x = random_features(&mut r, n, cin);
        let g = random_features(&mut r, n, cout);
        let (_, cache) = layer.forward(&lt, &x).unwrap();
        let (dx, grads) = layer.backward(&lt, &cache, &g).unwrap();
        let analytic: Vec<f64> = grads
            .theta
            .iter()
            .chain(&grads.bias)
            .chain(dx.as_slice())
            .copied()
            .collect();

        let (nt, nb) = (layer.theta.len(), layer.bias.len());
        let mut flat: Vec<f64> = layer
            .theta
            .iter()
            .chain(&layer.bias)
            .chain(x.as_slice())
            .copied()
            .collect();
        let mut probe = layer.clone();
        let fd = fd_gradient(
            |p| {
                probe.theta.copy_from_slice(&p[..nt]);
                probe.bias.copy_from_slice(&p[nt..nt + nb]);
                let xi = FeatureMatrix::new(n, cin, p[nt + nb..].to_vec()).unwrap();
                dot(probe.forward(&lt, &xi).unwrap().0.as_slice(), g.as_slice())
            },
            &flat,
            FD_STEP,
        );
        flat.clear();
        res.record(rel_err(&analytic, &fd));
    }
    res
}

/// Two-layer network on the 12-vertex icosphere with random widths,
/// orders, pooling and activations.
pub fn tiny_network(r: &mut ChaCha8Rng) -> Network {
    let topo = icosphere(0);
    let spec = NetworkSpec {
        n_vertices: 12,
        layer_channels: vec![r.random_range(2..=4), r.random_range(2..=4)],
        cheb_order: vec![r.random_range(1..=3), r.random_range(1..=3)],
        pooling_ratios: vec![
            [0.5, 1.0][r.random_range(0..2)],
            [0.5, 1.0][r.random_range(0..2)],
        ],
        latent_dim: r.random_range(2..=4),
        activation: vec![
            [Activation::Relu, Activation::None][r.random_range(0..2)],
            [Activation::Relu, Activation::None][r.random_range(0..2)],
        ],
        lambda_max: [LambdaMaxMode::Bound, LambdaMaxMode::PowerIteration][r.random_range(0..2)],
        input_normalization: [Normalization::CenterScale, Normalization::None]
            [r.random_range(0..2)],
    };
    let mut net = init_network(&spec, &topo, r.random()).unwrap();
    for p in net.parameters_mut() {
        p.iter_mut().for_each(|x| *x += r.random_range(-0.1..0.1));
    }
    net
}

pub fn flat_params(net: &Network) -> Vec<f64> {
    net.parameters()
        .iter()
        .flat_map(|p| p.2.iter().copied())
        .collect()
}

pub fn set_flat_params(net: &mut Network, flat: &[f64]) {
    let mut off = 0;
    for p in net.parameters_mut() {
        let n = p.len();
        p.copy_from_slice(&flat[off..off + n]);
        off += n;
    }
}

pub fn jitter(r: &mut ChaCha8Rng, v: &[Vec3], amount: f64) -> Vec<Vec3> {
    v.iter()
        .map(|p| {
            [
                p[0] + r.random_range(-amount..amount),
                p[1] + r.random_range(-amount..amount),
                p[2] + r.random_range(-amount..amount),
            ]
        })
        .collect()
}

fn points(flat: &[f64]) -> Vec<Vec3> {
    flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

fn flatten(v: &[Vec3]) -> Vec<f64> {
    v.iter().flatten().copied().collect()
}

/// Gradient of `L1(decode(encode(V)), V_gt)` with respect to all
/// parameters and to `V`.
pub fn autoencoder_backward(instances: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::new();
    let base = icosphere(0).vertices;
    while res.instances < instances {
        let net = tiny_network(&mut r);
        let v = jitter(&mut r, &base, 10.0);
        let target = jitter(&mut r, &base, 10.0);
        let mask = RegionMask::uniform(12);
        let loss = |n: &Network, v: &[Vec3]| {
            vertices_loss(&n.decode(&n.encode(v).unwrap()).unwrap(), &target, &mask)
                .unwrap()
                .0
        };

        let (out, cache) = net.forward(&v).unwrap();
        let (_, g_out) = vertices_loss(&out, &target, &mask).unwrap();
        let (grads, dv) = net.autoencoder_backward(&cache, &g_out).unwrap();

        let mut probe = net.clone();
        let fd_params = fd_gradient(
            |p| {
                set_flat_params(&mut probe, p);
                loss(&probe, &v)
            },
            &flat_params(&net),
            FD_STEP,
        );
        let fd_input = fd_gradient(|x| loss(&net, &points(x)), &flatten(&v), FD_STEP);
        let analytic: Vec<f64> = grads.flat().into_iter().chain(flatten(&dv)).collect();
        let fd: Vec<f64> = fd_params.into_iter().chain(fd_input).collect();
        res.record(rel_err(&analytic, &fd));
    }
    res
}

pub fn vertices_loss_grad(instances: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::new();
    while res.instances < instances {
        let n = r.random_range(1..=20);
        let gt: Vec<Vec3> = (0..n)
            .map(|_| {
                [
                    r.random_range(-5.0..5.0),
                    r.random_range(-5.0..5.0),
                    r.random_range(-5.0..5.0),
                ]
            })
            .collect();
        let v = jitter(&mut r, &gt, 1.0);
        let mask = RegionMask::new((0..n).map(|_| r.random_range(0.1..3.0)).collect()).unwrap();
        let (_, g) = vertices_loss(&v, &gt, &mask).unwrap();
        let fd = fd_gradient(
            |x| vertices_loss(&points(x), &gt, &mask).unwrap().0,
            &flatten(&v),
            FD_STEP,
        );
        res.record(rel_err(&flatten(&g), &fd));
    }
    res
}

pub fn id3d_loss_grad(instances: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::new();
    while res.instances < instances {
        let d = r.random_range(2..=16);
        let a: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let gt = Latent(b);
        let (_, g) = id3d_loss(&Latent(a.clone()), &gt).unwrap();
        let fd = fd_gradient(
            |x| id3d_loss(&Latent(x.to_vec()), &gt).unwrap().0,
            &a,
            FD_STEP,
        );
        res.record(rel_err(&g, &fd));
    }
    res
}

/// Gradient of `λ1·L_vertices + λ2·L_id` with respect to the predicted
/// vertices through a frozen encoder.
pub fn loss_3d_grad(instances: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::new();
    let base = icosphere(0).vertices;
    while res.instances < instances {
        let net = tiny_network(&mut r);
        let gt = jitter(&mut r, &base, 10.0);
        let v = jitter(&mut r, &gt, 5.0);
        let mask = RegionMask::new((0..12).map(|_| r.random_range(0.1..2.0)).collect()).unwrap();
        let w = LossWeights {
            lambda_1: r.random_range(0.0..1.0),
            lambda_2: r.random_range(0.5..50.0),
            ..LossWeights::default()
        };
        let parts = loss_3d(&v, &gt, &mask, &net, &w).unwrap();
        let fd = fd_gradient(
            |x| loss_3d(&points(x), &gt, &mask, &net, &w).unwrap().l_3d,
            &flatten(&v),
            FD_STEP,
        );
        res.record(rel_err(&flatten(&parts.grad_vertices), &fd));
    }
    res
}
