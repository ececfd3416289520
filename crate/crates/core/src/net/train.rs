use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adamw::{adamw_step, AdamWConfig, OptimizerState};
use super::network::{init_network, Gradients, Network, NetworkSpec, Normalization};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::losses::vertices_loss;
use crate::mesh::{MeshDataset, RegionMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub steps: usize,
    pub seed: u64,
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub input_normalization: Normalization,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let h = AdamWConfig::default();
        TrainConfig {
            batch_size: 4,
            steps: 2000,
            seed: 0,
            lr: h.lr,
            weight_decay: h.weight_decay,
            beta1: h.beta1,
            beta2: h.beta2,
            eps: h.eps,
            input_normalization: Normalization::CenterScale,
        }
    }
}

impl TrainConfig {
    pub fn optimizer(&self) -> AdamWConfig {
        AdamWConfig {
            lr: self.lr,
            weight_decay: self.weight_decay,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.steps == 0 {
            return Err(Error::InvalidArgument(
                "batch_size and steps must be at least 1".into(),
            ));
        }
        self.optimizer().validate()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    pub optimizer: OptimizerState,
    /// Mean uniform-mask vertex L1 over the batch, recorded before each update.
    pub history: Vec<f64>,
}

/// Trains a freshly initialised autoencoder and returns it with its loss history.
pub fn train_autoencoder(
    dataset: &MeshDataset,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
) -> Result<(Network, Vec<f64>)> {
    train_autoencoder_with(dataset, spec, cfg).map(|o| (o.network, o.history))
}

/// As [`train_autoencoder`] but also returns the optimizer state. The
/// input normalization of `cfg` overrides the one in `spec`.
pub fn train_autoencoder_with(
    dataset: &MeshDataset,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("training dataset is empty".into()));
    }
    let mut spec = spec.clone();
    spec.input_normalization = cfg.input_normalization;
    let mut net = init_network(&spec, &dataset.topology, cfg.seed)?;
    let sizes: Vec<usize> = net.parameters().iter().map(|p| p.2.len()).collect();
    let mut opt = OptimizerState::new(&sizes, cfg.optimizer());
    let mask = RegionMask::uniform(net.n_vertices());

    let mut order_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    order_rng.set_stream(1);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut cursor = order.len();
    let mut history = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let mut batch = Vec::with_capacity(cfg.batch_size);
        while batch.len() < cfg.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut order_rng);
                cursor = 0;
            }
            batch.push(order[cursor]);
            cursor += 1;
        }
        batch.sort_unstable();

        let per_sample: Vec<Result<(f64, Gradients)>> = batch
            .par_iter()
            .map(|&i| sample_gradient(&net, &dataset.samples[i], &mask))
            .collect();
        let mut loss = 0.0;
        let mut grads = Gradients::zeros_like(&net);
        for r in per_sample {
            let (l, g) = r?;
            loss += l;
            grads.add_assign(&g);
        }
        let inv = 1.0 / batch.len() as f64;
        loss *= inv;
        grads.scale(inv);
        if !loss.is_finite() || !grads.is_finite() {
            return Err(Error::Diverged { step, loss });
        }
        history.push(loss);

        let mut params = net.parameters_mut();
        adamw_step(&mut params, &grads.0, &mut opt)?;
        if params.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Diverged { step, loss });
        }
    }
    Ok(TrainOutcome {
        network: net,
        optimizer: opt,
        history,
    })
}

fn sample_gradient(net: &Network, target: &[Vec3], mask: &RegionMask) -> Result<(f64, Gradients)> {
    let (out, cache) = net.forward(target)?;
    let (loss, grad) = vertices_loss(&out, target, mask)?;
    let (g, _) = net.autoencoder_backward(&cache, &grad)?;
    Ok((loss, g))
}
