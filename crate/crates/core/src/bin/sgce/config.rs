use std::path::{Path, PathBuf};

use serde::Deserialize;
use sgce::losses::LossWeights;
use sgce::net::{Activation, LambdaMaxMode, NetworkSpec, TrainConfig};

use crate::CliError;

/// Network options; per-layer lists not given are filled by repeating the
/// default value to the length of `layer_channels`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub layer_channels: Option<Vec<usize>>,
    #[serde(rename = "K")]
    pub cheb_order: Option<Vec<usize>>,
    pub pooling_ratios: Option<Vec<f64>>,
    pub latent_dim: Option<usize>,
    pub activation: Option<Vec<Activation>>,
    pub lambda_max: Option<LambdaMaxMode>,
}

impl NetworkConfig {
    pub fn to_spec(&self, n_vertices: usize) -> NetworkSpec {
        let d = NetworkSpec::default_for(n_vertices);
        let layers = self
            .layer_channels
            .clone()
            .unwrap_or(d.layer_channels.clone());
        let l = layers.len();
        NetworkSpec {
            n_vertices,
            cheb_order: self.cheb_order.clone().unwrap_or(vec![d.cheb_order[0]; l]),
            pooling_ratios: self
                .pooling_ratios
                .clone()
                .unwrap_or(vec![d.pooling_ratios[0]; l]),
            activation: self.activation.clone().unwrap_or(vec![d.activation[0]; l]),
            latent_dim: self.latent_dim.unwrap_or(d.latent_dim),
            lambda_max: self.lambda_max.unwrap_or(d.lambda_max),
            layer_channels: layers,
            input_normalization: d.input_normalization,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub manifest: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub history: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub loss_weights: LossWeights,
    pub paths: PathsConfig,
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.paths.manifest,
            &mut cfg.paths.checkpoint,
            &mut cfg.paths.history,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"train": {"stepz": 3}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"extra": 1}"#).is_err());
        let c: RunConfig =
            serde_json::from_str(r#"{"network": {"layer_channels": [8, 8]}}"#).unwrap();
        let s = c.network.to_spec(42);
        assert_eq!(s.cheb_order, vec![6, 6]);
        assert!(s.validate().is_ok());
        assert_eq!(c.loss_weights, LossWeights::default());
    }
}
