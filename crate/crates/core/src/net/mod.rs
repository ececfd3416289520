//! Mesh autoencoder built from Chebyshev graph convolutions: encoder to a
//! small latent vector, mirrored decoder, reverse-mode gradients, AdamW,
//! training loop and checkpoint format.

mod adamw;
mod checkpoint;
mod network;
mod train;

pub use adamw::{adamw_step, AdamWConfig, OptimizerState};
pub use checkpoint::{
    load_checkpoint, load_checkpoint_for, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use network::{
    init_network, Activation, AutoencoderCache, DecodeCache, Dense, EncodeCache, Gradients,
    InputNorm, LambdaMaxMode, Latent, Network, NetworkSpec, Normalization,
};
pub use train::{train_autoencoder, train_autoencoder_with, TrainConfig, TrainOutcome};
