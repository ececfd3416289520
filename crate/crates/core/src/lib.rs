//! Chebyshev spectral graph-convolution encoder for fixed-topology meshes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: triangle meshes, OBJ/PLY I/O, validation, region masks and
//!   seeded synthetic datasets.
//! * [`spectral`]: sparse matrices, graph Laplacians, Chebyshev graph
//!   convolution (forward and backward) and mesh pooling transforms.
//! * [`net`]: the mesh autoencoder, AdamW, the training loop and checkpoints.
//! * [`losses`]: masked vertex L1, latent cosine (3D-ID) loss and their
//!   weighted composition.
//! * [`eval`]: Procrustes alignment, point-to-surface distances and the
//!   median/mean/std report.

pub mod error;
pub mod eval;
pub mod geom;
pub mod losses;
pub mod mesh;
pub mod net;
pub mod spectral;

pub use error::{Error, ErrorCategory, Result};
pub use mesh::{Mesh, MeshDataset, RegionMask};
pub use spectral::{FeatureMatrix, SparseMatrix};
