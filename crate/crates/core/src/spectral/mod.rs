//! Sparse linear algebra and spectral graph convolution on mesh graphs.

mod cheb;
mod dense;
mod laplacian;
mod pooling;
mod sparse;

pub use cheb::{cheb_conv_backward, cheb_conv_forward, ChebCache, ChebGrads, ChebLayer};
pub use dense::FeatureMatrix;
pub(crate) use laplacian::face_adjacency;
pub use laplacian::{
    adjacency_from_faces, estimate_lambda_max, normalized_laplacian,
    normalized_laplacian_allow_isolated, scaled_laplacian, LambdaEstimate,
};
pub(crate) use pooling::pool_with_graph;
pub use pooling::{build_pooling, PoolingPair};
pub use sparse::{sparse_apply, SparseMatrix};
