//! Rigid/similarity alignment of a reconstruction to ground truth and
//! ground-truth-to-surface distance statistics in millimetres.

mod align;
mod bvh;
mod report;
mod stats;

pub use align::{procrustes, Alignment};
pub use bvh::{
    point_to_mesh_distances, point_to_mesh_distances_with, TriangleBvh, DEFAULT_LEAF_SIZE,
};
pub use report::{evaluate, format_table, parse_correspondences, EvalMode, EvalReport, Evaluation};
pub use stats::{distance_stats, DistanceStats};
