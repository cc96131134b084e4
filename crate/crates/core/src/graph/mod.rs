//! Sparse symmetric weighted graphs over a point cloud.

mod build;
mod components;
mod energy_weights;
mod sparse;

pub use build::{
    build_eps_graph, build_knn_graph, build_knn_graph_with, knn_lists, DEFAULT_PRUNE_THRESHOLD,
};
pub use components::{
    check_labeled_components, component_count, connected_components, labeled_component,
    restrict_to_labeled_component,
};
pub use energy_weights::{attach_energy_weights, EnergyWeights};
pub use sparse::{Construction, SparseGraph};
