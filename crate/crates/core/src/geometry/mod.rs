//! Point clouds, the label set, and exact spatial queries.

mod cloud;
mod kdtree;

pub use cloud::{
    dist_to_labels, distance, min_label_separation, nearest_labels, squared_distance, LabelSet,
    PointCloud,
};
pub use kdtree::SpatialIndex;
