//! Exact kd-tree over a point cloud.
//!
//! Range queries use the closed ball `|x - q|^2 <= r^2`. kNN queries order
//! candidates by `(squared distance, index)`, so ties go to the lower index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::cloud::{squared_distance, PointCloud};
use crate::error::{Error, Result};

const DEFAULT_LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable spatial index. Safe to query from many threads.
#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    nodes: Vec<Node>,
    leaf_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.index.cmp(&other.index))
    }
}

impl<'a> SpatialIndex<'a> {
    pub fn build(cloud: &'a PointCloud) -> Self {
        Self::with_leaf_size(cloud, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(cloud: &'a PointCloud, leaf_size: usize) -> Self {
        let leaf_size = leaf_size.max(1);
        let mut index = SpatialIndex {
            cloud,
            order: (0..cloud.len()).collect(),
            nodes: Vec::new(),
            leaf_size,
        };
        if !cloud.is_empty() {
            index.build_node(0, cloud.len());
        }
        index
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= self.leaf_size {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.cloud.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for (k, &c) in self.cloud.point(i).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[axis] <= lo[axis] {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let cloud = self.cloud;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            cloud.point(a)[axis]
                .total_cmp(&cloud.point(b)[axis])
                .then(a.cmp(&b))
        });
        let value = cloud.point(self.order[mid])[axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn check_query(&self, center: &[f64]) -> Result<()> {
        if center.len() != self.cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cloud.dim(),
                got: center.len(),
            });
        }
        Ok(())
    }

    /// Indices of all points with `|x - center| <= radius`, sorted ascending.
    pub fn range_query(&self, center: &[f64], radius: f64) -> Result<Vec<usize>> {
        self.check_query(center)?;
        if radius.is_nan() || radius < 0.0 {
            return Err(Error::config(format!("invalid query radius {radius}")));
        }
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.range_into(0, center, radius * radius, &mut out);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Like [`range_query`](Self::range_query) but returns `(index, squared distance)` pairs.
    pub fn range_query_with_distances(
        &self,
        center: &[f64],
        radius: f64,
    ) -> Result<Vec<(usize, f64)>> {
        let idx = self.range_query(center, radius)?;
        Ok(idx
            .into_iter()
            .map(|i| (i, squared_distance(self.cloud.point(i), center)))
            .collect())
    }

    fn range_into(&self, node: usize, center: &[f64], r2: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if squared_distance(self.cloud.point(i), center) <= r2 {
                        out.push(i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = center[axis] - value;
                // left holds coordinates <= value, right holds >= value
                if diff <= 0.0 || diff * diff <= r2 {
                    self.range_into(left, center, r2, out);
                }
                if diff >= 0.0 || diff * diff <= r2 {
                    self.range_into(right, center, r2, out);
                }
            }
        }
    }

    /// The `k` nearest points as `(index, distance)`, ascending by distance then index.
    pub fn knn_query(&self, center: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        self.check_query(center)?;
        let n = self.cloud.len();
        if k == 0 || k > n {
            return Err(Error::InvalidK { k, n });
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_into(0, center, k, &mut heap);
        let mut found = heap.into_sorted_vec();
        found.truncate(k);
        Ok(found.into_iter().map(|c| (c.index, c.d2.sqrt())).collect())
    }

    fn knn_into(&self, node: usize, center: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Candidate {
                        d2: squared_distance(self.cloud.point(i), center),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("heap holds k items") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = center[axis] - value;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.knn_into(near, center, k, heap);
                // equality must still be explored: a tie may carry a lower index
                let worst = heap.peek().map(|c| c.d2).unwrap_or(f64::INFINITY);
                if heap.len() < k || diff * diff <= worst {
                    self.knn_into(far, center, k, heap);
                }
            }
        }
    }
}
