use crate::error::{Error, Result};

/// Labeled subset of a point cloud.
///
/// Each entry refers to a node of the cloud. Scalar tasks use `values`;
/// multiclass tasks additionally carry a class id per labeled node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelSet {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    pub classes: Option<Vec<usize>>,
}

impl LabelSet {
    pub fn scalar(nodes: Vec<usize>, values: Vec<f64>) -> Self {
        LabelSet {
            nodes,
            values,
            classes: None,
        }
    }

    /// Class labels; the scalar values are set to the class id.
    pub fn classes(nodes: Vec<usize>, classes: Vec<usize>) -> Self {
        let values = classes.iter().map(|&c| c as f64).collect();
        LabelSet {
            nodes,
            values,
            classes: Some(classes),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `n` points in `R^d` stored row-major, plus the labeled subset.
///
/// Labeled locations are ordinary nodes flagged by index, so a sample `X_n`
/// with label set `Γ` is stored as the `n + |Γ|` nodes of `X_n ∪ Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    labels: LabelSet,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::data("point dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::data(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::data("non-finite coordinate"));
        }
        Ok(PointCloud {
            dim,
            coords,
            labels: LabelSet::default(),
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(1);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        PointCloud::new(dim, coords)
    }

    pub fn with_labels(mut self, labels: LabelSet) -> Result<Self> {
        self.set_labels(labels)?;
        Ok(self)
    }

    pub fn set_labels(&mut self, labels: LabelSet) -> Result<()> {
        if labels.values.len() != labels.nodes.len() {
            return Err(Error::data(
                "label value count differs from labeled node count",
            ));
        }
        if let Some(classes) = &labels.classes {
            if classes.len() != labels.nodes.len() {
                return Err(Error::data(
                    "label class count differs from labeled node count",
                ));
            }
        }
        let mut seen = vec![false; self.len()];
        for &i in &labels.nodes {
            if i >= self.len() {
                return Err(Error::data(format!(
                    "labeled index {i} out of range for {} nodes",
                    self.len()
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::data(format!("labeled index {i} listed twice")));
            }
        }
        if labels.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("non-finite label value"));
        }
        self.labels = labels;
        Ok(())
    }

    /// Appends points as new labeled nodes and returns their indices.
    pub fn append_labeled(&mut self, points: &[Vec<f64>], values: &[f64]) -> Result<Vec<usize>> {
        if points.len() != values.len() {
            return Err(Error::data("label point count differs from value count"));
        }
        let mut added = Vec::with_capacity(points.len());
        for (p, &v) in points.iter().zip(values) {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: p.len(),
                });
            }
            let idx = self.len();
            self.coords.extend_from_slice(p);
            self.labels.nodes.push(idx);
            self.labels.values.push(v);
            if let Some(classes) = &mut self.labels.classes {
                classes.push(v as usize);
            }
            added.push(idx);
        }
        Ok(added)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    /// Boolean mask of labeled nodes.
    pub fn label_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &i in &self.labels.nodes {
            mask[i] = true;
        }
        mask
    }

    /// Number of unlabeled (sample) nodes.
    pub fn sample_count(&self) -> usize {
        self.len() - self.labels.len()
    }

    /// Keeps the listed nodes (in the given order), remapping labels.
    pub fn subset(&self, keep: &[usize]) -> Result<PointCloud> {
        let mut coords = Vec::with_capacity(keep.len() * self.dim);
        let mut new_index = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            coords.extend_from_slice(self.point(old));
            new_index[old] = new;
        }
        let mut labels = LabelSet {
            classes: self.labels.classes.as_ref().map(|_| Vec::new()),
            ..LabelSet::default()
        };
        for (k, &node) in self.labels.nodes.iter().enumerate() {
            if new_index[node] != usize::MAX {
                labels.nodes.push(new_index[node]);
                labels.values.push(self.labels.values[k]);
                if let (Some(dst), Some(src)) = (&mut labels.classes, &self.labels.classes) {
                    dst.push(src[k]);
                }
            }
        }
        PointCloud::new(self.dim, coords)?.with_labels(labels)
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Euclidean distance from `query` to the closest labeled point.
pub fn dist_to_labels(cloud: &PointCloud, query: &[f64]) -> Result<f64> {
    if cloud.labels.is_empty() {
        return Err(Error::NoLabels);
    }
    if query.len() != cloud.dim {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim,
            got: query.len(),
        });
    }
    Ok(cloud
        .labels
        .nodes
        .iter()
        .map(|&z| squared_distance(cloud.point(z), query))
        .fold(f64::INFINITY, f64::min)
        .sqrt())
}

/// Distance to the label set for every node, with the index of the closest label.
pub fn nearest_labels(cloud: &PointCloud) -> Result<Vec<(f64, usize)>> {
    if cloud.labels.is_empty() {
        return Err(Error::NoLabels);
    }
    let nodes = &cloud.labels.nodes;
    Ok(cloud
        .points()
        .map(|p| {
            let mut best = (f64::INFINITY, nodes[0]);
            for &z in nodes {
                let d2 = squared_distance(cloud.point(z), p);
                if d2 < best.0 {
                    best = (d2, z);
                }
            }
            (best.0.sqrt(), best.1)
        })
        .collect())
}

/// Minimum distance `R` between distinct labeled points; `+∞` for a single label.
pub fn min_label_separation(cloud: &PointCloud) -> Result<f64> {
    let nodes = &cloud.labels.nodes;
    if nodes.is_empty() {
        return Err(Error::NoLabels);
    }
    let mut best = f64::INFINITY;
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            let d2 = squared_distance(cloud.point(i), cloud.point(j));
            if d2 == 0.0 {
                return Err(Error::CoincidentLabels(i.min(j), i.max(j)));
            }
            best = best.min(d2);
        }
    }
    Ok(best.sqrt())
}
