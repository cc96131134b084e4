use super::sparse::SparseGraph;
use crate::error::{Error, Result};
use crate::geometry::{nearest_labels, PointCloud};
use crate::kernels::WeightProfile;

/// Per-node label weights `γ_ζ(x_i)` plus the energy and operator normalizations.
///
/// For an `ε`-ball graph over a sample of size `n`, the energy carries
/// `1/(n² ε²)` and the Laplacian `1/(2 n ε²)`. Other graphs use `1` and `1/2`;
/// a positive rescaling of the objective does not move its minimizer.
///
/// The base weights of the graph are never modified; `γ` enters only through
/// the symmetric combination `(γ(x) + γ(y)) w_xy / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyWeights {
    pub node_gamma: Vec<f64>,
    pub energy_scale: f64,
    pub operator_scale: f64,
}

impl EnergyWeights {
    /// Scalings for a sample of size `n` at bandwidth `eps`.
    pub fn with_scaling(node_gamma: Vec<f64>, n: usize, eps: f64) -> Self {
        let n = n.max(1) as f64;
        EnergyWeights {
            node_gamma,
            energy_scale: 1.0 / (n * n * eps * eps),
            operator_scale: 1.0 / (2.0 * n * eps * eps),
        }
    }

    pub fn unscaled(node_gamma: Vec<f64>) -> Self {
        EnergyWeights {
            node_gamma,
            energy_scale: 1.0,
            operator_scale: 0.5,
        }
    }

    /// `γ ≡ 1` with the scaling appropriate for `graph`.
    pub fn uniform(graph: &SparseGraph, sample_count: usize) -> Self {
        let gamma = vec![1.0; graph.n()];
        match graph.eps() {
            Some(eps) => Self::with_scaling(gamma, sample_count, eps),
            None => Self::unscaled(gamma),
        }
    }

    /// Symmetric edge weight `(γ(x) + γ(y)) w / 2`.
    #[inline]
    pub fn edge_weight(&self, x: usize, y: usize, w: f64) -> f64 {
        0.5 * (self.node_gamma[x] + self.node_gamma[y]) * w
    }

    pub fn has_infinite(&self) -> bool {
        self.node_gamma.iter().any(|g| g.is_infinite())
    }
}

/// Evaluates `γ_ζ(dist(x_i, Γ))` at every node.
pub fn attach_energy_weights(
    graph: &SparseGraph,
    cloud: &PointCloud,
    weights: &WeightProfile,
) -> Result<EnergyWeights> {
    if graph.n() != cloud.len() {
        return Err(Error::data(format!(
            "graph has {} nodes but the cloud has {}",
            graph.n(),
            cloud.len()
        )));
    }
    weights.validate()?;
    let gamma: Vec<f64> = nearest_labels(cloud)?
        .into_iter()
        .map(|(d, _)| weights.gamma_zeta(d))
        .collect();
    let labeled = cloud.label_mask();
    if let Some(i) = (0..gamma.len()).find(|&i| gamma[i].is_infinite() && !labeled[i]) {
        return Err(Error::config(format!(
            "unlabeled node {i} sits on a label location and would get infinite weight"
        )));
    }
    Ok(match graph.eps() {
        Some(eps) => EnergyWeights::with_scaling(gamma, cloud.sample_count(), eps),
        None => EnergyWeights::unscaled(gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_eps_graph, Construction};
    use crate::kernels::KernelProfile;

    fn line_cloud() -> PointCloud {
        // nodes at 0.1, ..., 0.9 and a label at 0
        let pts: Vec<Vec<f64>> = (1..10).map(|i| vec![i as f64 * 0.1]).collect();
        let mut cloud = PointCloud::from_points(&pts).unwrap();
        cloud.append_labeled(&[vec![0.0]], &[1.0]).unwrap();
        cloud
    }

    #[test]
    fn line_matches_scalar_formula() {
        let cloud = line_cloud();
        let graph = build_eps_graph(&cloud, 0.1, &KernelProfile::indicator()).unwrap();
        let profile = WeightProfile::new(1.0, 1.0, 100.0).unwrap();
        let ew = attach_energy_weights(&graph, &cloud, &profile).unwrap();
        for i in 0..9 {
            let d = (i + 1) as f64 * 0.1;
            let expected = (1.0 + 1.0 / d).min(100.0);
            assert!((ew.node_gamma[i] - expected).abs() < 1e-12);
        }
        assert_eq!(ew.node_gamma[9], 100.0);
        let n = 9.0;
        assert!((ew.energy_scale - 1.0 / (n * n * 0.01)).abs() < 1e-9);
    }

    #[test]
    fn far_nodes_have_unit_weight() {
        let mut cloud = PointCloud::from_points(&[vec![100.0, 0.0], vec![0.0, 200.0]]).unwrap();
        cloud.append_labeled(&[vec![0.0, 0.0]], &[0.0]).unwrap();
        let graph = SparseGraph::from_edges(3, &[], Construction::Explicit).unwrap();
        let profile = WeightProfile::new(2.0, 1.0, 1e4).unwrap();
        let ew = attach_energy_weights(&graph, &cloud, &profile).unwrap();
        assert!((ew.node_gamma[0] - 1.0).abs() <= 1e-4);
        assert!((ew.node_gamma[1] - 1.0).abs() <= 2.5e-5);
        assert_eq!(ew.node_gamma[2], 1e4);
        assert_eq!(ew.energy_scale, 1.0);
    }

    #[test]
    fn base_weights_untouched() {
        let cloud = line_cloud();
        let graph = build_eps_graph(&cloud, 0.1, &KernelProfile::indicator()).unwrap();
        let before = graph.clone();
        let profile = WeightProfile::new(3.0, 1.0, 50.0).unwrap();
        attach_energy_weights(&graph, &cloud, &profile).unwrap();
        assert_eq!(graph, before);
    }
}
