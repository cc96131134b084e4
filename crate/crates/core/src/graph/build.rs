use rayon::prelude::*;

use super::sparse::{Construction, SparseGraph};
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, SpatialIndex};
use crate::kernels::KernelProfile;

/// Relative threshold below which directed kNN weights are dropped.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-12;

/// `ε`-ball graph: `x ~ y` iff `|x - y| <= support · ε` and `η_ε(x - y) > 0`,
/// with base weight `w_xy = η_ε(x - y)`.
///
/// Rows are built independently (in parallel) and concatenated in index order.
/// The weight depends only on the squared distance, which is bitwise symmetric,
/// so the result is exactly symmetric.
pub fn build_eps_graph(
    cloud: &PointCloud,
    eps: f64,
    kernel: &KernelProfile,
) -> Result<SparseGraph> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(format!("eps must be positive, got {eps}")));
    }
    let index = SpatialIndex::build(cloud);
    let radius = kernel.support() * eps;
    let dim = cloud.dim() as i32;
    let norm = eps.powi(-dim);
    let rows: Vec<Vec<(usize, f64)>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let hits = index
                .range_query_with_distances(cloud.point(i), radius)
                .expect("query dimension matches cloud");
            hits.into_iter()
                .filter(|&(j, _)| j != i)
                .filter_map(|(j, d2)| {
                    let w = norm * kernel.eta_unchecked(d2.sqrt() / eps);
                    (w > 0.0).then_some((j, w))
                })
                .collect()
        })
        .collect();
    let graph = SparseGraph::from_rows(
        rows,
        Construction::EpsBall {
            eps,
            kernel: kernel.name(),
        },
    )?;
    if graph.nnz() == 0 && cloud.len() > 1 {
        log::warn!("eps = {eps} produced a graph with no edges");
    }
    Ok(graph)
}

/// Self-tuned kNN graph: `w_xy = exp(-|x - y|² / σ_x²)` for the `k` nearest `y`
/// of `x`, with `σ_x` the distance to the `sigma_neighbor`-th neighbor, then
/// symmetrized as `(W + Wᵀ)/2`.
pub fn build_knn_graph(cloud: &PointCloud, k: usize, sigma_neighbor: usize) -> Result<SparseGraph> {
    build_knn_graph_with(cloud, k, sigma_neighbor, Some(DEFAULT_PRUNE_THRESHOLD))
}

pub fn build_knn_graph_with(
    cloud: &PointCloud,
    k: usize,
    sigma_neighbor: usize,
    prune: Option<f64>,
) -> Result<SparseGraph> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    if sigma_neighbor == 0 || sigma_neighbor > k {
        return Err(Error::config(format!(
            "sigma_neighbor must lie in [1, k = {k}], got {sigma_neighbor}"
        )));
    }
    let neighbors = knn_lists(cloud, k)?;
    let directed: Vec<Vec<(usize, f64)>> = neighbors
        .par_iter()
        .enumerate()
        .map(|(i, nbrs)| directed_row(i, nbrs, sigma_neighbor, prune))
        .collect::<Result<_>>()?;
    SparseGraph::symmetrize(directed, Construction::Knn { k, sigma_neighbor })
}

fn directed_row(
    i: usize,
    nbrs: &[(usize, f64)],
    sigma_neighbor: usize,
    prune: Option<f64>,
) -> Result<Vec<(usize, f64)>> {
    let mut sigma = nbrs[sigma_neighbor - 1].1;
    if sigma == 0.0 {
        sigma = nbrs.iter().map(|e| e.1).find(|&d| d > 0.0).ok_or_else(|| {
            Error::data(format!("node {i}: all nearest neighbors coincide with it"))
        })?;
    }
    let mut row: Vec<(usize, f64)> = nbrs
        .iter()
        .map(|&(j, d)| (j, (-(d * d) / (sigma * sigma)).exp()))
        .collect();
    if let Some(threshold) = prune {
        let max = row.iter().map(|e| e.1).fold(0.0, f64::max);
        row.retain(|e| e.1 >= threshold * max);
    }
    Ok(row)
}

/// `k` nearest neighbors of every node, excluding the node itself.
///
/// Uses the kd-tree in low dimension and an exact blocked scan otherwise.
pub fn knn_lists(cloud: &PointCloud, k: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    if cloud.dim() <= 8 {
        let index = SpatialIndex::build(cloud);
        return (0..n)
            .into_par_iter()
            .map(|i| {
                let found = index.knn_query(cloud.point(i), k + 1)?;
                Ok(drop_self(i, found, k))
            })
            .collect();
    }
    Ok(brute_force_knn(cloud, k))
}

fn drop_self(i: usize, found: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = found.into_iter().filter(|e| e.0 != i).collect();
    out.truncate(k);
    out
}

fn brute_force_knn(cloud: &PointCloud, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = cloud.len();
    let norms: Vec<f64> = cloud
        .points()
        .map(|p| p.iter().map(|v| v * v).sum())
        .collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = cloud.point(j);
                let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
                let approx = norms[i] + norms[j] - 2.0 * dot;
                cand.push((approx, j));
            }
            // preselect with the expanded form, then rank exactly
            let keep = (4 * k + 16).min(cand.len());
            cand.select_nth_unstable_by(keep - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let cutoff = cand[keep - 1].0;
            let slack = 1e-9 * (norms[i] + 1.0);
            let mut exact: Vec<(f64, usize)> = cand
                .iter()
                .filter(|c| c.0 <= cutoff + slack)
                .map(|&(_, j)| {
                    let d2: f64 = p
                        .iter()
                        .zip(cloud.point(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d2, j)
                })
                .collect();
            exact.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            exact.truncate(k);
            exact.into_iter().map(|(d2, j)| (j, d2.sqrt())).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_graph_examples() {
        let eps = 0.1;
        let far = PointCloud::from_points(&[vec![0.0, 0.0], vec![0.3, 0.0]]).unwrap();
        let g = build_eps_graph(&far, eps, &KernelProfile::gaussian(0.5).unwrap()).unwrap();
        assert_eq!(g.nnz(), 0);

        let near = PointCloud::from_points(&[vec![0.0, 0.0], vec![0.05, 0.0]]).unwrap();
        let g = build_eps_graph(&near, eps, &KernelProfile::indicator()).unwrap();
        assert_eq!(g.nnz(), 2);
        assert!((g.weight(0, 1) - 100.0).abs() < 1e-9);
        assert_eq!(g.eps(), Some(eps));
    }

    #[test]
    fn knn_equilateral_triangle() {
        let s = 2.0;
        let h = s * 3f64.sqrt() / 2.0;
        let cloud =
            PointCloud::from_points(&[vec![0.0, 0.0], vec![s, 0.0], vec![s / 2.0, h]]).unwrap();
        let g = build_knn_graph(&cloud, 2, 1).unwrap();
        let e = (-1.0f64).exp();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((g.weight(i, j) - e).abs() < 1e-12);
                }
            }
            assert_eq!(g.weight(i, i), 0.0);
        }
    }

    #[test]
    fn knn_duplicate_points_substitute_sigma() {
        let cloud = PointCloud::from_points(&[
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 2.0],
        ])
        .unwrap();
        let g = build_knn_graph(&cloud, 2, 1).unwrap();
        assert!(g.is_symmetric());
        // node 0: neighbors 1 (d = 0) and 2 (d = 1); σ falls back to 1
        assert!(g.weight(0, 2) > 0.0);

        let same = PointCloud::from_points(&vec![vec![1.0, 1.0]; 4]).unwrap();
        assert!(build_knn_graph(&same, 2, 1).is_err());
    }

    #[test]
    fn knn_parameter_errors() {
        let cloud = PointCloud::from_points(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert!(build_knn_graph(&cloud, 3, 1).is_err());
        assert!(build_knn_graph(&cloud, 2, 3).is_err());
    }

    #[test]
    fn brute_and_tree_knn_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let cloud = PointCloud::from_points(&pts).unwrap();
        let tree = knn_lists(&cloud, 7).unwrap();
        let brute = brute_force_knn(&cloud, 7);
        for (a, b) in tree.iter().zip(&brute) {
            let ia: Vec<usize> = a.iter().map(|e| e.0).collect();
            let ib: Vec<usize> = b.iter().map(|e| e.0).collect();
            assert_eq!(ia, ib);
        }
    }
}
