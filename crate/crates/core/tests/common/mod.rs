//! Fixtures and dense oracles shared by the integration tests.
#![allow(dead_code)]

use pwgl_core::experiments::{rng_from_seed, ExperimentRng};
use pwgl_core::geometry::{LabelSet, PointCloud};
use pwgl_core::graph::{Construction, SparseGraph};
use rand::Rng;

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Minimizes a quadratic objective over the free entries of `u`, learning its
/// Hessian and gradient from objective evaluations alone.
pub fn minimize_quadratic(
    objective: impl Fn(&[f64]) -> f64,
    base: &[f64],
    free: &[usize],
) -> Vec<f64> {
    let m = free.len();
    let eval = |shift: &[(usize, f64)]| {
        let mut u = base.to_vec();
        for &(k, v) in shift {
            u[free[k]] += v;
        }
        objective(&u)
    };
    let j0 = eval(&[]);
    let single: Vec<f64> = (0..m).map(|i| eval(&[(i, 1.0)])).collect();
    let mut h = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = if i == j {
                eval(&[(i, 1.0)]) + eval(&[(i, -1.0)]) - 2.0 * j0
            } else {
                eval(&[(i, 1.0), (j, 1.0)]) - single[i] - single[j] + j0
            };
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    // J(z) = J0 + g·z + z·Hz/2, so ∇ = 0 at H z = -g
    let g: Vec<f64> = (0..m).map(|i| single[i] - j0 - 0.5 * h[i][i]).collect();
    let z = gauss_solve(h, g.iter().map(|v| -v).collect());
    let mut u = base.to_vec();
    for (k, &i) in free.iter().enumerate() {
        u[i] += z[k];
    }
    u
}

pub fn rng(seed: u64) -> ExperimentRng {
    rng_from_seed(seed)
}

/// Random cloud in `[0,1]^dim` with a connected random graph: a random
/// spanning tree plus extra edges, weights in `[0.1, 2]`.
pub fn random_problem(
    rng: &mut ExperimentRng,
    n: usize,
    dim: usize,
    labels: usize,
) -> (SparseGraph, PointCloud) {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((j, i, rng.random_range(0.1..2.0)));
    }
    for _ in 0..2 * n {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a.min(b), a.max(b), rng.random_range(0.1..2.0)));
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    edges.dedup_by_key(|e| (e.0, e.1));
    let graph = SparseGraph::from_edges(n, &edges, Construction::Explicit).unwrap();
    let mut nodes: Vec<usize> = rand::seq::index::sample(rng, n, labels).into_vec();
    nodes.sort_unstable();
    let values: Vec<f64> = nodes.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let cloud = PointCloud::from_points(&pts)
        .unwrap()
        .with_labels(LabelSet::scalar(nodes, values))
        .unwrap();
    (graph, cloud)
}
