mod common;

use pwgl_core::geometry::{LabelSet, PointCloud};
use pwgl_core::graph::{attach_energy_weights, Construction, EnergyWeights, SparseGraph};
use pwgl_core::kernels::WeightProfile;
use pwgl_core::solve::{
    apply_laplacian, dirichlet_energy, solve_pw, solve_standard, solve_wnll, Backend,
    MethodProblem, SolveOptions, WnllParams,
};
use rand::Rng;

/// Five nodes, hand-chosen weights, labels `u(0) = 0` and `u(4) = 1`.
fn five_node() -> (SparseGraph, PointCloud, Vec<(usize, usize, f64)>) {
    let edges = vec![
        (0, 1, 1.0),
        (0, 2, 0.5),
        (1, 2, 2.0),
        (1, 3, 0.25),
        (2, 3, 1.5),
        (2, 4, 0.75),
        (3, 4, 3.0),
    ];
    let g = SparseGraph::from_edges(5, &edges, Construction::Explicit).unwrap();
    let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
    let cloud = PointCloud::from_points(&pts)
        .unwrap()
        .with_labels(LabelSet::scalar(vec![0, 4], vec![0.0, 1.0]))
        .unwrap();
    (g, cloud, edges)
}

/// `Σ_{x,y} (γ(x) + γ(y))/2 · w_xy (u(x) - u(y))²` over ordered pairs.
fn weighted_energy(edges: &[(usize, usize, f64)], gamma: &[f64], u: &[f64]) -> f64 {
    edges
        .iter()
        .map(|&(x, y, w)| 2.0 * 0.5 * (gamma[x] + gamma[y]) * w * (u[x] - u[y]).powi(2))
        .sum()
}

fn wnll_objective(edges: &[(usize, usize, f64)], labeled: &[bool], mu: f64, u: &[f64]) -> f64 {
    // every unordered edge appears once from each endpoint
    edges
        .iter()
        .map(|&(x, y, w)| {
            let fx = if labeled[x] { mu } else { 1.0 };
            let fy = if labeled[y] { mu } else { 1.0 };
            (fx + fy) * w * (u[x] - u[y]).powi(2)
        })
        .sum()
}

const FREE: [usize; 3] = [1, 2, 3];
const BASE: [f64; 5] = [0.0, 0.0, 0.0, 0.0, 1.0];

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn five_node_pw_matches_dense_oracle() {
    let (g, cloud, edges) = five_node();
    let gamma = [5.0, 2.0, 1.0, 3.0, 7.0];
    let oracle = common::minimize_quadratic(|u| weighted_energy(&edges, &gamma, u), &BASE, &FREE);
    let ew = EnergyWeights::unscaled(gamma.to_vec());
    for backend in [Backend::Cg, Backend::Dense] {
        let opts = SolveOptions {
            backend,
            ..SolveOptions::default()
        };
        let (u, rep) = solve_pw(&g, &ew, &cloud, &opts).unwrap();
        assert_close(&u.values, &oracle, 1e-10);
        let e = weighted_energy(&edges, &gamma, &u.values);
        assert!((rep.energy - e).abs() < 1e-12 * e);
    }
}

#[test]
fn five_node_standard_matches_dense_oracle() {
    let (g, cloud, edges) = five_node();
    let ones = [1.0; 5];
    let oracle = common::minimize_quadratic(|u| weighted_energy(&edges, &ones, u), &BASE, &FREE);
    let (u, _) = solve_standard(&g, &cloud, &SolveOptions::default()).unwrap();
    assert_close(&u.values, &oracle, 1e-10);
}

#[test]
fn five_node_wnll_matches_dense_oracle() {
    let (g, cloud, edges) = five_node();
    let labeled = cloud.label_mask();
    let oracle =
        common::minimize_quadratic(|u| wnll_objective(&edges, &labeled, 3.0, u), &BASE, &FREE);
    let (u, _) = solve_wnll(&g, &cloud, WnllParams { mu: 3.0 }, &SolveOptions::default()).unwrap();
    assert_close(&u.values, &oracle, 1e-10);
    assert_eq!(WnllParams::default_for(&cloud).mu, 1.5);
}

#[test]
fn wnll_with_unit_mu_is_standard() {
    let mut rng = common::rng(21);
    let (g, cloud) = common::random_problem(&mut rng, 60, 2, 4);
    let opts = SolveOptions::default();
    let (a, _) = solve_wnll(&g, &cloud, WnllParams { mu: 1.0 }, &opts).unwrap();
    let (b, _) = solve_standard(&g, &cloud, &opts).unwrap();
    assert_close(&a.values, &b.values, 1e-9);
}

#[test]
fn laplacian_vanishes_at_solution() {
    let mut rng = common::rng(5);
    let (g, cloud) = common::random_problem(&mut rng, 150, 2, 3);
    let profile = WeightProfile::new(3.0, 0.2, 1e3).unwrap();
    let ew = attach_energy_weights(&g, &cloud, &profile).unwrap();
    let opts = SolveOptions::default();
    let (u, _) = solve_pw(&g, &ew, &cloud, &opts).unwrap();
    let row_scale = |x: usize| -> f64 {
        let (cols, vals) = g.row(x);
        cols.iter()
            .zip(vals)
            .map(|(&y, &w)| ew.operator_scale * (ew.node_gamma[x] + ew.node_gamma[y]) * w)
            .sum()
    };
    // largest row sum of the operator
    let scale = (0..g.n()).map(row_scale).fold(0.0, f64::max);
    for x in (0..g.n()).filter(|&x| !u.pinned[x]) {
        let lu = apply_laplacian(&g, &ew, &u.values, x);
        assert!(
            lu.abs() <= 10.0 * opts.tol * scale,
            "node {x}: {lu} vs {scale}"
        );
    }
}

#[test]
fn solution_minimizes_energy() {
    let mut rng = common::rng(8);
    let (g, cloud) = common::random_problem(&mut rng, 80, 2, 3);
    let profile = WeightProfile::new(2.0, 0.3, 1e3).unwrap();
    let ew = attach_energy_weights(&g, &cloud, &profile).unwrap();
    let (u, _) = solve_pw(&g, &ew, &cloud, &SolveOptions::default()).unwrap();
    let e0 = dirichlet_energy(&g, &ew, &u.values);
    for _ in 0..100 {
        let v: Vec<f64> = u
            .values
            .iter()
            .zip(&u.pinned)
            .map(|(&x, &p)| {
                if p {
                    x
                } else {
                    x + 1e-3 * rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        assert!(dirichlet_energy(&g, &ew, &v) >= e0);
    }
}

#[test]
fn weight_scaling_leaves_solution_unchanged() {
    let mut rng = common::rng(13);
    let (g, cloud) = common::random_problem(&mut rng, 100, 2, 3);
    let opts = SolveOptions::default();
    let (a, _) = solve_standard(&g, &cloud, &opts).unwrap();
    let (b, _) = solve_standard(&g.scaled(37.5), &cloud, &opts).unwrap();
    assert_close(&a.values, &b.values, 1e-9);
}

#[test]
fn swapping_labels_reflects_solution() {
    let mut rng = common::rng(3);
    let (g, mut cloud) = common::random_problem(&mut rng, 100, 2, 2);
    let nodes = cloud.labels().nodes.clone();
    cloud
        .set_labels(LabelSet::scalar(nodes.clone(), vec![0.0, 1.0]))
        .unwrap();
    let opts = SolveOptions::default();
    let (a, _) = solve_standard(&g, &cloud, &opts).unwrap();
    cloud
        .set_labels(LabelSet::scalar(nodes, vec![1.0, 0.0]))
        .unwrap();
    let (b, _) = solve_standard(&g, &cloud, &opts).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x + y - 1.0).abs() < 1e-8);
    }
}

#[test]
fn solve_is_affine_in_labels() {
    let mut rng = common::rng(17);
    let (g, cloud) = common::random_problem(&mut rng, 120, 2, 4);
    let profile = WeightProfile::new(2.0, 0.3, 1e3).unwrap();
    let ew = attach_energy_weights(&g, &cloud, &profile).unwrap();
    let problem = MethodProblem::pw(&g, &cloud, &ew).unwrap();
    let opts = SolveOptions::default();
    let g1 = [0.3, -1.0, 0.5, 2.0];
    let g2 = [1.0, 0.25, -0.7, 0.0];
    let sum: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
    let (u1, _) = problem.solve(&g1, &opts).unwrap();
    let (u2, _) = problem.solve(&g2, &opts).unwrap();
    let (u12, _) = problem.solve(&sum, &opts).unwrap();
    for i in 0..g.n() {
        assert!((u12.values[i] - u1.values[i] - u2.values[i]).abs() < 1e-8);
    }
}

#[test]
fn pinned_values_are_exact() {
    let mut rng = common::rng(29);
    let (g, cloud) = common::random_problem(&mut rng, 90, 3, 5);
    let (u, _) = solve_wnll(
        &g,
        &cloud,
        WnllParams::default_for(&cloud),
        &SolveOptions::default(),
    )
    .unwrap();
    for (&z, &v) in cloud.labels().nodes.iter().zip(&cloud.labels().values) {
        assert_eq!(u.values[z], v);
        assert!(u.pinned[z]);
    }
}
