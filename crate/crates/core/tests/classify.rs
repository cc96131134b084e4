mod common;

use pwgl_core::classify::{accuracy, argmax, one_vs_rest, MulticlassTask, Prediction};
use pwgl_core::experiments::rng_from_seed;
use pwgl_core::geometry::{LabelSet, PointCloud};
use pwgl_core::graph::{build_eps_graph, Construction, EnergyWeights, SparseGraph};
use pwgl_core::kernels::KernelProfile;
use pwgl_core::solve::{Method, MethodProblem, SolveOptions};
use rand::Rng;

fn six_node() -> (SparseGraph, PointCloud, Vec<(usize, usize, f64)>) {
    let edges = vec![
        (0, 1, 1.0),
        (0, 3, 0.2),
        (1, 2, 0.4),
        (1, 3, 1.1),
        (2, 4, 2.0),
        (2, 5, 0.3),
        (3, 4, 0.6),
        (4, 5, 1.7),
    ];
    let g = SparseGraph::from_edges(6, &edges, Construction::Explicit).unwrap();
    let pts: Vec<Vec<f64>> = (0..6)
        .map(|i| vec![i as f64, (i * i) as f64 * 0.1])
        .collect();
    let cloud = PointCloud::from_points(&pts)
        .unwrap()
        .with_labels(LabelSet::classes(vec![0, 2, 5], vec![0, 1, 2]))
        .unwrap();
    (g, cloud, edges)
}

fn energy(edges: &[(usize, usize, f64)], gamma: &[f64], u: &[f64]) -> f64 {
    edges
        .iter()
        .map(|&(x, y, w)| (gamma[x] + gamma[y]) * w * (u[x] - u[y]).powi(2))
        .sum()
}

#[test]
fn six_node_three_classes_match_dense_oracle() {
    let (g, cloud, edges) = six_node();
    let gamma = vec![4.0, 1.5, 3.0, 1.0, 1.2, 6.0];
    let ew = EnergyWeights::unscaled(gamma.clone());
    let task = MulticlassTask {
        class_count: 3,
        truth: None,
    };
    for (method, gam) in [
        (Method::Pw, gamma.clone()),
        (Method::Standard, vec![1.0; 6]),
    ] {
        let pred = one_vs_rest(
            &g,
            &ew,
            &cloud,
            &task,
            method,
            None,
            &SolveOptions::default(),
        )
        .unwrap();
        let mut oracle_scores = Vec::new();
        for c in 0..3 {
            let mut base = vec![0.0; 6];
            base[[0, 2, 5][c]] = 1.0;
            let u = common::minimize_quadratic(|u| energy(&edges, &gam, u), &base, &[1, 3, 4]);
            for i in 0..6 {
                assert!(
                    (u[i] - pred.scores[c][i]).abs() < 1e-10,
                    "{method:?} class {c}"
                );
            }
            oracle_scores.push(u);
        }
        for i in 0..6 {
            assert_eq!(pred.classes[i], argmax(oracle_scores.iter().map(|s| s[i])));
        }
        assert_eq!(
            (pred.classes[0], pred.classes[2], pred.classes[5]),
            (0, 1, 2)
        );
    }
}

fn clusters(seed: u64) -> (SparseGraph, PointCloud, Vec<usize>) {
    let mut rng = rng_from_seed(seed);
    let centers = [[0.2, 0.2], [0.8, 0.3], [0.5, 0.8]];
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for (c, ctr) in centers.iter().enumerate() {
        for _ in 0..70 {
            pts.push(vec![
                ctr[0] + rng.random_range(-0.15..0.15),
                ctr[1] + rng.random_range(-0.15..0.15),
            ]);
            truth.push(c);
        }
    }
    let labels = vec![0, 1, 70, 71, 140, 141];
    let classes = labels.iter().map(|&i| truth[i]).collect();
    let cloud = PointCloud::from_points(&pts)
        .unwrap()
        .with_labels(LabelSet::classes(labels, classes))
        .unwrap();
    let g = build_eps_graph(&cloud, 0.2, &KernelProfile::gaussian(0.5).unwrap()).unwrap();
    (g, cloud, truth)
}

fn predict(g: &SparseGraph, cloud: &PointCloud, method: Method) -> Prediction {
    let ew = EnergyWeights::unscaled(vec![1.0; cloud.len()]);
    let task = MulticlassTask {
        class_count: 3,
        truth: None,
    };
    one_vs_rest(g, &ew, cloud, &task, method, None, &SolveOptions::default()).unwrap()
}

#[test]
fn relabeling_classes_permutes_scores() {
    let (g, cloud, _) = clusters(1);
    let base = predict(&g, &cloud, Method::Standard);
    let perm = [2, 0, 1];
    let labels = cloud.labels();
    let permuted = cloud
        .clone()
        .with_labels(LabelSet::classes(
            labels.nodes.clone(),
            labels
                .classes
                .as_ref()
                .unwrap()
                .iter()
                .map(|&c| perm[c])
                .collect(),
        ))
        .unwrap();
    let moved = predict(&g, &permuted, Method::Standard);
    for c in 0..3 {
        assert_eq!(base.scores[c], moved.scores[perm[c]]);
    }
    for i in 0..cloud.len() {
        assert_eq!(perm[base.classes[i]], moved.classes[i]);
    }
}

#[test]
fn affine_label_encoding_keeps_argmax() {
    let (g, cloud, _) = clusters(2);
    let pred = predict(&g, &cloud, Method::Standard);
    let problem = MethodProblem::standard(&g, &cloud).unwrap();
    let classes = cloud.labels().classes.clone().unwrap();
    let (hi, lo) = (2.5, -1.0);
    let scores: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let gv: Vec<f64> = classes
                .iter()
                .map(|&k| if k == c { hi } else { lo })
                .collect();
            problem
                .solve(&gv, &SolveOptions::default())
                .unwrap()
                .0
                .values
        })
        .collect();
    for i in 0..cloud.len() {
        assert_eq!(pred.classes[i], argmax(scores.iter().map(|s| s[i])));
    }
}

#[test]
fn duplicate_labeled_node_keeps_predictions() {
    let (_, cloud, truth) = clusters(3);
    let n = cloud.len();
    let mut pts: Vec<Vec<f64>> = cloud.points().map(|p| p.to_vec()).collect();
    pts.push(pts[70].clone());
    let labels = cloud.labels();
    let mut nodes = labels.nodes.clone();
    let mut classes = labels.classes.clone().unwrap();
    nodes.push(n);
    classes.push(truth[70]);
    let dup = PointCloud::from_points(&pts)
        .unwrap()
        .with_labels(LabelSet::classes(nodes, classes))
        .unwrap();
    let kernel = KernelProfile::gaussian(0.5).unwrap();
    let g0 = build_eps_graph(&cloud, 0.2, &kernel).unwrap();
    let g1 = build_eps_graph(&dup, 0.2, &kernel).unwrap();
    let a = predict(&g0, &cloud, Method::Standard);
    let b = predict(&g1, &dup, Method::Standard);
    for i in 0..n {
        let mut s: Vec<f64> = (0..3).map(|c| a.scores[c][i]).collect();
        s.sort_by(f64::total_cmp);
        if s[2] - s[1] > 1e-6 {
            assert_eq!(a.classes[i], b.classes[i], "node {i}");
        }
    }
    assert_eq!(b.classes[n], truth[70]);
}

#[test]
fn binary_scores_obey_maximum_principle() {
    let (g, cloud, truth) = clusters(4);
    for method in [Method::Standard, Method::Wnll] {
        let pred = predict(&g, &cloud, method);
        for s in &pred.scores {
            assert!(s.iter().all(|&v| (-1e-8..=1.0 + 1e-8).contains(&v)));
        }
        for (&z, &c) in cloud
            .labels()
            .nodes
            .iter()
            .zip(cloud.labels().classes.as_ref().unwrap())
        {
            assert_eq!(pred.classes[z], c);
        }
        assert!(accuracy(&pred, &truth).unwrap() > 0.95);
    }
}
