//! Drivers for the uniform-box and strip experiments.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::common::{
    auto_eps, correlation, elapsed_ms, insert, mean_std, num, solve_timing, EpsSpec,
    ExperimentOutput, ExperimentReport, FieldTable, Instance, KernelSpec, MethodSettings, Solved,
};
use super::generate::{generate, Generator, LabelPoint, SyntheticSpec};
use super::rng::trial_seed;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::graph::SparseGraph;
use crate::kernels::ZetaSpec;
use crate::solve::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxParams {
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    /// `auto` is `2 / n^{1/d}`.
    pub eps: EpsSpec,
    pub kernel: KernelSpec,
    #[serde(rename = "method")]
    pub settings: MethodSettings,
}

impl Default for BoxParams {
    fn default() -> Self {
        BoxParams {
            dim: 2,
            n: 20_000,
            seed: 0,
            eps: EpsSpec::Auto,
            kernel: KernelSpec::default(),
            settings: MethodSettings::default(),
        }
    }
}

/// Labels `g(0, ½, …, ½) = 0` and `g(1, ½, …, ½) = 1`.
pub fn two_point_labels(dim: usize) -> Vec<LabelPoint> {
    let mut left = vec![0.5; dim];
    let mut right = vec![0.5; dim];
    left[0] = 0.0;
    right[0] = 1.0;
    vec![LabelPoint::new(left, 0.0), LabelPoint::new(right, 1.0)]
}

/// Shape statistics of `u` over the unlabeled nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    /// Pearson correlation of `u` with `x_1`.
    pub corr_x1: f64,
    pub range: f64,
    /// Fraction of nodes with `|u - 0.5| < 0.05`.
    pub frac_near_half: f64,
    pub std: f64,
}

pub fn box_stats(cloud: &PointCloud, u: &[f64]) -> BoxStats {
    let labeled = cloud.label_mask();
    let idx: Vec<usize> = (0..cloud.len()).filter(|&i| !labeled[i]).collect();
    let vals: Vec<f64> = idx.iter().map(|&i| u[i]).collect();
    let x1: Vec<f64> = idx.iter().map(|&i| cloud.point(i)[0]).collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let near = vals.iter().filter(|v| (*v - 0.5).abs() < 0.05).count();
    BoxStats {
        corr_x1: correlation(&vals, &x1),
        range: max - min,
        frac_near_half: near as f64 / vals.len().max(1) as f64,
        std: mean_std(&vals).1,
    }
}

fn box_instance(p: &BoxParams, n: usize, seed: u64) -> Result<Instance> {
    if !(2..=3).contains(&p.dim) {
        return Err(Error::config(format!(
            "two-point box needs d in {{2, 3}}, got {}",
            p.dim
        )));
    }
    let eps = p.eps.resolve(|| auto_eps(2.0, n, p.dim))?;
    let cloud = generate(&SyntheticSpec {
        generator: Generator::UniformBox { dim: p.dim },
        n,
        seed,
        labels: two_point_labels(p.dim),
    })?;
    Instance::build(cloud, eps, p.kernel, p.settings.zeta)
}

/// Solves every requested method on the two-label uniform box.
pub fn run_two_point_box(p: &BoxParams) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let inst = box_instance(p, p.n, p.seed)?;
    let solved = inst.solve(&p.settings)?;
    let mut report = ExperimentReport::new("two_point_box", p)?;
    report.seeds = vec![p.seed];
    report.resolved = json!({
        "eps": inst.eps,
        "zeta": inst.zeta,
        "nodes": inst.graph.n(),
        "samples": inst.cloud.sample_count(),
        "mean_degree": inst.mean_degree(),
    });
    for s in &solved {
        let stats = box_stats(&inst.cloud, &s.u.values);
        insert(
            &mut report.metrics,
            s.method.name(),
            json!({
                "corr_x1": num(stats.corr_x1),
                "range": stats.range,
                "frac_near_half": stats.frac_near_half,
                "std": stats.std,
                "energy": s.report.energy,
                "iterations": s.report.iterations,
            }),
        );
    }
    report.timing = json!({ "solve_ms": solve_timing(&solved), "total_ms": elapsed_ms(start) });
    Ok(ExperimentOutput {
        field: FieldTable::from_solutions(&inst.cloud, &solved),
        boundary: FieldTable::default(),
        report,
    })
}

/// Spread of `u` over unlabeled nodes for each `n` of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegeneracyParams {
    pub schedule: Vec<usize>,
    /// Independent clouds per sample size; spreads are averaged over them.
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    /// `auto` is `2 / n^{1/d}`.
    pub eps: EpsSpec,
    pub kernel: KernelSpec,
    #[serde(rename = "method")]
    pub settings: MethodSettings,
}

impl Default for DegeneracyParams {
    fn default() -> Self {
        DegeneracyParams {
            schedule: vec![5_000, 20_000],
            trials: 3,
            dim: 2,
            seed: 0,
            eps: EpsSpec::Auto,
            kernel: KernelSpec::default(),
            settings: MethodSettings::default().with_methods(&[Method::Wnll, Method::Pw]),
        }
    }
}

impl DegeneracyParams {
    fn box_params(&self, n: usize) -> BoxParams {
        BoxParams {
            dim: self.dim,
            n,
            seed: self.seed,
            eps: self.eps,
            kernel: self.kernel,
            settings: self.settings.clone(),
        }
    }
}

/// Standard deviation of the solution per method along the `n` schedule
/// (averaged over trials), and the ratio between consecutive entries.
pub fn wnll_degeneracy_probe(p: &DegeneracyParams) -> Result<ExperimentReport> {
    if p.schedule.len() < 2 || p.trials == 0 {
        return Err(Error::config(
            "degeneracy probe needs at least two sample sizes and one trial",
        ));
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new("wnll_degeneracy", p)?;
    let mut spreads: Vec<Vec<f64>> = vec![Vec::new(); p.settings.methods.len()];
    let mut resolved = Vec::new();
    for (k, &n) in p.schedule.iter().enumerate() {
        let base = p.box_params(n);
        let mut sums = vec![0.0; p.settings.methods.len()];
        let mut eps = f64::NAN;
        let mut zeta = f64::NAN;
        for t in 0..p.trials {
            let seed = trial_seed(p.seed, (k * p.trials + t) as u64);
            report.seeds.push(seed);
            let inst = box_instance(&base, n, seed)?;
            (eps, zeta) = (inst.eps, inst.zeta);
            for (m, s) in inst.solve(&p.settings)?.iter().enumerate() {
                sums[m] += box_stats(&inst.cloud, &s.u.values).std;
            }
        }
        resolved.push(json!({ "n": n, "eps": eps, "zeta": zeta }));
        for (m, total) in sums.into_iter().enumerate() {
            spreads[m].push(total / p.trials as f64);
        }
    }
    report.resolved = Value::Array(resolved);
    for (m, method) in p.settings.methods.iter().enumerate() {
        let ratios: Vec<f64> = spreads[m].windows(2).map(|w| w[0] / w[1]).collect();
        insert(
            &mut report.metrics,
            method.name(),
            json!({ "std": spreads[m], "shrink_ratio": ratios.iter().map(|&r| num(r)).collect::<Vec<_>>() }),
        );
    }
    report.timing = json!({ "total_ms": elapsed_ms(start) });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryParams {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `auto` is `3 / √n`.
    pub eps: EpsSpec,
    pub kernel: KernelSpec,
    #[serde(rename = "method")]
    pub settings: MethodSettings,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        BoundaryParams {
            n: 20_000,
            trials: 25,
            seed: 0,
            eps: EpsSpec::Auto,
            kernel: KernelSpec::default(),
            settings: MethodSettings {
                alpha: 5.0,
                zeta: ZetaSpec::Scaled { scaled: 1e6 },
                ..MethodSettings::default()
            },
        }
    }
}

/// Unlabeled nodes with a neighbor on the other side of `u = 0.5`.
pub fn boundary_nodes(graph: &SparseGraph, labeled: &[bool], u: &[f64]) -> Vec<usize> {
    (0..graph.n())
        .filter(|&i| {
            !labeled[i] && {
                let side = u[i] > 0.5;
                graph.row(i).0.iter().any(|&j| (u[j] > 0.5) != side)
            }
        })
        .collect()
}

/// Mean distance `|x_1 + x_2 - 1| / √2` of the given nodes from the
/// anti-diagonal, the symmetry line separating `(0,0)` from `(1,1)`.
pub fn diagonal_deviation(cloud: &PointCloud, nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return f64::NAN;
    }
    nodes
        .iter()
        .map(|&i| {
            let p = cloud.point(i);
            (p[0] + p[1] - 1.0).abs() / std::f64::consts::SQRT_2
        })
        .sum::<f64>()
        / nodes.len() as f64
}

struct BoundaryTrial {
    seed: u64,
    deviation: Vec<f64>,
    boundary: Option<(PointCloud, Vec<(Method, Vec<usize>)>)>,
    solved: Option<Vec<Solved>>,
    eps: f64,
    zeta: f64,
}

fn boundary_trial(p: &BoundaryParams, trial: usize) -> Result<BoundaryTrial> {
    let seed = trial_seed(p.seed, trial as u64);
    let eps = p.eps.resolve(|| auto_eps(3.0, p.n, 2))?;
    let cloud = generate(&SyntheticSpec {
        generator: Generator::box2d(),
        n: p.n,
        seed,
        labels: vec![
            LabelPoint::new(vec![0.0, 0.0], 0.0),
            LabelPoint::new(vec![1.0, 1.0], 1.0),
        ],
    })?;
    let inst = Instance::build(cloud, eps, p.kernel, p.settings.zeta)?;
    let solved = inst.solve(&p.settings)?;
    let labeled = inst.cloud.label_mask();
    let mut deviation = Vec::new();
    let mut sets = Vec::new();
    for s in &solved {
        let nodes = boundary_nodes(&inst.graph, &labeled, &s.u.values);
        deviation.push(diagonal_deviation(&inst.cloud, &nodes));
        sets.push((s.method, nodes));
    }
    let first = trial == 0;
    Ok(BoundaryTrial {
        seed,
        deviation,
        eps: inst.eps,
        zeta: inst.zeta,
        boundary: first.then(|| (inst.cloud.clone(), sets)),
        solved: first.then_some(solved),
    })
}

/// Level-set statistics over independent trials on the unit square with labels
/// `g(0,0) = 0`, `g(1,1) = 1`.
pub fn run_decision_boundary(p: &BoundaryParams) -> Result<ExperimentOutput> {
    if p.trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    p.settings.validate()?;
    let start = Instant::now();
    let mut trials: Vec<BoundaryTrial> = (0..p.trials)
        .into_par_iter()
        .map(|t| boundary_trial(p, t))
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new("decision_boundary", p)?;
    report.seeds = trials.iter().map(|t| t.seed).collect();
    report.resolved = json!({ "eps": trials[0].eps, "zeta": trials[0].zeta, "nodes": p.n + 2 });
    for (m, method) in p.settings.methods.iter().enumerate() {
        let per_trial: Vec<f64> = trials.iter().map(|t| t.deviation[m]).collect();
        let finite: Vec<f64> = per_trial
            .iter()
            .cloned()
            .filter(|d| d.is_finite())
            .collect();
        let (mean, spread) = mean_std(&finite);
        insert(
            &mut report.metrics,
            method.name(),
            json!({
                "per_trial_deviation": per_trial.iter().map(|&d| num(d)).collect::<Vec<_>>(),
                "mean_deviation": num(mean),
                "spread": num(spread),
                "trials_without_boundary": per_trial.len() - finite.len(),
            }),
        );
    }
    let first = &mut trials[0];
    let (cloud, sets) = first
        .boundary
        .take()
        .expect("first trial keeps its boundary");
    let solved = first
        .solved
        .take()
        .expect("first trial keeps its solutions");
    let mut boundary = FieldTable {
        columns: vec!["method".into(), "node".into(), "x_1".into(), "x_2".into()],
        rows: Vec::new(),
    };
    for (method, nodes) in &sets {
        let m = p
            .settings
            .methods
            .iter()
            .position(|x| x == method)
            .unwrap_or(0);
        for &i in nodes {
            let x = cloud.point(i);
            boundary.rows.push(vec![m as f64, i as f64, x[0], x[1]]);
        }
    }
    report.timing = json!({ "total_ms": elapsed_ms(start) });
    Ok(ExperimentOutput {
        field: FieldTable::from_solutions(&cloud, &solved),
        boundary,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StripParams {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `auto` is `3 / n^{1/3}`.
    pub eps: EpsSpec,
    pub kernel: KernelSpec,
    pub density_ratio: f64,
    #[serde(rename = "method")]
    pub settings: MethodSettings,
}

impl Default for StripParams {
    fn default() -> Self {
        StripParams {
            n: 20_000,
            trials: 20,
            seed: 0,
            eps: EpsSpec::Auto,
            kernel: KernelSpec::default(),
            density_ratio: 0.6,
            settings: MethodSettings {
                alpha: 5.0,
                zeta: ZetaSpec::Scaled { scaled: 1e6 },
                ..MethodSettings::default()
            },
        }
    }
}

/// Fraction of unlabeled nodes where `u > 0.5` disagrees with `x_1 > 0.5`.
pub fn strip_error(cloud: &PointCloud, u: &[f64]) -> f64 {
    let labeled = cloud.label_mask();
    let (mut wrong, mut total) = (0usize, 0usize);
    for i in 0..cloud.len() {
        if labeled[i] {
            continue;
        }
        total += 1;
        if (u[i] > 0.5) != (cloud.point(i)[0] > 0.5) {
            wrong += 1;
        }
    }
    wrong as f64 / total.max(1) as f64
}

/// Two-label classification across a low-density strip in `[0,1]^3`.
///
/// Trials run one after another: a single strip graph at the default size
/// already holds tens of millions of edges.
pub fn run_strip(p: &StripParams) -> Result<ExperimentOutput> {
    if p.trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    p.settings.validate()?;
    let start = Instant::now();
    let eps = p.eps.resolve(|| auto_eps(3.0, p.n, 3))?;
    let generator = Generator::StripDensity {
        dim: 3,
        strip_lo: 0.45,
        strip_hi: 0.55,
        density_ratio: p.density_ratio,
    };
    let mut report = ExperimentReport::new("strip", p)?;
    let mut errors: Vec<Vec<f64>> = vec![Vec::new(); p.settings.methods.len()];
    let mut field = FieldTable::default();
    let mut zeta = f64::NAN;
    let mut degree = f64::NAN;
    let mut timing = Vec::new();
    for t in 0..p.trials {
        let seed = trial_seed(p.seed, t as u64);
        report.seeds.push(seed);
        let cloud = generate(&SyntheticSpec {
            generator: generator.clone(),
            n: p.n,
            seed,
            labels: vec![
                LabelPoint::new(vec![0.0, 0.2, 0.2], 0.0),
                LabelPoint::new(vec![1.0, 0.2, 0.2], 1.0),
            ],
        })?;
        let inst = Instance::build(cloud, eps, p.kernel, p.settings.zeta)?;
        let solved = inst.solve(&p.settings)?;
        for (m, s) in solved.iter().enumerate() {
            errors[m].push(strip_error(&inst.cloud, &s.u.values));
        }
        timing.push(solve_timing(&solved));
        if t == 0 {
            zeta = inst.zeta;
            degree = inst.mean_degree();
            field = FieldTable::from_solutions(&inst.cloud, &solved);
        }
    }
    report.resolved = json!({
        "eps": eps,
        "zeta": zeta,
        "nodes": p.n + 2,
        "mean_degree_first_trial": degree,
        "strip_mass": generator.strip_mass(),
    });
    for (m, method) in p.settings.methods.iter().enumerate() {
        let (mean, std) = mean_std(&errors[m]);
        insert(
            &mut report.metrics,
            method.name(),
            json!({ "per_trial_error": errors[m], "mean_error": mean, "std_error": std }),
        );
    }
    let mut t = Map::new();
    t.insert("per_trial_solve_ms".into(), Value::Array(timing));
    t.insert("total_ms".into(), json!(elapsed_ms(start)));
    report.timing = Value::Object(t);
    Ok(ExperimentOutput {
        report,
        field,
        boundary: FieldTable::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::{Backend, SolveOptions};

    #[test]
    fn alpha_zero_matches_standard() {
        let p = BoxParams {
            n: 400,
            seed: 3,
            settings: MethodSettings {
                alpha: 0.0,
                zeta: ZetaSpec::Value(10.0),
                methods: vec![Method::Pw, Method::Standard],
                ..MethodSettings::default()
            },
            ..BoxParams::default()
        };
        let out = run_two_point_box(&p).unwrap();
        let rows = &out.field.rows;
        let (a, b) = (rows[0].len() - 2, rows[0].len() - 1);
        for r in rows {
            assert!((r[a] - r[b]).abs() < 1e-8, "{} vs {}", r[a], r[b]);
        }
    }

    #[test]
    fn mirrored_square_has_symmetric_boundary() {
        // reflect every sample through the anti-diagonal: x -> (1 - x2, 1 - x1)
        let base = generate(&SyntheticSpec {
            generator: Generator::box2d(),
            n: 600,
            seed: 11,
            labels: vec![],
        })
        .unwrap();
        let mut pts: Vec<Vec<f64>> = base.points().map(|p| p.to_vec()).collect();
        pts.extend(base.points().map(|p| vec![1.0 - p[1], 1.0 - p[0]]));
        let mut cloud = PointCloud::from_points(&pts).unwrap();
        cloud
            .append_labeled(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[0.0, 1.0])
            .unwrap();
        let eps = auto_eps(3.0, 1200, 2);
        let settings = MethodSettings {
            alpha: 5.0,
            zeta: ZetaSpec::Scaled { scaled: 1e6 },
            solver: SolveOptions {
                backend: Backend::Dense,
                ..SolveOptions::default()
            },
            ..MethodSettings::default()
        };
        let inst = Instance::build(cloud, eps, KernelSpec::default(), settings.zeta).unwrap();
        let solved = inst.solve(&settings).unwrap();
        let labeled = inst.cloud.label_mask();
        for s in &solved {
            let u = &s.u.values;
            for i in 0..600 {
                assert!((u[i] + u[i + 600] - 1.0).abs() < 1e-7);
            }
            let nodes = boundary_nodes(&inst.graph, &labeled, u);
            if s.method == Method::Pw {
                let dev = diagonal_deviation(&inst.cloud, &nodes);
                assert!(dev < 2.0 * eps, "deviation {dev} vs eps {eps}");
            }
        }
    }

    #[test]
    fn strip_error_counts_disagreements() {
        let mut cloud =
            PointCloud::from_points(&[vec![0.2, 0.0, 0.0], vec![0.8, 0.0, 0.0]]).unwrap();
        cloud
            .append_labeled(&[vec![0.0, 0.2, 0.2]], &[0.0])
            .unwrap();
        assert_eq!(strip_error(&cloud, &[0.1, 0.9, 0.0]), 0.0);
        assert_eq!(strip_error(&cloud, &[0.6, 0.9, 0.0]), 0.5);
        assert_eq!(strip_error(&cloud, &[0.5, 0.5, 0.0]), 0.5);
    }
}
