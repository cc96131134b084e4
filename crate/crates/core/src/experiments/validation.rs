//! Checks of discrete solutions and operators against continuum predictions.

use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::common::{auto_eps, elapsed_ms, num, EpsSpec, ExperimentReport, KernelSpec};
use super::generate::{generate, Generator, LabelPoint, SyntheticSpec};
use super::rng::trial_seed;
use crate::error::{Error, Result};
use crate::geometry::{distance, nearest_labels, PointCloud, SpatialIndex};
use crate::graph::{attach_energy_weights, build_eps_graph, EnergyWeights};
use crate::kernels::{
    kernel_moments, GammaVariant, KernelProfile, WeightProfile, ZetaSpec, SUPPORT_RADIUS_FACTOR,
};
use crate::solve::{apply_laplacian, MethodProblem, NodeFunction, SolveOptions};

/// How the outer ring of the radial oracle is pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RingValues {
    /// `u = 1` on the whole ring.
    #[default]
    One,
    /// `u = |x|^{α+2-d}`, the oracle itself.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadialParams {
    pub dim: usize,
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    /// `auto` is `2 / n^{1/d}`.
    pub eps: EpsSpec,
    pub kernel: KernelSpec,
    /// `None` uses `2ε`.
    pub ring_width: Option<f64>,
    pub ring_values: RingValues,
    /// Truncation of `|x|^{-α}`.
    pub zeta: ZetaSpec,
    pub bins: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub solver: SolveOptions,
}

impl Default for RadialParams {
    fn default() -> Self {
        RadialParams {
            dim: 2,
            alpha: 2.0,
            n: 30_000,
            seed: 0,
            eps: EpsSpec::Auto,
            kernel: KernelSpec::default(),
            ring_width: None,
            ring_values: RingValues::One,
            zeta: ZetaSpec::Scaled { scaled: 1e6 },
            bins: 20,
            r_min: 0.1,
            r_max: 0.9,
            solver: SolveOptions::default(),
        }
    }
}

/// Binned radial profile against `r^β`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub exponent: f64,
    pub bin_centers: Vec<f64>,
    pub bin_means: Vec<f64>,
    pub bin_oracle: Vec<f64>,
    pub bin_counts: Vec<usize>,
    pub relative_l2: f64,
    pub monotone: bool,
}

/// Bins `(r, u)` pairs on `[r_min, r_max]` and compares bin means of `u` with
/// bin means of `r^β`. Halves the bin count while any bin is empty.
pub fn radial_profile(
    samples: &[(f64, f64)],
    exponent: f64,
    mut bins: usize,
    r_min: f64,
    r_max: f64,
) -> Result<RadialProfile> {
    if !(r_min < r_max) || bins == 0 {
        return Err(Error::config(
            "radial bins need r_min < r_max and at least one bin",
        ));
    }
    loop {
        let width = (r_max - r_min) / bins as f64;
        let mut sum_u = vec![0.0; bins];
        let mut sum_o = vec![0.0; bins];
        let mut count = vec![0usize; bins];
        for &(r, u) in samples {
            if r < r_min || r >= r_max {
                continue;
            }
            let b = (((r - r_min) / width) as usize).min(bins - 1);
            sum_u[b] += u;
            sum_o[b] += r.powf(exponent);
            count[b] += 1;
        }
        if count.iter().any(|&c| c == 0) {
            if bins == 1 {
                return Err(Error::EmptyRegion(format!(
                    "no nodes with radius in [{r_min}, {r_max})"
                )));
            }
            warn!(
                "empty radial bin with {bins} bins; retrying with {}",
                bins / 2
            );
            bins /= 2;
            continue;
        }
        let means: Vec<f64> = sum_u
            .iter()
            .zip(&count)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let oracle: Vec<f64> = sum_o
            .iter()
            .zip(&count)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let err: f64 = means
            .iter()
            .zip(&oracle)
            .map(|(m, o)| (m - o).powi(2))
            .sum();
        let norm: f64 = oracle.iter().map(|o| o * o).sum();
        return Ok(RadialProfile {
            exponent,
            bin_centers: (0..bins)
                .map(|b| r_min + (b as f64 + 0.5) * width)
                .collect(),
            monotone: means.windows(2).all(|w| w[0] <= w[1]),
            bin_means: means,
            bin_oracle: oracle,
            bin_counts: count,
            relative_l2: (err / norm).sqrt(),
        });
    }
}

/// Solves the properly-weighted problem with `γ(x) = min(|x|^{-α}, ζ)` on the
/// unit ball, `u(0) = 0` and an outer ring pinned, and compares the radial
/// profile with the exact solution `|x|^{α+2-d}`.
pub fn radial_oracle_check(p: &RadialParams) -> Result<(RadialProfile, ExperimentReport)> {
    let start = Instant::now();
    let d = p.dim;
    let beta = p.alpha + 2.0 - d as f64;
    if beta <= 0.0 {
        return Err(Error::config(format!(
            "radial oracle needs alpha > d - 2, got alpha = {} in d = {d}",
            p.alpha
        )));
    }
    let eps = p.eps.resolve(|| auto_eps(2.0, p.n, d))?;
    let kernel = p.kernel.profile()?;
    let ring_width = p.ring_width.unwrap_or(SUPPORT_RADIUS_FACTOR * eps);
    let cloud = generate(&SyntheticSpec {
        generator: Generator::DiscWithRing {
            dim: d,
            ring_width,
            center_value: 0.0,
            ring_exponent: match p.ring_values {
                RingValues::One => None,
                RingValues::Exact => Some(beta),
            },
        },
        n: p.n,
        seed: p.seed,
        labels: vec![],
    })?;
    let graph = build_eps_graph(&cloud, eps, &kernel)?;
    let zeta = p.zeta.resolve(cloud.sample_count(), eps);
    let origin = vec![0.0; d];
    let gamma: Vec<f64> = cloud
        .points()
        .map(|x| distance(x, &origin).powf(-p.alpha).min(zeta))
        .collect();
    let weights = EnergyWeights::with_scaling(gamma, cloud.sample_count(), eps);
    let problem = MethodProblem::pw(&graph, &cloud, &weights)?;
    let (u, stats) = problem.solve(&cloud.labels().values, &p.solver)?;
    let samples: Vec<(f64, f64)> = (0..cloud.len())
        .filter(|&i| !u.pinned[i])
        .map(|i| (distance(cloud.point(i), &origin), u.values[i]))
        .collect();
    let profile = radial_profile(&samples, beta, p.bins, p.r_min, p.r_max)?;

    let mut report = ExperimentReport::new("radial", p)?;
    report.seeds = vec![p.seed];
    report.resolved = json!({
        "eps": eps,
        "zeta": zeta,
        "ring_width": ring_width,
        "exponent": beta,
        "nodes": cloud.len(),
        "labels": cloud.labels().len(),
    });
    report.metrics = json!({
        "profile": profile,
        "relative_l2": profile.relative_l2,
        "iterations": stats.iterations,
    });
    report.timing = json!({ "total_ms": elapsed_ms(start) });
    Ok((profile, report))
}

/// Smooth test functions with exact derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Constant {
        value: f64,
    },
    /// `a · x`
    Linear {
        coefficients: Vec<f64>,
    },
    /// `x_k²`
    Square {
        axis: usize,
    },
    /// `sin(π x_1) cos(π x_2)`
    SinCos,
}

impl TestFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant { value } => *value,
            TestFunction::Linear { coefficients } => {
                coefficients.iter().zip(x).map(|(a, b)| a * b).sum()
            }
            TestFunction::Square { axis } => x[*axis] * x[*axis],
            TestFunction::SinCos => {
                let pi = std::f64::consts::PI;
                (pi * x[0]).sin() * (pi * x[1]).cos()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        match self {
            TestFunction::Constant { .. } => {}
            TestFunction::Linear { coefficients } => g.copy_from_slice(coefficients),
            TestFunction::Square { axis } => g[*axis] = 2.0 * x[*axis],
            TestFunction::SinCos => {
                let pi = std::f64::consts::PI;
                g[0] = pi * (pi * x[0]).cos() * (pi * x[1]).cos();
                g[1] = -pi * (pi * x[0]).sin() * (pi * x[1]).sin();
            }
        }
        g
    }

    /// Row-major `d × d` Hessian.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut h = vec![0.0; d * d];
        match self {
            TestFunction::Constant { .. } | TestFunction::Linear { .. } => {}
            TestFunction::Square { axis } => h[axis * d + axis] = 2.0,
            TestFunction::SinCos => {
                let pi = std::f64::consts::PI;
                let (s0, c0) = (pi * x[0]).sin_cos();
                let (s1, c1) = (pi * x[1]).sin_cos();
                h[0] = -pi * pi * s0 * c1;
                h[1] = -pi * pi * c0 * s1;
                h[d] = h[1];
                h[d + 1] = -pi * pi * s0 * c1;
            }
        }
        h
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let ok = match self {
            TestFunction::Constant { .. } => true,
            TestFunction::Linear { coefficients } => coefficients.len() == dim,
            TestFunction::Square { axis } => *axis < dim,
            TestFunction::SinCos => dim >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "test function {self:?} does not fit dimension {dim}"
            )))
        }
    }

    /// Compares the analytic gradient and Hessian with central differences at
    /// `x`; returns the largest relative error.
    pub fn finite_difference_error(&self, x: &[f64], step: f64) -> f64 {
        let d = x.len();
        let grad = self.gradient(x);
        let hess = self.hessian(x);
        let mut worst: f64 = 0.0;
        let mut rel = |exact: f64, approx: f64| {
            let scale = exact.abs().max(1.0);
            worst = worst.max((exact - approx).abs() / scale);
        };
        for k in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += step;
            xm[k] -= step;
            rel(grad[k], (self.value(&xp) - self.value(&xm)) / (2.0 * step));
            let gp = self.gradient(&xp);
            let gm = self.gradient(&xm);
            for j in 0..d {
                rel(hess[j * d + k], (gp[j] - gm[j]) / (2.0 * step));
            }
        }
        worst
    }
}

/// A test function evaluated at `x - origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyProbe {
    pub function: TestFunction,
    pub origin: Vec<f64>,
}

impl ConsistencyProbe {
    fn shifted(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.origin).map(|(a, b)| a - b).collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.function.value(&self.shifted(x))
    }

    /// Checks the analytic derivatives on a grid of the unit box.
    pub fn verify(&self, dim: usize) -> Result<()> {
        self.function.validate(dim)?;
        if self.origin.len() != dim {
            return Err(Error::config("probe origin has the wrong dimension"));
        }
        for k in 0..25 {
            let x: Vec<f64> = (0..dim)
                .map(|j| ((k * (j + 3) + 1) % 25) as f64 / 24.0)
                .collect();
            let err = self
                .function
                .finite_difference_error(&self.shifted(&x), 1e-5);
            if err >= 1e-6 {
                return Err(Error::config(format!(
                    "analytic derivatives disagree with finite differences ({err:e})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsistencyParams {
    pub probe: ConsistencyProbe,
    pub schedule: Vec<usize>,
    pub seed: u64,
    pub kernel: KernelSpec,
    /// Bandwidth at the first sample size.
    pub eps: f64,
    /// `ε_n = eps · (n / n_0)^{-eps_decay}`.
    pub eps_decay: f64,
    pub alpha: f64,
    pub r0: f64,
}

impl Default for ConsistencyParams {
    fn default() -> Self {
        ConsistencyParams {
            probe: ConsistencyProbe {
                function: TestFunction::Square { axis: 0 },
                origin: vec![0.5, 0.5],
            },
            schedule: vec![10_000, 20_000, 40_000],
            seed: 0,
            kernel: KernelSpec::Indicator,
            eps: 0.2,
            eps_decay: 0.0,
            alpha: 2.0,
            r0: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub eps: f64,
    pub masked_nodes: usize,
    /// `max |ℒφ - (σ_η/2) Δ_ρ φ|` over the mask.
    pub max_error: f64,
    /// `max |(σ_η/2) Δ_ρ φ|` over the mask.
    pub max_target: f64,
    /// `max_error / max_target`.
    pub relative: f64,
}

/// Unit-box labels at the corners; far from the center, where the mask lives.
fn corner_labels(dim: usize) -> Vec<LabelPoint> {
    (0..1usize << dim)
        .map(|mask| {
            let at = (0..dim).map(|k| ((mask >> k) & 1) as f64).collect();
            LabelPoint::new(at, 0.0)
        })
        .collect()
}

/// `ℒφ(x)` at a single node via a range query; the same sum as
/// [`apply_laplacian`] without materializing the graph.
#[allow(clippy::too_many_arguments)]
fn operator_at(
    index: &SpatialIndex,
    kernel: &KernelProfile,
    eps: f64,
    gamma: &[f64],
    phi: &[f64],
    x: usize,
    scale: f64,
) -> Result<f64> {
    let cloud = index.cloud();
    let px = cloud.point(x);
    let mut acc = 0.0;
    for (y, d2) in index.range_query_with_distances(px, kernel.support() * eps)? {
        if y == x {
            continue;
        }
        let w = kernel.eta_eps(d2.sqrt(), eps, cloud.dim())?;
        acc += (gamma[x] + gamma[y]) * w * (phi[y] - phi[x]);
    }
    Ok(scale * acc)
}

/// Maximum masked deviation of the graph operator (untruncated `γ`) from the
/// continuum operator `(σ_η/2) ρ^{-1} div(γ ρ² ∇φ)` for each `n` of the
/// schedule, with `ρ ≡ 1` on the unit box.
pub fn consistency_check(p: &ConsistencyParams) -> Result<(Vec<ConsistencyRow>, ExperimentReport)> {
    let start = Instant::now();
    let d = p.probe.origin.len();
    p.probe.verify(d)?;
    if p.schedule.is_empty() || !(p.eps > 0.0) {
        return Err(Error::config(
            "consistency check needs a schedule and eps > 0",
        ));
    }
    let kernel = p.kernel.profile()?;
    let sigma = kernel_moments(&kernel, d)?.sigma_eta;
    // untruncated γ: ζ = ∞ is expressed as the two-region variant at r = 0
    let profile = WeightProfile {
        zeta: f64::INFINITY,
        variant: GammaVariant::TwoRegion { r: 0.0 },
        ..WeightProfile::new(p.alpha, p.r0, 2.0)?
    };
    profile.validate()?;
    let n0 = p.schedule[0] as f64;
    let mut rows = Vec::new();
    let mut report = ExperimentReport::new("consistency", p)?;
    for (k, &n) in p.schedule.iter().enumerate() {
        let seed = trial_seed(p.seed, k as u64);
        report.seeds.push(seed);
        let eps = p.eps * (n as f64 / n0).powf(-p.eps_decay);
        let cloud = generate(&SyntheticSpec {
            generator: Generator::UniformBox { dim: d },
            n,
            seed,
            labels: corner_labels(d),
        })?;
        let nearest = nearest_labels(&cloud)?;
        let gamma: Vec<f64> = nearest
            .iter()
            .map(|&(r, _)| profile.gamma_zeta(r))
            .collect();
        let phi: Vec<f64> = cloud.points().map(|x| p.probe.value(x)).collect();
        let margin = SUPPORT_RADIUS_FACTOR * eps;
        let mask: Vec<usize> = (0..cloud.sample_count())
            .filter(|&i| {
                let x = cloud.point(i);
                nearest[i].0 > margin && x.iter().all(|&c| c > margin && c < 1.0 - margin)
            })
            .collect();
        if mask.is_empty() {
            return Err(Error::EmptyRegion(format!(
                "no nodes farther than {margin} from labels and boundary"
            )));
        }
        let index = SpatialIndex::build(&cloud);
        let scale = 1.0 / (2.0 * cloud.sample_count() as f64 * eps * eps);
        let per_node: Vec<(f64, f64)> = mask
            .par_iter()
            .map(|&i| {
                let x = cloud.point(i);
                let (r, z) = nearest[i];
                let s = p.probe.shifted(x);
                let grad = p.probe.function.gradient(&s);
                let hess = p.probe.function.hessian(&s);
                let lap: f64 = (0..d).map(|k| hess[k * d + k]).sum();
                // ∇γ for γ = 1 + (r0/r)^α, pointing away from the nearest label
                let dgamma = -p.alpha * p.r0.powf(p.alpha) * r.powf(-p.alpha - 1.0);
                let zpt = cloud.point(z);
                let drift: f64 = (0..d).map(|k| dgamma * (x[k] - zpt[k]) / r * grad[k]).sum();
                let target = 0.5 * sigma * (gamma[i] * lap + drift);
                let discrete = operator_at(&index, &kernel, eps, &gamma, &phi, i, scale)?;
                Ok(((discrete - target).abs(), target.abs()))
            })
            .collect::<Result<_>>()?;
        let max_error = per_node.iter().map(|e| e.0).fold(0.0, f64::max);
        let max_target = per_node.iter().map(|e| e.1).fold(0.0, f64::max);
        rows.push(ConsistencyRow {
            n,
            eps,
            masked_nodes: mask.len(),
            max_error,
            max_target,
            relative: max_error / max_target,
        });
    }
    report.resolved = json!({ "sigma_eta": sigma, "dim": d });
    report.metrics = json!({
        "rows": rows,
        "relative": rows.iter().map(|r| num(r.relative)).collect::<Vec<_>>(),
    });
    report.timing = json!({ "total_ms": elapsed_ms(start) });
    Ok((rows, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub radii: Vec<f64>,
    pub envelope: Vec<f64>,
    pub slope: f64,
}

/// Envelope `M(r) = max_{B(z, r)} |u - u(z)|` on dyadic radii from `r_max`
/// down to `r_min`, and the least-squares slope of `log M` against `log r`.
///
/// Radii whose ball holds fewer than `min_nodes` nodes are dropped with a
/// warning.
pub fn holder_probe(
    u: &NodeFunction,
    cloud: &PointCloud,
    label: usize,
    r_min: f64,
    r_max: f64,
    min_nodes: usize,
) -> Result<HolderReport> {
    if !(0.0 < r_min && r_min < r_max) {
        return Err(Error::config("holder probe needs 0 < r_min < r_max"));
    }
    let z = cloud.point(label);
    let gz = u.values[label];
    let mut dist: Vec<(f64, f64)> = (0..cloud.len())
        .filter(|&i| i != label)
        .map(|i| (distance(cloud.point(i), z), (u.values[i] - gz).abs()))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut radii = Vec::new();
    let mut r = r_max;
    while r >= r_min * (1.0 - 1e-12) {
        radii.push(r);
        r /= 2.0;
    }
    radii.reverse();
    let mut kept_r = Vec::new();
    let mut envelope = Vec::new();
    for &r in &radii {
        let inside = dist.partition_point(|e| e.0 <= r);
        if inside < min_nodes {
            warn!("radius {r} holds {inside} nodes; dropping it from the fit");
            continue;
        }
        kept_r.push(r);
        envelope.push(dist[..inside].iter().map(|e| e.1).fold(0.0, f64::max));
    }
    if kept_r.len() < 2 {
        return Err(Error::EmptyRegion("fewer than two resolvable radii".into()));
    }
    let pts: Vec<(f64, f64)> = kept_r
        .iter()
        .zip(&envelope)
        .filter(|(_, &m)| m > 0.0)
        .map(|(r, m)| (r.ln(), m.ln()))
        .collect();
    let slope = if pts.len() < 2 {
        0.0
    } else {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Ok(HolderReport {
        radii: kept_r,
        envelope,
        slope,
    })
}

/// Envelope probe around the `u = 0` label of the two-point box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderParams {
    pub n: usize,
    pub seed: u64,
    pub alpha: f64,
    pub r0: f64,
    pub zeta: ZetaSpec,
    /// `auto` is `2 / sqrt(n)`.
    pub eps: EpsSpec,
    pub kernel: KernelSpec,
    /// Smallest radius in units of `ε`.
    pub inner: f64,
    /// Largest radius as a fraction of the label separation.
    pub outer: f64,
    pub min_nodes: usize,
    pub solver: SolveOptions,
}

impl Default for HolderParams {
    fn default() -> Self {
        HolderParams {
            n: 20_000,
            seed: 0,
            alpha: 4.0,
            r0: 1.0,
            zeta: ZetaSpec::Scaled { scaled: 1e6 },
            eps: EpsSpec::Auto,
            kernel: KernelSpec::default(),
            inner: 4.0,
            outer: 0.25,
            min_nodes: 5,
            solver: SolveOptions::default(),
        }
    }
}

pub fn holder_check(p: &HolderParams) -> Result<(HolderReport, ExperimentReport)> {
    let start = Instant::now();
    let eps = p.eps.resolve(|| auto_eps(2.0, p.n, 2))?;
    let cloud = generate(&SyntheticSpec {
        generator: Generator::box2d(),
        n: p.n,
        seed: p.seed,
        labels: super::synthetic::two_point_labels(2),
    })?;
    let label = cloud.labels().nodes[0];
    let graph = build_eps_graph(&cloud, eps, &p.kernel.profile()?)?;
    let zeta = p.zeta.resolve(cloud.sample_count(), eps);
    let weights = attach_energy_weights(&graph, &cloud, &WeightProfile::new(p.alpha, p.r0, zeta)?)?;
    let (u, _) =
        MethodProblem::pw(&graph, &cloud, &weights)?.solve(&cloud.labels().values, &p.solver)?;
    let holder = holder_probe(&u, &cloud, label, p.inner * eps, p.outer, p.min_nodes)?;

    let mut report = ExperimentReport::new("holder", p)?;
    report.seeds = vec![p.seed];
    report.resolved = json!({ "eps": eps, "zeta": zeta, "nodes": cloud.len() });
    report.metrics = json!({
        "radii": holder.radii,
        "envelope": holder.envelope,
        "slope": num(holder.slope),
    });
    report.timing = json!({ "total_ms": elapsed_ms(start) });
    Ok((holder, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierParams {
    pub n: usize,
    pub seed: u64,
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub r0: f64,
    pub zeta: ZetaSpec,
    /// `auto` is `0.2 / n^{1/(d+4)}`; pointwise sign information needs
    /// `n ε^{d+2}` to grow, which the `n^{-1/d}` rules do not give.
    pub eps: EpsSpec,
    pub kernel: KernelSpec,
    /// Inner radius in units of `ε`.
    pub inner: f64,
    pub outer: f64,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            n: 40_000,
            seed: 0,
            dim: 2,
            alpha: 4.0,
            beta: 1.0,
            r0: 1.0,
            zeta: ZetaSpec::Scaled { scaled: 1e6 },
            eps: EpsSpec::Auto,
            kernel: KernelSpec::default(),
            inner: 4.0,
            outer: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierResult {
    pub annulus_nodes: usize,
    pub violations: usize,
    pub fraction: f64,
    pub max_abs: f64,
}

/// Sign of `ℒφ` for `φ = |x - y|^β` around a single label `y` at the center
/// of the unit box, over nodes with `inner·ε < |x - y| <= outer`.
pub fn barrier_check(p: &BarrierParams) -> Result<(BarrierResult, ExperimentReport)> {
    let start = Instant::now();
    let eps = p.eps.resolve(|| auto_eps(0.2, p.n, p.dim + 4))?;
    let center = vec![0.5; p.dim];
    let cloud = generate(&SyntheticSpec {
        generator: Generator::UniformBox { dim: p.dim },
        n: p.n,
        seed: p.seed,
        labels: vec![LabelPoint::new(center.clone(), 0.0)],
    })?;
    let graph = build_eps_graph(&cloud, eps, &p.kernel.profile()?)?;
    let zeta = p.zeta.resolve(cloud.sample_count(), eps);
    let weights = attach_energy_weights(&graph, &cloud, &WeightProfile::new(p.alpha, p.r0, zeta)?)?;
    let phi: Vec<f64> = cloud
        .points()
        .map(|x| {
            if p.beta == 0.0 {
                1.0
            } else {
                distance(x, &center).powf(p.beta)
            }
        })
        .collect();
    let annulus: Vec<usize> = (0..cloud.len())
        .filter(|&i| {
            let r = distance(cloud.point(i), &center);
            r > p.inner * eps && r <= p.outer
        })
        .collect();
    if annulus.is_empty() {
        return Err(Error::EmptyRegion(format!(
            "no nodes with {}ε < |x - y| <= {}",
            p.inner, p.outer
        )));
    }
    let values: Vec<f64> = annulus
        .iter()
        .map(|&i| apply_laplacian(&graph, &weights, &phi, i))
        .collect();
    let violations = values.iter().filter(|&&v| v >= 0.0).count();
    let result = BarrierResult {
        annulus_nodes: annulus.len(),
        violations,
        fraction: violations as f64 / annulus.len() as f64,
        max_abs: values.iter().map(|v| v.abs()).fold(0.0, f64::max),
    };
    let mut report = ExperimentReport::new("barrier", p)?;
    report.seeds = vec![p.seed];
    report.resolved = json!({ "eps": eps, "zeta": zeta, "crossover_radius": WeightProfile::new(p.alpha, p.r0, zeta)?.crossover_radius() });
    report.metrics = serde_json::to_value(&result).map_err(|e| Error::data(e.to_string()))?;
    report.timing = json!({ "total_ms": elapsed_ms(start) });
    Ok((result, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SparseGraph;

    #[test]
    fn test_function_derivatives() {
        let fns = [
            TestFunction::Constant { value: 3.0 },
            TestFunction::Linear {
                coefficients: vec![1.0, -2.0],
            },
            TestFunction::Square { axis: 0 },
            TestFunction::SinCos,
        ];
        for f in &fns {
            for x in [[0.1, 0.7], [0.5, 0.5], [0.93, 0.2]] {
                assert!(f.finite_difference_error(&x, 1e-5) < 1e-6, "{f:?}");
            }
        }
        let bad = ConsistencyProbe {
            function: TestFunction::Square { axis: 2 },
            origin: vec![0.0, 0.0],
        };
        assert!(bad.verify(2).is_err());
    }

    #[test]
    fn range_operator_matches_graph_laplacian() {
        let cloud = generate(&SyntheticSpec {
            generator: Generator::box2d(),
            n: 300,
            seed: 2,
            labels: corner_labels(2),
        })
        .unwrap();
        let kernel = KernelProfile::gaussian(0.5).unwrap();
        let eps = 0.08;
        let graph: SparseGraph = build_eps_graph(&cloud, eps, &kernel).unwrap();
        let profile = WeightProfile::new(2.0, 0.1, 1e3).unwrap();
        let ew = attach_energy_weights(&graph, &cloud, &profile).unwrap();
        let phi: Vec<f64> = cloud.points().map(|x| x[0] * x[0] + x[1]).collect();
        let index = SpatialIndex::build(&cloud);
        for i in 0..cloud.len() {
            let a = apply_laplacian(&graph, &ew, &phi, i);
            let b = operator_at(
                &index,
                &kernel,
                eps,
                &ew.node_gamma,
                &phi,
                i,
                ew.operator_scale,
            )
            .unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn constant_probe_is_exact() {
        let p = ConsistencyParams {
            probe: ConsistencyProbe {
                function: TestFunction::Constant { value: 2.0 },
                origin: vec![0.5, 0.5],
            },
            schedule: vec![2000],
            ..ConsistencyParams::default()
        };
        let (rows, _) = consistency_check(&p).unwrap();
        assert_eq!(rows[0].max_error, 0.0);
        assert_eq!(rows[0].max_target, 0.0);
    }

    #[test]
    fn radial_profile_of_exact_data() {
        let samples: Vec<(f64, f64)> = (0..1000)
            .map(|i| {
                let r = i as f64 / 1000.0;
                (r, r * r)
            })
            .collect();
        let prof = radial_profile(&samples, 2.0, 20, 0.1, 0.9).unwrap();
        assert!(prof.relative_l2 < 1e-15);
        assert!(prof.monotone);
        // a gap in the data forces fewer bins
        let sparse: Vec<(f64, f64)> = samples
            .iter()
            .cloned()
            .filter(|s| s.0 < 0.3 || s.0 > 0.34)
            .collect();
        let prof = radial_profile(&sparse, 2.0, 20, 0.1, 0.9).unwrap();
        assert!(prof.bin_counts.len() < 20);
    }

    #[test]
    fn holder_envelope_examples() {
        let pts: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64 / 200.0]).collect();
        let mut cloud = PointCloud::from_points(&pts).unwrap();
        cloud
            .set_labels(crate::geometry::LabelSet::scalar(vec![0], vec![0.0]))
            .unwrap();
        let flat = NodeFunction {
            values: vec![0.0; 200],
            pinned: vec![false; 200],
        };
        let rep = holder_probe(&flat, &cloud, 0, 0.02, 0.5, 2).unwrap();
        assert!(rep.envelope.iter().all(|&m| m == 0.0));
        let sqrt = NodeFunction {
            values: pts.iter().map(|p| p[0].sqrt()).collect(),
            pinned: vec![false; 200],
        };
        let rep = holder_probe(&sqrt, &cloud, 0, 0.02, 0.5, 2).unwrap();
        assert!(rep.envelope.windows(2).all(|w| w[0] <= w[1]));
        assert!((rep.slope - 0.5).abs() < 0.02, "{}", rep.slope);
    }

    #[test]
    fn constant_barrier_is_flat() {
        let p = BarrierParams {
            n: 3000,
            beta: 0.0,
            eps: EpsSpec::Value(0.04),
            ..BarrierParams::default()
        };
        let (res, _) = barrier_check(&p).unwrap();
        assert_eq!(res.max_abs, 0.0);
    }
}
