//! Constrained Dirichlet problems on graphs: the properly-weighted Laplacian
//! and the two baselines (standard Laplacian and the weighted nonlocal
//! Laplacian).

mod energy;
mod linear;
mod problem;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use energy::{apply_laplacian, dirichlet_energy, dirichlet_energy_one_sided, laplacian};
pub use linear::{
    cg_solve, default_max_iter, dense_solve, CgOutcome, CsrMatrix, LinearOperator, Preconditioner,
    DENSE_LIMIT,
};
pub use problem::{Backend, LaplaceProblem, SolveOptions, SolveStats};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::graph::{EnergyWeights, SparseGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Properly-weighted Laplacian.
    Pw,
    /// Standard graph Laplacian.
    Standard,
    /// Weighted nonlocal Laplacian.
    Wnll,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Pw, Method::Standard, Method::Wnll];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pw => "pw",
            Method::Standard => "standard",
            Method::Wnll => "wnll",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pw" => Ok(Method::Pw),
            "standard" => Ok(Method::Standard),
            "wnll" => Ok(Method::Wnll),
            other => Err(Error::config(format!(
                "unknown method {other:?} (expected pw, standard or wnll)"
            ))),
        }
    }
}

/// A function on all nodes; pinned entries carry the label values exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFunction {
    pub values: Vec<f64>,
    pub pinned: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
    pub wall_time_ms: f64,
}

/// Label multiplier `μ` of the weighted nonlocal Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WnllParams {
    pub mu: f64,
}

impl WnllParams {
    /// `μ` = (unlabeled count) / (labeled count).
    pub fn default_for(cloud: &PointCloud) -> Self {
        let labeled = cloud.labels().len().max(1);
        WnllParams {
            mu: cloud.sample_count() as f64 / labeled as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu > 0.0 && self.mu.is_finite() {
            Ok(())
        } else {
            Err(Error::config(format!(
                "wnll mu must be positive, got {}",
                self.mu
            )))
        }
    }
}

/// Assembled reduced system for one method, reusable across label vectors.
#[derive(Debug, Clone)]
pub struct MethodProblem {
    pub method: Method,
    problem: LaplaceProblem,
}

impl MethodProblem {
    pub fn pw(graph: &SparseGraph, cloud: &PointCloud, weights: &EnergyWeights) -> Result<Self> {
        if weights.node_gamma.len() != graph.n() {
            return Err(Error::data("energy weights do not match the graph"));
        }
        let infinite: Vec<bool> = weights.node_gamma.iter().map(|g| g.is_infinite()).collect();
        let problem = LaplaceProblem::assemble(
            graph,
            cloud,
            weights.has_infinite().then_some(&infinite[..]),
            |x, y, w| weights.edge_weight(x, y, w),
        )?;
        Ok(MethodProblem {
            method: Method::Pw,
            problem,
        })
    }

    pub fn standard(graph: &SparseGraph, cloud: &PointCloud) -> Result<Self> {
        let problem = LaplaceProblem::assemble(graph, cloud, None, |_, _, w| w)?;
        Ok(MethodProblem {
            method: Method::Standard,
            problem,
        })
    }

    /// Edges with exactly one labeled endpoint are weighted by `(1 + μ)/2`:
    /// the Hessian of the nonlocal objective in the unlabeled unknowns.
    pub fn wnll(graph: &SparseGraph, cloud: &PointCloud, params: WnllParams) -> Result<Self> {
        params.validate()?;
        let labeled = cloud.label_mask();
        let factor = 0.5 * (1.0 + params.mu);
        let problem = LaplaceProblem::assemble(graph, cloud, None, |x, y, w| {
            if labeled[x] != labeled[y] {
                factor * w
            } else {
                w
            }
        })?;
        Ok(MethodProblem {
            method: Method::Wnll,
            problem,
        })
    }

    pub fn problem(&self) -> &LaplaceProblem {
        &self.problem
    }

    pub fn solve(
        &self,
        label_values: &[f64],
        opts: &SolveOptions,
    ) -> Result<(NodeFunction, SolveStats)> {
        let (values, stats) = self.problem.solve(label_values, opts)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Solver(format!(
                "non-finite solution value at node {i}"
            )));
        }
        Ok((
            NodeFunction {
                values,
                pinned: self.problem.pinned_mask(),
            },
            stats,
        ))
    }
}

/// Weighted nonlocal objective
/// `Σ_{x∉Γ} Σ_y w (u(x) - u(y))² + μ Σ_{x∈Γ} Σ_y w (g(x) - u(y))²`.
pub fn wnll_objective(
    graph: &SparseGraph,
    cloud: &PointCloud,
    params: WnllParams,
    u: &[f64],
) -> f64 {
    let labeled = cloud.label_mask();
    let mut total = 0.0;
    for x in 0..graph.n() {
        let (cols, vals) = graph.row(x);
        let factor = if labeled[x] { params.mu } else { 1.0 };
        for (&y, &w) in cols.iter().zip(vals) {
            let d = u[x] - u[y];
            total += factor * w * d * d;
        }
    }
    total
}

fn report(method: Method, stats: SolveStats, energy: f64, start: Instant) -> SolveReport {
    SolveReport {
        method,
        iterations: stats.iterations,
        residual: stats.residual,
        energy,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Minimizes the properly-weighted energy subject to `u = g` on the labels.
pub fn solve_pw(
    graph: &SparseGraph,
    weights: &EnergyWeights,
    cloud: &PointCloud,
    opts: &SolveOptions,
) -> Result<(NodeFunction, SolveReport)> {
    let start = Instant::now();
    let (u, stats) =
        MethodProblem::pw(graph, cloud, weights)?.solve(&cloud.labels().values, opts)?;
    let energy = dirichlet_energy(graph, weights, &u.values);
    Ok((u, report(Method::Pw, stats, energy, start)))
}

/// Minimizes `Σ w_xy (u(x) - u(y))²` subject to `u = g` on the labels.
pub fn solve_standard(
    graph: &SparseGraph,
    cloud: &PointCloud,
    opts: &SolveOptions,
) -> Result<(NodeFunction, SolveReport)> {
    let start = Instant::now();
    let (u, stats) = MethodProblem::standard(graph, cloud)?.solve(&cloud.labels().values, opts)?;
    let uniform = EnergyWeights::uniform(graph, cloud.sample_count());
    let energy = dirichlet_energy(graph, &uniform, &u.values);
    Ok((u, report(Method::Standard, stats, energy, start)))
}

/// Minimizes the weighted nonlocal objective subject to `u = g` on the labels.
pub fn solve_wnll(
    graph: &SparseGraph,
    cloud: &PointCloud,
    params: WnllParams,
    opts: &SolveOptions,
) -> Result<(NodeFunction, SolveReport)> {
    let start = Instant::now();
    let (u, stats) =
        MethodProblem::wnll(graph, cloud, params)?.solve(&cloud.labels().values, opts)?;
    let scale = EnergyWeights::uniform(graph, cloud.sample_count()).energy_scale;
    let energy = scale * wnll_objective(graph, cloud, params, &u.values);
    Ok((u, report(Method::Wnll, stats, energy, start)))
}
