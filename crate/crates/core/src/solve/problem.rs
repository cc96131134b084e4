use serde::{Deserialize, Serialize};

use super::linear::{cg_solve, default_max_iter, dense_solve, CsrMatrix, Preconditioner};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::graph::{check_labeled_components, SparseGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Cg,
    /// Dense Cholesky; limited to small systems.
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub tol: f64,
    /// `None` means `10 √m + 1000` for `m` unknowns.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
    pub backend: Backend,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: None,
            preconditioner: Preconditioner::Jacobi,
            backend: Backend::Cg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Unknown(usize),
    /// Labeled node; holds the position in the label list.
    Label(usize),
    /// Forced equal to a label by an infinite edge weight.
    Tied(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Reduced system for the constrained Dirichlet problem.
///
/// Labeled values are eliminated: for unknowns `x`,
/// `Σ_y w̃_xy (u(x) - u(y)) = 0` becomes `A u_U = b` with
/// `b_x = Σ_{y pinned} w̃_xy g(y)`. `A` is symmetric positive definite as long
/// as every component touches a label. One assembled problem serves any number
/// of label-value vectors, which is what one-vs-rest classification needs.
#[derive(Debug, Clone)]
pub struct LaplaceProblem {
    role: Vec<Role>,
    unknowns: Vec<usize>,
    matrix: CsrMatrix,
    coupling: Vec<Vec<(usize, f64)>>,
    label_count: usize,
    conflicts: Vec<(usize, usize, usize)>,
}

impl LaplaceProblem {
    /// `edge_weight(x, y, w)` maps a base weight to the symmetric energy weight.
    /// Labeled nodes flagged in `infinite` tie all their neighbors to their value.
    pub fn assemble(
        graph: &SparseGraph,
        cloud: &PointCloud,
        infinite: Option<&[bool]>,
        edge_weight: impl Fn(usize, usize, f64) -> f64,
    ) -> Result<Self> {
        let n = graph.n();
        if cloud.len() != n {
            return Err(Error::data(format!(
                "graph has {n} nodes but the cloud has {}",
                cloud.len()
            )));
        }
        let labels = &cloud.labels().nodes;
        if labels.is_empty() {
            return Err(Error::NoLabels);
        }
        check_labeled_components(graph, cloud)?;

        let mut role: Vec<Option<Role>> = vec![None; n];
        for (li, &z) in labels.iter().enumerate() {
            role[z] = Some(Role::Label(li));
        }
        let mut conflicts = Vec::new();
        if let Some(inf) = infinite {
            for (li, &z) in labels.iter().enumerate() {
                if !inf[z] {
                    continue;
                }
                for &y in graph.row(z).0 {
                    match role[y] {
                        None => role[y] = Some(Role::Tied(li)),
                        Some(Role::Tied(other)) if other != li => conflicts.push((y, other, li)),
                        _ => {}
                    }
                }
            }
        }
        let mut unknowns = Vec::new();
        let role: Vec<Role> = role
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.unwrap_or_else(|| {
                    unknowns.push(i);
                    Role::Unknown(unknowns.len() - 1)
                })
            })
            .collect();

        let mut rows = Vec::with_capacity(unknowns.len());
        let mut coupling = Vec::with_capacity(unknowns.len());
        for (k, &x) in unknowns.iter().enumerate() {
            let (cols, vals) = graph.row(x);
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(cols.len() + 1);
            let mut bound: Vec<(usize, f64)> = Vec::new();
            let mut diag = 0.0;
            for (&y, &w) in cols.iter().zip(vals) {
                let wt = edge_weight(x, y, w);
                if !wt.is_finite() {
                    return Err(Error::Solver(format!(
                        "edge ({x}, {y}) has non-finite energy weight"
                    )));
                }
                diag += wt;
                match role[y] {
                    Role::Unknown(j) => row.push((j, -wt)),
                    Role::Label(li) | Role::Tied(li) => bound.push((li, wt)),
                }
            }
            // columns of unknowns follow node order, so the row stays sorted
            let at = row.partition_point(|e| e.0 < k);
            row.insert(at, (k, diag));
            rows.push(row);
            bound.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(bound.len());
            for (li, wt) in bound {
                match merged.last_mut() {
                    Some(last) if last.0 == li => last.1 += wt,
                    _ => merged.push((li, wt)),
                }
            }
            coupling.push(merged);
        }
        Ok(LaplaceProblem {
            role,
            unknowns,
            matrix: CsrMatrix::from_rows(rows),
            coupling,
            label_count: labels.len(),
            conflicts,
        })
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn rhs(&self, label_values: &[f64]) -> Vec<f64> {
        self.coupling
            .iter()
            .map(|c| c.iter().map(|&(li, w)| w * label_values[li]).sum())
            .collect()
    }

    /// Solves for the given label values (aligned with the cloud's label list)
    /// and returns the function on every node.
    pub fn solve(
        &self,
        label_values: &[f64],
        opts: &SolveOptions,
    ) -> Result<(Vec<f64>, SolveStats)> {
        if label_values.len() != self.label_count {
            return Err(Error::data(format!(
                "expected {} label values, got {}",
                self.label_count,
                label_values.len()
            )));
        }
        for &(node, a, b) in &self.conflicts {
            if label_values[a] != label_values[b] {
                return Err(Error::Solver(format!(
                    "node {node} is tied to labels with different values by infinite weights"
                )));
            }
        }
        let first = label_values[0];
        if label_values.iter().all(|&g| g == first) {
            return Ok((vec![first; self.role.len()], SolveStats::default()));
        }
        let b = self.rhs(label_values);
        let (x, stats) = match opts.backend {
            Backend::Dense => (dense_solve(&self.matrix, &b)?, SolveStats::default()),
            Backend::Cg => {
                let max_iter = opts
                    .max_iter
                    .unwrap_or_else(|| default_max_iter(self.unknowns.len()));
                let out = cg_solve(&self.matrix, &b, opts.tol, max_iter, opts.preconditioner)?;
                (
                    out.x,
                    SolveStats {
                        iterations: out.iterations,
                        residual: out.residual,
                    },
                )
            }
        };
        let values = self
            .role
            .iter()
            .map(|r| match *r {
                Role::Unknown(k) => x[k],
                Role::Label(li) | Role::Tied(li) => label_values[li],
            })
            .collect();
        Ok((values, stats))
    }

    /// Mask of nodes whose value is fixed (labels and label-tied nodes).
    pub fn pinned_mask(&self) -> Vec<bool> {
        self.role
            .iter()
            .map(|r| !matches!(r, Role::Unknown(_)))
            .collect()
    }
}
