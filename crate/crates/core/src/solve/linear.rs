//! Sparse SPD matrices, preconditioned conjugate gradient, and a dense
//! Cholesky path for small systems.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest system the dense direct path accepts.
pub const DENSE_LIMIT: usize = 2000;

/// A symmetric positive-definite operator `y = A x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Diagonal of `A`, used by the Jacobi preconditioner.
    fn diagonal(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

const PARALLEL_ROWS: usize = 4096;

impl CsrMatrix {
    /// Rows must be column-sorted.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        Self::from_rows(
            a.iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, &v)| v != 0.0)
                        .map(|(j, &v)| (j, v))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                row[j] += x;
            }
        }
        a
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (c, v) = self.row(i);
        c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        // each row is summed sequentially, so the result does not depend on the
        // number of worker threads
        if self.n >= PARALLEL_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .filter(|(&j, _)| j == i)
                    .map(|(_, &a)| a)
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final true relative residual `‖b - Ax‖ / ‖b‖`.
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Default iteration cap `10 √m + 1000` for `m` unknowns.
pub fn default_max_iter(unknowns: usize) -> usize {
    (10.0 * (unknowns as f64).sqrt()) as usize + 1000
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn true_residual<A: LinearOperator + ?Sized>(a: &A, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Preconditioned conjugate gradient from `x0 = 0`.
///
/// Converged means the true relative residual `‖b - Ax‖/‖b‖ <= tol`; the
/// recursively updated residual is only used to decide when to check.
pub fn cg_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    preconditioner: Preconditioner,
) -> Result<CgOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }
    let inv_diag: Option<Vec<f64>> = match preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => {
            let d = a.diagonal();
            if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
                return Err(Error::Solver(format!(
                    "nonpositive diagonal entry {} at row {i}",
                    d[i]
                )));
            }
            Some(d.into_iter().map(|v| 1.0 / v).collect())
        }
    };
    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(m) => {
            for ((zi, ri), mi) in z.iter_mut().zip(r).zip(m) {
                *zi = ri * mi;
            }
        }
        None => z.copy_from_slice(r),
    };

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = vec![1.0];

    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!(
                "operator is not positive definite (pᵀAp = {pap:e}) at iteration {it}"
            )));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let mut rel = norm(&r) / bnorm;
        if rel <= tol {
            true_residual(a, &x, b, &mut r);
            rel = norm(&r) / bnorm;
            history.push(rel);
            if rel <= tol {
                return Ok(CgOutcome {
                    x,
                    iterations: it,
                    residual: rel,
                    history,
                });
            }
            // drifted: restart from the true residual
            precondition(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        history.push(rel);
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    true_residual(a, &x, b, &mut r);
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: norm(&r) / bnorm,
        history,
    })
}

/// Dense Cholesky solve, for systems up to [`DENSE_LIMIT`] unknowns.
pub fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if n > DENSE_LIMIT {
        return Err(Error::config(format!(
            "dense solve limited to {DENSE_LIMIT} unknowns, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            m[(i, j)] += x;
        }
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Solver("matrix is not positive definite".into()))?;
    let x = chol.solve(&nalgebra::DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::from_dense(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let b = [1.0, -2.0, 3.0];
        for pc in [Preconditioner::None, Preconditioner::Jacobi] {
            let out = cg_solve(&a, &b, 1e-12, 10, pc).unwrap();
            assert_eq!(out.iterations, 1);
            assert_eq!(out.x, b.to_vec());
        }
    }

    #[test]
    fn jacobi_inverts_diagonal() {
        let diag: Vec<f64> = (0..20).map(|i| 10f64.powf(6.0 * i as f64 / 19.0)).collect();
        let a = CsrMatrix::from_rows(
            diag.iter()
                .enumerate()
                .map(|(i, &d)| vec![(i, d)])
                .collect(),
        );
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin() + 2.0).collect();
        let out = cg_solve(&a, &b, 1e-12, 100, Preconditioner::Jacobi).unwrap();
        assert!(out.iterations <= 2);
        for i in 0..20 {
            assert!((out.x[i] - b[i] / diag[i]).abs() <= 1e-12 * (b[i] / diag[i]).abs());
        }
    }

    #[test]
    fn random_spd_matches_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 50;
        let g: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        // A = GᵀG + n I
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| g[k][i] * g[k][j]).sum::<f64>();
            }
            a[i][i] += 1.0;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let m = CsrMatrix::from_dense(&a);
        let cg = cg_solve(&m, &b, 1e-13, 1000, Preconditioner::Jacobi).unwrap();
        // independent oracle: LU of the dense matrix
        let na = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let exact = na
            .lu()
            .solve(&nalgebra::DVector::from_vec(b.clone()))
            .unwrap();
        let chol = dense_solve(&m, &b).unwrap();
        for i in 0..n {
            assert!((cg.x[i] - exact[i]).abs() < 1e-8);
            assert!((chol[i] - exact[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let n = 40;
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0)];
                if i > 0 {
                    r.insert(0, (i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        let a = CsrMatrix::from_rows(rows);
        let b = vec![1.0; n];
        match cg_solve(&a, &b, 1e-14, 3, Preconditioner::None) {
            Err(Error::NotConverged {
                iterations,
                residual,
                history,
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-14);
                assert_eq!(history.len(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_rhs() {
        let a = CsrMatrix::from_dense(&[vec![2.0]]);
        let out = cg_solve(&a, &[0.0], 1e-10, 5, Preconditioner::Jacobi).unwrap();
        assert_eq!(out.x, vec![0.0]);
        assert_eq!(out.iterations, 0);
    }
}
