use serde::Serialize;

use crate::error::{Error, Result};

/// How a graph's base weights were produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Construction {
    EpsBall { eps: f64, kernel: String },
    Knn { k: usize, sigma_neighbor: usize },
    Explicit,
}

/// Symmetric nonnegative weight matrix in compressed sparse rows.
///
/// Columns within a row are sorted, zero weights and self-edges are never
/// stored, and `w_xy == w_yx` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    construction: Construction,
}

impl SparseGraph {
    /// Builds from per-row adjacency lists. Fails unless the result is symmetric.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>, construction: Construction) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.retain(|&(j, w)| j != i && w != 0.0);
            row.sort_by_key(|e| e.0);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::data(format!("duplicate edge ({i}, {})", w[0].0)));
                }
            }
            for (j, w) in row {
                if j >= n {
                    return Err(Error::data(format!(
                        "edge ({i}, {j}) out of range for {n} nodes"
                    )));
                }
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::data(format!(
                        "edge ({i}, {j}) has invalid weight {w}"
                    )));
                }
                cols.push(j);
                vals.push(w);
            }
            row_ptr.push(cols.len());
        }
        let graph = SparseGraph {
            n,
            row_ptr,
            cols,
            vals,
            construction,
        };
        if let Some((i, j)) = graph.first_asymmetry() {
            return Err(Error::data(format!(
                "weights are not symmetric at ({i}, {j})"
            )));
        }
        Ok(graph)
    }

    /// Builds from undirected edges, each listed once.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        construction: Construction,
    ) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::data(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i == j {
                continue;
            }
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        Self::from_rows(rows, construction)
    }

    /// Symmetrizes a directed weight list as `(W + Wᵀ) / 2`.
    pub fn symmetrize(
        directed: Vec<Vec<(usize, f64)>>,
        construction: Construction,
    ) -> Result<Self> {
        let n = directed.len();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in directed.iter().enumerate() {
            for &(j, w) in row {
                if j == i || w == 0.0 {
                    continue;
                }
                rows[i].push((j, w));
                rows[j].push((i, w));
            }
        }
        let rows = rows
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
                for (j, w) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == j => last.1 += w,
                        _ => merged.push((j, w)),
                    }
                }
                for e in &mut merged {
                    e.1 *= 0.5;
                }
                merged
            })
            .collect();
        Self::from_rows(rows, construction)
    }

    fn first_asymmetry(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                if self.weight(j, i).to_bits() != w.to_bits() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored directed entries (twice the undirected edge count).
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    /// Kernel bandwidth of an `ε`-ball graph.
    pub fn eps(&self) -> Option<f64> {
        match self.construction {
            Construction::EpsBall { eps, .. } => Some(eps),
            _ => None,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[range.clone()], &self.vals[range])
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .filter(move |(&j, _)| j > i)
                .map(move |(&j, &w)| (i, j, w))
        })
    }

    /// Multiplies every weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut g = self.clone();
        for v in &mut g.vals {
            *v *= factor;
        }
        g
    }

    /// Induced subgraph on `keep`; node `keep[k]` becomes node `k`.
    pub fn subgraph(&self, keep: &[usize]) -> Result<Self> {
        let mut new_index = vec![usize::MAX; self.n];
        for (k, &old) in keep.iter().enumerate() {
            new_index[old] = k;
        }
        let rows = keep
            .iter()
            .map(|&old| {
                let (cols, vals) = self.row(old);
                cols.iter()
                    .zip(vals)
                    .filter(|(&j, _)| new_index[j] != usize::MAX)
                    .map(|(&j, &w)| (new_index[j], w))
                    .collect()
            })
            .collect();
        Self::from_rows(rows, self.construction.clone())
    }

    /// Dense copy, for small-graph oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                dense[i][j] = w;
            }
        }
        dense
    }
}
