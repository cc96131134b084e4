//! Undirected edge-list text format.
//!
//! ```text
//! pwgl-graph v1 n=<n> sym=1
//! # construction eps_ball eps=<eps> kernel=<name>
//! i j w
//! ```
//!
//! One line per edge with `i < j`; weights carry 17 significant digits so a
//! save/load cycle reproduces them bit for bit. The construction comment is
//! optional and restores the `ε` scaling of the energy.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Construction, SparseGraph};

const MAGIC: &str = "pwgl-graph v1";

pub fn graph_to_string(graph: &SparseGraph) -> String {
    let mut out = String::with_capacity(graph.nnz() * 20 + 64);
    writeln!(out, "{MAGIC} n={} sym=1", graph.n()).unwrap();
    match graph.construction() {
        Construction::EpsBall { eps, kernel } => writeln!(
            out,
            "# construction eps_ball eps={eps:.16e} kernel={kernel}"
        )
        .unwrap(),
        Construction::Knn { k, sigma_neighbor } => writeln!(
            out,
            "# construction knn k={k} sigma_neighbor={sigma_neighbor}"
        )
        .unwrap(),
        Construction::Explicit => {}
    }
    for (i, j, w) in graph.edges() {
        writeln!(out, "{i} {j} {w:.16e}").unwrap();
    }
    out
}

fn parse_construction(line: &str) -> Option<Construction> {
    let mut parts = line.split_whitespace();
    if parts.next()? != "#" || parts.next()? != "construction" {
        return None;
    }
    let kind = parts.next()?;
    let fields: Vec<(&str, &str)> = parts.filter_map(|p| p.split_once('=')).collect();
    let get = |key: &str| fields.iter().find(|f| f.0 == key).map(|f| f.1);
    match kind {
        "eps_ball" => Some(Construction::EpsBall {
            eps: get("eps")?.parse().ok()?,
            kernel: get("kernel")?.to_string(),
        }),
        "knn" => Some(Construction::Knn {
            k: get("k")?.parse().ok()?,
            sigma_neighbor: get("sigma_neighbor")?.parse().ok()?,
        }),
        _ => None,
    }
}

pub fn graph_from_str(text: &str) -> Result<SparseGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data("graph file is empty"))?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::data(format!("graph header must start with {MAGIC:?}")))?;
    let mut n = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => {
                n =
                    Some(v.parse::<usize>().map_err(|_| {
                        Error::data(format!("bad node count {v:?} in graph header"))
                    })?)
            }
            Some(("sym", "1")) => {}
            _ => {
                return Err(Error::data(format!(
                    "unsupported graph header field {field:?}"
                )))
            }
        }
    }
    let n = n.ok_or_else(|| Error::data("graph header lacks n=<count>"))?;
    let mut construction = Construction::Explicit;
    let mut edges = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(c) = parse_construction(line) {
                construction = c;
            }
            continue;
        }
        let bad = || {
            Error::data(format!(
                "line {}: expected `i j w`, got {line:?}",
                lineno + 1
            ))
        };
        let mut it = line.split_whitespace();
        let i: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let j: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let w: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if it.next().is_some() {
            return Err(bad());
        }
        if i >= j || j >= n {
            return Err(Error::data(format!(
                "line {}: edge ({i}, {j}) must satisfy i < j < n = {n}",
                lineno + 1
            )));
        }
        edges.push((i, j, w));
    }
    SparseGraph::from_edges(n, &edges, construction)
}

pub fn save_graph(graph: &SparseGraph, path: &Path) -> Result<()> {
    std::fs::write(path, graph_to_string(graph)).map_err(|e| Error::io(path, e))
}

pub fn load_graph(path: &Path) -> Result<SparseGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_str(&text)
}
