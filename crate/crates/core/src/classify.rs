//! One-vs-rest multiclass prediction from binary harmonic extensions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::graph::{EnergyWeights, SparseGraph};
use crate::solve::{Method, MethodProblem, SolveOptions, SolveStats, WnllParams};

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassTask {
    pub class_count: usize,
    /// Ground-truth class of every node, when known.
    pub truth: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub classes: Vec<usize>,
    /// `scores[c][node]` is the binary solution `u^c` at `node`.
    pub scores: Vec<Vec<f64>>,
    pub labeled: Vec<bool>,
    pub stats: Vec<SolveStats>,
}

/// Index of the largest score; ties go to the lowest class id.
pub fn argmax(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, s) in scores.into_iter().enumerate() {
        if s > best.1 {
            best = (c, s);
        }
    }
    best.0
}

/// Solves one binary problem per class (`g = 1` on that class's labels, `0`
/// on the others) and predicts the class with the largest score.
///
/// The reduced system is assembled once and shared by all classes.
pub fn one_vs_rest(
    graph: &SparseGraph,
    weights: &EnergyWeights,
    cloud: &PointCloud,
    task: &MulticlassTask,
    method: Method,
    wnll: Option<WnllParams>,
    opts: &SolveOptions,
) -> Result<Prediction> {
    let labels = cloud.labels();
    let classes = labels
        .classes
        .as_ref()
        .ok_or_else(|| Error::data("cloud labels carry no class ids"))?;
    if task.class_count < 2 {
        return Err(Error::config("classification needs at least two classes"));
    }
    let mut counts = vec![0usize; task.class_count];
    for &c in classes {
        if c >= task.class_count {
            return Err(Error::data(format!(
                "label class {c} out of range for {} classes",
                task.class_count
            )));
        }
        counts[c] += 1;
    }
    if let Some(c) = counts.iter().position(|&k| k == 0) {
        return Err(Error::data(format!("class {c} has no labeled nodes")));
    }

    let problem = match method {
        Method::Pw => MethodProblem::pw(graph, cloud, weights)?,
        Method::Standard => MethodProblem::standard(graph, cloud)?,
        Method::Wnll => MethodProblem::wnll(
            graph,
            cloud,
            wnll.unwrap_or_else(|| WnllParams::default_for(cloud)),
        )?,
    };
    let solved: Vec<(Vec<f64>, SolveStats)> = (0..task.class_count)
        .into_par_iter()
        .map(|c| {
            let g: Vec<f64> = classes
                .iter()
                .map(|&k| if k == c { 1.0 } else { 0.0 })
                .collect();
            problem.solve(&g, opts).map(|(u, s)| (u.values, s))
        })
        .collect::<Result<_>>()?;
    let (scores, stats): (Vec<Vec<f64>>, Vec<SolveStats>) = solved.into_iter().unzip();
    let n = graph.n();
    let predicted = (0..n)
        .map(|i| argmax(scores.iter().map(|s| s[i])))
        .collect();
    Ok(Prediction {
        classes: predicted,
        scores,
        labeled: cloud.label_mask(),
        stats,
    })
}

fn check_lengths(pred: &Prediction, truth: &[usize]) -> Result<()> {
    if pred.classes.len() != truth.len() {
        return Err(Error::data(format!(
            "prediction has {} nodes but truth has {}",
            pred.classes.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Fraction of unlabeled nodes predicted correctly.
pub fn accuracy(pred: &Prediction, truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let (mut hit, mut total) = (0usize, 0usize);
    for i in 0..truth.len() {
        if pred.labeled[i] {
            continue;
        }
        total += 1;
        if pred.classes[i] == truth[i] {
            hit += 1;
        }
    }
    if total == 0 {
        return Err(Error::data("no unlabeled nodes to score"));
    }
    Ok(hit as f64 / total as f64)
}

pub fn misclassification_rate(pred: &Prediction, truth: &[usize]) -> Result<f64> {
    Ok(1.0 - accuracy(pred, truth)?)
}

/// Accuracy restricted to the unlabeled nodes of each true class (`NaN` if none).
pub fn per_class_accuracy(
    pred: &Prediction,
    truth: &[usize],
    class_count: usize,
) -> Result<Vec<f64>> {
    check_lengths(pred, truth)?;
    let mut hit = vec![0usize; class_count];
    let mut total = vec![0usize; class_count];
    for i in 0..truth.len() {
        if pred.labeled[i] || truth[i] >= class_count {
            continue;
        }
        total[truth[i]] += 1;
        if pred.classes[i] == truth[i] {
            hit[truth[i]] += 1;
        }
    }
    Ok(hit
        .iter()
        .zip(&total)
        .map(|(&h, &t)| {
            if t == 0 {
                f64::NAN
            } else {
                h as f64 / t as f64
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationSummary {
    pub accuracy: f64,
    pub error_rate: f64,
    pub per_class_accuracy: Vec<Option<f64>>,
}

pub fn summarize(
    pred: &Prediction,
    truth: &[usize],
    class_count: usize,
) -> Result<ClassificationSummary> {
    let acc = accuracy(pred, truth)?;
    Ok(ClassificationSummary {
        accuracy: acc,
        error_rate: 1.0 - acc,
        per_class_accuracy: per_class_accuracy(pred, truth, class_count)?
            .into_iter()
            .map(|a| (!a.is_nan()).then_some(a))
            .collect(),
    })
}
