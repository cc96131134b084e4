//! MNIST one-vs-rest pipeline on a self-tuned kNN graph.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::common::{
    elapsed_ms, insert, mean_std, num, ExperimentOutput, ExperimentReport, FieldTable,
    MethodSettings,
};
use super::rng::{rng_from_seed, trial_seed};
use crate::classify::{accuracy, one_vs_rest, MulticlassTask};
use crate::error::{Error, Result};
use crate::geometry::{LabelSet, PointCloud};
use crate::graph::{
    attach_energy_weights, build_knn_graph, check_labeled_components, EnergyWeights,
};
use crate::io::{load_idx, IdxDataset};
use crate::kernels::{WeightProfile, ZetaSpec};
use crate::solve::{Method, WnllParams};

pub const CLASS_COUNT: usize = 10;

const IDX_FILES: [(&str, &str); 2] = [
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MnistParams {
    /// Directory holding the standard train and t10k IDX files.
    pub data_dir: PathBuf,
    /// Use only this many images, drawn with `seed`.
    pub subsample: Option<usize>,
    pub labels_per_class: usize,
    pub trials: usize,
    pub seed: u64,
    pub k: usize,
    pub sigma_neighbor: usize,
    #[serde(rename = "method")]
    pub settings: MethodSettings,
}

impl Default for MnistParams {
    fn default() -> Self {
        MnistParams {
            data_dir: PathBuf::from("data/mnist"),
            subsample: None,
            labels_per_class: 10,
            trials: 10,
            seed: 0,
            k: 50,
            sigma_neighbor: 20,
            settings: MethodSettings {
                alpha: 5.0,
                r0: 0.1,
                zeta: ZetaSpec::Value(1e7),
                ..MethodSettings::default()
            },
        }
    }
}

/// Loads every standard IDX pair present in `dir` (train first, then t10k).
pub fn load_mnist_dir(dir: &Path) -> Result<IdxDataset> {
    let mut data: Option<IdxDataset> = None;
    for (images, labels) in IDX_FILES {
        let (ip, lp) = (dir.join(images), dir.join(labels));
        if !ip.exists() {
            continue;
        }
        let part = load_idx(&ip, &lp)?;
        data = Some(match data {
            Some(d) => d.concat(part)?,
            None => part,
        });
    }
    data.ok_or_else(|| Error::data(format!("no MNIST IDX files found in {}", dir.display())))
}

/// `per_class` nodes of every class, drawn without replacement, sorted by node.
pub fn draw_class_labels(
    truth: &[usize],
    class_count: usize,
    per_class: usize,
    seed: u64,
) -> Result<LabelSet> {
    let mut rng = rng_from_seed(seed);
    let mut picked = Vec::with_capacity(class_count * per_class);
    for c in 0..class_count {
        let members: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == c).collect();
        if members.len() < per_class {
            return Err(Error::data(format!(
                "class {c} has {} items, fewer than {per_class} labels",
                members.len()
            )));
        }
        picked.extend(
            sample(&mut rng, members.len(), per_class)
                .into_iter()
                .map(|j| (members[j], c)),
        );
    }
    picked.sort_unstable();
    let (nodes, classes) = picked.into_iter().unzip();
    Ok(LabelSet::classes(nodes, classes))
}

fn pw_weights(
    graph: &crate::graph::SparseGraph,
    cloud: &PointCloud,
    settings: &MethodSettings,
) -> Result<EnergyWeights> {
    let zeta = settings.zeta.resolve(cloud.sample_count(), 1.0);
    let profile = WeightProfile::new(settings.alpha, settings.r0, zeta)?;
    attach_energy_weights(graph, cloud, &profile)
}

/// Runs the pipeline on an already loaded dataset.
pub fn run_mnist_on(p: &MnistParams, data: &IdxDataset) -> Result<ExperimentOutput> {
    p.settings.validate()?;
    if p.trials == 0 || p.labels_per_class == 0 {
        return Err(Error::config(
            "mnist needs at least one trial and one label per class",
        ));
    }
    let start = Instant::now();
    let data = match p.subsample {
        Some(k) => data.subsample(k, p.seed)?,
        None => data.clone(),
    };
    let mut cloud = PointCloud::new(data.dim(), data.pixels.clone())?;
    let graph = build_knn_graph(&cloud, p.k, p.sigma_neighbor)?;
    let graph_ms = elapsed_ms(start);
    let task = MulticlassTask {
        class_count: CLASS_COUNT,
        truth: Some(data.labels.clone()),
    };

    let mut acc = vec![Vec::with_capacity(p.trials); p.settings.methods.len()];
    let mut seeds = Vec::with_capacity(p.trials);
    let mut last = None;
    for t in 0..p.trials {
        let seed = trial_seed(p.seed, t as u64);
        seeds.push(seed);
        cloud.set_labels(draw_class_labels(
            &data.labels,
            CLASS_COUNT,
            p.labels_per_class,
            seed,
        )?)?;
        check_labeled_components(&graph, &cloud)?;
        let weights = if p.settings.methods.contains(&Method::Pw) {
            pw_weights(&graph, &cloud, &p.settings)?
        } else {
            EnergyWeights::unscaled(vec![1.0; cloud.len()])
        };
        let wnll = p.settings.wnll_mu.map(|mu| WnllParams { mu });
        for (m, &method) in p.settings.methods.iter().enumerate() {
            let pred = one_vs_rest(
                &graph,
                &weights,
                &cloud,
                &task,
                method,
                wnll,
                &p.settings.solver,
            )?;
            acc[m].push(accuracy(&pred, &data.labels)?);
            if t + 1 == p.trials {
                last.get_or_insert_with(Vec::new).push(pred);
            }
        }
    }

    let mut report = ExperimentReport::new("mnist", p)?;
    report.seeds = seeds;
    insert(&mut report.resolved, "nodes", json!(cloud.len()));
    insert(&mut report.resolved, "edges", json!(graph.nnz() / 2));
    insert(
        &mut report.resolved,
        "zeta",
        num(p.settings.zeta.resolve(cloud.sample_count(), 1.0)),
    );
    for (m, method) in p.settings.methods.iter().enumerate() {
        let (mean, std) = mean_std(&acc[m]);
        insert(
            &mut report.metrics,
            method.name(),
            json!({
                "per_trial_accuracy": acc[m].iter().map(|&a| num(a)).collect::<Vec<_>>(),
                "mean_accuracy": num(mean),
                "std_accuracy": num(std),
            }),
        );
    }
    let mut timing = Map::new();
    timing.insert("graph_ms".into(), json!(graph_ms));
    timing.insert("total_ms".into(), json!(elapsed_ms(start)));
    report.timing = Value::Object(timing);

    let mut field = FieldTable::default();
    if let Some(preds) = last {
        field.columns = vec!["node".into(), "truth".into(), "labeled".into()];
        field.columns.extend(
            p.settings
                .methods
                .iter()
                .map(|m| format!("pred_{}", m.name())),
        );
        let labeled = cloud.label_mask();
        field.rows = (0..cloud.len())
            .map(|i| {
                let mut row = vec![i as f64, data.labels[i] as f64, labeled[i] as u8 as f64];
                row.extend(preds.iter().map(|pr| pr.classes[i] as f64));
                row
            })
            .collect();
    }
    Ok(ExperimentOutput {
        report,
        field,
        boundary: FieldTable::default(),
    })
}

pub fn run_mnist(p: &MnistParams) -> Result<ExperimentOutput> {
    run_mnist_on(p, &load_mnist_dir(&p.data_dir)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_labels_are_balanced_and_reproducible() {
        let truth: Vec<usize> = (0..500).map(|i| i % 10).collect();
        let a = draw_class_labels(&truth, 10, 3, 4).unwrap();
        assert_eq!(a, draw_class_labels(&truth, 10, 3, 4).unwrap());
        assert_ne!(a, draw_class_labels(&truth, 10, 3, 5).unwrap());
        let classes = a.classes.as_ref().unwrap();
        for c in 0..10 {
            assert_eq!(classes.iter().filter(|&&k| k == c).count(), 3);
        }
        for (&i, &c) in a.nodes.iter().zip(classes) {
            assert_eq!(truth[i], c);
        }
        assert!(a.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(draw_class_labels(&truth, 10, 51, 0).is_err());
    }
}
