use std::fmt;
use std::time::Instant;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::graph::{attach_energy_weights, build_eps_graph, EnergyWeights, SparseGraph};
use crate::kernels::{KernelProfile, WeightProfile, ZetaSpec};
use crate::solve::{
    solve_pw, solve_standard, solve_wnll, Method, NodeFunction, SolveOptions, SolveReport,
    WnllParams,
};

/// Bandwidth: a fixed value or the experiment's own `c / n^{1/d}` rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EpsSpec {
    #[default]
    Auto,
    Value(f64),
}

impl EpsSpec {
    pub fn resolve(self, auto: impl FnOnce() -> f64) -> Result<f64> {
        let eps = match self {
            EpsSpec::Auto => auto(),
            EpsSpec::Value(e) => e,
        };
        if eps > 0.0 && eps.is_finite() {
            Ok(eps)
        } else {
            Err(Error::config(format!("eps must be positive, got {eps}")))
        }
    }
}

/// `c / n^{1/d}`.
pub fn auto_eps(c: f64, n: usize, dim: usize) -> f64 {
    c / (n as f64).powf(1.0 / dim as f64)
}

impl Serialize for EpsSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            EpsSpec::Auto => s.serialize_str("auto"),
            EpsSpec::Value(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for EpsSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct EpsVisitor;
        impl Visitor<'_> for EpsVisitor {
            type Value = EpsSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or \"auto\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<EpsSpec, E> {
                if v == "auto" {
                    Ok(EpsSpec::Auto)
                } else {
                    v.parse::<f64>()
                        .map(EpsSpec::Value)
                        .map_err(|_| E::custom(format!("invalid eps {v:?}")))
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<EpsSpec, E> {
                Ok(EpsSpec::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<EpsSpec, E> {
                Ok(EpsSpec::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<EpsSpec, E> {
                Ok(EpsSpec::Value(v as f64))
            }
        }
        d.deserialize_any(EpsVisitor)
    }
}

/// Serializable kernel choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Indicator,
    /// `σ = sigma_factor · ε`.
    Gaussian {
        sigma_factor: f64,
    },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Gaussian { sigma_factor: 0.5 }
    }
}

impl KernelSpec {
    pub fn profile(self) -> Result<KernelProfile> {
        match self {
            KernelSpec::Indicator => Ok(KernelProfile::indicator()),
            KernelSpec::Gaussian { sigma_factor } => KernelProfile::gaussian(sigma_factor),
        }
    }
}

/// Parameters shared by every method in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodSettings {
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub r0: f64,
    pub zeta: ZetaSpec,
    /// `None` uses unlabeled/labeled.
    pub wnll_mu: Option<f64>,
    pub solver: SolveOptions,
}

impl Default for MethodSettings {
    fn default() -> Self {
        MethodSettings {
            methods: Method::ALL.to_vec(),
            alpha: 2.0,
            r0: 1.0,
            zeta: ZetaSpec::Scaled { scaled: 50.0 },
            wnll_mu: None,
            solver: SolveOptions::default(),
        }
    }
}

impl MethodSettings {
    pub fn with_methods(mut self, methods: &[Method]) -> Self {
        self.methods = methods.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::config("at least one method is required"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::config(format!("method {} listed twice", m.name())));
            }
        }
        Ok(())
    }
}

/// One method's solution on a graph.
#[derive(Debug, Clone)]
pub struct Solved {
    pub method: Method,
    pub u: NodeFunction,
    pub report: SolveReport,
}

/// Everything shared by the methods for one sampled cloud.
pub struct Instance {
    pub cloud: PointCloud,
    pub graph: SparseGraph,
    pub eps: f64,
    pub zeta: f64,
}

impl Instance {
    pub fn build(cloud: PointCloud, eps: f64, kernel: KernelSpec, zeta: ZetaSpec) -> Result<Self> {
        let graph = build_eps_graph(&cloud, eps, &kernel.profile()?)?;
        let zeta = zeta.resolve(cloud.sample_count(), eps);
        Ok(Instance {
            cloud,
            graph,
            eps,
            zeta,
        })
    }

    pub fn mean_degree(&self) -> f64 {
        self.graph.nnz() as f64 / self.graph.n().max(1) as f64
    }

    pub fn pw_weights(&self, settings: &MethodSettings) -> Result<EnergyWeights> {
        let profile = WeightProfile::new(settings.alpha, settings.r0, self.zeta)?;
        attach_energy_weights(&self.graph, &self.cloud, &profile)
    }

    pub fn solve(&self, settings: &MethodSettings) -> Result<Vec<Solved>> {
        settings.validate()?;
        settings
            .methods
            .iter()
            .map(|&method| {
                let (u, report) = match method {
                    Method::Pw => solve_pw(
                        &self.graph,
                        &self.pw_weights(settings)?,
                        &self.cloud,
                        &settings.solver,
                    )?,
                    Method::Standard => solve_standard(&self.graph, &self.cloud, &settings.solver)?,
                    Method::Wnll => {
                        let params = settings
                            .wnll_mu
                            .map(|mu| WnllParams { mu })
                            .unwrap_or_else(|| WnllParams::default_for(&self.cloud));
                        solve_wnll(&self.graph, &self.cloud, params, &settings.solver)?
                    }
                };
                Ok(Solved { method, u, report })
            })
            .collect()
    }
}

/// Node table written as `field.csv` / `boundary.csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FieldTable {
    /// `node, x1..xd, labeled, u_<method>...` over every node.
    pub fn from_solutions(cloud: &PointCloud, solved: &[Solved]) -> Self {
        let mut columns = vec!["node".to_string()];
        columns.extend((1..=cloud.dim()).map(|k| format!("x_{k}")));
        columns.push("labeled".into());
        columns.extend(solved.iter().map(|s| format!("u_{}", s.method.name())));
        let labeled = cloud.label_mask();
        let rows = (0..cloud.len())
            .map(|i| {
                let mut row = vec![i as f64];
                row.extend_from_slice(cloud.point(i));
                row.push(if labeled[i] { 1.0 } else { 0.0 });
                row.extend(solved.iter().map(|s| s.u.values[i]));
                row
            })
            .collect();
        FieldTable { columns, rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// The machine-readable result of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: String,
    /// Parameters as requested, sufficient to rerun.
    pub params: Value,
    /// Derived quantities (`eps`, `zeta`, node counts) as numbers.
    pub resolved: Value,
    pub seeds: Vec<u64>,
    pub metrics: Value,
    /// Wall-clock fields; the only nondeterministic part of a report.
    pub timing: Value,
}

impl ExperimentReport {
    pub fn new(experiment: &str, params: &impl Serialize) -> Result<Self> {
        Ok(ExperimentReport {
            experiment: experiment.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: serde_json::to_value(params)
                .map_err(|e| Error::config(format!("unserializable parameters: {e}")))?,
            resolved: Value::Object(Map::new()),
            seeds: Vec::new(),
            metrics: Value::Object(Map::new()),
            timing: Value::Object(Map::new()),
        })
    }

    /// The report with `timing` cleared, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        ExperimentReport {
            timing: Value::Object(Map::new()),
            ..self.clone()
        }
    }

    pub fn metric(&self, path: &[&str]) -> Option<f64> {
        let mut v = &self.metrics;
        for key in path {
            v = v.get(key)?;
        }
        v.as_f64()
    }
}

/// A report plus the node tables it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub field: FieldTable,
    pub boundary: FieldTable,
}

pub(crate) fn insert(obj: &mut Value, key: &str, value: Value) {
    if let Value::Object(map) = obj {
        map.insert(key.to_string(), value);
    }
}

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub(crate) fn solve_timing(solved: &[Solved]) -> Value {
    let mut map = Map::new();
    for s in solved {
        map.insert(s.method.name().into(), json!(s.report.wall_time_ms));
    }
    Value::Object(map)
}

/// Mean and (population) standard deviation; `(NaN, NaN)` when empty.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Pearson correlation; `0` when either side is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if !(sa > 0.0 && sb > 0.0) {
        return 0.0;
    }
    let cov = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64;
    cov / (sa * sb)
}

/// JSON number, with non-finite values mapped to `null`.
pub(crate) fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
