//! Run configuration: a TOML file with one section per command.

use std::path::{Path, PathBuf};

use pwgl_core::experiments::{
    BarrierParams, BoundaryParams, BoxParams, ConsistencyParams, DegeneracyParams, Generator,
    HolderParams, KernelSpec, LabelPoint, MethodSettings, MnistParams, RadialParams, StripParams,
};
use pwgl_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the seed of whichever command runs.
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Drop wall-clock fields from `report.json`.
    #[serde(default)]
    pub deterministic: bool,
    pub threads: Option<usize>,
    #[serde(default)]
    pub generate: GenerateParams,
    #[serde(default)]
    pub graph: GraphParams,
    #[serde(default)]
    pub solve: SolveParams,
    #[serde(default)]
    pub classify: ClassifyParams,
    #[serde(default)]
    pub experiment: ExperimentSections,
    #[serde(default)]
    pub validate: ValidateSections,
    #[serde(default)]
    pub mnist: MnistParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSections {
    pub two_point_box: BoxParams,
    pub decision_boundary: BoundaryParams,
    pub strip: StripParams,
    pub wnll_degeneracy: DegeneracyParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSections {
    pub radial: RadialParams,
    pub consistency: ConsistencyParams,
    pub holder: HolderParams,
    pub barrier: BarrierParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateParams {
    pub generator: Generator,
    pub n: usize,
    pub seed: u64,
    pub labels: Vec<LabelPoint>,
}

impl Default for GenerateParams {
    fn default() -> Self {
        GenerateParams {
            generator: Generator::box2d(),
            n: 1000,
            seed: 0,
            labels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    #[default]
    EpsBall,
    Knn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphParams {
    pub cloud: Option<PathBuf>,
    pub kind: GraphKind,
    pub eps: Option<f64>,
    pub kernel: KernelSpec,
    pub k: usize,
    pub sigma_neighbor: usize,
    /// Keep only the component holding the labels.
    pub largest_component: bool,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            cloud: None,
            kind: GraphKind::EpsBall,
            eps: None,
            kernel: KernelSpec::default(),
            k: 10,
            sigma_neighbor: 5,
            largest_component: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveParams {
    pub cloud: Option<PathBuf>,
    /// Prebuilt graph; otherwise the `[graph]` settings build one.
    pub graph: Option<PathBuf>,
    #[serde(rename = "method")]
    pub settings: MethodSettings,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyParams {
    pub cloud: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    /// Defaults to one more than the largest class id seen.
    pub classes: Option<usize>,
    #[serde(rename = "method")]
    pub settings: MethodSettings,
}

impl RunConfig {
    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, "config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_named(&text, &path.display().to_string())
    }

    fn parse_named(text: &str, name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("{name}: {e}")))
    }
}

/// A command-line value: JSON when it parses as JSON, a bare string otherwise.
pub fn flag_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Applies `path = value` overrides to a parameter set and re-validates it
/// strictly, so a key the command does not know is an error.
///
/// A path without dots that is absent at the top level is looked up in the
/// nested `method` table.
pub fn apply_overrides<T>(params: &T, overrides: &[(String, Value)]) -> Result<T>
where
    T: Serialize + DeserializeOwned,
{
    if overrides.is_empty() {
        return Ok(serde_json::from_value(to_value(params)?).map_err(config_err)?);
    }
    let mut tree = to_value(params)?;
    for (path, value) in overrides {
        let mut keys: Vec<&str> = path.split('.').collect();
        if keys.len() == 1 && tree.get(keys[0]).is_none() {
            if let Some(Value::Object(m)) = tree.get("method") {
                if m.contains_key(keys[0]) {
                    keys.insert(0, "method");
                }
            }
        }
        let (last, parents) = keys.split_last().expect("split yields at least one key");
        let mut node = &mut tree;
        for key in parents {
            node = match node {
                Value::Object(m) => m
                    .entry(key.to_string())
                    .or_insert_with(|| Value::Object(Default::default())),
                _ => return Err(Error::config(format!("`{path}`: `{key}` is not a table"))),
            };
        }
        match node {
            Value::Object(m) => {
                m.insert(last.to_string(), value.clone());
            }
            _ => {
                return Err(Error::config(format!(
                    "`{path}` does not name a table entry"
                )))
            }
        }
    }
    serde_json::from_value(tree).map_err(config_err)
}

fn to_value<T: Serialize>(params: &T) -> Result<Value> {
    serde_json::to_value(params).map_err(config_err)
}

fn config_err(e: serde_json::Error) -> Error {
    Error::config(e.to_string())
}
