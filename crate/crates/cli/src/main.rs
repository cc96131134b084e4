//! `pwgl`: graph construction, Laplacian learning and experiment driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "pwgl",
    version,
    about = "Properly-weighted graph Laplacian learning"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "PWGL_THREADS")]
    pub threads: Option<usize>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Omit wall-clock fields from report.json.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Extra parameter override, e.g. `--set method.zeta.scaled=1000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a synthetic point cloud into cloud.csv.
    Generate {
        #[arg(long, value_enum)]
        spec: Option<SpecName>,
        #[arg(long)]
        n: Option<usize>,
        /// Extra labeled point, `x1,x2,...=value`.
        #[arg(long = "label", value_name = "COORDS=VALUE")]
        labels: Vec<String>,
    },
    /// Build a graph from a cloud into graph.txt.
    Graph(GraphArgs),
    /// Solve the labeled problem on a cloud; writes field.csv and report.json.
    Solve {
        #[command(flatten)]
        graph: GraphArgs,
        /// Prebuilt graph file.
        #[arg(long = "graph")]
        graph_file: Option<PathBuf>,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// One-vs-rest classification; writes prediction CSVs and summary.json.
    Classify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long = "graph")]
        graph_file: Option<PathBuf>,
        #[arg(long)]
        classes: Option<usize>,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Run a synthetic experiment.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Run a validation check against a continuum prediction.
    Validate {
        #[arg(value_enum)]
        name: ValidateName,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// MNIST one-vs-rest classification on a kNN graph.
    Mnist {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        subsample: Option<usize>,
        #[arg(long)]
        labels_per_class: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        method: MethodArgs,
    },
}

#[derive(Args, Debug, Default)]
pub struct GraphArgs {
    /// Input cloud CSV.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// ε-ball radius.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Build a kNN graph with this many neighbors instead.
    #[arg(long)]
    pub knn: Option<usize>,
    #[arg(long)]
    pub sigma_neighbor: Option<usize>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelName>,
    /// Keep only the connected component holding the labels.
    #[arg(long)]
    pub largest_component: bool,
}

#[derive(Args, Debug, Default)]
pub struct MethodArgs {
    /// Method to run; repeatable.
    #[arg(long = "method", value_enum)]
    pub methods: Vec<MethodName>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Absolute ζ.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// ζ as a multiple of n ε².
    #[arg(long)]
    pub zeta_scaled: Option<f64>,
    #[arg(long)]
    pub wnll_mu: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// A number or `auto`.
    #[arg(long)]
    pub eps: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecName {
    Box2d,
    Box3d,
    Strip,
    Disc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelName {
    Gaussian,
    Indicator,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodName {
    Pw,
    Standard,
    Wnll,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
pub enum ExperimentName {
    TwoPointBox,
    DecisionBoundary,
    Strip,
    WnllDegeneracy,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidateName {
    Radial,
    Consistency,
    Holder,
    Barrier,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
