//! Subcommand implementations.

use std::path::{Path, PathBuf};

use pwgl_core::classify::{one_vs_rest, summarize, MulticlassTask};
use pwgl_core::experiments::{
    barrier_check, consistency_check, generate, holder_check, radial_oracle_check,
    run_decision_boundary, run_mnist, run_strip, run_two_point_box, wnll_degeneracy_probe,
    ExperimentOutput, ExperimentReport, FieldTable, Generator, Instance, LabelPoint, SyntheticSpec,
};
use pwgl_core::graph::{
    build_eps_graph, build_knn_graph, restrict_to_labeled_component, SparseGraph,
};
use pwgl_core::io::{
    create, load_cloud, load_graph, save_cloud, save_graph, write_json, write_output,
    write_prediction, CloudFile,
};
use pwgl_core::solve::Method;
use pwgl_core::{Error, Result};
use serde_json::{json, Value};

use crate::config::{apply_overrides, flag_value, GraphKind, GraphParams, RunConfig};
use crate::{
    Cli, Command, ExperimentName, GraphArgs, KernelName, MethodArgs, MethodName, RunArgs, SpecName,
    ValidateName,
};

type Overrides = Vec<(String, Value)>;

struct Context {
    out: PathBuf,
    deterministic: bool,
    seed: Option<u64>,
    set: Overrides,
}

impl Context {
    /// Flag overrides, then the global seed, then `--set` entries.
    fn overrides(&self, mut flags: Overrides, seeded: bool) -> Overrides {
        if let (true, Some(seed)) = (seeded, self.seed) {
            flags.push(("seed".into(), json!(seed)));
        }
        flags.extend(self.set.iter().cloned());
        flags
    }

    fn finish(&self, mut output: ExperimentOutput) -> Result<Vec<PathBuf>> {
        if self.deterministic {
            output.report = output.report.without_timing();
        }
        write_output(&self.out, &output)
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(threads) = cli.threads.or(cfg.threads) {
        if threads == 0 {
            return Err(Error::config("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::config(format!("cannot size thread pool: {e}")))?;
    }
    let set = cli
        .set
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), flag_value(v.trim())))
                .ok_or_else(|| Error::config(format!("--set expects KEY=VALUE, got {s:?}")))
        })
        .collect::<Result<_>>()?;
    let ctx = Context {
        out: cli
            .out
            .or(cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        deterministic: cli.deterministic || cfg.deterministic,
        seed: cli.seed.or(cfg.seed),
        set,
    };

    match cli.command {
        Command::Generate { spec, n, labels } => {
            let mut flags = Overrides::new();
            if let Some(spec) = spec {
                flags.push(("generator".into(), json!(spec_generator(spec))));
            }
            push(&mut flags, "n", n);
            if !labels.is_empty() {
                let parsed = labels
                    .iter()
                    .map(|l| parse_label(l))
                    .collect::<Result<Vec<_>>>()?;
                flags.push(("labels".into(), json!(parsed)));
            }
            let p = apply_overrides(&cfg.generate, &ctx.overrides(flags, true))?;
            let cloud = generate(&SyntheticSpec {
                generator: p.generator,
                n: p.n,
                seed: p.seed,
                labels: p.labels,
            })?;
            let path = ctx.file("cloud.csv");
            create_dir(&ctx.out)?;
            save_cloud(&cloud, None, &path)?;
            Ok(vec![path])
        }
        Command::Graph(args) => {
            let p = apply_overrides(&cfg.graph, &ctx.overrides(graph_flags(&args), false))?;
            let (file, graph) = build_graph(&p)?;
            create_dir(&ctx.out)?;
            let mut written = Vec::new();
            if p.largest_component {
                let path = ctx.file("cloud.csv");
                save_cloud(&file.cloud, file.truth.as_deref(), &path)?;
                written.push(path);
            }
            let path = ctx.file("graph.txt");
            save_graph(&graph, &path)?;
            written.push(path);
            Ok(written)
        }
        Command::Solve {
            graph,
            graph_file,
            method,
        } => {
            let gp = apply_overrides(&cfg.graph, &graph_flags(&graph))?;
            let mut flags = method_flags(&method, "method.");
            push(
                &mut flags,
                "graph",
                graph_file.map(|p| p.display().to_string()),
            );
            push(
                &mut flags,
                "cloud",
                graph.cloud.map(|p| p.display().to_string()),
            );
            let sp = apply_overrides(&cfg.solve, &ctx.overrides(flags, false))?;
            let gp = GraphParams {
                cloud: sp.cloud.clone().or(gp.cloud),
                ..gp
            };
            let (file, graph) = load_or_build(&gp, sp.graph.as_deref())?;
            let zeta_eps = graph.eps().unwrap_or(1.0);
            let inst = Instance {
                zeta: sp
                    .settings
                    .zeta
                    .resolve(file.cloud.sample_count(), zeta_eps),
                eps: zeta_eps,
                cloud: file.cloud,
                graph,
            };
            let solved = inst.solve(&sp.settings)?;
            let mut report = ExperimentReport::new("solve", &json!({ "solve": sp, "graph": gp }))?;
            report.resolved = json!({
                "nodes": inst.cloud.len(),
                "edges": inst.graph.nnz() / 2,
                "eps": inst.graph.eps(),
                "zeta": inst.zeta,
            });
            report.metrics = Value::Object(
                solved
                    .iter()
                    .map(|s| {
                        let r = &s.report;
                        (
                            s.method.name().to_string(),
                            json!({ "iterations": r.iterations, "residual": r.residual, "energy": r.energy }),
                        )
                    })
                    .collect(),
            );
            report.timing = Value::Object(
                solved
                    .iter()
                    .map(|s| (s.method.name().to_string(), json!(s.report.wall_time_ms)))
                    .collect(),
            );
            ctx.finish(ExperimentOutput {
                report,
                field: FieldTable::from_solutions(&inst.cloud, &solved),
                boundary: FieldTable::default(),
            })
        }
        Command::Classify {
            graph,
            graph_file,
            classes,
            method,
        } => {
            let gp = apply_overrides(&cfg.graph, &graph_flags(&graph))?;
            let mut flags = method_flags(&method, "method.");
            push(
                &mut flags,
                "graph",
                graph_file.map(|p| p.display().to_string()),
            );
            push(
                &mut flags,
                "cloud",
                graph.cloud.map(|p| p.display().to_string()),
            );
            push(&mut flags, "classes", classes);
            let cp = apply_overrides(&cfg.classify, &ctx.overrides(flags, false))?;
            cp.settings.validate()?;
            let gp = GraphParams {
                cloud: cp.cloud.clone().or(gp.cloud),
                ..gp
            };
            let (file, graph) = load_or_build(&gp, cp.graph.as_deref())?;
            classify(&ctx, &cp, file, graph)
        }
        Command::Experiment { name, run, method } => {
            let mut flags = run_flags(&run);
            flags.extend(method_flags(&method, "method."));
            let flags = ctx.overrides(flags, true);
            let s = &cfg.experiment;
            let output = match name {
                ExperimentName::TwoPointBox => {
                    run_two_point_box(&apply_overrides(&s.two_point_box, &flags)?)?
                }
                ExperimentName::DecisionBoundary => {
                    run_decision_boundary(&apply_overrides(&s.decision_boundary, &flags)?)?
                }
                ExperimentName::Strip => run_strip(&apply_overrides(&s.strip, &flags)?)?,
                ExperimentName::WnllDegeneracy => report_only(wnll_degeneracy_probe(
                    &apply_overrides(&s.wnll_degeneracy, &flags)?,
                )?),
            };
            ctx.finish(output)
        }
        Command::Validate { name, run, alpha } => {
            let mut flags = run_flags(&run);
            push(&mut flags, "alpha", alpha);
            let flags = ctx.overrides(flags, true);
            let s = &cfg.validate;
            let report = match name {
                ValidateName::Radial => {
                    radial_oracle_check(&apply_overrides(&s.radial, &flags)?)?.1
                }
                ValidateName::Consistency => {
                    consistency_check(&apply_overrides(&s.consistency, &flags)?)?.1
                }
                ValidateName::Holder => holder_check(&apply_overrides(&s.holder, &flags)?)?.1,
                ValidateName::Barrier => barrier_check(&apply_overrides(&s.barrier, &flags)?)?.1,
            };
            ctx.finish(report_only(report))
        }
        Command::Mnist {
            data_dir,
            subsample,
            labels_per_class,
            trials,
            k,
            method,
        } => {
            let mut flags = method_flags(&method, "method.");
            push(
                &mut flags,
                "data_dir",
                data_dir.map(|p| p.display().to_string()),
            );
            push(&mut flags, "subsample", subsample);
            push(&mut flags, "labels_per_class", labels_per_class);
            push(&mut flags, "trials", trials);
            push(&mut flags, "k", k);
            let p = apply_overrides(&cfg.mnist, &ctx.overrides(flags, true))?;
            ctx.finish(run_mnist(&p)?)
        }
    }
}

fn report_only(report: ExperimentReport) -> ExperimentOutput {
    ExperimentOutput {
        report,
        field: FieldTable::default(),
        boundary: FieldTable::default(),
    }
}

fn push<T: serde::Serialize>(flags: &mut Overrides, key: &str, value: Option<T>) {
    if let Some(v) = value {
        flags.push((key.to_string(), json!(v)));
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn spec_generator(spec: SpecName) -> Generator {
    match spec {
        SpecName::Box2d => Generator::box2d(),
        SpecName::Box3d => Generator::UniformBox { dim: 3 },
        SpecName::Strip => Generator::strip(),
        SpecName::Disc => Generator::DiscWithRing {
            dim: 2,
            ring_width: 0.05,
            center_value: 0.0,
            ring_exponent: None,
        },
    }
}

/// `0.0,0.5=1` → a label at `(0, 0.5)` with value `1`.
fn parse_label(text: &str) -> Result<LabelPoint> {
    let bad = || Error::config(format!("label {text:?} is not of the form x1,x2,...=value"));
    let (coords, value) = text.split_once('=').ok_or_else(bad)?;
    let at = coords
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    let value = value.trim().parse::<f64>().map_err(|_| bad())?;
    Ok(LabelPoint::new(at, value))
}

fn graph_flags(args: &GraphArgs) -> Overrides {
    let mut flags = Overrides::new();
    push(
        &mut flags,
        "cloud",
        args.cloud.as_ref().map(|p| p.display().to_string()),
    );
    push(&mut flags, "eps", args.eps);
    if let Some(k) = args.knn {
        flags.push(("kind".into(), json!("knn")));
        flags.push(("k".into(), json!(k)));
    }
    push(&mut flags, "sigma_neighbor", args.sigma_neighbor);
    match args.kernel {
        Some(KernelName::Indicator) => {
            flags.push(("kernel".into(), json!({ "type": "indicator" })))
        }
        Some(KernelName::Gaussian) => flags.push((
            "kernel".into(),
            json!({ "type": "gaussian", "sigma_factor": 0.5 }),
        )),
        None => {}
    }
    if args.largest_component {
        flags.push(("largest_component".into(), json!(true)));
    }
    flags
}

fn method_flags(args: &MethodArgs, prefix: &str) -> Overrides {
    let mut flags = Overrides::new();
    let key = |k: &str| format!("{prefix}{k}");
    if !args.methods.is_empty() {
        let names: Vec<&str> = args
            .methods
            .iter()
            .map(|m| match m {
                MethodName::Pw => Method::Pw.name(),
                MethodName::Standard => Method::Standard.name(),
                MethodName::Wnll => Method::Wnll.name(),
            })
            .collect();
        flags.push((key("methods"), json!(names)));
    }
    push(&mut flags, &key("alpha"), args.alpha);
    push(&mut flags, &key("r0"), args.r0);
    push(&mut flags, &key("zeta"), args.zeta);
    if let Some(c) = args.zeta_scaled {
        flags.push((key("zeta"), json!({ "scaled": c })));
    }
    push(&mut flags, &key("wnll_mu"), args.wnll_mu);
    flags
}

fn run_flags(args: &RunArgs) -> Overrides {
    let mut flags = Overrides::new();
    push(&mut flags, "n", args.n);
    push(&mut flags, "trials", args.trials);
    if let Some(eps) = &args.eps {
        flags.push(("eps".into(), flag_value(eps)));
    }
    flags
}

fn read_cloud_arg(p: &GraphParams) -> Result<CloudFile> {
    let path = p
        .cloud
        .as_ref()
        .ok_or_else(|| Error::config("no input cloud; pass --cloud or set it in the config"))?;
    load_cloud(path)
}

fn build_graph(p: &GraphParams) -> Result<(CloudFile, SparseGraph)> {
    let file = read_cloud_arg(p)?;
    let graph = match p.kind {
        GraphKind::EpsBall => {
            let eps = p
                .eps
                .ok_or_else(|| Error::config("an eps-ball graph needs --eps"))?;
            build_eps_graph(&file.cloud, eps, &p.kernel.profile()?)?
        }
        GraphKind::Knn => build_knn_graph(&file.cloud, p.k, p.sigma_neighbor)?,
    };
    restrict(p, file, graph)
}

fn load_or_build(p: &GraphParams, graph_file: Option<&Path>) -> Result<(CloudFile, SparseGraph)> {
    match graph_file {
        None => build_graph(p),
        Some(path) => {
            let file = read_cloud_arg(p)?;
            let graph = load_graph(path)?;
            if graph.n() != file.cloud.len() {
                return Err(Error::data(format!(
                    "graph has {} nodes but the cloud has {}",
                    graph.n(),
                    file.cloud.len()
                )));
            }
            restrict(p, file, graph)
        }
    }
}

fn restrict(
    p: &GraphParams,
    file: CloudFile,
    graph: SparseGraph,
) -> Result<(CloudFile, SparseGraph)> {
    if !p.largest_component {
        return Ok((file, graph));
    }
    let (graph, cloud, keep) = restrict_to_labeled_component(&graph, &file.cloud)?;
    let truth = file.truth.map(|t| keep.iter().map(|&i| t[i]).collect());
    Ok((CloudFile { cloud, truth }, graph))
}

fn classify(
    ctx: &Context,
    cp: &crate::config::ClassifyParams,
    file: CloudFile,
    graph: SparseGraph,
) -> Result<Vec<PathBuf>> {
    let labels = file.cloud.labels();
    let label_classes = labels
        .classes
        .as_ref()
        .ok_or_else(|| Error::data("classification needs class labels in the cloud file"))?;
    let seen = label_classes
        .iter()
        .chain(file.truth.iter().flatten())
        .max()
        .map_or(0, |&c| c + 1);
    let class_count = cp.classes.unwrap_or(seen);
    let task = MulticlassTask {
        class_count,
        truth: file.truth.clone(),
    };
    let eps = graph.eps().unwrap_or(1.0);
    let inst = Instance {
        zeta: cp.settings.zeta.resolve(file.cloud.sample_count(), eps),
        eps,
        cloud: file.cloud,
        graph,
    };
    let weights = inst.pw_weights(&cp.settings)?;
    let wnll = cp
        .settings
        .wnll_mu
        .map(|mu| pwgl_core::solve::WnllParams { mu });
    create_dir(&ctx.out)?;
    let mut written = Vec::new();
    let mut summary = serde_json::Map::new();
    for &method in &cp.settings.methods {
        let pred = one_vs_rest(
            &inst.graph,
            &weights,
            &inst.cloud,
            &task,
            method,
            wnll,
            &cp.settings.solver,
        )?;
        let path = ctx.file(&format!("prediction_{}.csv", method.name()));
        write_prediction(&pred, create(&path)?)?;
        written.push(path);
        let entry = match &file.truth {
            Some(truth) => serde_json::to_value(summarize(&pred, truth, class_count)?)
                .map_err(|e| Error::data(e.to_string()))?,
            None => {
                let mut counts = vec![0usize; class_count];
                for &c in &pred.classes {
                    counts[c] += 1;
                }
                json!({ "predicted_counts": counts })
            }
        };
        summary.insert(method.name().into(), entry);
    }
    let path = ctx.file("summary.json");
    write_json(&Value::Object(summary), &path)?;
    written.push(path);
    Ok(written)
}
