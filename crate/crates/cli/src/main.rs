use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use roadgnn::backend::{DistanceBackend, Exact, Gnn};
use roadgnn::eval::{bench, build_dataset, emit_plots, write_table, BenchOptions, Dataset, DatasetSpec, Method, Query};
use roadgnn::graph::{Graph, NodeId};
use roadgnn::hazard::{apply_scenario, delay_ratios, parse_mask, parse_shelters, summarize, FloodScenario};
use roadgnn::landmark::Strategy;
use roadgnn::model::{train_with, ModelParams, TrainConfig};
use roadgnn::oracle::{dijkstra, write_ground_truth, GROUND_TRUTH_HEADER};
use roadgnn::par::ExecMode;
use roadgnn::pathfinder::{recommend_route_with, PathMode};
use roadgnn::synth::{generate, SynthConfig};

#[derive(Parser)]
#[command(name = "roadgnn", version, about = "Shortest-distance estimation on road networks")]
struct Cli {
    /// Seed for every random choice; overrides a seed in --config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic road network.
    Gen {
        /// Size preset (1k, 2k, 3k, 4k, 10k, 20k, 50k, 100k).
        #[arg(long, default_value = "1k")]
        preset: String,
        /// File stem for the edge list and its JSON sidecar.
        #[arg(long, default_value = "graph")]
        name: String,
    },
    /// Generate topologies, sample sources and write a manifest.
    Dataset {
        #[arg(long, default_value = "1k")]
        preset: String,
        /// Use full sample counts instead of the desk-scale tenth.
        #[arg(long)]
        full: bool,
        /// Also write exact labels for every sample.
        #[arg(long)]
        labels: bool,
    },
    /// Train the network.
    Train {
        /// Dataset directory written by `dataset`; built from the config otherwise.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Accuracy of every method on the test split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Timing and accuracy comparison on test topologies.
    Bench {
        #[arg(long, default_value = "2k")]
        preset: String,
        #[arg(long)]
        full: bool,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "dijkstra,landmark,gnn")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value = "farthest")]
        landmarks: Strategy,
    },
    /// Evacuation delay ratios under a flood mask.
    Flood {
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        shelters: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Exact)]
        backend: Backend,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        speed_factor: f64,
        #[arg(long, default_value = "flood")]
        label: String,
    },
    /// Recommend a route and print it as CSV.
    Route {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long, default_value = "consistent")]
        mode: PathMode,
        #[arg(long, value_enum, default_value_t = Backend::Gnn)]
        backend: Backend,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Gnn,
}

/// `train` configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    dataset: DatasetSpec,
    train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: DatasetSpec::standard("1k", false, 0).expect("known preset"),
            train: TrainConfig::default(),
        }
    }
}

/// Written next to `model.bin`.
#[derive(Debug, Serialize, Deserialize)]
struct RunRecord {
    config: RunConfig,
    train_seconds: f64,
    best_epoch: usize,
    best_loss: f64,
}

/// Bad input from the command line rather than a failed operation.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Invalid(msg.into()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(roadgnn::Error::from)
        .with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_model(path: Option<&Path>) -> Result<ModelParams> {
    let path = path.ok_or_else(|| invalid("the gnn backend needs --model"))?;
    ModelParams::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.chain().any(|c| {
                c.downcast_ref::<Invalid>().is_some()
                    || c.downcast_ref::<roadgnn::Error>().is_some_and(roadgnn::Error::is_validation)
            });
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_path();
    let config = cli.config.as_deref();
    match cli.command {
        Command::Gen { preset, name } => {
            let mut cfg: SynthConfig = match config {
                Some(p) => read_json(p)?,
                None => SynthConfig::preset(&preset, 0)?,
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let g = generate(&cfg)?;
            fs::create_dir_all(out)?;
            g.save_edge_list(out.join(format!("{name}.txt")))?;
            write_file(&out.join(format!("{name}.json")), serde_json::to_string_pretty(&cfg)? + "\n")?;
            println!("{} nodes, {} edges", g.node_count(), g.edge_count());
        }
        Command::Dataset { preset, full, labels } => {
            let mut spec: DatasetSpec = match config {
                Some(p) => read_json(p)?,
                None => DatasetSpec::standard(&preset, full, 0)?,
            };
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let ds = build_dataset(&spec, ExecMode::default())?;
            ds.save(out)?;
            if labels {
                write_labels(&ds, &out.join("labels.csv"))?;
            }
            println!(
                "{} topologies, {} train and {} test samples",
                ds.graphs.len(),
                ds.train.len(),
                ds.test.len()
            );
        }
        Command::Train { data, epochs } => {
            let mut rc: RunConfig = match config {
                Some(p) => read_json(p)?,
                None => RunConfig::default(),
            };
            if let Some(s) = cli.seed {
                rc.dataset.seed = s;
                rc.train.seed = s;
            }
            if let Some(e) = epochs {
                rc.train.epochs = e;
            }
            let ds = match &data {
                Some(dir) => Dataset::load(dir, ExecMode::default())?,
                None => build_dataset(&rc.dataset, ExecMode::default())?,
            };
            rc.dataset = ds.spec.clone();
            let start = Instant::now();
            let outcome = train_with(ds.train_graphs(), &ds.train, &rc.train, ExecMode::default(), |e, l| {
                eprintln!("epoch {e} loss {l:.6}")
            })?;
            let train_seconds = start.elapsed().as_secs_f64();
            fs::create_dir_all(out)?;
            outcome.params.save(out.join("model.bin"))?;
            let mut w = create(&out.join("loss.csv"))?;
            writeln!(w, "epoch,loss")?;
            for (e, l) in outcome.history.iter().enumerate() {
                writeln!(w, "{e},{l}")?;
            }
            w.flush()?;
            let record = RunRecord {
                config: rc,
                train_seconds,
                best_epoch: outcome.best_epoch,
                best_loss: outcome.history[outcome.best_epoch],
            };
            write_file(&out.join("run.json"), serde_json::to_string_pretty(&record)? + "\n")?;
            println!("best epoch {} loss {:.6} in {train_seconds:.1}s", record.best_epoch, record.best_loss);
        }
        Command::Eval { model, data } => {
            let params = load_model(Some(&model))?;
            let ds = dataset_for(config, cli.seed, data.as_deref(), None)?;
            let queries: Vec<Query> = ds
                .test
                .iter()
                .map(|s| Query {
                    topology: s.topology,
                    source: s.source,
                })
                .collect();
            let opts = BenchOptions {
                model: Some((&params, train_seconds(&model))),
                landmark_seed: ds.spec.seed,
                ..BenchOptions::default()
            };
            let results = bench(&Method::ALL, &ds.graphs, &queries, &opts)?;
            fs::create_dir_all(out)?;
            let mut w = create(&out.join("metrics.csv"))?;
            writeln!(w, "method,n,mae,mape_pct,pearson")?;
            for r in &results {
                let m = &r.metrics;
                writeln!(w, "{},{},{},{},{}", r.timing.method.label(), m.n, m.mae, 100.0 * m.mape, m.pearson)?;
                println!(
                    "{:<9} MAE {:.5} MAPE {:.3}% pearson {:.4}",
                    r.timing.method.label(),
                    m.mae,
                    100.0 * m.mape,
                    m.pearson
                );
            }
            w.flush()?;
            emit_plots(&results, out)?;
        }
        Command::Bench {
            preset,
            full,
            data,
            model,
            methods,
            queries,
            landmarks,
        } => {
            if methods.is_empty() {
                return Err(invalid("no methods selected"));
            }
            if queries == 0 {
                return Err(invalid("--queries must be positive"));
            }
            let params = if methods.contains(&Method::Gnn) {
                let path = model.as_deref().ok_or_else(|| invalid("the gnn method needs --model"))?;
                Some((load_model(Some(path))?, train_seconds(path)))
            } else {
                None
            };
            let ds = dataset_for(config, cli.seed, data.as_deref(), Some((&preset, full)))?;
            let test = &ds.test;
            if test.is_empty() {
                return Err(invalid("dataset has no test samples"));
            }
            let picked: Vec<Query> = (0..queries.min(test.len()))
                .map(|i| {
                    let s = &test[i * test.len() / queries.min(test.len())];
                    Query {
                        topology: s.topology,
                        source: s.source,
                    }
                })
                .collect();
            let opts = BenchOptions {
                model: params.as_ref().map(|(p, t)| (p, *t)),
                landmark_strategy: landmarks,
                landmark_seed: ds.spec.seed,
                ..BenchOptions::default()
            };
            let results = bench(&methods, &ds.graphs, &picked, &opts)?;
            fs::create_dir_all(out)?;
            let mut w = create(&out.join("table2.csv"))?;
            write_table(&results, &mut w)?;
            w.flush()?;
            emit_plots(&results, out)?;
            write_table(&results, &mut io::stdout().lock())?;
        }
        Command::Flood {
            before,
            mask,
            shelters,
            backend,
            model,
            speed_factor,
            label,
        } => {
            let g = Graph::load_edge_list(&before)?;
            let mask_text = fs::read_to_string(&mask).with_context(|| format!("reading {}", mask.display()))?;
            let flooded = parse_mask(&mask_text, g.node_count(), &mask)?;
            let shelter_text =
                fs::read_to_string(&shelters).with_context(|| format!("reading {}", shelters.display()))?;
            let shelter_ids = parse_shelters(&shelter_text, g.node_count(), &shelters)?;
            let scenario = FloodScenario::new(flooded, speed_factor, label)?;
            let after = apply_scenario(&g, &scenario)?;
            let params;
            let backend: Box<dyn DistanceBackend> = match backend {
                Backend::Exact => Box::new(Exact),
                Backend::Gnn => {
                    params = load_model(model.as_deref())?;
                    Box::new(Gnn::new(&params))
                }
            };
            let report = delay_ratios(&g, &after, &shelter_ids, backend.as_ref(), ExecMode::default())?;
            let summary = summarize(&report, speed_factor)?;
            fs::create_dir_all(out)?;
            let mut w = create(&out.join("delta.csv"))?;
            report.write_csv(&mut w)?;
            w.flush()?;
            let mut w = create(&out.join("histogram.csv"))?;
            summary.write_histogram_csv(&mut w)?;
            w.flush()?;
            let json = serde_json::json!({
                "label": scenario.label,
                "backend": backend.name(),
                "speed_factor": speed_factor,
                "shelters": shelter_ids.len(),
                "defined": summary.count,
                "mean": summary.mean,
                "max": summary.max,
            });
            write_file(&out.join("summary.json"), serde_json::to_string_pretty(&json)? + "\n")?;
            println!("mean delay ratio {:.4}, max {:.4} over {} nodes", summary.mean, summary.max, summary.count);
        }
        Command::Route {
            graph,
            from,
            to,
            mode,
            backend,
            model,
        } => {
            let g = Graph::load_edge_list(&graph)?;
            let params;
            let backend: Box<dyn DistanceBackend> = match backend {
                Backend::Exact => Box::new(Exact),
                Backend::Gnn => {
                    params = load_model(model.as_deref())?;
                    Box::new(Gnn::new(&params))
                }
            };
            let route = recommend_route_with(&g, backend.as_ref(), NodeId(from), NodeId(to), mode)?;
            let cumulative = route.cumulative(&g)?;
            let mut w = io::stdout().lock();
            writeln!(w, "step,node,cumulative")?;
            for (i, (v, c)) in route.path.iter().zip(&cumulative).enumerate() {
                writeln!(w, "{i},{v},{c}")?;
            }
            eprintln!("estimate {} ({})", route.estimate, backend.name());
        }
    }
    Ok(())
}

/// Dataset from `--data`, else from a JSON spec in `--config`, else the
/// standard split of `fallback`.
fn dataset_for(config: Option<&Path>, seed: Option<u64>, data: Option<&Path>, fallback: Option<(&str, bool)>) -> Result<Dataset> {
    if let Some(dir) = data {
        return Ok(Dataset::load(dir, ExecMode::default())?);
    }
    let mut spec = match (config, fallback) {
        // A bare spec has no optional fields, so try it before a run config.
        (Some(p), _) => match read_json::<DatasetSpec>(p) {
            Ok(spec) => spec,
            Err(_) => read_json::<RunConfig>(p)?.dataset,
        },
        (None, Some((preset, full))) => DatasetSpec::standard(preset, full, 0)?,
        (None, None) => return Err(invalid("need --data or --config with a dataset spec")),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    Ok(build_dataset(&spec, ExecMode::default())?)
}

/// Training time from the `run.json` next to a model, 0 when absent.
fn train_seconds(model: &Path) -> f64 {
    let record = model.parent().map(|d| d.join("run.json"));
    record
        .and_then(|p| fs::read_to_string(p).ok())
        .and_then(|t| serde_json::from_str::<RunRecord>(&t).ok())
        .map_or(0.0, |r| r.train_seconds)
}

/// Ground-truth blocks, each headed by `# <split> topology <t> source <s>`.
fn write_labels(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{GROUND_TRUTH_HEADER}")?;
    for (split, set) in [("train", &ds.train), ("test", &ds.test)] {
        for s in set {
            writeln!(w, "# {split} topology {} source {}", s.topology, s.source)?;
            let sssp = dijkstra(&ds.graphs[s.topology], s.source)?;
            write_ground_truth(&mut w, &sssp, &s.hops)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
