use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backend::Gnn;
use crate::error::{Error, Result};
use crate::graph::{parse_edge_list, Graph, NodeId};
use crate::landmark::{landmark_count, LandmarkIndex, Strategy};
use crate::model::{GraphContext, ModelParams};
use crate::oracle::dijkstra;
use crate::par::ExecMode;
use crate::pathfinder::{compute_predecessors, reconstruct_path, PathMode};

use super::metrics::{metrics, MetricReport};

/// Repetitions of the load phase; the median is reported.
pub const LOAD_REPEATS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dijkstra,
    Landmark,
    Gnn,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Dijkstra, Method::Landmark, Method::Gnn];

    pub fn label(self) -> &'static str {
        match self {
            Method::Dijkstra => "dijkstra",
            Method::Landmark => "landmark",
            Method::Gnn => "gnn",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub topology: usize,
    pub source: NodeId,
}

/// Wall-clock seconds for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub method: Method,
    /// Model training or index construction.
    pub train_s: f64,
    /// Graph parsing plus per-graph feature setup, median over repeats,
    /// summed over graphs.
    pub load_s: f64,
    /// Per query: distances from the source to every node.
    pub run_s: Vec<f64>,
    /// Per query: distances plus one reconstructed route.
    pub path_s: Vec<f64>,
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

impl TimingReport {
    pub fn queries(&self) -> usize {
        self.run_s.len()
    }

    pub fn run_total(&self) -> f64 {
        self.run_s.iter().sum()
    }

    pub fn run_median(&self) -> f64 {
        median(&self.run_s)
    }

    pub fn path_total(&self) -> f64 {
        self.path_s.iter().sum()
    }

    pub fn path_median(&self) -> f64 {
        median(&self.path_s)
    }
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub timing: TimingReport,
    pub metrics: MetricReport,
    /// `(truth, prediction)` in units of each graph's bounding-box diagonal.
    pub pairs: Vec<(f64, f64)>,
    /// Queries whose route could not be reconstructed from the estimates.
    pub path_failures: usize,
}

#[derive(Debug, Clone)]
pub struct BenchOptions<'a> {
    pub landmark_strategy: Strategy,
    pub landmark_seed: u64,
    /// Trained network and its training time in seconds.
    pub model: Option<(&'a ModelParams, f64)>,
    pub path_mode: PathMode,
}

impl Default for BenchOptions<'_> {
    fn default() -> Self {
        BenchOptions {
            landmark_strategy: Strategy::default(),
            landmark_seed: 0,
            model: None,
            path_mode: PathMode::default(),
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn load_time(text: &str, extra: impl Fn(&Graph)) -> Result<f64> {
    let mut times = Vec::with_capacity(LOAD_REPEATS);
    for _ in 0..LOAD_REPEATS {
        let t = Instant::now();
        let g = parse_edge_list(text, "memory".as_ref())?;
        extra(&g);
        times.push(t.elapsed().as_secs_f64());
    }
    Ok(median(&times))
}

/// Runs every method in `methods` over the same `queries` on `graphs`,
/// single-threaded. Accuracy is measured against Dijkstra on all nodes the
/// source reaches, except the source itself.
pub fn bench(
    methods: &[Method],
    graphs: &[Graph],
    queries: &[Query],
    opts: &BenchOptions<'_>,
) -> Result<Vec<MethodResult>> {
    if queries.is_empty() {
        return Err(Error::Empty("benchmark queries"));
    }
    for q in queries {
        graphs
            .get(q.topology)
            .ok_or_else(|| Error::Config(format!("query references topology {}", q.topology)))?
            .check_node(q.source)?;
    }
    if methods.contains(&Method::Gnn) && opts.model.is_none() {
        return Err(Error::Config("gnn benchmark needs a trained model".into()));
    }
    let truths: Vec<Vec<f64>> = queries
        .iter()
        .map(|q| Ok(dijkstra(&graphs[q.topology], q.source)?.dist))
        .collect::<Result<_>>()?;
    // Route target per query: the farthest reachable node.
    let targets: Vec<NodeId> = truths
        .iter()
        .map(|d| {
            let (v, _) = d
                .iter()
                .enumerate()
                .filter(|(_, x)| x.is_finite())
                .fold((0, -1.0), |acc, (v, &x)| if x > acc.1 { (v, x) } else { acc });
            NodeId::from(v)
        })
        .collect();
    let texts: Vec<String> = graphs.iter().map(Graph::to_edge_list_string).collect();
    let scales: Vec<f64> = graphs.iter().map(Graph::bbox_diagonal).collect();

    let mut out = Vec::new();
    for &method in methods {
        let mut train_s = 0.0;
        let mut load_s = 0.0;
        let mut indexes = Vec::new();
        let mut contexts = Vec::new();
        match method {
            Method::Dijkstra => {
                for t in &texts {
                    load_s += load_time(t, |_| {})?;
                }
            }
            Method::Landmark => {
                for (g, t) in graphs.iter().zip(&texts) {
                    let (idx, s) = timed(|| {
                        LandmarkIndex::build(
                            g,
                            landmark_count(g.node_count()),
                            opts.landmark_strategy,
                            opts.landmark_seed,
                            ExecMode::Sequential,
                        )
                    });
                    indexes.push(idx?);
                    train_s += s;
                    load_s += load_time(t, |_| {})?;
                }
            }
            Method::Gnn => {
                let (params, s) = opts.model.expect("checked above");
                train_s = s;
                let scale = Gnn::new(params).scale;
                for (g, t) in graphs.iter().zip(&texts) {
                    load_s += load_time(t, |g| {
                        std::hint::black_box(GraphContext::new(g, scale));
                    })?;
                    contexts.push(GraphContext::new(g, scale));
                }
            }
        }

        let estimate = |q: &Query| -> Result<Vec<f64>> {
            let g = &graphs[q.topology];
            match method {
                Method::Dijkstra => Ok(dijkstra(g, q.source)?.dist),
                Method::Landmark => Ok(indexes[q.topology].estimate_all(q.source)),
                Method::Gnn => {
                    let params = opts.model.expect("checked above").0;
                    Gnn::new(params).sssd_with_context(g, &contexts[q.topology], q.source)
                }
            }
        };

        let mut run_s = Vec::with_capacity(queries.len());
        let mut path_s = Vec::with_capacity(queries.len());
        let mut pairs = Vec::new();
        let mut path_failures = 0;
        for (qi, q) in queries.iter().enumerate() {
            let (est, s) = timed(|| estimate(q));
            let est = est?;
            run_s.push(s);

            let g = &graphs[q.topology];
            let (route, s) = timed(|| {
                let est = estimate(q)?;
                let pred = compute_predecessors(g, &est, q.source, opts.path_mode)?;
                reconstruct_path(&pred, q.source, targets[qi])
            });
            path_s.push(s);
            if route.is_err() {
                path_failures += 1;
            }

            let scale = scales[q.topology];
            for (v, &d) in truths[qi].iter().enumerate() {
                if d.is_finite() && v != q.source.index() {
                    pairs.push((d / scale, est[v] / scale));
                }
            }
        }
        let (t, p): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        out.push(MethodResult {
            timing: TimingReport {
                method,
                train_s,
                load_s,
                run_s,
                path_s,
            },
            metrics: metrics(&t, &p)?,
            pairs,
            path_failures,
        });
    }
    Ok(out)
}

pub const TABLE_HEADER: &str =
    "method,train_s,load_s,run_s,run_median_s,path_s,path_median_s,queries,mae,mape_pct,pearson,path_failures";

/// One row per method: training time, load and run splits, accuracy.
pub fn write_table(results: &[MethodResult], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{TABLE_HEADER}")?;
    for r in results {
        let t = &r.timing;
        let m = &r.metrics;
        writeln!(
            w,
            "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{},{:.6e},{:.4},{:.6},{}",
            t.method.label(),
            t.train_s,
            t.load_s,
            t.run_total(),
            t.run_median(),
            t.path_total(),
            t.path_median(),
            t.queries(),
            m.mae,
            100.0 * m.mape,
            m.pearson,
            r.path_failures
        )?;
    }
    Ok(())
}
