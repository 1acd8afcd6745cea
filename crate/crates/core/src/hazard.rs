//! Flood scenarios and evacuation delay ratios.

use std::io::Write;
use std::path::Path;

use crate::backend::DistanceBackend;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::par::{self, ExecMode};

pub const DEFAULT_SPEED_FACTOR: f64 = 1.0 / 3.0;
pub const BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FloodScenario {
    pub flooded: Vec<bool>,
    /// Travel speed multiplier on flooded edges, in `(0, 1]`.
    pub speed_factor: f64,
    pub label: String,
}

impl FloodScenario {
    pub fn new(flooded: Vec<bool>, speed_factor: f64, label: impl Into<String>) -> Result<Self> {
        if !(speed_factor > 0.0 && speed_factor <= 1.0) {
            return Err(Error::Config(format!("speed factor {speed_factor} not in (0, 1]")));
        }
        Ok(FloodScenario {
            flooded,
            speed_factor,
            label: label.into(),
        })
    }

    /// Nothing flooded.
    pub fn dry(node_count: usize) -> Self {
        FloodScenario {
            flooded: vec![false; node_count],
            speed_factor: DEFAULT_SPEED_FACTOR,
            label: "dry".into(),
        }
    }
}

/// Copy of `graph` whose edges touching a flooded node take `1 / speed_factor`
/// times as long.
pub fn apply_scenario(graph: &Graph, scenario: &FloodScenario) -> Result<Graph> {
    if scenario.flooded.len() != graph.node_count() {
        return Err(Error::Shape {
            op: "apply_scenario",
            detail: format!(
                "{} flood flags for {} nodes",
                scenario.flooded.len(),
                graph.node_count()
            ),
        });
    }
    let slow = 1.0 / scenario.speed_factor;
    let f = &scenario.flooded;
    let weights: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| {
            if f[e.from.index()] || f[e.to.index()] {
                e.weight * slow
            } else {
                e.weight
            }
        })
        .collect();
    graph.with_weights(&weights)
}

/// Evacuation times toward one shelter.
#[derive(Debug, Clone, PartialEq)]
pub struct ShelterDelays {
    pub shelter: NodeId,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    /// `after / before`, 1 at the shelter, `None` where either time is
    /// undefined.
    pub ratio: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayReport {
    /// Shelter-averaged ratio per node; `None` unless every shelter leg is defined.
    pub delta: Vec<Option<f64>>,
    pub shelters: Vec<ShelterDelays>,
}

impl DelayReport {
    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.delta.iter().flatten().copied()
    }

    /// `node,delta` rows, empty cell where undefined.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "node,delta")?;
        for (v, d) in self.delta.iter().enumerate() {
            match d {
                Some(d) => writeln!(w, "{v},{d}")?,
                None => writeln!(w, "{v},")?,
            }
        }
        Ok(())
    }
}

/// Node-to-shelter times before and after the flood, from single-source runs
/// on the reversed graphs.
pub fn delay_ratios(
    before: &Graph,
    after: &Graph,
    shelters: &[NodeId],
    backend: &dyn DistanceBackend,
    mode: ExecMode,
) -> Result<DelayReport> {
    if shelters.is_empty() {
        return Err(Error::Empty("shelter list"));
    }
    let n = before.node_count();
    if after.node_count() != n || after.edge_count() != before.edge_count() {
        return Err(Error::Shape {
            op: "delay_ratios",
            detail: "before and after graphs differ in topology".into(),
        });
    }
    for &s in shelters {
        before.check_node(s)?;
    }
    let (rb, ra) = (before.reversed(), after.reversed());
    let per_shelter = par::try_map_slice(mode, shelters, |&s| {
        let tb = backend.sssd(&rb, s)?;
        let ta = backend.sssd(&ra, s)?;
        let ratio = (0..n)
            .map(|v| {
                if v == s.index() {
                    Some(1.0)
                } else if tb[v].is_finite() && tb[v] > 0.0 && ta[v].is_finite() {
                    Some(ta[v] / tb[v])
                } else {
                    None
                }
            })
            .collect();
        Ok::<_, Error>(ShelterDelays {
            shelter: s,
            before: tb,
            after: ta,
            ratio,
        })
    })?;
    let k = per_shelter.len() as f64;
    let delta = (0..n)
        .map(|v| {
            per_shelter
                .iter()
                .map(|s| s.ratio[v])
                .sum::<Option<f64>>()
                .map(|sum| sum / k)
        })
        .collect();
    Ok(DelayReport {
        delta,
        shelters: per_shelter,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySummary {
    pub mean: f64,
    pub max: f64,
    pub count: usize,
    /// `counts.len() + 1` edges starting at 1 with step [`BIN_WIDTH`].
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl DelaySummary {
    /// `lo,hi,count` rows.
    pub fn write_histogram_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "lo,hi,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{},{c}", self.bin_edges[i], self.bin_edges[i + 1])?;
        }
        Ok(())
    }
}

/// Mean, max and histogram over the defined ratios. Bins cover
/// `[1, 1 / speed_factor]`; values outside are counted in the end bins.
pub fn summarize(report: &DelayReport, speed_factor: f64) -> Result<DelaySummary> {
    if !(speed_factor > 0.0 && speed_factor <= 1.0) {
        return Err(Error::Config(format!("speed factor {speed_factor} not in (0, 1]")));
    }
    let values: Vec<f64> = report.defined().collect();
    if values.is_empty() {
        return Err(Error::Empty("defined delay ratios"));
    }
    let span = 1.0 / speed_factor - 1.0;
    let bins = ((span / BIN_WIDTH - 1e-9).ceil() as usize).max(1);
    let bin_edges: Vec<f64> = (0..=bins).map(|i| 1.0 + i as f64 * BIN_WIDTH).collect();
    let mut counts = vec![0; bins];
    for &d in &values {
        let i = ((d - 1.0) / BIN_WIDTH).floor().max(0.0) as usize;
        counts[i.min(bins - 1)] += 1;
    }
    Ok(DelaySummary {
        mean: values.iter().sum::<f64>() / values.len() as f64,
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        count: values.len(),
        bin_edges,
        counts,
    })
}

/// Flood mask lines `<node_id> <0|1>`; unlisted nodes are dry. `#` starts a
/// comment.
pub fn parse_mask(text: &str, node_count: usize, origin: &Path) -> Result<Vec<bool>> {
    let mut flooded = vec![false; node_count];
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |m: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            message: m,
        };
        let mut it = line.split_whitespace();
        let (Some(id), Some(flag), None) = (it.next(), it.next(), it.next()) else {
            return Err(perr(format!("expected \"<node_id> <0|1>\", got {line:?}")));
        };
        let id: usize = id.parse().map_err(|_| perr(format!("bad node id {id:?}")))?;
        if id >= node_count {
            return Err(perr(format!("node {id} out of range for {node_count} nodes")));
        }
        flooded[id] = match flag {
            "0" => false,
            "1" => true,
            _ => return Err(perr(format!("flag must be 0 or 1, got {flag:?}"))),
        };
    }
    Ok(flooded)
}

/// One node id per line; `#` starts a comment.
pub fn parse_shelters(text: &str, node_count: usize, origin: &Path) -> Result<Vec<NodeId>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |m: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            message: m,
        };
        let id: u32 = line.parse().map_err(|_| perr(format!("bad node id {line:?}")))?;
        if id as usize >= node_count {
            return Err(perr(format!("node {id} out of range for {node_count} nodes")));
        }
        out.push(NodeId(id));
    }
    if out.is_empty() {
        return Err(Error::Empty("shelter list"));
    }
    Ok(out)
}
