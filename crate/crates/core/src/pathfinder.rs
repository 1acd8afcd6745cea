//! Route recommendation from a single-source distance field.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::backend::{DistanceBackend, Gnn};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::model::ModelParams;

/// How a node picks its upstream neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// In-neighbour `u` with the smallest `dist[u]`, ignoring `w(u, v)`.
    Paper,
    /// In-neighbour `u` with the smallest `dist[u] + w(u, v)`.
    #[default]
    Consistent,
}

impl FromStr for PathMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(PathMode::Paper),
            "consistent" => Ok(PathMode::Consistent),
            _ => Err(Error::Config(format!("unknown path mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredecessorMap {
    pub pred: Vec<Option<NodeId>>,
    pub source: NodeId,
    pub mode: PathMode,
}

/// Predecessor of every node but `source`. Candidates with a non-finite key
/// are skipped, ties go to the smaller id, and nodes without a candidate get
/// none.
pub fn compute_predecessors(graph: &Graph, dist: &[f64], source: NodeId, mode: PathMode) -> Result<PredecessorMap> {
    graph.check_node(source)?;
    if dist.len() != graph.node_count() {
        return Err(Error::Shape {
            op: "compute_predecessors",
            detail: format!("{} distances for {} nodes", dist.len(), graph.node_count()),
        });
    }
    let pred = graph
        .nodes()
        .map(|v| {
            if v == source {
                return None;
            }
            let mut best: Option<(f64, NodeId)> = None;
            for e in graph.in_edges(v) {
                let key = match mode {
                    PathMode::Paper => dist[e.from.index()],
                    PathMode::Consistent => dist[e.from.index()] + e.weight,
                };
                if !key.is_finite() {
                    continue;
                }
                best = match best {
                    Some((k, u)) if k < key || (k == key && u <= e.from) => Some((k, u)),
                    _ => Some((key, e.from)),
                };
            }
            best.map(|(_, u)| u)
        })
        .collect();
    Ok(PredecessorMap { pred, source, mode })
}

/// Walks predecessors back from `t` to `s`.
pub fn reconstruct_path(pred: &PredecessorMap, s: NodeId, t: NodeId) -> Result<Vec<NodeId>> {
    if s != pred.source {
        return Err(Error::Config(format!(
            "predecessor map was built for source {}, not {s}",
            pred.source
        )));
    }
    let n = pred.pred.len();
    if t.index() >= n {
        return Err(Error::NodeOutOfRange(t));
    }
    let mut visited = vec![false; n];
    let mut path = vec![t];
    visited[t.index()] = true;
    let mut cur = t;
    while cur != s {
        let p = pred.pred[cur.index()].ok_or(Error::Unreachable(cur))?;
        if visited[p.index()] || path.len() > n {
            return Err(Error::RouteCycle(p));
        }
        visited[p.index()] = true;
        path.push(p);
        cur = p;
    }
    path.reverse();
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub path: Vec<NodeId>,
    /// Backend distance estimate at the target.
    pub estimate: f64,
}

impl Route {
    /// Cumulative edge weight at each node of the path, starting at 0.
    pub fn cumulative(&self, graph: &Graph) -> Result<Vec<f64>> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.path.len());
        out.push(0.0);
        for w in self.path.windows(2) {
            acc += graph.edge_weight(w[0], w[1]).ok_or_else(|| {
                Error::Config(format!("route step {} -> {} is not an edge", w[0], w[1]))
            })?;
            out.push(acc);
        }
        Ok(out)
    }

    pub fn total_weight(&self, graph: &Graph) -> Result<f64> {
        Ok(*self.cumulative(graph)?.last().expect("path is never empty"))
    }
}

/// Route from `s` to `t` with the trained network as distance backend.
pub fn recommend_route(graph: &Graph, params: &ModelParams, s: NodeId, t: NodeId, mode: PathMode) -> Result<Route> {
    recommend_route_with(graph, &Gnn::new(params), s, t, mode)
}

pub fn recommend_route_with(
    graph: &Graph,
    backend: &dyn DistanceBackend,
    s: NodeId,
    t: NodeId,
    mode: PathMode,
) -> Result<Route> {
    graph.check_node(t)?;
    let dist = backend.sssd(graph, s)?;
    let pred = compute_predecessors(graph, &dist, s, mode)?;
    let path = reconstruct_path(&pred, s, t)?;
    Ok(Route {
        path,
        estimate: dist[t.index()],
    })
}
