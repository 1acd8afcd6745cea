//! Pluggable single-source distance providers shared by routing and the
//! flood analysis.

use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::model::{forward, to_raw_units, DistanceScale, GraphContext, ModelParams};
use crate::oracle::{bfs_hops, dijkstra};

pub trait DistanceBackend: Sync {
    /// Distances from `source` to every node in graph units; `inf` where
    /// `source` cannot reach.
    fn sssd(&self, graph: &Graph, source: NodeId) -> Result<Vec<f64>>;

    fn name(&self) -> &'static str;
}

/// Dijkstra.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exact;

impl DistanceBackend for Exact {
    fn sssd(&self, graph: &Graph, source: NodeId) -> Result<Vec<f64>> {
        Ok(dijkstra(graph, source)?.dist)
    }

    fn name(&self) -> &'static str {
        "exact"
    }
}

/// Trained network. Nodes the source cannot reach by hops are reported as
/// `inf` instead of the raw network output.
#[derive(Debug, Clone, Copy)]
pub struct Gnn<'p> {
    pub params: &'p ModelParams,
    pub scale: DistanceScale,
}

impl<'p> Gnn<'p> {
    pub fn new(params: &'p ModelParams) -> Self {
        Gnn {
            params,
            scale: DistanceScale::default(),
        }
    }

    /// [`DistanceBackend::sssd`] reusing a context built for `graph`.
    pub fn sssd_with_context(&self, graph: &Graph, ctx: &GraphContext, source: NodeId) -> Result<Vec<f64>> {
        let hops = bfs_hops(graph, source)?;
        let feats = ctx.features_from_hops(source, &hops)?;
        let raw = forward(ctx, &feats, self.params)?;
        Ok(raw
            .into_iter()
            .zip(&hops)
            .map(|(y, h)| match h {
                Some(_) => to_raw_units(y, ctx.scale),
                None => f64::INFINITY,
            })
            .collect())
    }
}

impl DistanceBackend for Gnn<'_> {
    fn sssd(&self, graph: &Graph, source: NodeId) -> Result<Vec<f64>> {
        self.sssd_with_context(graph, &GraphContext::new(graph, self.scale), source)
    }

    fn name(&self) -> &'static str {
        "gnn"
    }
}
