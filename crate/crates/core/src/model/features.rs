use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalized_coords, Graph, NodeId};
use crate::nn::Tensor;
use crate::oracle::bfs_hops;

/// How raw edge weights and distances are mapped to model units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceScale {
    /// Divide by the bounding-box diagonal of the raw coordinates.
    #[default]
    BboxDiagonal,
    /// Use raw units.
    Unit,
}

/// Source-independent view of one topology: normalized coordinates, edge
/// features, and the in-adjacency used for aggregation.
#[derive(Debug, Clone)]
pub struct GraphContext {
    pub(crate) node_count: usize,
    pub(crate) in_offsets: Vec<usize>,
    /// Tail node of each in-edge, aligned with `in_edge_ids`.
    pub(crate) in_sources: Vec<usize>,
    pub(crate) in_edge_ids: Vec<usize>,
    pub(crate) norm_coords: Vec<[f64; 2]>,
    pub(crate) edge_feats: Tensor,
    /// Raw units per model unit.
    pub scale: f64,
}

impl GraphContext {
    pub fn new(graph: &Graph, convention: DistanceScale) -> Self {
        let scale = match convention {
            DistanceScale::BboxDiagonal => {
                let d = graph.bbox_diagonal();
                if d > 0.0 {
                    d
                } else {
                    1.0
                }
            }
            DistanceScale::Unit => 1.0,
        };
        let (offsets, ids) = graph.in_csr();
        let in_sources = ids.iter().map(|&e| graph.edges()[e].from.index()).collect();
        let edge_feats = Tensor::column(graph.edges().iter().map(|e| e.weight / scale).collect());
        GraphContext {
            node_count: graph.node_count(),
            in_offsets: offsets.to_vec(),
            in_sources,
            in_edge_ids: ids.to_vec(),
            norm_coords: normalized_coords(graph.coords()),
            edge_feats,
            scale,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_feats(&self) -> &Tensor {
        &self.edge_feats
    }

    /// Node features for `source` given its hop counts.
    pub fn features_from_hops(&self, source: NodeId, hops: &[Option<u32>]) -> Result<FeatureSet> {
        if source.index() >= self.node_count {
            return Err(Error::NodeOutOfRange(source));
        }
        if hops.len() != self.node_count {
            return Err(Error::Shape {
                op: "features",
                detail: format!("{} hop entries for {} nodes", hops.len(), self.node_count),
            });
        }
        let max_hop = hops.iter().flatten().copied().max().unwrap_or(0);
        if max_hop == 0 {
            return Err(Error::IsolatedSource(source));
        }
        let inv = 1.0 / max_hop as f64;
        let mut node_feats = Tensor::zeros(self.node_count, 3);
        for (v, (h, c)) in hops.iter().zip(&self.norm_coords).enumerate() {
            // Unreachable nodes carry the maximum normalized hop; they are
            // masked out of losses and metrics.
            let hop = h.map_or(1.0, |h| h as f64 * inv);
            node_feats.row_mut(v).copy_from_slice(&[hop, c[0], c[1]]);
        }
        Ok(FeatureSet {
            source,
            node_feats,
            reachable_mask: hops.iter().map(Option::is_some).collect(),
        })
    }
}

/// Per-source node features `[hop(s,v) / max hop, x(v), y(v)]` with the
/// reachability mask. Edge features live on [`GraphContext`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub source: NodeId,
    pub node_feats: Tensor,
    pub reachable_mask: Vec<bool>,
}

/// Builds the context and the features of `source` in one go.
pub fn build_features(graph: &Graph, source: NodeId) -> Result<(GraphContext, FeatureSet)> {
    let hops = bfs_hops(graph, source)?;
    let ctx = GraphContext::new(graph, DistanceScale::default());
    let feats = ctx.features_from_hops(source, &hops)?;
    Ok((ctx, feats))
}

/// Loss weights `clamp(1/d, lo, hi)` for distances in model units; `d = 0`
/// maps to `hi` and unreachable nodes to 0.
pub fn node_weights(dist: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    dist.iter()
        .map(|&d| {
            if !d.is_finite() {
                0.0
            } else if d <= 0.0 {
                hi
            } else {
                (1.0 / d).clamp(lo, hi)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::synth::{generate, SynthConfig};

    fn path3() -> Graph {
        Graph::from_coords(
            vec![[0.0, 0.0], [1.0, 0.5], [2.0, 1.0]],
            vec![Edge::new(0usize, 1usize, 1.0), Edge::new(1usize, 2usize, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn source_row_and_hop_normalization() {
        let (_, f) = build_features(&path3(), NodeId(0)).unwrap();
        assert_eq!(f.node_feats.row(0), &[0.0, 0.0, 0.0]);
        let hops: Vec<f64> = (0..3).map(|v| f.node_feats.get(v, 0)).collect();
        assert_eq!(hops, vec![0.0, 0.5, 1.0]);
        assert_eq!(f.node_feats.row(1), &[0.5, 0.5, 0.5]);
        assert_eq!(f.reachable_mask, vec![true; 3]);
    }

    #[test]
    fn isolated_source_is_an_error() {
        let g = path3();
        assert!(matches!(build_features(&g, NodeId(2)), Err(Error::IsolatedSource(_))));
    }

    #[test]
    fn unit_grid_edge_features() {
        let g = generate(&SynthConfig::plain_grid(2, 2)).unwrap();
        let (ctx, _) = build_features(&g, NodeId(0)).unwrap();
        let expect = 1.0 / std::f64::consts::SQRT_2;
        assert!(ctx.edge_feats().data().iter().all(|&x| (x - expect).abs() < 1e-15));
    }

    #[test]
    fn unreachable_nodes_are_masked() {
        let mut g = path3();
        g = Graph::from_coords(
            g.coords().iter().copied().chain([[3.0, 3.0]]).collect(),
            g.edges().to_vec(),
        )
        .unwrap();
        let (_, f) = build_features(&g, NodeId(0)).unwrap();
        assert_eq!(f.reachable_mask, vec![true, true, true, false]);
        assert!(f.node_feats.is_finite());
    }

    #[test]
    fn weight_examples() {
        let w = node_weights(&[0.0, 20.0, 4.0, f64::INFINITY, 0.5], 0.1, 1.0);
        assert_eq!(w, vec![1.0, 0.1, 0.25, 0.0, 1.0]);
    }

    #[test]
    fn translation_leaves_features_unchanged() {
        let g = generate(&SynthConfig::preset("1k", 2).unwrap()).unwrap();
        let shifted = Graph::from_coords(
            g.coords().iter().map(|c| [c[0] + 1000.0, c[1] - 250.0]).collect(),
            g.edges().to_vec(),
        )
        .unwrap();
        let (ca, fa) = build_features(&g, NodeId(17)).unwrap();
        let (cb, fb) = build_features(&shifted, NodeId(17)).unwrap();
        assert_eq!(fa.reachable_mask, fb.reachable_mask);
        for (a, b) in fa.node_feats.data().iter().zip(fb.node_feats.data()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((ca.scale - cb.scale).abs() < 1e-9);
    }
}
