use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::nn::{Groups, Tape, Tensor, Var};
use crate::oracle::bfs_hops;

use super::features::{FeatureSet, GraphContext};
use super::params::{FinalActivation, ModelParams};

/// Output of [`forward_tape`].
pub struct Forward {
    /// `rows x 1` predictions in model units (the edge aggregate for
    /// [`edge_tape`]).
    pub prediction: Var,
    /// One tape variable per entry of [`ModelParams::params`].
    pub param_vars: Vec<Var>,
}

fn mlp(tape: &mut Tape<'_>, mut x: Var, layers: &[Var], relu_last: bool) -> Result<Var> {
    let depth = layers.len() / 2;
    for l in 0..depth {
        x = tape.linear(x, layers[2 * l], layers[2 * l + 1])?;
        if l + 1 < depth || relu_last {
            x = tape.relu(x);
        }
    }
    Ok(x)
}

/// Records the network on `tape`.
///
/// Node and edge features are embedded by MLPs; each message-passing step
/// averages in-neighbour embeddings and incoming-edge embeddings and feeds
/// `[h_v, mean h_u, mean h_e]` through an affine map and ReLU. The layer
/// embeddings are combined by the projection vector, and the head MLP maps
/// `[h_final(v), h_final(source)]` to a distance. Only `rows` are passed
/// through the head when given.
pub fn forward_tape<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext,
    features: &'a FeatureSet,
    params: &'a ModelParams,
    rows: Option<&[usize]>,
) -> Result<Forward> {
    let param_vars: Vec<Var> = params.params.iter().map(|p| tape.param(&p.value)).collect();
    let agg_e = edge_branch(tape, ctx, params, &param_vars)?;
    let prediction = node_branch(tape, ctx, features, params, &param_vars, agg_e, rows)?;
    Ok(Forward {
        prediction,
        param_vars,
    })
}

/// Mean incoming-edge embedding per node. It does not depend on the source,
/// so training evaluates it once per topology and batch.
pub fn edge_tape<'a>(tape: &mut Tape<'a>, ctx: &'a GraphContext, params: &'a ModelParams) -> Result<Forward> {
    let param_vars: Vec<Var> = params.params.iter().map(|p| tape.param(&p.value)).collect();
    let prediction = edge_branch(tape, ctx, params, &param_vars)?;
    Ok(Forward {
        prediction,
        param_vars,
    })
}

/// [`forward_tape`] with the edge branch supplied as a precomputed leaf.
/// Returns the forward pass and the leaf so its gradient can be read back.
pub fn forward_tape_with_edges<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext,
    features: &'a FeatureSet,
    params: &'a ModelParams,
    agg_e: &'a Tensor,
    rows: Option<&[usize]>,
) -> Result<(Forward, Var)> {
    let param_vars: Vec<Var> = params.params.iter().map(|p| tape.param(&p.value)).collect();
    let leaf = tape.param(agg_e);
    let prediction = node_branch(tape, ctx, features, params, &param_vars, leaf, rows)?;
    Ok((
        Forward {
            prediction,
            param_vars,
        },
        leaf,
    ))
}

fn edge_branch<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext,
    params: &ModelParams,
    param_vars: &[Var],
) -> Result<Var> {
    let layout = params.layout();
    let x_e = tape.constant(&ctx.edge_feats);
    let h_e = mlp(tape, x_e, &param_vars[layout.edge_mlp..layout.edge_mlp + 2 * layout.depth], true)?;
    let incoming = Groups::new(&ctx.in_offsets[..], &ctx.in_edge_ids[..])?;
    tape.mean_rows(h_e, incoming)
}

fn node_branch<'a>(
    tape: &mut Tape<'a>,
    ctx: &'a GraphContext,
    features: &'a FeatureSet,
    params: &ModelParams,
    param_vars: &[Var],
    agg_e: Var,
    rows: Option<&[usize]>,
) -> Result<Var> {
    let layout = params.layout();
    let depth2 = 2 * layout.depth;
    let x_v = tape.constant(&features.node_feats);
    let h0 = mlp(tape, x_v, &param_vars[layout.node_mlp..layout.node_mlp + depth2], true)?;
    let neighbours = Groups::new(&ctx.in_offsets[..], &ctx.in_sources[..])?;
    let mut layers = vec![h0];
    for k in 0..layout.layers {
        let h = *layers.last().unwrap();
        let agg_n = tape.mean_rows(h, neighbours.clone())?;
        let cat = tape.concat_cols(&[h, agg_n, agg_e])?;
        let w = param_vars[layout.mp + 2 * k];
        let b = param_vars[layout.mp + 2 * k + 1];
        let next = tape.linear(cat, w, b)?;
        layers.push(tape.relu(next));
    }
    let mut h_final = tape.weighted_sum(&layers, param_vars[layout.proj])?;
    if params.config.final_activation == FinalActivation::Relu {
        h_final = tape.relu(h_final);
    }

    let n = ctx.node_count;
    let targets = match rows {
        Some(r) => tape.gather_rows(h_final, r.to_vec())?,
        None => h_final,
    };
    let count = rows.map_or(n, <[usize]>::len);
    let source = tape.gather_rows(h_final, vec![features.source.index(); count])?;
    let pair = tape.concat_cols(&[targets, source])?;
    mlp(tape, pair, &param_vars[layout.head..layout.head + depth2], false)
}

/// Predictions for every node in model units.
pub fn forward(ctx: &GraphContext, features: &FeatureSet, params: &ModelParams) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let out = forward_tape(&mut tape, ctx, features, params, None)?;
    Ok(tape.value(out.prediction).data().to_vec())
}

/// Single-source distance estimates in the graph's own units; negative raw
/// outputs are clamped to 0.
pub fn predict_sssd(graph: &Graph, source: NodeId, params: &ModelParams) -> Result<Vec<f64>> {
    let ctx = GraphContext::new(graph, Default::default());
    predict_with_context(graph, &ctx, source, params)
}

pub fn predict_with_context(
    graph: &Graph,
    ctx: &GraphContext,
    source: NodeId,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    let hops = bfs_hops(graph, source)?;
    let feats = ctx.features_from_hops(source, &hops)?;
    let raw = forward(ctx, &feats, params)?;
    Ok(raw.into_iter().map(|y| to_raw_units(y, ctx.scale)).collect())
}

#[inline]
pub fn to_raw_units(y: f64, scale: f64) -> f64 {
    y.max(0.0) * scale
}

#[inline]
pub fn to_model_units(d: f64, scale: f64) -> f64 {
    d / scale
}
