use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::nn::{adam_step, AdamState, Tape, Tensor};
use crate::par::{self, ExecMode};

use super::features::{node_weights, DistanceScale, GraphContext};
use super::forward::{edge_tape, forward_tape_with_edges};
use super::params::{FinalActivation, ModelConfig, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub mask_fraction: f64,
    pub clamp_lo: f64,
    pub clamp_hi: f64,
    pub seed: u64,
    pub hidden: usize,
    pub layers: usize,
    pub mlp_depth: usize,
    pub final_activation: FinalActivation,
    pub distance_scale: DistanceScale,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            lr: 0.001,
            batch_size: 64,
            mask_fraction: 0.3,
            clamp_lo: 0.1,
            clamp_hi: 1.0,
            seed: 0,
            hidden: 64,
            layers: 3,
            mlp_depth: 3,
            final_activation: FinalActivation::Relu,
            distance_scale: DistanceScale::BboxDiagonal,
        }
    }
}

impl TrainConfig {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            hidden: self.hidden,
            layers: self.layers,
            mlp_depth: self.mlp_depth,
            final_activation: self.final_activation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.mask_fraction > 0.0 && self.mask_fraction <= 1.0) {
            return bad(format!("mask_fraction {} not in (0,1]", self.mask_fraction));
        }
        if !(self.clamp_lo <= self.clamp_hi) {
            return bad(format!("clamp range [{}, {}] is empty", self.clamp_lo, self.clamp_hi));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be positive".into());
        }
        if !(self.lr > 0.0) {
            return bad(format!("learning rate {} must be positive", self.lr));
        }
        Ok(())
    }
}

/// One training example: a topology, a source, and its exact labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub topology: usize,
    pub source: NodeId,
    /// Exact distances in raw units, `inf` where unreachable.
    pub dist: Vec<f64>,
    pub hops: Vec<Option<u32>>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters at the end of the epoch with the lowest training loss.
    pub params: ModelParams,
    /// Mean training loss per epoch.
    pub history: Vec<f64>,
    pub best_epoch: usize,
}

/// Batch mean of per-sample masked weighted L1 errors, each divided by its
/// masked-in node count.
pub fn loss(preds: &[Vec<f64>], truths: &[Vec<f64>], weights: &[Vec<f64>], masks: &[Vec<bool>]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Empty("loss batch"));
    }
    let mut total = 0.0;
    for (((p, t), w), m) in preds.iter().zip(truths).zip(weights).zip(masks) {
        let count = m.iter().filter(|&&x| x).count();
        if count == 0 {
            return Err(Error::Empty("loss mask"));
        }
        let s: f64 = (0..p.len())
            .filter(|&i| m[i])
            .map(|i| w[i] * (p[i] - t[i]).abs())
            .sum();
        total += s / count as f64;
    }
    Ok(total / preds.len() as f64)
}

/// Masked sample prepared for a gradient evaluation.
struct Prepared {
    sample: usize,
    rows: Vec<usize>,
    target: Vec<f64>,
    weight: Vec<f64>,
}

/// Trains a fresh model on `samples`, whose `topology` fields index `graphs`.
pub fn train(graphs: &[Graph], samples: &[TrainSample], config: &TrainConfig) -> Result<TrainOutcome> {
    train_with(graphs, samples, config, ExecMode::default(), |_, _| {})
}

/// [`train`] with an explicit execution mode and a per-epoch callback
/// receiving `(epoch, loss)`.
pub fn train_with(
    graphs: &[Graph],
    samples: &[TrainSample],
    config: &TrainConfig,
    mode: ExecMode,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("training samples"));
    }
    for s in samples {
        let g = graphs
            .get(s.topology)
            .ok_or_else(|| Error::Config(format!("sample references topology {}", s.topology)))?;
        if s.dist.len() != g.node_count() || s.hops.len() != g.node_count() {
            return Err(Error::Shape {
                op: "train",
                detail: format!("sample for source {} has wrong label length", s.source),
            });
        }
    }
    let contexts: Vec<GraphContext> = par::map_slice(mode, graphs, |g| {
        GraphContext::new(g, config.distance_scale)
    });
    let features = par::try_map_range(mode, samples.len(), |i| {
        let s = &samples[i];
        contexts[s.topology].features_from_hops(s.source, &s.hops)
    })?;
    let weights: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let scale = contexts[s.topology].scale;
            let scaled: Vec<f64> = s.dist.iter().map(|d| d / scale).collect();
            node_weights(&scaled, config.clamp_lo, config.clamp_hi)
        })
        .collect();
    let reachable: Vec<Vec<usize>> = features
        .iter()
        .map(|f| (0..f.reachable_mask.len()).filter(|&v| f.reachable_mask[v]).collect())
        .collect();

    let mut params = ModelParams::init(config.model_config(), config.seed)?;
    let mut adam = AdamState::new(&params.params, config.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best = (f64::INFINITY, 0usize, params.clone());

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let prepared: Vec<Prepared> = batch
                .iter()
                .map(|&i| {
                    let pool = &reachable[i];
                    let k = ((config.mask_fraction * pool.len() as f64).round() as usize).clamp(1, pool.len());
                    let mut rows: Vec<usize> = index::sample(&mut rng, pool.len(), k)
                        .into_iter()
                        .map(|j| pool[j])
                        .collect();
                    rows.sort_unstable();
                    let s = &samples[i];
                    let scale = contexts[s.topology].scale;
                    Prepared {
                        sample: i,
                        target: rows.iter().map(|&v| s.dist[v] / scale).collect(),
                        weight: rows.iter().map(|&v| weights[i][v]).collect(),
                        rows,
                    }
                })
                .collect();

            // Edge branch once per topology present in the batch.
            let mut topos: Vec<usize> = batch.iter().map(|&i| samples[i].topology).collect();
            topos.sort_unstable();
            topos.dedup();
            let mut slot = vec![usize::MAX; graphs.len()];
            for (j, &t) in topos.iter().enumerate() {
                slot[t] = j;
            }
            let edges = par::try_map_slice(mode, &topos, |&t| {
                let mut tape = Tape::new();
                let fwd = edge_tape(&mut tape, &contexts[t], &params)?;
                Ok::<_, Error>(tape.value(fwd.prediction).clone())
            })?;

            let seed = 1.0 / batch.len() as f64;
            let results = par::try_map_slice(mode, &prepared, |p| {
                let s = &samples[p.sample];
                let mut tape = Tape::new();
                let (fwd, leaf) = forward_tape_with_edges(
                    &mut tape,
                    &contexts[s.topology],
                    &features[p.sample],
                    &params,
                    &edges[slot[s.topology]],
                    Some(&p.rows),
                )?;
                let mask = vec![true; p.rows.len()];
                let l = tape.weighted_abs_error(fwd.prediction, &p.target, &p.weight, &mask)?;
                let mut grads = tape.backward_scaled(l, seed);
                let g: Vec<Option<Tensor>> = fwd.param_vars.iter().map(|&v| grads.take(v)).collect();
                Ok::<_, Error>((tape.value(l).item(), g, grads.take(leaf)))
            })?;

            let mut batch_loss = 0.0;
            let mut edge_seeds: Vec<Option<Tensor>> = topos.iter().map(|_| None).collect();
            for (&i, (l, grads, leaf)) in batch.iter().zip(results) {
                batch_loss += l;
                for (p, g) in params.params.iter_mut().zip(grads) {
                    if let Some(g) = g {
                        p.grad.add_assign(&g);
                    }
                }
                if let Some(g) = leaf {
                    match &mut edge_seeds[slot[samples[i].topology]] {
                        Some(acc) => acc.add_assign(&g),
                        none => *none = Some(g),
                    }
                }
            }
            let jobs: Vec<(usize, Tensor)> = topos
                .iter()
                .zip(edge_seeds)
                .filter_map(|(&t, g)| g.map(|g| (t, g)))
                .collect();
            let edge_grads = par::try_map_slice(mode, &jobs, |(t, g)| {
                let mut tape = Tape::new();
                let fwd = edge_tape(&mut tape, &contexts[*t], &params)?;
                let l = tape.dot(fwd.prediction, g)?;
                let mut grads = tape.backward(l);
                Ok::<_, Error>(fwd.param_vars.iter().map(|&v| grads.take(v)).collect::<Vec<_>>())
            })?;
            for grads in edge_grads {
                for (p, g) in params.params.iter_mut().zip(grads) {
                    if let Some(g) = g {
                        p.grad.add_assign(&g);
                    }
                }
            }
            epoch_sum += batch_loss;
            adam_step(&mut params.params, &mut adam);
        }
        let epoch_loss = epoch_sum / samples.len() as f64;
        history.push(epoch_loss);
        on_epoch(epoch, epoch_loss);
        if epoch_loss < best.0 {
            best = (epoch_loss, epoch, params.clone());
        }
    }
    Ok(TrainOutcome {
        params: best.2,
        history,
        best_epoch: best.1,
    })
}
