//! The distance-estimation network: features, parameters, forward pass and
//! training loop.

mod features;
mod forward;
mod params;
mod train;

pub use features::{build_features, node_weights, DistanceScale, FeatureSet, GraphContext};
pub use forward::{
    edge_tape, forward, forward_tape, forward_tape_with_edges, predict_sssd, predict_with_context,
    to_model_units, to_raw_units, Forward,
};
pub use params::{FinalActivation, ModelConfig, ModelParams, EDGE_FEATURES, NODE_FEATURES};
pub use train::{loss, train, train_with, TrainConfig, TrainOutcome, TrainSample};
