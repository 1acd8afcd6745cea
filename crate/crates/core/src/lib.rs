//! Shortest-distance estimation on road networks with a message-passing
//! graph neural network, plus the exact and landmark oracles it is measured
//! against, route reconstruction from distance fields, and flood delay
//! analysis.
//!
//! Data-parallel loops (ground-truth generation, landmark tables, per-shelter
//! searches, per-sample gradients) go through [`par`], which uses rayon when
//! the `parallel` feature is enabled and plain iteration otherwise. Results
//! are bit-identical in both modes.

pub mod backend;
pub mod error;
pub mod eval;
pub mod graph;
pub mod hazard;
pub mod landmark;
pub mod model;
pub mod nn;
pub mod oracle;
pub mod par;
pub mod pathfinder;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, NodeId};
