use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {index} references node {node} but the graph has {node_count} nodes")]
    DanglingEndpoint {
        index: usize,
        node: usize,
        node_count: usize,
    },
    #[error("edge {index} has non-positive or non-finite weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("edge {index} is a self-loop on node {node}")]
    SelfLoop { index: usize, node: usize },
    #[error("node ids are not dense in [0, {node_count}): {detail}")]
    NonDenseIds { node_count: usize, detail: String },
    #[error("node {node} has a non-finite coordinate")]
    NonFiniteCoord { node: usize },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("node {0} is out of range")]
    NodeOutOfRange(NodeId),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("generated component has {0} nodes, need at least 4")]
    ComponentTooSmall(usize),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },
    #[error("source {0} reaches no other node")]
    IsolatedSource(NodeId),
    #[error("empty selection: {0}")]
    Empty(&'static str),
    #[error("route revisits node {0}")]
    RouteCycle(NodeId),
    #[error("node {0} has no predecessor; target unreachable")]
    Unreachable(NodeId),
    #[error("model container: {0}")]
    Container(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from invalid user input rather than I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
