use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: edge weight must be positive, got {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },

    #[error("edge list contains no edges")]
    EmptyGraph,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("node id {0} out of range")]
    NodeOutOfRange(NodeId),

    #[error("operation requires an undirected graph")]
    NotUndirected,

    #[error("node {0} is isolated")]
    IsolatedNode(NodeId),

    #[error("all sampling weights are zero")]
    ZeroWeights,

    #[error("power iteration did not converge after {iterations} iterations (last L1 change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("path enumeration exceeded the cap of {cap} paths")]
    EnumerationCap { cap: usize },

    #[error("no path from the source reaches the target set within {max_len} steps")]
    UnreachableTargets { max_len: usize },

    #[error("acceptance loop exceeded {cap} attempts; the target set is (almost) unreachable from the source")]
    AcceptanceCap { cap: usize },

    #[error("no target carries positive weight for this forward vector")]
    NoReachableTarget,

    #[error("unknown synthetic graph kind {0:?}")]
    UnknownKind(String),

    #[error("bad snapshot: {0}")]
    Format(String),
}

impl Error {
    /// Failures that point at numerics or an (almost) degenerate instance
    /// rather than at bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::EnumerationCap { .. }
                | Error::AcceptanceCap { .. }
                | Error::UnreachableTargets { .. }
                | Error::NoReachableTarget
        )
    }
}
