use crate::graph::NodeId;

/// Errors produced by graph handling, division, inference and certification.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("id exceeds pad length: node {id} has more than {len} decimal digits")]
    IdTooWide { id: NodeId, len: usize },

    #[error("subgraph count must be at least 1")]
    ZeroSubgraphs,

    #[error("inconsistent perturbation: {0}")]
    InconsistentPerturbation(String),

    #[error("invalid graph: {}", .0.join("; "))]
    InvalidGraph(Vec<String>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("node {0} is not in the graph")]
    MissingNode(NodeId),

    #[error("target node {0} is deleted by the perturbation")]
    TargetDeleted(NodeId),

    #[error("missing labels: {0}")]
    MissingLabels(String),

    #[error("class {class} out of range for {num_classes} classes")]
    ClassOutOfRange { class: usize, num_classes: usize },

    #[error("training diverged to a non-finite loss at epoch {0}")]
    Divergence(usize),

    #[error("exhaustive enumeration would produce {count} attacks, above the cap of {cap}")]
    EnumerationCap { count: u64, cap: u64 },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
