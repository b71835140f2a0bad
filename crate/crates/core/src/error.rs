use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),
    #[error("node index {index} out of range for graph with {node_count} nodes")]
    OutOfRange { index: usize, node_count: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from the analytical calculators, generators and protocol operations.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("series diverges for s = {0} (requires s > 1)")]
    Divergent(f64),
    #[error("subcritical regime (np = {0}), formula inapplicable")]
    Subcritical(f64),
    #[error("disconnected graph: lambda_2 = 0, eigenratio undefined")]
    Disconnected,
    #[error("node {0} is isolated")]
    IsolatedNode(usize),
    #[error(
        "graph is bipartite: return probabilities oscillate and never reach the stationary value"
    )]
    Bipartite,
    #[error("too few observations for a fit: {found} (need at least {required})")]
    TooFewObservations { found: usize, required: usize },
    #[error("graph with {n} nodes exceeds the dense eigensolver limit of {limit}")]
    TooLargeForDense { n: usize, limit: usize },
    #[error("iterative eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("graph error: {0}")]
    Graph(String),
}

impl From<GraphError> for ModelError {
    fn from(e: GraphError) -> Self {
        ModelError::Graph(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
