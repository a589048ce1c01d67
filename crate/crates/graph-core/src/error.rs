use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("node {0} is not switchable")]
    NotSwitchable(usize),
    #[error("coloring has {got} entries, graph has {n} nodes")]
    ColoringLength { got: usize, n: usize },
    #[error("invalid lambda: {0}")]
    InvalidLambda(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
