use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { index: usize, vertex_count: usize },

    #[error("graph must have at least one vertex and one edge")]
    EmptyGraph,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("base graph rejected: {0}")]
    InvalidBase(String),

    #[error("invalid voltage data: {0}")]
    InvalidVoltage(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("layer {layer} has {vertices} vertices, over the budget of {budget}")]
    OverBudget {
        layer: u32,
        vertices: u128,
        budget: u64,
    },

    #[error("layer {layer} of the tower is disconnected")]
    DisconnectedLayer { layer: u32 },

    #[error("valuation of zero is undefined")]
    ZeroValuation,

    #[error("L-value vanishes at nontrivial character {index:?} (level {level}); the layer is disconnected")]
    VanishingLValue { level: u32, index: Vec<u64> },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("route mismatch at n = {n}: matrix-tree gives {matrix_tree}, L-functions give {l_function}")]
    RouteMismatch {
        n: u32,
        matrix_tree: String,
        l_function: String,
    },

    #[error("series is zero to the computed precision")]
    ZeroSeries,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
