use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },

    #[error("input contains no edges and no node-count directive")]
    EmptyInput,

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("unsupported MatrixMarket header: {0}")]
    UnsupportedHeader(String),

    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("row {0} has zero sum (normalize dangling nodes first)")]
    ZeroRow(usize),

    #[error("invalid temperature {0}")]
    InvalidTemperature(f64),

    #[error("argument {0} outside [0, 1]")]
    OutOfDomain(f64),

    #[error("energy derivative {value:e} at x = {x} is not bounded away from zero")]
    NonPositiveDerivative { x: f64, value: f64 },

    #[error("non-finite value while evaluating {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not a stochastic vector: {0}")]
    NotStochastic(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("period-2 oscillation detected after {iterations} iterations")]
    Oscillation { iterations: usize },

    #[error("matrix is reducible")]
    Reducible,

    #[error("{what}: dimension {n} exceeds the limit {max}")]
    TooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("entry ({row}, {col}) is not positive")]
    NonPositive { row: usize, col: usize },

    #[error("entry {0} is not positive (boundary point of the cone)")]
    BoundaryPoint(usize),

    #[error("oracle backends disagree by {0:e}")]
    OracleDisagreement(f64),

    #[error("temperature schedule is not strictly monotone")]
    NonMonotoneSchedule,

    #[error("k = {k} exceeds the number of nodes {n}")]
    TopKTooLarge { k: usize, n: usize },

    #[error("weight function not supported here: {0}")]
    UnsupportedWeight(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
