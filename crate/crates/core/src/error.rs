use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph family: {0}")]
    InvalidFamily(String),
    #[error("ball would hold {requested} vertices, above the cap of {cap}")]
    ResourceLimit { requested: u64, cap: u64 },
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("vertex {index} out of range for a ball with {len} vertices")]
    VertexOutOfRange { index: usize, len: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("radius {requested} exceeds the ball radius {available}")]
    RadiusOutOfRange { requested: u32, available: u32 },
    #[error("ambient radius {available} is below the required {required}")]
    InsufficientRadius { required: u32, available: u32 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid address: {0}")]
    InvalidAddress(String),
    #[error("no single-word coordinates for {0} within the search bound")]
    SearchExhausted(String),
    #[error("dimension {n} exceeds the eigensolver cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("interval [{a}, {b}] does not contain the Gershgorin bound [{lo}, {hi}]")]
    IntervalTooNarrow { a: f64, b: f64, lo: f64, hi: f64 },
    #[error("linear program: {0}")]
    Lp(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
