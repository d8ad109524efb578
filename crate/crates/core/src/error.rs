use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space descriptor: {0}")]
    InvalidSpace(String),

    #[error("point {point:?} is outside the domain of the space: {reason}")]
    Domain { point: Vec<f64>, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point set: {0}")]
    InvalidPoints(String),

    #[error("singular interpolation system: {0}")]
    Singular(String),

    #[error("not norming: {0}")]
    NotNorming(String),

    #[error("Gram matrix is rank deficient on the sample")]
    RankDeficient,

    #[error("linear program unbounded despite full rank (ill-conditioned) along direction {direction:?}")]
    IllConditioned { direction: Vec<f64> },

    #[error("simplex iteration limit reached ({0} pivots)")]
    LpIterationLimit(usize),

    #[error("parameter `{name}` out of range: {reason}")]
    OutOfRange { name: &'static str, reason: String },

    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("exact set cover is limited to {cap} points (got {got}); enable the heuristic cover to proceed without certification")]
    CoverCapExceeded { cap: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, reason: impl Into<String>) -> Error {
    Error::OutOfRange {
        name,
        reason: reason.into(),
    }
}
