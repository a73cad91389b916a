use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate spaces differ: `{0}` vs `{1}`")]
    SpaceMismatch(String, String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("coefficient is not differentiable: {0}")]
    Differentiability(String),
    #[error("integral has no exact rational value: {0}")]
    NonRational(String),
    #[error("unsupported substitution: {0}")]
    Substitution(String),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("bad cover: {0}")]
    BadCover(String),
    #[error("index {index} out of range for level {level}")]
    IndexOutOfRange { index: usize, level: usize },
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("non-integral entries: {0}")]
    Integrality(String),
    #[error("form is not closed: {0}")]
    NotClosed(String),
    #[error("not a simplicial gerbe: {0}")]
    NotAGerbe(String),
    #[error("simplicial form must be normal: {0}")]
    NormalityRequired(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("quadrature did not reach tolerance (residual estimate {residual:e})")]
    Tolerance { residual: f64 },
    #[error("model error: {0}")]
    Model(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
