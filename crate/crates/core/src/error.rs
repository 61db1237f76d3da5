use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("expected {expected} parameters, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("invalid granularity: {0}")]
    InvalidGranularity(String),

    #[error("unknown gate family `{0}`")]
    UnknownFamily(String),

    #[error("point {point:?} is outside the {family} domain: {reason}")]
    OutOfDomain {
        family: String,
        point: Vec<f64>,
        reason: String,
    },

    #[error("pulse amplitude {value} at index {index} exceeds bound {bound}")]
    AmplitudeOutOfBounds { index: usize, value: f64, bound: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite cost or gradient{}", .0.as_ref().map(|p| format!(" at point {p:?}")).unwrap_or_default())]
    NonFinite(Option<Vec<f64>>),

    #[error("cannot build mesh: {0}")]
    DegenerateMesh(String),

    #[error("vertex index {index} out of range (mesh has {len} vertices)")]
    VertexOutOfRange { index: usize, len: usize },

    #[error("point {0:?} lies outside the mesh hull")]
    OutsideHull(Vec<f64>),

    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(usize),

    #[error("landscape format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
