use thiserror::Error;

use crate::haugazeau::QDiagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("signal has a non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("signal must have at least {min} coordinates, found {found}")]
    TooShort { min: usize, found: usize },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("basis is not orthonormal (deviation {deviation:e})")]
    NonOrthonormalBasis { deviation: f64 },

    #[error(
        "invalid band-limit: {retained} bins in dimension {dim} (must be odd and at most dim)"
    )]
    InvalidBand { dim: usize, retained: usize },

    #[error("unknown soft clip kind `{0}`")]
    UnknownSoftClip(String),

    #[error("zero subgradient at a point with positive function value {value:e}")]
    ZeroSubgradient { value: f64 },

    #[error("point is not a fixed point of the operator (displacement {displacement:e})")]
    NotFixedPoint { displacement: f64 },

    #[error("empty observation list")]
    EmptySpecs,

    #[error("Haugazeau halfspaces are numerically disjoint ({0:?})")]
    InfeasibleHalfspaces(QDiagnostics),

    #[error("no feasible KKT candidate: halfspace pair is empty")]
    EmptyHalfspacePair,

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid control parameters: {0}")]
    InvalidControl(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
