use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid pose: {0}")]
    InvalidPose(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("grid mismatch between marker fields")]
    GridMismatch,

    #[error("unit mismatch between marker fields")]
    UnitMismatch,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("query point ({x}, {y}, {z}) outside lattice bounds")]
    OutOfBounds { x: f64, y: f64, z: f64 },

    #[error("surface sampling failed: {0}")]
    Sampling(&'static str),

    #[error("invalid geometry: {0}")]
    Geometry(&'static str),

    #[error("configuration error: {0}")]
    Configuration(&'static str),

    #[error("FOTS state error: {0}")]
    FotsState(&'static str),

    #[error("calibration stage `{stage}` has no usable samples: {reason}")]
    EmptyDataset {
        stage: &'static str,
        reason: &'static str,
    },

    #[error("non-finite objective value in stage `{0}`")]
    NonFinite(&'static str),
}
