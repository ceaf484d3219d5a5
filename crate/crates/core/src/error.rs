use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("p,q must be ≥ 2 (got p = {p}, q = {q})")]
    InvalidDimensions { p: u32, q: u32 },

    #[error("mean curvature must be finite (got {0})")]
    NonFiniteCurvature(f64),

    #[error("state ({x}, {y}) is not in the open quadrant")]
    OffQuadrant { x: f64, y: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system at series order {order} (pivot {pivot:e})")]
    SingularSystem { order: usize, pivot: f64 },

    #[error("step size underflow at t = {t}: dt = {dt:e}")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("taxonomy violation: {0}")]
    TaxonomyViolation(String),

    #[error("curve does not reach the origin: closest sample at r = {0:e}")]
    NotNearOrigin(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
