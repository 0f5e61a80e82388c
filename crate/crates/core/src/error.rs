use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("riesz order alpha = {alpha} outside (0, {dim})")]
    AlphaOutOfRange { alpha: f64, dim: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field is not a real nonnegative density (offending value at index {index})")]
    NotNonnegativeReal { index: usize },

    #[error("norm exponent t = {0} must be >= 1")]
    BadNormExponent(f64),

    #[error("dilation |s| = {s} exceeds the configured maximum {s_max}")]
    DilationTooLarge { s: f64, s_max: f64 },

    #[error("zero field has no well-defined {0}")]
    ZeroField(&'static str),

    #[error("constant required: {0}")]
    ConstantRequired(&'static str),

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("no root of the fiber map: {0}")]
    FiberProjection(String),

    #[error("half-space is not aligned with a grid mirror plane: {0}")]
    UnalignedHalfSpace(String),

    #[error("flow did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("bubble construction: {0}")]
    Bubble(String),

    #[error("parameters outside the existence regime: {0}")]
    Regime(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
