use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at x = {x} (stiff or singular point)")]
    StepSizeUnderflow { x: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("tail inconsistent with exponent {exponent}: {detail}")]
    TailMismatch { exponent: f64, detail: String },

    #[error("fit residual {residual:e} exceeds {limit:e}")]
    FitResidual { residual: f64, limit: f64 },

    #[error("{x} is outside the sampled range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("resonant recurrence at index {index}")]
    Resonance { index: usize },

    #[error("complex indicial roots (discriminant {discriminant})")]
    ComplexRoots { discriminant: f64 },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
