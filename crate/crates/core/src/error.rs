use thiserror::Error;

/// Errors raised by the model, solver, interferometer and metrology layers.
///
/// Every message starts with the operation that failed so CLI output can be
/// traced back to a single function.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SccError {
    #[error("{op}: invalid parameters: {reason}")]
    InvalidParams { op: &'static str, reason: String },

    #[error("{op}: rapidity {index} hits a pole (distance {distance:e})")]
    Pole {
        op: &'static str,
        index: usize,
        distance: f64,
    },

    #[error(
        "solve_rapidities: state {state} did not converge (residual {residual:e} at g = {g}, step {step:e})"
    )]
    Convergence {
        state: usize,
        residual: f64,
        g: f64,
        step: f64,
    },

    #[error(
        "build_spectral_basis: state {state} deviates from the exact eigenvector by {deviation:e}"
    )]
    BasisMismatch { state: usize, deviation: f64 },

    #[error("estimate_fringe_frequency: no dominant peak (ratio {ratio:.3} < 3)")]
    NoDominantPeak { ratio: f64 },

    #[error("estimate_fringe_frequency: {0}")]
    InsufficientSamples(String),

    #[error("hellinger_distance: distribution not normalised (sum {sum})")]
    NotNormalised { sum: f64 },

    #[error("{op}: distributions have different lengths ({left} vs {right})")]
    LengthMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{op}: divergent value ({reason})")]
    Divergent { op: &'static str, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for SccError {
    fn from(err: std::io::Error) -> Self {
        SccError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SccError>;
