use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or input lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An orbit left the finite range (|v| above the divergence guard or a non-finite value).
    #[error("orbit diverged at step {step}")]
    Diverged { step: usize },

    /// The tangent frame collapsed during Lyapunov evolution.
    #[error("tangent frame became singular at step {step}")]
    SingularFrame { step: usize },

    /// A supposed periodic cycle does not close under the map.
    #[error("cycle is not closed: mismatch {mismatch:e} at index {index}")]
    OpenCycle { index: usize, mismatch: f64 },

    /// Every candidate point of a point set coincides.
    #[error("degenerate point set: {0}")]
    Degenerate(String),

    /// No scaling region satisfied the fit requirements.
    #[error("no usable fit window: {0}")]
    NoFitWindow(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
