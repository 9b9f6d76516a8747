use thiserror::Error;

/// Errors raised by the stability toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate frequency: |xi| must be positive")]
    DegenerateFrequency,

    #[error(
        "stable configuration: density jump {jump} is not positive (heavier fluid must be on top)"
    )]
    StableConfiguration { jump: f64 },

    #[error("orientation mismatch: expected {expected}, got {got}")]
    OrientationMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("supercritical field: |B| = {field} >= critical {critical}")]
    SupercriticalField { field: f64, critical: f64 },

    #[error("mass matrix is not positive definite")]
    MassMatrix,

    #[error("instability window unbounded: alpha(s) still negative at s = {s}")]
    UnboundedWindow { s: f64 },

    #[error("bisection failed to converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("no unstable mode to reconstruct")]
    NoMode,

    #[error("unbounded growth rate: |B| = 0")]
    UnboundedRate,

    #[error("singular implicit system in time stepping")]
    SingularSystem,

    #[error("invalid time stepping: {0}")]
    InvalidTimeStep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
