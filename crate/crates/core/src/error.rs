//! Error type shared by every solver and driver in the crate.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, EhdError>;

#[derive(Debug, thiserror::Error)]
pub enum EhdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error(
        "linear solve did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Neumann problem is incompatible: integral of right-hand side is {mass:.3e}")]
    Incompatible { mass: f64 },

    #[error("line search stalled at J = {j:.17e} (last step length {step:.3e})")]
    LineSearchStall { j: f64, step: f64 },

    #[error("Newton iteration did not converge (residual {residual:.3e})")]
    NewtonNonConvergence { residual: f64 },

    #[error("velocity field is identically zero")]
    ZeroField,

    #[error("decay fit window contains {points} points, at least 10 are required")]
    EmptyWindow { points: usize },

    #[error("decay fit requires strictly positive values (found {value:.3e} at t = {t})")]
    NonpositiveValues { t: f64, value: f64 },

    #[error("time step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed matrix file {path}: {reason}")]
    MatrixFormat { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EhdError {
    /// True for failures of an iterative or nonlinear solver, as opposed to
    /// bad input or I/O.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            EhdError::NonConvergence { .. }
                | EhdError::LineSearchStall { .. }
                | EhdError::NewtonNonConvergence { .. }
                | EhdError::CflViolation { .. }
        )
    }
}
