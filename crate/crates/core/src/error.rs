//! Crate-wide error type.
//!
//! Variants are grouped by the failure class they map to at the CLI
//! boundary: configuration problems exit with 2, numerical failures
//! (singular ODE data, lost immersion rank, boundary violations) with 3,
//! and verification findings are not errors at all, they are recorded in
//! the report and decide the exit code there.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "gram-schmidt pivot {index} degenerate: residual norm {norm:.3e} below {threshold:.3e}"
    )]
    DegeneratePivot {
        index: usize,
        norm: f64,
        threshold: f64,
    },

    #[error(
        "evaluation point out of bounds in axis {axis}: {value} not inside \
         [{lo}, {hi}] with margin {margin:.3e} required by the stencil"
    )]
    BoundaryMargin {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
        margin: f64,
    },

    #[error("profile state singular at t = {t}: |lambda2| = {lam2_abs:.3e} below {threshold:.3e}")]
    SingularProfile {
        t: f64,
        lam2_abs: f64,
        threshold: f64,
    },

    #[error("profile integration diverged at t = {t}: {what}")]
    Divergence { t: f64, what: String },

    #[error("t = {t} outside trajectory span [{lo}, {hi}]")]
    OutsideTrajectory { t: f64, lo: f64, hi: f64 },

    #[error("trajectory incomplete: requested [{t0}, {t1}] but integration stopped at {reached} ({status})")]
    IncompleteTrajectory {
        t0: f64,
        t1: f64,
        reached: f64,
        status: String,
    },

    #[error("frame error: {0}")]
    Frame(String),

    #[error("immersion degenerates at ({t}, {u}, {v}): {what}")]
    ImmersionRank {
        t: f64,
        u: f64,
        v: f64,
        what: String,
    },

    #[error(
        "cubic form undefined: immersion is not horizontal-Lagrangian here \
         (horizontality residual {residual:.3e} above {tolerance:.3e})"
    )]
    NotLagrangian { residual: f64, tolerance: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error in {path}: {what}")]
    Parse { path: String, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code class for the CLI: 2 for configuration and parse
    /// problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::DimensionMismatch { .. } => 2,
            _ => 3,
        }
    }
}
