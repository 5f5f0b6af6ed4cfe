use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Errors raised by the numerical core.
///
/// [`Error::is_config`] separates invalid input (configuration) from failures
/// of the numerics themselves; the command-line driver maps the two classes to
/// different exit codes.
#[derive(Debug, Clone, Error, Serialize)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value at node {index} (zeta = {point})")]
    NonFinite { index: usize, point: Complex64 },

    #[error("{what} did not converge (residual {residual:e})")]
    Convergence { what: String, residual: f64 },

    #[error("node budget exceeded: {needed} nodes needed, budget {budget}; worst cell r in [{r0}, {r1}] with {radial_per_node:.3} rad/node radially and {angular_per_node:.3} rad/node angularly")]
    BudgetExceeded { needed: usize, budget: usize, r0: f64, r1: f64, radial_per_node: f64, angular_per_node: f64 },

    #[error("Neumann series diverges: increment norms {increments:?}")]
    Divergence { increments: Vec<f64> },

    #[error("level-set tracer lost the curve near ({x}, {y})")]
    Tracing { x: f64, y: f64 },

    #[error("fields live on different grids")]
    GridMismatch,
}

impl Error {
    /// True for errors caused by invalid configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::NonFinite { .. } => "non_finite",
            Error::Convergence { .. } => "convergence",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Divergence { .. } => "divergence",
            Error::Tracing { .. } => "tracing",
            Error::GridMismatch => "grid_mismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
