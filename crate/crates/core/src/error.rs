//! Error type shared by all solver modules.

use thiserror::Error;

/// Failure modes of the solvers and special functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violated its invariant; names the offending field.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Input that makes the requested quantity undefined (e.g. a free
    /// particle has no equilibrium dispersion).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Singular input such as a nonpositive dispersion in a 1/σ² term.
    #[error("singular input: {0}")]
    Singular(String),

    /// Time integration could not proceed (step underflow, state left the
    /// admissible region).
    #[error("integration step failure: {0}")]
    StepFailure(String),

    /// The semiclassical expansion broke down (D_eff ≤ 0 somewhere).
    #[error("semiclassical validity violated: {0}")]
    Validity(String),

    /// Guarded overflow, e.g. exp(β·Ea) beyond the f64 range.
    #[error("overflow guard: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
