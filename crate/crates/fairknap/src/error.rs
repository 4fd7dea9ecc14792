//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by solvers, oracles, and instance I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// The instance violates a structural invariant (bad ids, colors
    /// without bounds, malformed objective payload, ...).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// The instance (or a derived subproblem) admits no feasible set.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An element id outside `0..n` was passed to an oracle.
    #[error("unknown element id {id} (ground set has {n} elements)")]
    UnknownElement { id: usize, n: usize },

    /// A vector argument has the wrong length for the instance.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A caller-supplied tuning parameter is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A coordinate left the unit cube where `[0, 1]` was required.
    #[error("coordinate {index} = {value} outside [0, 1]")]
    OutsideCube { index: usize, value: f64 },

    /// A fractional point violates the instance's polytope.
    #[error("point outside the fair knapsack polytope: {0}")]
    OutsidePolytope(String),

    /// An exhaustive routine was asked to exceed its size guard.
    #[error("{what} is limited to {limit}, got {got}; this routine is exhaustive")]
    SizeGuard {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// Parameter enumeration refused to run on too many groups.
    #[error("parameter enumeration over {k} groups exceeds the guard ({guard}); raise the guard explicitly to proceed")]
    GroupGuard { k: usize, guard: usize },

    /// Truncation parameters leave a negative reduced budget.
    #[error("truncation params infeasible: {0}")]
    ParamsInfeasible(String),

    /// An internal invariant was breached (a bug, not a user error).
    #[error("internal invariant breach: {0}")]
    Internal(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
