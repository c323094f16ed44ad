//! Error type shared by all modules.

use core::fmt;

/// Errors reported by library operations.
///
/// Input errors (dimension mismatches, violated preconditions) are kept
/// separate from numerical failures (divergent iterations, degenerate
/// geometry) so callers can decide whether to fix inputs or loosen the
/// experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operands live in different ambient dimensions.
    DimensionMismatch { expected: usize, got: usize },
    /// A basis failed the orthonormality tolerance.
    NotOrthonormal { defect: f64, tol: f64 },
    /// A subspace is not transverse to the stable direction, so its graph
    /// representation over the reference subspace does not exist.
    DegenerateSubspace,
    /// A matrix was singular where an invertible one is required.
    SingularMatrix { det: f64 },
    /// Integer matrix has an eigenvalue too close to the unit circle.
    NotHyperbolic { modulus: f64 },
    /// The perturbation parameter violates one of the model admissibility
    /// conditions; `condition` names the failed inequality.
    InvalidPerturbation { condition: &'static str, value: f64 },
    /// Newton iteration for a local inverse branch did not converge.
    NewtonDiverged { steps: usize, residual: f64 },
    /// Cone invariance failed along an orbit, so hyperbolic-time detection
    /// is meaningless for it.
    ConeInvarianceViolated { step: usize, margin: f64 },
    /// A numerical optimizer failed; `what` describes the failing stage.
    NumericalFailure { what: &'static str, value: f64 },
    /// Catch-all for violated operation preconditions.
    InvalidInput(&'static str),
    /// Internal consistency check failed (indicates a bug, not bad input).
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotOrthonormal { defect, tol } => {
                write!(f, "basis not orthonormal: defect {defect:e} exceeds tolerance {tol:e}")
            }
            Error::DegenerateSubspace => {
                write!(f, "subspace contains a stable direction; graph representation undefined")
            }
            Error::SingularMatrix { det } => write!(f, "singular matrix (det {det:e})"),
            Error::NotHyperbolic { modulus } => {
                write!(f, "matrix not hyperbolic: eigenvalue modulus {modulus} too close to 1")
            }
            Error::InvalidPerturbation { condition, value } => {
                write!(f, "perturbation rejected: condition `{condition}` fails (value {value})")
            }
            Error::NewtonDiverged { steps, residual } => {
                write!(f, "inverse branch Newton diverged after {steps} steps (residual {residual:e})")
            }
            Error::ConeInvarianceViolated { step, margin } => {
                write!(f, "cone invariance violated at orbit step {step} (margin {margin:e})")
            }
            Error::NumericalFailure { what, value } => {
                write!(f, "numerical failure in {what} (value {value:e})")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
