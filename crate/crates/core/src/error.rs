use thiserror::Error;

use crate::eos::BetheWeylCondition;
use crate::machstem::MachStemPattern;
use crate::stability::StabilityRegime;

/// Errors raised by the shock, mode and Mach stem solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid argument or a point outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A thermodynamic point violates one or more Bethe-Weyl inequalities.
    #[error("state (tau = {tau}, s = {s}) violates {violated:?}")]
    Inadmissible {
        tau: f64,
        s: f64,
        violated: Vec<BetheWeylCondition>,
    },

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The requested discontinuity is not a Lax shock.
    #[error("admissibility: {0}")]
    Admissibility(String),

    #[error("glancing frequency: the acoustic roots collide at z = {z}, eta = {eta}")]
    Glancing { z: f64, eta: f64 },

    #[error("eigenmodes omega_0 and omega_- coincide")]
    Coincidence,

    #[error(
        "Lopatinskii determinant does not vanish at (0, 1): normalized |Delta| = {normalized:e}"
    )]
    NotWeaklyStable { normalized: f64 },

    #[error("expected the weak stability regime, got {0:?}")]
    RegimeMismatch(StabilityRegime),

    #[error("no root of the V quartic satisfies the characterization")]
    NoAdmissibleRoot,

    #[error("the quartic in V degenerates and the linear fallback has no admissible root")]
    DegenerateQuartic,

    #[error("no root of the Phi quadratic lies in (M1, 1)")]
    NoRootInInterval,

    #[error("no weak-regime shock found; closest margin {closest_margin:e}")]
    NotFound { closest_margin: f64 },

    #[error("state deviates from the reference by {deviation:e} (trust region {limit:e})")]
    SeedTooFar { deviation: f64, limit: f64 },

    #[error("S3 angle {psi} converged to the rejected branch (expected near {expected})")]
    BranchJump { psi: f64, expected: f64 },

    /// A Mach stem pattern was assembled but fails one or more invariants.
    #[error("pattern at eps = {} fails: {}", .pattern.eps, .failures.join("; "))]
    Validation {
        failures: Vec<String>,
        pattern: Box<MachStemPattern>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
