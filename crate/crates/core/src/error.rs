//! Error type shared by all modules.

use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong while evaluating or constructing maps.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A quotient denominator or logarithm argument vanished at the point.
    #[error("singular point at z = {at}: |{what}| = {magnitude:.3e} below tolerance")]
    SingularPoint {
        at: Complex64,
        what: &'static str,
        magnitude: f64,
    },

    /// A principal power/log was evaluated on the branch cut (non-positive reals).
    #[error("branch cut hit at z = {at}: base value {base}")]
    BranchCut { at: Complex64, base: Complex64 },

    /// Evaluation produced a non-finite number.
    #[error("non-finite value at z = {at}")]
    NonFinite { at: Complex64 },

    /// Richardson extrapolation of a boundary limit failed to settle.
    #[error("no finite radial limit at tau = {tau}: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NoFiniteLimit {
        tau: Complex64,
        residual: f64,
        tol: f64,
    },

    /// The integrand 1/f blew up at a quadrature node.
    #[error("integrand pole on path near zeta = {at}: |f| = {magnitude:.3e}")]
    ZeroOnPath { at: Complex64, magnitude: f64 },

    /// Adaptive quadrature exceeded its depth limit.
    #[error("quadrature did not converge: panel error {error:.3e} at max depth {depth}")]
    NonConvergent { error: f64, depth: usize },

    /// The counting contour passes through (or too close to) a root.
    #[error("root on counting contour: min |m - w0| = {min_modulus:.3e}")]
    RootOnContour { min_modulus: f64 },

    /// The winding integral did not round cleanly to an integer.
    #[error("preimage count unresolved: residual {residual:.3} from nearest integer")]
    Unresolved { residual: f64 },

    /// Positivity certification failed.
    #[error("not a positive-real-part function: min Re = {min_re:.3e} at z = {at}")]
    NotPositive { min_re: f64, at: Complex64 },

    /// An interpolation parameter violated its admissibility condition.
    #[error("inadmissible parameter: {reason}")]
    NotAdmissible { reason: String },

    /// A quantity required to be a nonnegative real came out otherwise.
    #[error("expected a nonnegative real, got {value}")]
    NotNonnegativeReal { value: Complex64 },

    /// Reciprocal of a function with a zero on the sampling grid.
    #[error("zero encountered at z = {at} while inverting")]
    ZeroEncountered { at: Complex64 },

    /// Newton inversion of the Koenigs function failed to converge.
    #[error("Newton iteration diverged: residual {residual:.3e} after {iterations} iterations")]
    NewtonDiverged { residual: f64, iterations: usize },

    /// ODE step size underflowed (the field is not a generator).
    #[error("integrator step failure at t = {t:.6}: step size underflow")]
    StepFailure { t: f64 },

    /// lambda = 0 is excluded from the univalence regions.
    #[error("lambda = 0 is not a valid eigenvalue parameter")]
    InvalidLambda,

    /// Internal consistency failure that valid inputs should never trigger.
    #[error("internal error: {0}")]
    Internal(String),
}
