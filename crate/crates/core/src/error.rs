//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by domain validation, solvers, quadrature, and sweeps.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The hole scale is outside the supported range `(0, 1/4]`.
    #[error("hole scale eps = {eps} is outside the supported range (0, 1/4]")]
    EpsOutOfRange { eps: f64 },

    /// The scaled hole is not contained in the concentric ball of half the
    /// outer radius, so graded quadrature panels could collide with the
    /// outer boundary.
    #[error(
        "scaled hole reaches radius {reach} but must stay within half the outer radius {limit}"
    )]
    HoleNotContained { reach: f64, limit: f64 },

    /// Dimensions below three are not supported (the fundamental solution
    /// `|x|^{2−d}` and every rate formula in this crate assume `d ≥ 3`).
    #[error("dimension d = {d} is not supported; this crate requires d >= 3")]
    BadDimension { d: usize },

    /// A geometric descriptor (hole center, semi-axes, source vector) does
    /// not match the ambient dimension or contains a non-positive length.
    #[error("inconsistent geometry: {detail}")]
    BadGeometry { detail: String },

    /// Evaluation of the fundamental solution at its singularity.
    #[error("fundamental solution evaluated at its singular point x = 0")]
    SingularPoint,

    /// Green's function evaluated on the diagonal x = y.
    #[error("Green's function evaluated at coincident points")]
    CoincidentPoints,

    /// A kernel evaluation point lies outside the ball of the given radius.
    #[error("point at radius {r} lies outside the ball of radius {radius}")]
    PointOutsideBall { r: f64, radius: f64 },

    /// A solution was evaluated outside its domain of definition.
    #[error("evaluation point at radius {r} is outside the solution domain [{lo}, {hi}]")]
    EvaluationOutsideDomain { r: f64, lo: f64, hi: f64 },

    /// A radial profile returned a non-finite value.
    #[error("radial profile is not finite at r = {r}")]
    NonFiniteProfile { r: f64 },

    /// Quadrature refinement did not reach the requested tolerance.
    #[error("quadrature not converged: refinement delta {delta:.3e} exceeds tolerance {tol:.3e}")]
    QuadratureNotConverged { delta: f64, tol: f64 },

    /// The least-squares collocation system remained inaccurate after SVD
    /// truncation; usually means too few charges for the requested geometry.
    #[error(
        "collocation system ill-conditioned: residual {residual:.3e} exceeds tolerance \
         {tol:.3e} (condition estimate {condition:.3e})"
    )]
    IllConditioned {
        residual: f64,
        tol: f64,
        condition: f64,
    },

    /// Too few charges or collocation points to assemble a meaningful system.
    #[error("need at least {min} charge points per surface, got {given}")]
    TooFewCharges { given: usize, min: usize },

    /// A field evaluation too close to a fundamental-solution charge point.
    #[error("evaluation point is {dist:.3e} from a charge point (minimum 1e-3)")]
    TooCloseToCharge { dist: f64 },

    /// The duality construction requires a solution with nonzero gradient.
    #[error("cannot normalize the dual source of a solution with zero gradient")]
    ZeroGradient,

    /// Lebesgue exponent outside `(1, ∞)`.
    #[error("exponent p = {p} is outside the supported range (1, inf)")]
    BadExponent { p: f64 },

    /// The weight-norm identity only holds for `q < d`; at `q ≥ d` the
    /// rescaled integral diverges.
    #[error("weight norm requires q < d, got q = {q} with d = {d}")]
    ExponentOutOfRange { q: f64, d: usize },

    /// An operation received a source field outside the supported catalog,
    /// e.g. a non-constant divergence where a constant one is required.
    #[error("unsupported source for this operation: {detail}")]
    UnsupportedSource { detail: &'static str },

    /// Invalid quadrature configuration (node counts, grading ratio, ...).
    #[error("invalid quadrature configuration: {detail}")]
    InvalidQuadratureConfig { detail: &'static str },

    /// The ε list of a sweep must be strictly decreasing inside `(0, 1/4]`.
    #[error("invalid epsilon list: {detail}")]
    BadEpsilonList { detail: &'static str },

    /// Fewer than four usable rows survived a sweep, so no rate can be fit.
    #[error("sweep produced only {usable} usable rows; at least 4 are needed for a rate fit")]
    SweepTooShort { usable: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
