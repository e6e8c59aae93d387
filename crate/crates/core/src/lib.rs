//! Numerical toolkit for the Dirichlet problem `−Δu = div f` on a unit ball
//! with a small spherical (or ellipsoidal) hole removed.
//!
//! The domain is `Ω_ε = B(0,1) \ εT`, where `T` is a smooth hole and
//! `ε ∈ (0, 1/4]` is the hole scale. As `ε → 0` the gradient norms
//! `‖∇u_ε‖_{L^p(Ω_ε)}` either stay uniformly bounded relative to
//! `‖f‖_{L^p(Ω_ε)}` (for `d/(d−1) < p < d`) or blow up (for `p > d` and,
//! by duality, for `1 < p < d/(d−1)`). This crate provides the pieces
//! needed to observe that dichotomy quantitatively:
//!
//! * [`domain`] — validated domain descriptions and the catalog of source
//!   fields used throughout the test suites.
//! * [`kernel`] — the fundamental solution of the Laplacian, the ball
//!   Green's function by the method of images, and empirical checks of the
//!   image-gradient bound.
//! * [`shell`] — exact and semi-analytic solvers on the concentric shell
//!   `ε ≤ |x| ≤ 1`; these are the ground-truth oracles for everything else.
//! * [`mfs`] — a method-of-fundamental-solutions solver for harmonic
//!   corrections on perforated balls with possibly off-center holes.
//! * [`norms`] — graded-quadrature `L^p` norms of gradients and fields,
//!   with convergence reporting.
//! * [`analysis`] — ε-sweeps, log–log rate fits, regime classification,
//!   the rescaling identity, the nonzero-flux counterexample condition,
//!   and the duality construction transferring blow-up to small exponents.

// Validation guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`,
// the negated form also rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod domain;
pub mod error;
pub mod kernel;
pub mod mfs;
pub mod norms;
pub mod quadrature;
pub mod shell;
pub mod sphharm;

pub use error::{Error, Result};
