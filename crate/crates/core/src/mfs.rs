//! Method-of-fundamental-solutions solver for harmonic functions on
//! perforated balls (dimension 3).
//!
//! The harmonic part of a solution is represented as a superposition of
//! free-space kernels `Σ_j w_j / (4π |x − q_j|)` with charge points `q_j`
//! placed *outside* the domain: one ring shrunk inside the hole, one inflated
//! beyond the outer sphere. The weights come from a column-scaled,
//! truncated-SVD least-squares fit of the boundary data at oversampled
//! collocation points. Because every basis function is exactly harmonic, the
//! only error is on the boundary — and by the maximum principle the interior
//! error is bounded by the boundary residual, which is measured on a rotated
//! validation point set that took no part in the fit.
//!
//! Divergence sources with constant divergence `c` are handled by splitting
//! off the explicit particular solution `−c|x|²/(2d)` and fitting the
//! harmonic correction to its boundary trace.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::domain::{self, validate_domain, DomainSpec, SourceSpec};
use crate::error::{Error, Result};
use crate::norms::SolutionField;
use crate::quadrature::fibonacci_sphere;

/// Minimum charge count per surface for the collocation system to be
/// structurally meaningful (four points span a non-degenerate configuration
/// on a sphere). Counts this low rarely *converge* — expect an
/// `IllConditioned` rejection well above ~16 charges only for very easy data.
pub const MIN_CHARGES_PER_SURFACE: usize = 4;

/// Distance below which field evaluation near a charge point is refused.
pub const CHARGE_EXCLUSION: f64 = 1e-3;

/// Placement and solve controls for the fundamental-solutions fit.
#[derive(Debug, Clone)]
pub struct MfsConfig {
    /// Charges per surface (hole and outer sphere each get this many).
    pub charges_per_surface: usize,
    /// Collocation points per surface; should oversample the charges.
    pub collocation_per_surface: usize,
    /// Charge ring inside the hole, as a fraction of the surface radius.
    pub inner_scale: f64,
    /// Charge ring outside the ball, as a multiple of the outer radius.
    pub outer_scale: f64,
    /// Relative singular-value cutoff of the truncated SVD.
    pub svd_threshold: f64,
    /// Acceptance tolerance for the validation boundary residual.
    pub residual_tol: f64,
    /// Azimuthal offset separating validation points from collocation points.
    pub validation_rotation: f64,
}

impl Default for MfsConfig {
    fn default() -> Self {
        MfsConfig {
            charges_per_surface: 256,
            collocation_per_surface: 512,
            inner_scale: 0.5,
            // The outer ring must sit well away from the sphere it fits: the
            // achievable boundary accuracy scales like (R/R_charge)^√N, so
            // 3R reaches ~1e−10 on smooth data at N = 256 where 1.25R
            // stalls near 1e−3.
            outer_scale: 3.0,
            svd_threshold: 1e-12,
            // Loose enough to admit boundary data with genuine high-order
            // harmonic content (~1e−6 at the default counts), tight enough
            // to reject under-resolved fits (~1e−3 and worse).
            residual_tol: 1e-5,
            validation_rotation: 2.39996,
        }
    }
}

impl MfsConfig {
    /// Config with the given charge count and 2× collocation oversampling.
    pub fn with_charges(per_surface: usize) -> Self {
        MfsConfig {
            charges_per_surface: per_surface,
            collocation_per_surface: 2 * per_surface,
            ..MfsConfig::default()
        }
    }
}

/// A fitted fundamental-solutions representation.
#[derive(Debug, Clone)]
pub struct MfsSolution {
    /// Charge locations (inner ring inside the hole, outer ring outside).
    pub charges: Vec<[f64; 3]>,
    /// Fitted charge weights (same order as `charges`).
    pub weights: Vec<f64>,
    /// The domain the fit was performed on.
    pub domain: DomainSpec,
    /// Constant divergence of the split-off particular part `−c|x|²/6`;
    /// zero for purely harmonic solves.
    pub particular_c: f64,
    /// Maximum absolute boundary mismatch on the validation point set.
    pub boundary_residual: f64,
    /// Relative ℓ² residual of the least-squares system at the collocation
    /// points.
    pub lsq_residual: f64,
    /// Ratio of the largest to the smallest *retained* singular value.
    pub condition: f64,
}

impl MfsSolution {
    /// Value and gradient at `x`. Refuses points within
    /// [`CHARGE_EXCLUSION`] of a charge, where the kernel is effectively
    /// singular.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != 3 {
            return Err(Error::BadDimension { d: x.len() });
        }
        let mut value = 0.0;
        let mut grad = vec![0.0; 3];
        for (q, w) in self.charges.iter().zip(&self.weights) {
            let dx = [x[0] - q[0], x[1] - q[1], x[2] - q[2]];
            let r = domain::norm(&dx);
            if r < CHARGE_EXCLUSION {
                return Err(Error::TooCloseToCharge { dist: r });
            }
            value += w / (4.0 * PI * r);
            let scale = -w / (4.0 * PI * r * r * r);
            for i in 0..3 {
                grad[i] += scale * dx[i];
            }
        }
        if self.particular_c != 0.0 {
            let c = self.particular_c;
            value -= c * domain::dot(x, x) / 6.0;
            for i in 0..3 {
                grad[i] -= c * x[i] / 3.0;
            }
        }
        Ok((value, grad))
    }
}

impl SolutionField for MfsSolution {
    fn dimension(&self) -> usize {
        3
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(x)
    }
}

/// Points on the scaled hole surface, pushed inward or outward by `factor`
/// relative to the hole center.
fn hole_ring(dom: &DomainSpec, n: usize, rotation: f64, factor: f64) -> Vec<[f64; 3]> {
    let c = dom.hole_center();
    let scale = dom.hole_scale();
    fibonacci_sphere(n, rotation)
        .into_iter()
        .map(|w| {
            let r = factor * scale * dom.hole.surface_radius(&w);
            [c[0] + r * w[0], c[1] + r * w[1], c[2] + r * w[2]]
        })
        .collect()
}

/// Points on the sphere of radius `factor · outer_radius`.
fn outer_ring(dom: &DomainSpec, n: usize, rotation: f64, factor: f64) -> Vec<[f64; 3]> {
    let r = factor * dom.outer_radius();
    fibonacci_sphere(n, rotation)
        .into_iter()
        .map(|w| [r * w[0], r * w[1], r * w[2]])
        .collect()
}

fn check_config(cfg: &MfsConfig) -> Result<()> {
    if cfg.charges_per_surface < MIN_CHARGES_PER_SURFACE {
        return Err(Error::TooFewCharges {
            given: cfg.charges_per_surface,
            min: MIN_CHARGES_PER_SURFACE,
        });
    }
    if cfg.collocation_per_surface < cfg.charges_per_surface {
        return Err(Error::BadGeometry {
            detail: format!(
                "collocation count {} must be at least the charge count {}",
                cfg.collocation_per_surface, cfg.charges_per_surface
            ),
        });
    }
    if !(cfg.inner_scale > 0.0 && cfg.inner_scale < 1.0) {
        return Err(Error::BadGeometry {
            detail: format!("inner charge scale {} must lie in (0, 1)", cfg.inner_scale),
        });
    }
    if !(cfg.outer_scale > 1.0) {
        return Err(Error::BadGeometry {
            detail: format!("outer charge scale {} must exceed 1", cfg.outer_scale),
        });
    }
    Ok(())
}

/// Fit a harmonic function on the perforated ball to Dirichlet boundary
/// `data` given on both boundary components.
///
/// The fit is accepted only if the maximum mismatch on the rotated
/// validation point set is within `cfg.residual_tol`; otherwise the solve
/// fails with `IllConditioned` (more charges, or smoother data, are needed).
pub fn solve_dirichlet_harmonic(
    dom: &DomainSpec,
    data: &(dyn Fn(&[f64]) -> f64 + Sync),
    cfg: &MfsConfig,
) -> Result<MfsSolution> {
    let dom = validate_domain(dom.clone())?;
    if dom.d != 3 {
        return Err(Error::BadDimension { d: dom.d });
    }
    check_config(cfg)?;

    let nq = cfg.charges_per_surface;
    let nc = cfg.collocation_per_surface;
    let mut charges = hole_ring(&dom, nq, 0.0, cfg.inner_scale);
    charges.extend(outer_ring(&dom, nq, 1.0, cfg.outer_scale));
    let mut colloc = hole_ring(&dom, nc, 0.5, 1.0);
    colloc.extend(outer_ring(&dom, nc, 1.5, 1.0));

    let rows = colloc.len();
    let cols = charges.len();
    let mut matrix = DMatrix::zeros(rows, cols);
    for (i, x) in colloc.iter().enumerate() {
        for (j, q) in charges.iter().enumerate() {
            let r = ((x[0] - q[0]).powi(2) + (x[1] - q[1]).powi(2) + (x[2] - q[2]).powi(2)).sqrt();
            matrix[(i, j)] = 1.0 / (4.0 * PI * r);
        }
    }
    let b = DVector::from_iterator(rows, colloc.iter().map(|x| data(x.as_slice())));

    // Column scaling equilibrates the inner ring (kernels ~ 1/ε) against the
    // outer ring (kernels ~ 1) before the SVD truncation decides what to keep.
    let scales: Vec<f64> = (0..cols)
        .map(|j| {
            let n = matrix.column(j).norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        matrix.column_mut(j).scale_mut(*s);
    }

    let svd = matrix.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = cfg.svd_threshold * sigma_max;
    let sigma_min_kept = svd
        .singular_values
        .iter()
        .cloned()
        .filter(|s| *s >= cutoff)
        .fold(f64::INFINITY, f64::min);
    let condition = sigma_max / sigma_min_kept.max(f64::MIN_POSITIVE);
    let scaled_weights = svd.solve(&b, cutoff).map_err(|_| Error::IllConditioned {
        residual: f64::INFINITY,
        tol: cfg.residual_tol,
        condition,
    })?;
    let lsq_residual = (&matrix * &scaled_weights - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
    let weights: Vec<f64> = scaled_weights
        .iter()
        .zip(&scales)
        .map(|(w, s)| w * s)
        .collect();

    let solution = MfsSolution {
        charges,
        weights,
        domain: dom.clone(),
        particular_c: 0.0,
        boundary_residual: f64::NAN,
        lsq_residual,
        condition,
    };

    // Validate on points the fit never saw.
    let mut validation = hole_ring(&dom, nc, 0.5 + cfg.validation_rotation, 1.0);
    validation.extend(outer_ring(&dom, nc, 1.5 + cfg.validation_rotation, 1.0));
    let mut boundary_residual = 0.0_f64;
    for x in &validation {
        let (v, _) = solution.evaluate(x)?;
        boundary_residual = boundary_residual.max((v - data(x)).abs());
    }
    if boundary_residual > cfg.residual_tol {
        return Err(Error::IllConditioned {
            residual: boundary_residual,
            tol: cfg.residual_tol,
            condition,
        });
    }
    Ok(MfsSolution {
        boundary_residual,
        ..solution
    })
}

/// Solve `−Δu = div f`, `u = 0` on both boundary components, for sources
/// with constant divergence `c`: split off the particular solution
/// `−c|x|²/6` and fit the harmonic correction to its boundary trace.
pub fn solve_divergence_source(
    dom: &DomainSpec,
    f: &SourceSpec,
    cfg: &MfsConfig,
) -> Result<MfsSolution> {
    let c = f
        .constant_divergence(3)
        .ok_or(Error::UnsupportedSource {
            detail: "the fundamental-solutions solver needs a source with constant divergence",
        })?;
    let data = move |x: &[f64]| c * domain::dot(x, x) / 6.0;
    let harmonic = solve_dirichlet_harmonic(dom, &data, cfg)?;
    Ok(MfsSolution {
        particular_c: c,
        ..harmonic
    })
}
