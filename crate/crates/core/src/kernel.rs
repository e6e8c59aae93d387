//! Fundamental solution of the Laplacian and the ball Green's function by
//! the method of images.
//!
//! With `Φ(x) = α_d |x|^{2−d}` and `α_d = 1/((d−2) σ_{d−1})` (so that
//! `−ΔΦ = δ` distributionally), the Dirichlet Green's function of the ball
//! `B(0,R)` is
//!
//! ```text
//! G(x, y) = Φ(x − y) − α_d · w(x,y)^{(2−d)/2},
//! w(x, y) = R² − 2 x·y + |x|² |y|² / R²,
//! ```
//!
//! where the second term is the reflected (Kelvin-image) singularity written
//! in a form that is manifestly symmetric in `x` and `y`, vanishes when
//! either point reaches `|·| = R` (then `w = |x − y|²`), and has a removable
//! limit at `x = 0` (then `w = R²`). The module also provides an empirical
//! check that the image-term gradient obeys the two-scale bound
//! `|∇ m(x)| ≤ C (ε^{d−1} |x|^{−1} + ε^d)` on the blown-up domain
//! `B(0,1/ε) \ B(0,1)` with source points in `B(0,2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

use crate::domain::{dot, norm};
use crate::error::{Error, Result};

/// Dimension-dependent constants of the fundamental solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Ambient dimension (≥ 3).
    pub d: usize,
    /// Normalization `α_d = 1/((d−2) σ_{d−1})`.
    pub alpha: f64,
}

impl KernelConfig {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::BadDimension { d });
        }
        Ok(KernelConfig {
            d,
            alpha: 1.0 / ((d as f64 - 2.0) * sphere_area(d)),
        })
    }

    /// Surface measure `σ_{d−1}` of the unit sphere in `d` dimensions.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.d)
    }
}

/// `σ_{d−1} = 2 π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// `Φ(x) = α_d |x|^{2−d}`.
pub fn fundamental_solution(x: &[f64], cfg: &KernelConfig) -> Result<f64> {
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(cfg.alpha * r.powi(2 - cfg.d as i32))
}

/// `∇Φ(x) = α_d (2−d) |x|^{−d} x`.
pub fn grad_fundamental_solution(x: &[f64], cfg: &KernelConfig) -> Result<Vec<f64>> {
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::SingularPoint);
    }
    let scale = cfg.alpha * (2.0 - cfg.d as f64) * r.powi(-(cfg.d as i32));
    Ok(x.iter().map(|xi| scale * xi).collect())
}

/// The symmetric image quantity `w(x,y) = R² − 2 x·y + |x|²|y|²/R²`.
///
/// Algebraically `w = |x − y|² + (R² − |x|²)(R² − |y|²)/R² ≥ |x − y|²`, with
/// equality exactly when one point is on the boundary sphere.
fn image_w(x: &[f64], y: &[f64], radius: f64) -> f64 {
    let r2 = radius * radius;
    r2 - 2.0 * dot(x, y) + dot(x, x) * dot(y, y) / r2
}

fn check_in_ball(x: &[f64], radius: f64) -> Result<()> {
    let r = norm(x);
    if r > radius * (1.0 + 1e-12) {
        return Err(Error::PointOutsideBall { r, radius });
    }
    Ok(())
}

/// Dirichlet Green's function of the ball `B(0, radius)`.
///
/// Both points must lie in the closed ball and must not coincide. `x = 0` is
/// allowed: the image term degenerates to the constant `α_d R^{2−d}` there.
pub fn green_ball(x: &[f64], y: &[f64], radius: f64, cfg: &KernelConfig) -> Result<f64> {
    check_in_ball(x, radius)?;
    check_in_ball(y, radius)?;
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let dist = norm(&diff);
    if dist < 1e-14 * radius {
        return Err(Error::CoincidentPoints);
    }
    let e = (2.0 - cfg.d as f64) / 2.0;
    Ok(cfg.alpha * (dist * dist).powf(e) - cfg.alpha * image_w(x, y, radius).powf(e))
}

/// The image (regular) part of the Green's function alone.
pub fn green_ball_image_part(x: &[f64], y: &[f64], radius: f64, cfg: &KernelConfig) -> f64 {
    let e = (2.0 - cfg.d as f64) / 2.0;
    -cfg.alpha * image_w(x, y, radius).powf(e)
}

/// Gradient in `x` of the Green's function:
///
/// ```text
/// ∇_x G = α_d (2−d) [ |x−y|^{−d} (x−y) − w^{−d/2} (x |y|²/R² − y) ]
/// ```
pub fn grad_green_ball_x(x: &[f64], y: &[f64], radius: f64, cfg: &KernelConfig) -> Result<Vec<f64>> {
    check_in_ball(x, radius)?;
    check_in_ball(y, radius)?;
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let dist = norm(&diff);
    if dist < 1e-14 * radius {
        return Err(Error::CoincidentPoints);
    }
    let c = cfg.alpha * (2.0 - cfg.d as f64);
    let direct_scale = c * dist.powi(-(cfg.d as i32));
    let w = image_w(x, y, radius);
    let image_scale = c * w.powf(-0.5 * cfg.d as f64);
    let yy_r2 = dot(y, y) / (radius * radius);
    Ok((0..x.len())
        .map(|i| direct_scale * diff[i] - image_scale * (x[i] * yy_r2 - y[i]))
        .collect())
}

/// Gradient in `x` of the image part alone.
pub fn grad_green_ball_image_x(x: &[f64], y: &[f64], radius: f64, cfg: &KernelConfig) -> Vec<f64> {
    let c = cfg.alpha * (2.0 - cfg.d as f64);
    let w = image_w(x, y, radius);
    let image_scale = c * w.powf(-0.5 * cfg.d as f64);
    let yy_r2 = dot(y, y) / (radius * radius);
    (0..x.len())
        .map(|i| -image_scale * (x[i] * yy_r2 - y[i]))
        .collect()
}

/// Empirical calibration of the image-gradient bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub eps: f64,
    pub sample_count: usize,
    pub seed: u64,
    /// Largest sampled ratio `|∇ m(x,y)| / (ε^{d−1}|x|^{−1} + ε^d)` — the
    /// empirical constant of the bound.
    pub sup_ratio: f64,
    pub mean_ratio: f64,
}

/// Samples the ratio `|∇_x m(x, y)| / (ε^{d−1} |x|^{−1} + ε^d)` over the
/// blown-up geometry: `x` uniform (by volume) in `B(0, 1/ε) \ B(0, 1)`,
/// `y` uniform in `B(0, 2)`, where `m` is the image part of the Green's
/// function of `B(0, 1/ε)`.
///
/// The bound's constant is not constructive, so the toolkit calibrates it
/// empirically: measure at `ε = 1/4`, then check that smaller `ε` stay
/// within a factor of two of the calibration.
pub fn image_gradient_bound_report(
    eps: f64,
    sample_count: usize,
    seed: u64,
    cfg: &KernelConfig,
) -> Result<BoundReport> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::EpsOutOfRange { eps });
    }
    let d = cfg.d;
    let radius = 1.0 / eps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup_ratio: f64 = 0.0;
    let mut sum_ratio = 0.0;
    for _ in 0..sample_count {
        let x = sample_annulus(&mut rng, d, 1.0, radius);
        let y = sample_ball(&mut rng, d, 2.0);
        let g = grad_green_ball_image_x(&x, &y, radius, cfg);
        let bound = eps.powi(d as i32 - 1) / norm(&x) + eps.powi(d as i32);
        let ratio = norm(&g) / bound;
        sup_ratio = sup_ratio.max(ratio);
        sum_ratio += ratio;
    }
    Ok(BoundReport {
        eps,
        sample_count,
        seed,
        sup_ratio,
        mean_ratio: sum_ratio / sample_count.max(1) as f64,
    })
}

fn sample_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Uniform-by-volume sample of the annulus `lo ≤ |x| ≤ hi`.
fn sample_annulus(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    let u: f64 = rng.gen();
    let dd = d as f64;
    let r = (lo.powf(dd) + u * (hi.powf(dd) - lo.powf(dd))).powf(1.0 / dd);
    sample_direction(rng, d).into_iter().map(|c| c * r).collect()
}

fn sample_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    sample_annulus(rng, d, 0.0, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::product_sphere;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cfg3() -> KernelConfig {
        KernelConfig::new(3).unwrap()
    }

    #[test]
    fn normalization_constants() {
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        // Φ at |x| = 1 and |x| = 2 in d = 3; at |x| = 1 in d = 4.
        assert_relative_eq!(
            fundamental_solution(&[1.0, 0.0, 0.0], &cfg3()).unwrap(),
            1.0 / (4.0 * PI)
        );
        assert_relative_eq!(
            fundamental_solution(&[0.0, 2.0, 0.0], &cfg3()).unwrap(),
            1.0 / (8.0 * PI)
        );
        let cfg4 = KernelConfig::new(4).unwrap();
        assert_relative_eq!(
            fundamental_solution(&[1.0, 0.0, 0.0, 0.0], &cfg4).unwrap(),
            1.0 / (4.0 * PI * PI)
        );
    }

    #[test]
    fn rejects_singular_point_and_low_dimension() {
        assert_eq!(
            fundamental_solution(&[0.0, 0.0, 0.0], &cfg3()).unwrap_err(),
            Error::SingularPoint
        );
        assert!(KernelConfig::new(2).is_err());
    }

    #[test]
    fn flux_of_fundamental_solution_is_minus_one() {
        // ∫_{|x|=r} ∂_ν Φ dS = −1 for any r; computed by sphere quadrature.
        let cfg = cfg3();
        let rule = product_sphere(16, 32).unwrap();
        for r in [0.1, 0.5] {
            let flux = rule.integrate(|w| {
                let x = [r * w[0], r * w[1], r * w[2]];
                let g = grad_fundamental_solution(&x, &cfg).unwrap();
                (g[0] * w[0] + g[1] * w[1] + g[2] * w[2]) * r * r
            });
            assert_relative_eq!(flux, -1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn green_vanishes_on_the_boundary() {
        let cfg = cfg3();
        let radius = 2.0;
        let y = [0.3, -0.4, 0.5];
        for dir in crate::quadrature::fibonacci_sphere(1000, 0.0) {
            let x = [radius * dir[0], radius * dir[1], radius * dir[2]];
            let g = green_ball(&x, &y, radius, &cfg).unwrap();
            assert!(g.abs() <= 1e-12, "boundary value {g} at {x:?}");
        }
    }

    #[test]
    fn green_is_symmetric_on_random_interior_pairs() {
        let cfg = cfg3();
        let radius = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut max_g: f64 = 0.0;
        let mut max_diff: f64 = 0.0;
        for _ in 0..100 {
            let x = sample_ball(&mut rng, 3, 0.95 * radius);
            let y = sample_ball(&mut rng, 3, 0.95 * radius);
            if norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-3 {
                continue;
            }
            let gxy = green_ball(&x, &y, radius, &cfg).unwrap();
            let gyx = green_ball(&y, &x, radius, &cfg).unwrap();
            max_g = max_g.max(gxy.abs());
            max_diff = max_diff.max((gxy - gyx).abs());
        }
        assert!(max_diff <= 1e-10 * max_g.max(1e-30), "asymmetry {max_diff}");
    }

    #[test]
    fn green_pinned_value_and_center_formula() {
        let cfg = cfg3();
        // Direct evaluation at R = 2, x = (1,0,0), y = (0,1/2,0).
        let g = green_ball(&[1.0, 0.0, 0.0], &[0.0, 0.5, 0.0], 2.0, &cfg).unwrap();
        assert_relative_eq!(g, 0.03169477209179007, max_relative = 1e-9);
        // x = 0: G(0, y) = α (|y|^{2−d} − R^{2−d}).
        let y = [0.0, 0.7, 0.0];
        let g0 = green_ball(&[0.0, 0.0, 0.0], &y, 2.0, &cfg).unwrap();
        assert_relative_eq!(
            g0,
            cfg.alpha * (1.0 / 0.7 - 1.0 / 2.0),
            max_relative = 1e-13
        );
    }

    #[test]
    fn gradient_matches_pinned_vector_and_finite_differences() {
        let cfg = cfg3();
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 0.5, 0.0];
        let g = grad_green_ball_x(&x, &y, 2.0, &cfg).unwrap();
        assert_relative_eq!(g[0], -0.0563335960541445, max_relative = 1e-9);
        assert_relative_eq!(g[1], 0.023611242382849833, max_relative = 1e-9);
        assert!(g[2].abs() < 1e-15);

        // FD convergence order on random pairs: e(h)/e(h/2) ≈ 4.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ratios = Vec::new();
        for _ in 0..50 {
            let x = sample_annulus(&mut rng, 3, 0.2, 1.8);
            let y = sample_ball(&mut rng, 3, 1.5);
            let sep: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            if norm(&sep) < 0.3 {
                continue;
            }
            let grad = grad_green_ball_x(&x, &y, 2.0, &cfg).unwrap();
            let fd_err = |h: f64| -> f64 {
                let mut worst: f64 = 0.0;
                for i in 0..3 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (green_ball(&xp, &y, 2.0, &cfg).unwrap()
                        - green_ball(&xm, &y, 2.0, &cfg).unwrap())
                        / (2.0 * h);
                    worst = worst.max((fd - grad[i]).abs());
                }
                worst
            };
            let (e1, e2) = (fd_err(1e-4), fd_err(5e-5));
            if e1 > 1e-12 {
                ratios.push(e1 / e2);
            }
        }
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = ratios[ratios.len() / 2];
        assert!(
            (3.3..=4.7).contains(&median),
            "median FD error ratio {median}, expected ~4"
        );
    }

    #[test]
    fn green_is_harmonic_away_from_the_pole() {
        // 7-point FD Laplacian residual decays at second order in h.
        let cfg = cfg3();
        let x = [0.9, -0.3, 0.4];
        let y = [-0.5, 0.6, 0.1];
        let lap = |h: f64| -> f64 {
            let g0 = green_ball(&x, &y, 2.0, &cfg).unwrap();
            let mut acc = -6.0 * g0;
            for i in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                acc += green_ball(&xp, &y, 2.0, &cfg).unwrap()
                    + green_ball(&xm, &y, 2.0, &cfg).unwrap();
            }
            acc / (h * h)
        };
        let (r1, r2) = (lap(2e-2).abs(), lap(1e-2).abs());
        let order = (r1 / r2).log2();
        assert!(order >= 1.9, "observed FD-harmonicity order {order}");
    }

    #[test]
    fn coincident_and_exterior_points_are_rejected() {
        let cfg = cfg3();
        assert_eq!(
            green_ball(&[0.5, 0.0, 0.0], &[0.5, 0.0, 0.0], 2.0, &cfg).unwrap_err(),
            Error::CoincidentPoints
        );
        assert!(matches!(
            green_ball(&[2.5, 0.0, 0.0], &[0.0, 0.0, 0.0], 2.0, &cfg),
            Err(Error::PointOutsideBall { .. })
        ));
    }

    #[test]
    fn image_bound_calibration_is_stable_under_eps_halving() {
        let cfg = cfg3();
        let calibration = image_gradient_bound_report(0.25, 10_000, 1234, &cfg).unwrap();
        assert!(
            calibration.sup_ratio.is_finite() && calibration.sup_ratio > 0.01,
            "implausible calibration constant {}",
            calibration.sup_ratio
        );
        for eps in [0.125, 0.0625] {
            let report = image_gradient_bound_report(eps, 10_000, 1234, &cfg).unwrap();
            assert!(
                report.sup_ratio <= 2.0 * calibration.sup_ratio,
                "bound constant exploded: {} at eps = {eps} vs calibration {}",
                report.sup_ratio,
                calibration.sup_ratio
            );
        }
    }

    #[test]
    fn bound_report_rejects_large_eps() {
        assert!(image_gradient_bound_report(0.3, 10, 0, &cfg3()).is_err());
    }
}
