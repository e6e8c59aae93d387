//! Real orthonormal spherical harmonics on the unit sphere in three
//! dimensions, with angular derivatives.
//!
//! Conventions: with `x = cos θ`,
//!
//! * `m = 0`:  `Y_{l0} = K_{l0} P_l(x)`
//! * `m > 0`:  `Y_{lm} = √2 K_{lm} P_l^m(x) cos(mφ)`
//! * `m < 0`:  `Y_{lm} = √2 K_{l|m|} P_l^{|m|}(x) sin(|m|φ)`
//!
//! where `K_{lm} = sqrt((2l+1)/(4π) · (l−m)!/(l+m)!)` and `P_l^m` are the
//! associated Legendre functions without the Condon–Shortley phase. These
//! harmonics are orthonormal: `∫_{S²} Y_{lm} Y_{l'm'} dω = δ_{ll'} δ_{mm'}`.
//!
//! The θ-derivative uses `dP_l^m(cos θ)/dθ = (l cos θ P_l^m − (l+m) P_{l−1}^m)/sin θ`,
//! which is singular at the poles; callers evaluate strictly away from
//! `sin θ = 0` (quadrature nodes never touch the poles).

use std::f64::consts::PI;

/// Associated Legendre `P_l^m(x)` (no Condon–Shortley phase) together with
/// `P_{l−1}^m(x)` (zero when `l = m`).
fn assoc_legendre_pair(l: u32, m: u32, x: f64) -> (f64, f64) {
    debug_assert!(m <= l);
    // P_m^m = (2m−1)!! (1−x²)^{m/2}
    let mut pmm = 1.0;
    if m > 0 {
        let s = (1.0 - x * x).max(0.0).sqrt();
        let mut fact = 1.0;
        for _ in 0..m {
            pmm *= fact * s;
            fact += 2.0;
        }
    }
    if l == m {
        return (pmm, 0.0);
    }
    // P_{m+1}^m = x (2m+1) P_m^m, then upward recurrence in l.
    let mut p_prev = pmm;
    let mut p = x * (2.0 * m as f64 + 1.0) * pmm;
    for ll in (m + 2)..=l {
        let ll = ll as f64;
        let mf = m as f64;
        let p_next = ((2.0 * ll - 1.0) * x * p - (ll + mf - 1.0) * p_prev) / (ll - mf);
        p_prev = p;
        p = p_next;
    }
    (p, p_prev)
}

/// Normalization constant `K_{lm} = sqrt((2l+1)/(4π) · (l−m)!/(l+m)!)`.
fn normalization(l: u32, m: u32) -> f64 {
    let mut ratio = 1.0; // (l−m)!/(l+m)! = 1/((l−m+1)···(l+m))
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    ((2.0 * l as f64 + 1.0) / (4.0 * PI) * ratio).sqrt()
}

/// Real spherical harmonic `Y_{lm}(θ, φ)`.
pub fn real_sph_harm(l: u32, m: i32, theta: f64, phi: f64) -> f64 {
    real_sph_harm_grad(l, m, theta, phi).0
}

/// `(Y, ∂Y/∂θ, ∂Y/∂φ)` at `(θ, φ)`.
pub fn real_sph_harm_grad(l: u32, m: i32, theta: f64, phi: f64) -> (f64, f64, f64) {
    let ma = m.unsigned_abs();
    debug_assert!(ma <= l, "|m| must not exceed l");
    let x = theta.cos();
    let s = theta.sin();
    let (p, p_lower) = assoc_legendre_pair(l, ma, x);
    // dP_l^m(cos θ)/dθ; at the poles this expression is 0/0 and the caller
    // is expected to stay away (see module docs).
    let dp_dtheta = (l as f64 * x * p - (l + ma) as f64 * p_lower) / s;
    let k = normalization(l, ma);
    let (azim, dazim) = if m > 0 {
        let (sn, cs) = (ma as f64 * phi).sin_cos();
        (std::f64::consts::SQRT_2 * cs, -std::f64::consts::SQRT_2 * ma as f64 * sn)
    } else if m < 0 {
        let (sn, cs) = (ma as f64 * phi).sin_cos();
        (std::f64::consts::SQRT_2 * sn, std::f64::consts::SQRT_2 * ma as f64 * cs)
    } else {
        (1.0, 0.0)
    };
    (k * p * azim, k * dp_dtheta * azim, k * p * dazim)
}

/// `Y_{lm}` evaluated at a unit direction vector.
pub fn real_sph_harm_dir(l: u32, m: i32, w: &[f64]) -> f64 {
    let theta = w[2].clamp(-1.0, 1.0).acos();
    let phi = w[1].atan2(w[0]);
    real_sph_harm(l, m, theta, phi)
}

/// Spherical angles `(θ, φ)` of a unit direction.
pub fn direction_angles(w: &[f64]) -> (f64, f64) {
    (w[2].clamp(-1.0, 1.0).acos(), w[1].atan2(w[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::product_sphere;
    use approx::assert_relative_eq;

    #[test]
    fn lowest_harmonics_match_closed_forms() {
        let inv_sqrt_4pi = 1.0 / (4.0 * PI).sqrt();
        assert_relative_eq!(real_sph_harm(0, 0, 1.1, 0.3), inv_sqrt_4pi);
        // Y_10 = sqrt(3/4π) cos θ, Y_11 = sqrt(3/4π) sin θ cos φ.
        let c = (3.0 / (4.0 * PI)).sqrt();
        let (theta, phi) = (0.8, 2.1);
        assert_relative_eq!(
            real_sph_harm(1, 0, theta, phi),
            c * theta.cos(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            real_sph_harm(1, 1, theta, phi),
            c * theta.sin() * phi.cos(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            real_sph_harm(1, -1, theta, phi),
            c * theta.sin() * phi.sin(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn orthonormal_up_to_degree_four() {
        let rule = product_sphere(12, 25).unwrap();
        let modes: Vec<(u32, i32)> = (0..=4u32)
            .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m)))
            .collect();
        for (i, &(l, m)) in modes.iter().enumerate() {
            for &(l2, m2) in &modes[i..] {
                let mut acc = 0.0;
                for (w, wt) in rule.dirs.iter().zip(&rule.weights) {
                    acc += wt * real_sph_harm_dir(l, m, w) * real_sph_harm_dir(l2, m2, w);
                }
                let expect = if l == l2 && m == m2 { 1.0 } else { 0.0 };
                assert!(
                    (acc - expect).abs() < 1e-12,
                    "<Y_{l}{m}, Y_{l2}{m2}> = {acc}, expected {expect}"
                );
            }
        }
    }

    #[test]
    fn addition_theorem_sum_of_squares() {
        // Σ_m Y_lm(ω)² = (2l+1)/(4π) for any direction ω.
        let w = {
            let v = [0.3_f64, -0.7, 0.64];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        };
        for l in 0..=4u32 {
            let sum: f64 = (-(l as i32)..=l as i32)
                .map(|m| real_sph_harm_dir(l, m, &w).powi(2))
                .sum();
            assert_relative_eq!(
                sum,
                (2.0 * l as f64 + 1.0) / (4.0 * PI),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn angular_derivatives_match_finite_differences() {
        let cases = [(1u32, 0i32), (2, 1), (3, -2), (4, 4), (3, 0)];
        let (theta, phi) = (1.1, -0.7);
        let h = 1e-6;
        for &(l, m) in &cases {
            let (_, dt, dp) = real_sph_harm_grad(l, m, theta, phi);
            let fd_t =
                (real_sph_harm(l, m, theta + h, phi) - real_sph_harm(l, m, theta - h, phi))
                    / (2.0 * h);
            let fd_p =
                (real_sph_harm(l, m, theta, phi + h) - real_sph_harm(l, m, theta, phi - h))
                    / (2.0 * h);
            assert_relative_eq!(dt, fd_t, max_relative = 1e-7, epsilon = 1e-9);
            assert_relative_eq!(dp, fd_p, max_relative = 1e-7, epsilon = 1e-9);
        }
    }
}
