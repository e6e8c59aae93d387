//! Exact and semi-analytic solvers on the concentric shell `ε ≤ |x| ≤ 1`
//! (any dimension `d ≥ 3`) and on the full unit ball (the `ε → 0` limit).
//!
//! These solutions are the ground truth the rest of the crate is verified
//! against:
//!
//! * constant source `−Δu = c`: closed form
//!   `u(r) = −c r²/(2d) + A + B r^{2−d}` with coefficients from the 2×2
//!   Dirichlet boundary system;
//! * radial source `f = g(r) ê_r`: integrating
//!   `−(r^{d−1}(u′ + g))′ = 0` gives `u′(r) = −g(r) + c₁ r^{1−d}` with `c₁`
//!   fixed by the boundary values, and `u` by cumulative quadrature;
//! * single spherical-harmonic mode (dimension 3): variation of parameters
//!   on the homogeneous pair `{r^l, r^{−l−1}}`.
//!
//! The coefficient `B ~ −c ε^{d−2}` produces the near-hole gradient
//! `u′ ~ B r^{1−d}`, which is what makes `‖∇u‖_{L^p}` blow up as `ε → 0`
//! once `p > d`.

use std::sync::Arc;

use crate::domain::RadialProfile;
use crate::error::{Error, Result};
use crate::quadrature::{
    default_panel_count, graded_breakpoints, insert_breakpoints, Composite1d, GaussRule,
};
use crate::sphharm;

/// Relative tolerance for the cumulative quadrature inside the radial and
/// modal solvers.
const SOLVER_QUAD_TOL: f64 = 1e-10;

/// Absolute tolerance accepted on Dirichlet boundary residuals of closed-form
/// solutions.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A tabulated cumulative integral `r ↦ ∫_{lo}^{r} f(s) ds` on graded panels.
///
/// Values at panel boundaries are precomputed; evaluation inside a panel adds
/// a partial-panel Gauss rule, so the cumulative is accurate to the rule's
/// accuracy everywhere, not just at table points.
#[derive(Clone)]
pub(crate) struct Cumulative {
    bps: Vec<f64>,
    cum: Vec<f64>,
    rule: GaussRule,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Cumulative {
    /// Build the table, verifying quadrature convergence by one panel-split
    /// refinement of the total integral.
    fn build(
        bps: Vec<f64>,
        nodes: usize,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        let comp = Composite1d::new(bps, nodes)?;
        let coarse = comp.integrate(|r| f(r));
        let comp = comp.split();
        let fine = comp.integrate(|r| f(r));
        let delta = (fine - coarse).abs() / fine.abs().max(1.0);
        if delta > SOLVER_QUAD_TOL {
            return Err(Error::QuadratureNotConverged {
                delta,
                tol: SOLVER_QUAD_TOL,
            });
        }
        let rule = comp.rule.clone();
        let bps = comp.breakpoints;
        let mut cum = Vec::with_capacity(bps.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for pair in bps.windows(2) {
            acc += rule.integrate(pair[0], pair[1], |r| f(r));
            cum.push(acc);
        }
        Ok(Cumulative { bps, cum, rule, f })
    }

    fn eval(&self, r: f64) -> f64 {
        let k = match self
            .bps
            .binary_search_by(|b| b.partial_cmp(&r).unwrap())
        {
            Ok(i) => return self.cum[i],
            Err(i) => i.saturating_sub(1).min(self.bps.len() - 2),
        };
        self.cum[k] + self.rule.integrate(self.bps[k], r, |s| (self.f)(s))
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }
}

impl std::fmt::Debug for Cumulative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Cumulative {{ panels: {}, total: {} }}",
            self.bps.len() - 1,
            self.total()
        )
    }
}

#[derive(Debug, Clone)]
enum RadialKind {
    /// `−Δu = c`; particular part `−c r²/(2d)`.
    ConstantSource { c: f64 },
    /// `u′ = −g + c₁ r^{1−d}`; particular part `−∫_ε^r g`.
    GradientProfile {
        g: RadialProfile,
        c1: f64,
        cum: Cumulative,
    },
}

/// A radially symmetric solution on the shell `ε ≤ r ≤ 1` (or on the full
/// ball when `eps = 0`), represented as `u = u_part + A + B r^{2−d}`.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    /// Ambient dimension.
    pub d: usize,
    /// Inner radius; `0` denotes the no-hole limit ball.
    pub eps: f64,
    /// Constant homogeneous coefficient.
    pub a: f64,
    /// Coefficient of `r^{2−d}`.
    pub b: f64,
    kind: RadialKind,
}

impl RadialSolution {
    /// Solution value `u(r)`.
    pub fn value(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let hom = self.a + self.power_term(r);
        Ok(match &self.kind {
            RadialKind::ConstantSource { c } => -c * r * r / (2.0 * self.d as f64) + hom,
            RadialKind::GradientProfile { cum, .. } => -cum.eval(r) + hom,
        })
    }

    /// Radial derivative `u′(r)`.
    pub fn dvalue(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.dvalue_unchecked(r))
    }

    fn dvalue_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            RadialKind::ConstantSource { c } => {
                let mut v = -c * r / self.d as f64;
                if self.b != 0.0 {
                    v += (2.0 - self.d as f64) * self.b * r.powi(1 - self.d as i32);
                }
                v
            }
            RadialKind::GradientProfile { g, c1, .. } => {
                let mut v = -g.eval(r).unwrap_or(f64::NAN);
                if *c1 != 0.0 {
                    v += c1 * r.powi(1 - self.d as i32);
                }
                v
            }
        }
    }

    fn power_term(&self, r: f64) -> f64 {
        // Written so the limit ball (b = 0) never evaluates 0^{2−d}.
        if self.b == 0.0 {
            0.0
        } else {
            self.b * r.powi(2 - self.d as i32)
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r < self.eps - 1e-12 || r > 1.0 + 1e-12 {
            return Err(Error::EvaluationOutsideDomain {
                r,
                lo: self.eps,
                hi: 1.0,
            });
        }
        Ok(())
    }

    /// Pointwise value and gradient, `∇u = u′(r) x/|x|`.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.d {
            return Err(Error::BadDimension { d: x.len() });
        }
        let r = crate::domain::norm(x);
        if r == 0.0 {
            // Only reachable for the limit ball; u′(0) = 0 by symmetry.
            return Ok((self.value(0.0)?, vec![0.0; self.d]));
        }
        let v = self.value(r)?;
        let du = self.dvalue(r)?;
        Ok((v, x.iter().map(|xi| du * xi / r).collect()))
    }

    /// Source strength for constant-source solutions.
    pub fn constant_strength(&self) -> Option<f64> {
        match &self.kind {
            RadialKind::ConstantSource { c } => Some(*c),
            RadialKind::GradientProfile { .. } => None,
        }
    }

    /// Dirichlet residuals `(|u(inner)|, |u(1)|)`; the inner residual is zero
    /// by convention for the limit ball.
    pub fn boundary_residual(&self) -> (f64, f64) {
        let outer = self.value(1.0).map(f64::abs).unwrap_or(f64::NAN);
        if self.eps > 0.0 {
            (self.value(self.eps).map(f64::abs).unwrap_or(f64::NAN), outer)
        } else {
            (0.0, outer)
        }
    }

    /// Radii in `(inner, 1)` where `u′` vanishes — the kink locations of
    /// `|u′|^p`, needed for accurate `L^p` quadrature.
    pub fn gradient_zero_radii(&self) -> Vec<f64> {
        let lo = if self.eps > 0.0 { self.eps } else { 1e-9 };
        match &self.kind {
            RadialKind::ConstantSource { c } => {
                // u′ = 0 ⇔ r^d = d (2−d) B / c.
                if *c == 0.0 || self.b == 0.0 {
                    return Vec::new();
                }
                let t = self.d as f64 * (2.0 - self.d as f64) * self.b / c;
                if t <= 0.0 {
                    return Vec::new();
                }
                let r = t.powf(1.0 / self.d as f64);
                if r > lo && r < 1.0 {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            RadialKind::GradientProfile { .. } => {
                crate::quadrature::scan_sign_changes(lo, 1.0, 512, |r| self.dvalue_unchecked(r))
            }
        }
    }
}

fn check_shell_parameters(eps: f64, d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::BadDimension { d });
    }
    if !(eps > 0.0 && eps < 1.0) || !eps.is_finite() {
        return Err(Error::BadGeometry {
            detail: format!("shell inner radius {eps} must lie in (0, 1)"),
        });
    }
    Ok(())
}

/// Exact solution of `−Δu = c` on the shell `ε ≤ r ≤ 1` with zero boundary
/// values: `u(r) = −c r²/(2d) + A + B r^{2−d}` where
///
/// ```text
/// B = c (ε² − 1) / (2d (ε^{2−d} − 1)),   A = c/(2d) − B.
/// ```
pub fn solve_constant_source(c: f64, eps: f64, d: usize) -> Result<RadialSolution> {
    check_shell_parameters(eps, d)?;
    let dd = d as f64;
    let b = c * (eps * eps - 1.0) / (2.0 * dd * (eps.powi(2 - d as i32) - 1.0));
    let a = c / (2.0 * dd) - b;
    Ok(RadialSolution {
        d,
        eps,
        a,
        b,
        kind: RadialKind::ConstantSource { c },
    })
}

/// The `ε → 0` limit problem on the full ball: `−Δu = c` in `B(0,1)`,
/// `u(∂B) = 0`, i.e. `u(r) = c (1 − r²)/(2d)`.
///
/// # Panics
/// If `d < 3`.
pub fn limit_ball_solution(c: f64, d: usize) -> RadialSolution {
    assert!(d >= 3, "limit ball solution requires d >= 3");
    RadialSolution {
        d,
        eps: 0.0,
        a: c / (2.0 * d as f64),
        b: 0.0,
        kind: RadialKind::ConstantSource { c },
    }
}

/// Solve `−Δu = div(g(r) ê_r)` on the shell with zero boundary values.
///
/// Integrating the conservation form once gives `u′ = −g + c₁ r^{1−d}`; the
/// constant `c₁ = (d−2) ∫_ε^1 g / (ε^{2−d} − 1)` enforces `u(1) = 0` given
/// `u(ε) = 0`. The cumulative of `g` is tabulated on graded panels (split at
/// any interior sign change of `g`, where dual-construction profiles have
/// kinks).
pub fn solve_radial_source(g: &RadialProfile, eps: f64, d: usize) -> Result<RadialSolution> {
    check_shell_parameters(eps, d)?;
    // Probe the profile once so a broken closure fails loudly here.
    g.eval(0.5 * (eps + 1.0))?;
    let g_arc = g.clone();
    let zeros = crate::quadrature::scan_sign_changes(eps, 1.0, 512, |r| {
        g_arc.eval(r).unwrap_or(f64::NAN)
    });
    let bps = insert_breakpoints(
        graded_breakpoints(eps, 1.0, default_panel_count(eps, 1.0), 2.0),
        &zeros,
    );
    let gf = g.clone();
    let cum = Cumulative::build(bps, 16, Arc::new(move |r| gf.eval(r).unwrap_or(f64::NAN)))?;
    let total = cum.total();
    let dd = d as f64;
    let c1 = total * (dd - 2.0) / (eps.powi(2 - d as i32) - 1.0);
    let b = c1 / (2.0 - dd);
    let a = -b * eps.powi(2 - d as i32);
    Ok(RadialSolution {
        d,
        eps,
        a,
        b,
        kind: RadialKind::GradientProfile {
            g: g.clone(),
            c1,
            cum,
        },
    })
}

/// A single spherical-harmonic mode `u = U(r) Y_{lm}(x̂)` on the shell in
/// dimension 3, with `U(ε) = U(1) = 0`.
#[derive(Debug, Clone)]
pub struct ModalSolution {
    pub l: u32,
    pub m: i32,
    pub eps: f64,
    a: f64,
    b: f64,
    /// `F(r) = ∫_ε^r s^{1−l} h(s) ds`
    cum_f: Cumulative,
    /// `G(r) = ∫_ε^r s^{l+2} h(s) ds`
    cum_g: Cumulative,
    h: RadialProfile,
}

impl ModalSolution {
    /// Radial factor `U(r)`.
    pub fn radial_value(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let l = self.l as f64;
        let part = -(r.powf(l) * self.cum_f.eval(r) - r.powf(-l - 1.0) * self.cum_g.eval(r))
            / (2.0 * l + 1.0);
        Ok(part + self.a * r.powf(l) + self.b * r.powf(-l - 1.0))
    }

    /// Radial derivative `U′(r)`. Variation of parameters makes the
    /// inhomogeneous terms cancel, leaving
    /// `U′ = −(l r^{l−1} F + (l+1) r^{−l−2} G)/(2l+1) + a l r^{l−1} − b (l+1) r^{−l−2}`.
    pub fn radial_dvalue(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let l = self.l as f64;
        let part = -(l * r.powf(l - 1.0) * self.cum_f.eval(r)
            + (l + 1.0) * r.powf(-l - 2.0) * self.cum_g.eval(r))
            / (2.0 * l + 1.0);
        Ok(part + self.a * l * r.powf(l - 1.0) - self.b * (l + 1.0) * r.powf(-l - 2.0))
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r < self.eps - 1e-12 || r > 1.0 + 1e-12 {
            return Err(Error::EvaluationOutsideDomain {
                r,
                lo: self.eps,
                hi: 1.0,
            });
        }
        Ok(())
    }

    /// Pointwise value and Cartesian gradient:
    /// `∇u = U′ Y x̂ + (U/r)(∂_θ Y θ̂ + (∂_φ Y / sin θ) φ̂)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != 3 {
            return Err(Error::BadDimension { d: x.len() });
        }
        let r = crate::domain::norm(x);
        let u = self.radial_value(r)?;
        let du = self.radial_dvalue(r)?;
        let w = [x[0] / r, x[1] / r, x[2] / r];
        let (theta, phi) = sphharm::direction_angles(&w);
        let (y, dy_dt, dy_dp) = sphharm::real_sph_harm_grad(self.l, self.m, theta, phi);
        let (st, ct) = (theta.sin(), theta.cos());
        let (sp, cp) = (phi.sin(), phi.cos());
        let theta_hat = [ct * cp, ct * sp, -st];
        let phi_hat = [-sp, cp, 0.0];
        let tangential = u / r;
        let mut grad = vec![0.0; 3];
        for i in 0..3 {
            grad[i] = du * y * w[i]
                + tangential * (dy_dt * theta_hat[i] + (dy_dp / st) * phi_hat[i]);
        }
        Ok((u * y, grad))
    }

    /// Dirichlet residuals `(|U(ε)|, |U(1)|)`.
    pub fn boundary_residual(&self) -> (f64, f64) {
        (
            self.radial_value(self.eps).map(f64::abs).unwrap_or(f64::NAN),
            self.radial_value(1.0).map(f64::abs).unwrap_or(f64::NAN),
        )
    }

    /// Residual of the modal equation in conservation form,
    /// `(r² U′)′ − l(l+1) U + r² h`, with the outer derivative by central
    /// differences on the analytic `U′`.
    pub fn ode_residual(&self, r: f64) -> Result<f64> {
        let h = 1e-5_f64.min(0.25 * (1.0 - self.eps));
        let flux = |s: f64| -> Result<f64> { Ok(s * s * self.radial_dvalue(s)?) };
        let dflux = (flux(r + h)? - flux(r - h)?) / (2.0 * h);
        let l = self.l as f64;
        Ok(dflux - l * (l + 1.0) * self.radial_value(r)? + r * r * self.h.eval(r)?)
    }
}

/// Solve the mode-`(l, m)` reduction of the shell problem in dimension 3:
///
/// ```text
/// U″ + 2U′/r − l(l+1) U/r² = −h(r),   U(ε) = U(1) = 0,
/// ```
///
/// by variation of parameters on the homogeneous pair `{r^l, r^{−l−1}}`
/// (Wronskian `−(2l+1)/r²`), with the two cumulative integrals tabulated on
/// graded panels.
pub fn solve_modal(l: u32, m: i32, h: &RadialProfile, eps: f64) -> Result<ModalSolution> {
    check_shell_parameters(eps, 3)?;
    if m.unsigned_abs() > l {
        return Err(Error::BadGeometry {
            detail: format!("mode index |m| = {} exceeds l = {l}", m.unsigned_abs()),
        });
    }
    h.eval(0.5 * (eps + 1.0))?;
    let bps = graded_breakpoints(eps, 1.0, default_panel_count(eps, 1.0), 2.0);
    let lf = l as f64;
    let hf = h.clone();
    let cum_f = Cumulative::build(
        bps.clone(),
        16,
        Arc::new(move |s: f64| s.powf(1.0 - lf) * hf.eval(s).unwrap_or(f64::NAN)),
    )?;
    let hg = h.clone();
    let cum_g = Cumulative::build(
        bps,
        16,
        Arc::new(move |s: f64| s.powf(lf + 2.0) * hg.eval(s).unwrap_or(f64::NAN)),
    )?;
    // Particular solution at r = 1, then the homogeneous coefficients from
    // U(ε) = 0 (which forces a ε^l + b ε^{−l−1} = 0) and U(1) = 0.
    let part_at_one = -(cum_f.total() - cum_g.total()) / (2.0 * lf + 1.0);
    let a = -part_at_one / (1.0 - eps.powi(2 * l as i32 + 1));
    let b = -a * eps.powi(2 * l as i32 + 1);
    Ok(ModalSolution {
        l,
        m,
        eps,
        a,
        b,
        cum_f,
        cum_g,
        h: h.clone(),
    })
}
