//! `L^p` norms of gradients and source fields over perforated balls.
//!
//! Radially symmetric solutions reduce exactly to one-dimensional integrals,
//! `‖∇u‖_p^p = σ_{d−1} ∫ |u′|^p r^{d−1} dr`, evaluated on panels graded
//! toward the hole (where `|u′| ~ r^{1−d}` concentrates the mass that drives
//! blow-up). General three-dimensional fields use a product cubature: a
//! Gauss×uniform angular rule times a graded radial rule along each ray from
//! the hole center to the outer sphere.
//!
//! Every report carries the relative change of one node-doubling pass;
//! non-convergence is a flag on the report, not an error, so parameter sweeps
//! can proceed and mark bad cells. Callers that need a hard guarantee use
//! [`LpReport::require_converged`].

use gauss_quad::GaussJacobi;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::domain::{self, DomainSpec, SourceSpec};
use crate::error::{Error, Result};
use crate::kernel::sphere_area;
use crate::quadrature::{
    default_panel_count, product_sphere, rel_change, scan_sign_changes, Composite1d, SphereRule,
};
use crate::shell::{ModalSolution, RadialSolution};

/// Controls for the radial and angular quadrature rules.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Radial panel count; `None` chooses `⌈log2(outer/inner)⌉ + 4`.
    pub radial_panels: Option<usize>,
    /// Geometric width ratio of consecutive radial panels (> 1).
    pub grading_ratio: f64,
    /// Gauss–Legendre nodes per radial panel.
    pub gauss_nodes: usize,
    /// Polar Gauss nodes of the angular product rule (three dimensions).
    pub polar_nodes: usize,
    /// Uniform azimuth nodes of the angular product rule.
    pub azimuth_nodes: usize,
    /// Relative tolerance for the node-doubling convergence check.
    pub tolerance: f64,
    /// Maximum number of refinement passes.
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial_panels: None,
            grading_ratio: 2.0,
            gauss_nodes: 16,
            polar_nodes: 32,
            azimuth_nodes: 64,
            tolerance: 1e-7,
            max_refinements: 3,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_nodes < 4 || self.polar_nodes < 4 || self.azimuth_nodes < 4 {
            return Err(Error::InvalidQuadratureConfig {
                detail: "node counts must be at least 4",
            });
        }
        if !(self.grading_ratio > 1.0) || !self.grading_ratio.is_finite() {
            return Err(Error::InvalidQuadratureConfig {
                detail: "grading ratio must exceed 1",
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidQuadratureConfig {
                detail: "tolerance must be positive",
            });
        }
        if self.radial_panels == Some(0) {
            return Err(Error::InvalidQuadratureConfig {
                detail: "radial panel count must be at least 1",
            });
        }
        Ok(())
    }
}

/// An `L^p` norm together with the evidence for (or against) its accuracy.
#[derive(Debug, Clone)]
pub struct LpReport {
    /// The norm value `(∫ |·|^p)^{1/p}`.
    pub value: f64,
    /// Exponent the norm was computed for.
    pub p: f64,
    /// Radial node count of the finest rule (representative ray for cubature).
    pub nodes_radial: usize,
    /// Angular node count (zero for one-dimensional reductions and closed
    /// forms).
    pub nodes_angular: usize,
    /// Relative change of the last refinement pass (zero for closed forms).
    pub refinement_delta: f64,
    /// Whether the refinement delta reached the tolerance.
    pub converged: bool,
    /// Tolerance the delta was compared against.
    pub tolerance: f64,
}

impl LpReport {
    fn closed_form(value: f64, p: f64, tolerance: f64) -> Self {
        LpReport {
            value,
            p,
            nodes_radial: 0,
            nodes_angular: 0,
            refinement_delta: 0.0,
            converged: true,
            tolerance,
        }
    }

    /// The value if the report converged, `QuadratureNotConverged` otherwise.
    pub fn require_converged(&self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::QuadratureNotConverged {
                delta: self.refinement_delta,
                tol: self.tolerance,
            })
        }
    }
}

/// One-dimensional description of a gradient whose magnitude depends only on
/// the radius, enabling the exact angular reduction of the `L^p` integral.
pub struct RadialGradient<'a> {
    /// Inner radius of the shell (zero for the full ball).
    pub inner: f64,
    /// Outer radius.
    pub outer: f64,
    /// Ambient dimension.
    pub d: usize,
    /// Radii where the derivative changes sign (quadrature panel splits; the
    /// integrand `|u′|^p` loses smoothness there for non-even `p`).
    pub zeros: Vec<f64>,
    /// The signed radial derivative `u′(r)`.
    pub dvalue: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
}

/// Anything whose value and gradient can be sampled pointwise.
///
/// `radial_gradient` is an optional fast path: solutions that know their
/// gradient magnitude is radial return a one-dimensional description and skip
/// the angular cubature entirely.
pub trait SolutionField: Sync {
    /// Ambient dimension of the field.
    fn dimension(&self) -> usize;
    /// Value and gradient at `x`.
    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
    /// One-dimensional reduction, when one exists.
    fn radial_gradient(&self) -> Option<RadialGradient<'_>> {
        None
    }
}

impl SolutionField for RadialSolution {
    fn dimension(&self) -> usize {
        self.d
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(x)
    }

    fn radial_gradient(&self) -> Option<RadialGradient<'_>> {
        Some(RadialGradient {
            inner: self.eps,
            outer: 1.0,
            d: self.d,
            zeros: self.gradient_zero_radii(),
            dvalue: Box::new(move |r| self.dvalue(r).unwrap_or(f64::NAN)),
        })
    }
}

impl SolutionField for ModalSolution {
    fn dimension(&self) -> usize {
        3
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(x)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent { p });
    }
    Ok(())
}

/// `(σ_{d−1} ∫_{inner}^{outer} |u′|^p r^{d−1} dr)^{1/p}` with panel-splitting
/// refinement. The core shared by every radial path.
pub fn radial_lp_norm(rg: &RadialGradient<'_>, p: f64, cfg: &QuadratureConfig) -> Result<LpReport> {
    check_exponent(p)?;
    cfg.validate()?;
    let panels = cfg
        .radial_panels
        .unwrap_or_else(|| default_panel_count(rg.inner, rg.outer));
    let mut comp = Composite1d::graded(
        rg.inner,
        rg.outer,
        panels,
        cfg.grading_ratio,
        cfg.gauss_nodes,
        &rg.zeros,
    )?;
    let dm1 = rg.d as i32 - 1;
    let integrand = |r: f64| (rg.dvalue)(r).abs().powf(p) * r.powi(dm1);
    let area = sphere_area(rg.d);
    let mut norm = (area * comp.integrate(integrand)).powf(1.0 / p);
    let mut delta = f64::INFINITY;
    let mut refinements = 0;
    while refinements < cfg.max_refinements {
        comp = comp.split();
        let next = (area * comp.integrate(integrand)).powf(1.0 / p);
        delta = rel_change(next, norm);
        norm = next;
        refinements += 1;
        if delta <= cfg.tolerance {
            break;
        }
    }
    Ok(LpReport {
        value: norm,
        p,
        nodes_radial: comp.node_count(),
        nodes_angular: 0,
        refinement_delta: delta,
        converged: delta <= cfg.tolerance,
        tolerance: cfg.tolerance,
    })
}

/// One cubature pass: for every angular node, integrate `magnitude^p r²`
/// along the ray from the hole center to the outer sphere on graded panels.
///
/// Rays are processed in parallel but accumulated in angular-node order, so
/// the result does not depend on the thread count.
fn cubature_pass(
    dom: &DomainSpec,
    magnitude: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    p: f64,
    cfg: &QuadratureConfig,
    sphere: &SphereRule,
    splits: usize,
) -> Result<(f64, usize)> {
    let c = dom.hole_center();
    let big_r = dom.outer_radius();
    let c2 = domain::dot(&c, &c);
    let scale = dom.hole_scale();
    let ray_values: Vec<Result<(f64, usize)>> = sphere
        .dirs
        .par_iter()
        .map(|w| {
            let s_in = scale * dom.hole.surface_radius(w);
            let cw = domain::dot(&c, w);
            // Ray-sphere intersection from the hole center: the positive root
            // of |c + t w| = R.
            let r_out = -cw + (cw * cw + big_r * big_r - c2).sqrt();
            let panels = cfg
                .radial_panels
                .unwrap_or_else(|| default_panel_count(s_in, r_out));
            let mut comp =
                Composite1d::graded(s_in, r_out, panels, cfg.grading_ratio, cfg.gauss_nodes, &[])?;
            for _ in 0..splits {
                comp = comp.split();
            }
            let nodes = comp.node_count();
            let v = comp.try_integrate(|r| {
                let x = [c[0] + r * w[0], c[1] + r * w[1], c[2] + r * w[2]];
                Ok(magnitude(&x)?.powf(p) * r * r)
            })?;
            Ok((v, nodes))
        })
        .collect();
    let mut acc = 0.0;
    let mut nodes_radial = 0;
    for (res, wt) in ray_values.into_iter().zip(&sphere.weights) {
        let (v, nodes) = res?;
        acc += wt * v;
        nodes_radial = nodes;
    }
    Ok((acc, nodes_radial))
}

/// Full three-dimensional `L^p` norm of a scalar magnitude over a perforated
/// ball, with one angular refinement followed by radial refinements.
fn cubature_lp_norm(
    dom: &DomainSpec,
    magnitude: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<LpReport> {
    check_exponent(p)?;
    cfg.validate()?;
    if dom.d != 3 {
        return Err(Error::BadDimension { d: dom.d });
    }
    let mut sphere = product_sphere(cfg.polar_nodes, cfg.azimuth_nodes)?;
    let (v0, mut nodes_radial) = cubature_pass(dom, magnitude, p, cfg, &sphere, 0)?;
    let mut norm = v0.powf(1.0 / p);
    let mut delta = f64::INFINITY;
    let mut refinements = 0;
    let mut splits = 0;
    while refinements < cfg.max_refinements {
        if refinements == 0 {
            // The first pass doubles the angular rule along with the radial
            // one; later passes refine only radially, where the hard
            // structure is.
            sphere = product_sphere(2 * cfg.polar_nodes, 2 * cfg.azimuth_nodes)?;
        }
        splits += 1;
        let (v, nodes) = cubature_pass(dom, magnitude, p, cfg, &sphere, splits)?;
        nodes_radial = nodes;
        let next = v.powf(1.0 / p);
        delta = rel_change(next, norm);
        norm = next;
        refinements += 1;
        if delta <= cfg.tolerance {
            break;
        }
    }
    Ok(LpReport {
        value: norm,
        p,
        nodes_radial,
        nodes_angular: sphere.len(),
        refinement_delta: delta,
        converged: delta <= cfg.tolerance,
        tolerance: cfg.tolerance,
    })
}

/// `‖∇u‖_{L^p}` over the perforated ball.
///
/// Solutions exposing a radial reduction are integrated in one dimension
/// (after a consistency check against the domain geometry); everything else
/// uses the three-dimensional cubature.
pub fn lp_gradient_norm(
    field: &dyn SolutionField,
    dom: &DomainSpec,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<LpReport> {
    if let Some(rg) = field.radial_gradient() {
        let (di, do_) = (dom.inner_radius(), dom.outer_radius());
        if (di - rg.inner).abs() > 1e-9 * do_.max(1.0) || (do_ - rg.outer).abs() > 1e-9 {
            return Err(Error::BadGeometry {
                detail: format!(
                    "solution shell [{}, {}] does not match domain [{di}, {do_}]",
                    rg.inner, rg.outer
                ),
            });
        }
        return radial_lp_norm(&rg, p, cfg);
    }
    let magnitude = |x: &[f64]| -> Result<f64> {
        let (_, grad) = field.value_grad(x)?;
        Ok(domain::norm(&grad))
    };
    cubature_lp_norm(dom, &magnitude, p, cfg)
}

/// `‖∇u‖_{L^p}` of a radial solution by the exact one-dimensional reduction.
pub fn radial_lp_gradient_norm(sol: &RadialSolution, p: f64) -> Result<LpReport> {
    let rg = sol.radial_gradient().expect("radial solutions always reduce");
    radial_lp_norm(&rg, p, &QuadratureConfig::default())
}

fn gamma_ratio_moment(p: f64, d: usize) -> f64 {
    // ∫_{S^{d−1}} |ω₁|^p dω = 2 π^{(d−1)/2} Γ((p+1)/2) / Γ((p+d)/2)
    let df = d as f64;
    2.0 * std::f64::consts::PI.powf((df - 1.0) / 2.0) * gamma((p + 1.0) / 2.0)
        / gamma((p + df) / 2.0)
}

/// `‖f‖_{L^p}` of a catalog source over the perforated ball.
///
/// Concentric domains use closed forms (the angular factor of `|x₁|^p` is a
/// ratio of gamma functions; constant and radial fields reduce directly);
/// non-concentric geometries fall back to the cubature.
pub fn lp_source_norm(
    f: &SourceSpec,
    dom: &DomainSpec,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<LpReport> {
    check_exponent(p)?;
    cfg.validate()?;
    let d = dom.d;
    let inner = dom.inner_radius();
    let outer = dom.outer_radius();
    if dom.hole.is_concentric() {
        match f {
            SourceSpec::LinearX1 => {
                // |f| = |x₁| = r |ω₁| separates into angular moment × radial
                // power integral.
                let moment = gamma_ratio_moment(p, d);
                let radial =
                    (outer.powf(p + d as f64) - inner.powf(p + d as f64)) / (p + d as f64);
                return Ok(LpReport::closed_form(
                    (moment * radial).powf(1.0 / p),
                    p,
                    cfg.tolerance,
                ));
            }
            SourceSpec::ConstantVector { v } => {
                if v.len() != d {
                    return Err(Error::BadGeometry {
                        detail: format!("constant vector has {} entries, expected {d}", v.len()),
                    });
                }
                let vol = sphere_area(d) / d as f64 * (outer.powi(d as i32) - inner.powi(d as i32));
                return Ok(LpReport::closed_form(
                    domain::norm(v) * vol.powf(1.0 / p),
                    p,
                    cfg.tolerance,
                ));
            }
            SourceSpec::RadialVector { g } => {
                // |f| = |g(r)| is a radial magnitude.
                let zeros = scan_sign_changes(inner.max(1e-12 * outer), outer, 512, |r| {
                    g.eval(r).unwrap_or(f64::NAN)
                });
                let rg = RadialGradient {
                    inner,
                    outer,
                    d,
                    zeros,
                    dvalue: Box::new(move |r| g.eval(r).unwrap_or(f64::NAN)),
                };
                return radial_lp_norm(&rg, p, cfg);
            }
            SourceSpec::Modal { l, m, h } => {
                if d != 3 {
                    return Err(Error::BadDimension { d });
                }
                // |f| = |h(r)| |Y_lm(ω)| separates; the angular factor needs
                // a rule resolving degree-l structure raised to the power p.
                let polar = cfg.polar_nodes.max(2 * *l as usize + 4);
                let azimuth = cfg.azimuth_nodes.max(4 * *l as usize + 4);
                let rule = product_sphere(polar, azimuth)?;
                let (ll, mm) = (*l, *m);
                let angular =
                    rule.integrate(|w| crate::sphharm::real_sph_harm_dir(ll, mm, w).abs().powf(p));
                let zeros = scan_sign_changes(inner.max(1e-12 * outer), outer, 512, |r| {
                    h.eval(r).unwrap_or(f64::NAN)
                });
                let hh = h.clone();
                let rg = RadialGradient {
                    inner,
                    outer,
                    d,
                    zeros,
                    dvalue: Box::new(move |r| hh.eval(r).unwrap_or(f64::NAN)),
                };
                // Reuse the radial engine, then swap its uniform angular
                // factor σ for the harmonic moment.
                let report = radial_lp_norm(&rg, p, cfg)?;
                let value = report.value * (angular / sphere_area(3)).powf(1.0 / p);
                return Ok(LpReport { value, ..report });
            }
        }
    }
    let magnitude = |x: &[f64]| -> Result<f64> { f.magnitude(x) };
    cubature_lp_norm(dom, &magnitude, p, cfg)
}

/// Outcome of the weight-norm identity check.
#[derive(Debug, Clone, Copy)]
pub struct WeightNormCheck {
    pub eps: f64,
    pub q: f64,
    pub d: usize,
    /// `‖ε^{d−1} |x|^{−1}‖_{L^q(B(0, 1/ε))}` by Gauss–Jacobi quadrature.
    pub computed: f64,
    /// The closed form `(σ_{d−1}/(d−q))^{1/q} ε^{d(1−1/q)}`.
    pub predicted: f64,
}

/// Verify the kernel-weight identity
/// `‖ε^{d−1}|x|^{−1}‖_{L^q(B(0,1/ε))} = (σ_{d−1}/(d−q))^{1/q} ε^{d(1−1/q)}`.
///
/// The radial integrand `r^{d−1−q}` is singular at the origin for `q > d−1`,
/// so the quadrature uses a Gauss–Jacobi rule whose weight carries the power
/// exactly. For `q ≥ d` the integral scales out of control as the outer
/// radius grows (the identity's restriction), and the call is rejected.
pub fn verify_weight_norm(eps: f64, q: f64, d: usize) -> Result<WeightNormCheck> {
    if d < 3 {
        return Err(Error::BadDimension { d });
    }
    if !(eps > 0.0 && eps <= 0.25) || !eps.is_finite() {
        return Err(Error::EpsOutOfRange { eps });
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::BadExponent { p: q });
    }
    if q >= d as f64 {
        return Err(Error::ExponentOutOfRange { q, d });
    }
    let df = d as f64;
    let beta = df - 1.0 - q;
    let outer = 1.0 / eps;
    // Map [0, R] to [−1, 1]; the Jacobi weight (1+x)^β absorbs r^β, so the
    // smooth remainder of the integrand is what the rule samples.
    let rule = GaussJacobi::new(24, 0.0, beta).map_err(|_| Error::InvalidQuadratureConfig {
        detail: "Gauss-Jacobi rule rejected the weight exponent",
    })?;
    let half = 0.5 * outer;
    let mut integral = 0.0;
    for (node, weight) in rule.into_node_weight_pairs() {
        let r: f64 = half * (1.0 + node);
        let smooth = (eps.powi(d as i32 - 1) / r).powf(q) * r.powi(d as i32 - 1) * r.powf(-beta);
        integral += weight * smooth;
    }
    integral *= half.powf(beta + 1.0) * sphere_area(d);
    let predicted = (sphere_area(d) / (df - q)).powf(1.0 / q) * eps.powf(df * (1.0 - 1.0 / q));
    Ok(WeightNormCheck {
        eps,
        q,
        d,
        computed: integral.powf(1.0 / q),
        predicted,
    })
}
