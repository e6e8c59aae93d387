//! ε-sweeps, decay-rate fits, and the structural identities that tie the
//! solvers and norms together.
//!
//! The guiding question is how `‖∇u_ε‖_{L^p(Ω_ε)}` behaves as the hole
//! shrinks, with the source held fixed. [`predict_regime`] encodes the
//! expected answer as a function of `(d, p)` alone: uniform bounds for
//! `d′ < p < d` (where `d′ = d/(d−1)` is the conjugate of the dimension),
//! gradient blow-up at the shell rate `(d−p)/p` for `p > d`, blow-up by
//! duality for `1 < p < d′`, and an undecided borderline at `p ∈ {d, d′}`.
//! [`epsilon_sweep`] measures the actual behaviour: it solves the same
//! problem on a family of shrinking holes, fits `log ‖∇u‖` against `log ε`
//! on the smallest holes, and classifies the outcome. [`dual_blowup_sweep`]
//! runs the conjugate-exponent construction that converts gradient growth at
//! `p′ > d` into unit-norm sources with diverging responses at `p < d′`.
//!
//! The remaining operations are one-shot identities rather than sweeps: the
//! change-of-variables check [`rescale_check`] (the `L^p` norm picks up the
//! exact factor `ε^{1−d/p}` under `x ↦ x/ε`), the weighted divergence
//! integral [`counterexample_integral`] and the limit value
//! [`limit_point_value`] it controls, and the library-wide operator-norm
//! probe [`empirical_constant`].
//!
//! Sweep rows are independent and are evaluated in parallel; rows are
//! aggregated by ε index, so results are deterministic regardless of thread
//! count.

use rayon::prelude::*;

use crate::domain::{DomainSpec, Frame, RadialProfile, SourceSpec};
use crate::error::{Error, Result};
use crate::kernel::{sphere_area, KernelConfig};
use crate::mfs::{self, MfsConfig, MfsSolution};
use crate::norms::{
    lp_gradient_norm, lp_source_norm, radial_lp_norm, QuadratureConfig, RadialGradient,
    SolutionField,
};
use crate::quadrature::{default_panel_count, integrate_adaptive, Composite1d};
use crate::shell::{
    solve_constant_source, solve_modal, solve_radial_source, ModalSolution, RadialSolution,
};

/// Slope threshold separating "flat" from "decaying" fits. Calibrated on the
/// exact shell formulas: bounded exponents fit slopes below 1e−2 in magnitude
/// even on coarse grids, while genuine blow-up rates are at least `1/p` for
/// the exponents a desk-scale sweep can resolve.
const SLOPE_THRESHOLD: f64 = 0.05;

/// Minimum fit quality before a negative slope is reported as a rate.
const R_SQUARED_GATE: f64 = 0.98;

/// Number of smallest-ε rows entering a rate fit; larger holes are
/// pre-asymptotic and would contaminate the slope.
const FIT_POINTS: usize = 4;

/// Relative tolerance deciding whether `p` sits on the borderline `{d, d′}`.
const BORDERLINE_TOL: f64 = 1e-9;

/// Observed behaviour of `‖∇u_ε‖_p` along a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// The fitted slope of `log ‖∇u‖` vs `log ε` is flat.
    UniformlyBounded,
    /// Clean negative slope: the norm grows like `ε^{rate}` with `rate < 0`.
    BlowUp { rate: f64 },
    /// Reserved for exponents on `{d, d′}`, where no classification is
    /// claimed; sweeps themselves never produce it.
    Borderline,
    /// The fit is neither flat nor a convincing power law.
    Inconclusive,
}

impl Regime {
    /// Stable machine-readable tag for report files.
    pub fn label(&self) -> &'static str {
        match self {
            Regime::UniformlyBounded => "uniformly_bounded",
            Regime::BlowUp { .. } => "blow_up",
            Regime::Borderline => "borderline",
            Regime::Inconclusive => "inconclusive",
        }
    }
}

/// Expected behaviour as a function of `(d, p)` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictedRegime {
    /// `d′ < p < d`: gradient norms admit an ε-independent bound.
    UniformlyBounded,
    /// `p > d`: the shell solutions concentrate `|∇u|^p ~ r^{(1−d)p}` near
    /// the hole and the norm grows like `ε^{(d−p)/p}`.
    BlowUp { rate: f64 },
    /// `1 < p < d′`: blow-up transported from `p′ > d` through the duality
    /// construction; no rate is claimed because the conjugate construction
    /// only yields a lower bound.
    DualBlowUp,
    /// `p ∈ {d, d′}`: undecided either way.
    Borderline,
}

impl PredictedRegime {
    /// Stable machine-readable tag for report files.
    pub fn label(&self) -> &'static str {
        match self {
            PredictedRegime::UniformlyBounded => "uniformly_bounded",
            PredictedRegime::BlowUp { .. } => "blow_up",
            PredictedRegime::DualBlowUp => "dual_blow_up",
            PredictedRegime::Borderline => "borderline",
        }
    }
}

/// The `(d, p)` dichotomy in one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimePrediction {
    pub d: usize,
    pub p: f64,
    pub predicted: PredictedRegime,
}

/// Which solver a sweep uses per ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    /// Closed-form radial/modal pipeline; requires a concentric hole and a
    /// catalog source it can reduce (constant divergence, radial, or a
    /// single mode in dimension 3).
    Shell,
    /// Method-of-fundamental-solutions pipeline (dimension 3, constant
    /// divergence, any hole shape).
    Mfs,
    /// Shell when the geometry and source allow it, otherwise MFS.
    Auto,
}

/// One `(ε, p)` cell of a sweep. Failed cells keep their place with NaN
/// entries and `converged = false` so a partial sweep still reports every
/// requested combination.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub eps: f64,
    pub p: f64,
    /// `‖∇u_ε‖_{L^p(Ω_ε)}`.
    pub grad_lp: f64,
    /// `‖f‖_{L^p(Ω_ε)}`.
    pub source_lp: f64,
    /// `grad_lp / source_lp`, the per-cell operator-norm sample.
    pub ratio: f64,
    pub converged: bool,
}

impl SweepRow {
    fn failed(eps: f64, p: f64) -> Self {
        SweepRow {
            eps,
            p,
            grad_lp: f64::NAN,
            source_lp: f64::NAN,
            ratio: f64::NAN,
            converged: false,
        }
    }
}

/// Fitted decay of one exponent across the sweep, with the prediction it is
/// compared against.
#[derive(Debug, Clone, Copy)]
pub struct RegimeFit {
    pub p: f64,
    /// Least-squares slope of `log ‖∇u‖` vs `log ε` on the smallest usable
    /// ε points.
    pub slope: f64,
    /// Coefficient of determination of that fit.
    pub r_squared: f64,
    /// Classification of the measured slope.
    pub regime: Regime,
    /// What `(d, p)` alone predicts.
    pub prediction: RegimePrediction,
    /// Whether measurement and prediction agree; `None` on the borderline,
    /// where no claim is made.
    pub agreement: Option<bool>,
}

/// Rows and per-exponent fits of one ε-sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// All `(ε, p)` cells, ordered by the input ε list (decreasing), then by
    /// the input p list.
    pub rows: Vec<SweepRow>,
    /// One fit per requested exponent, in input order.
    pub fits: Vec<RegimeFit>,
}

/// One row of a dual-construction sweep: the unit-norm source built from the
/// conjugate solution, the measured response, and the proved lower bound.
#[derive(Debug, Clone, Copy)]
pub struct DualRow {
    pub eps: f64,
    pub p: f64,
    /// `‖f_ε‖_{L^p}`; equals 1 up to quadrature error by construction.
    pub source_lp: f64,
    /// Measured `‖∇u_ε‖_{L^p}` for the dual source.
    pub grad_lp: f64,
    /// `‖∇v_ε‖_{p′} / ‖F‖_{p′}`: the duality chain guarantees
    /// `grad_lp ≥ lower_bound` row by row.
    pub lower_bound: f64,
    pub converged: bool,
}

impl DualRow {
    fn failed(eps: f64, p: f64) -> Self {
        DualRow {
            eps,
            p,
            source_lp: f64::NAN,
            grad_lp: f64::NAN,
            lower_bound: f64::NAN,
            converged: false,
        }
    }
}

/// Rows and the measured-decay fit of a dual-construction sweep.
#[derive(Debug, Clone)]
pub struct DualSweep {
    pub rows: Vec<DualRow>,
    pub fit: RegimeFit,
}

/// The `(d, p)` dichotomy: uniform bounds strictly between the conjugate
/// exponents `d′ < p < d`, blow-up outside, undecided on the borderline.
///
/// The blow-up rate `(d−p)/p` attached to `p > d` is the exact decay of the
/// concentric-shell solutions; above the dimension every constant-divergence
/// source produces it, so it is the rate a sweep should measure.
///
/// # Errors
/// `BadDimension` for `d < 3`, `BadExponent` unless `p ∈ (1, ∞)`.
pub fn predict_regime(d: usize, p: f64) -> Result<RegimePrediction> {
    if d < 3 {
        return Err(Error::BadDimension { d });
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent { p });
    }
    let df = d as f64;
    let dprime = df / (df - 1.0);
    let predicted = if (p - df).abs() <= BORDERLINE_TOL * df
        || (p - dprime).abs() <= BORDERLINE_TOL * dprime
    {
        PredictedRegime::Borderline
    } else if p > df {
        PredictedRegime::BlowUp {
            rate: (df - p) / p,
        }
    } else if p < dprime {
        PredictedRegime::DualBlowUp
    } else {
        PredictedRegime::UniformlyBounded
    };
    Ok(RegimePrediction { d, p, predicted })
}

/// Geometrically spaced grid from `hi` down to `lo`, inclusive, with `count`
/// points. Successive ratios are constant; the endpoints are exact (not
/// round-tripped through logarithms), so `log_spaced(1/4, 1/256, 49)` is a
/// valid sweep grid whose largest entry is exactly `1/4`.
///
/// # Panics
/// If `count < 2` or the endpoints are not ordered positive values.
pub fn log_spaced(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "a grid needs at least two points");
    assert!(
        hi > lo && lo > 0.0 && hi.is_finite(),
        "grid endpoints must satisfy 0 < lo < hi"
    );
    let (lh, ll) = (hi.ln(), lo.ln());
    let mut grid: Vec<f64> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (lh + t * (ll - lh)).exp()
        })
        .collect();
    grid[0] = hi;
    grid[count - 1] = lo;
    grid
}

fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::BadEpsilonList {
            detail: "the epsilon list is empty",
        });
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e <= 0.25) || !e.is_finite()) {
        return Err(Error::BadEpsilonList {
            detail: "epsilon values must lie in (0, 1/4]",
        });
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadEpsilonList {
            detail: "epsilon values must be strictly decreasing",
        });
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent { p });
    }
    Ok(())
}

/// Ordinary least squares of `ys` on `xs`; returns `(slope, intercept, r²)`.
/// A constant `ys` is a perfect flat fit (`r² = 1`).
fn ls_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        (1.0 - (syy - slope * sxy) / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r_squared)
}

fn classify_slope(slope: f64, r_squared: f64) -> Regime {
    if slope.abs() < SLOPE_THRESHOLD {
        Regime::UniformlyBounded
    } else if slope < -SLOPE_THRESHOLD && r_squared >= R_SQUARED_GATE {
        Regime::BlowUp { rate: slope }
    } else {
        Regime::Inconclusive
    }
}

fn prediction_agreement(predicted: &PredictedRegime, measured: &Regime) -> Option<bool> {
    match predicted {
        PredictedRegime::Borderline => None,
        PredictedRegime::UniformlyBounded => {
            Some(matches!(measured, Regime::UniformlyBounded))
        }
        // A dual prediction is confirmed by the same observable as a direct
        // one: the measured norm decays along the sweep.
        PredictedRegime::BlowUp { .. } | PredictedRegime::DualBlowUp => {
            Some(matches!(measured, Regime::BlowUp { .. }))
        }
    }
}

/// Fit the smallest usable ε points of one exponent and compare against the
/// prediction. `points` are `(ε, ‖∇u‖)` pairs ordered by decreasing ε; rows
/// that failed or have non-positive norms (no log) must already be dropped.
fn fit_tail(d: usize, p: f64, points: &[(f64, f64)]) -> Result<RegimeFit> {
    if points.len() < FIT_POINTS {
        return Err(Error::SweepTooShort {
            usable: points.len(),
        });
    }
    let tail = &points[points.len() - FIT_POINTS..];
    let xs: Vec<f64> = tail.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, g)| g.ln()).collect();
    let (slope, _, r_squared) = ls_fit(&xs, &ys);
    let regime = classify_slope(slope, r_squared);
    let prediction = predict_regime(d, p)?;
    let agreement = prediction_agreement(&prediction.predicted, &regime);
    Ok(RegimeFit {
        p,
        slope,
        r_squared,
        regime,
        prediction,
        agreement,
    })
}

/// A solved problem from any pipeline, behind one dispatch point.
pub enum SolvedProblem {
    Radial(RadialSolution),
    Modal(ModalSolution),
    Mfs(MfsSolution),
}

impl SolvedProblem {
    /// The solution as an abstract field, for norm evaluation.
    pub fn field(&self) -> &dyn SolutionField {
        match self {
            SolvedProblem::Radial(s) => s,
            SolvedProblem::Modal(s) => s,
            SolvedProblem::Mfs(s) => s,
        }
    }
}

fn shell_solvable(dom: &DomainSpec, f: &SourceSpec) -> bool {
    dom.hole.is_concentric()
        && match f {
            SourceSpec::LinearX1
            | SourceSpec::ConstantVector { .. }
            | SourceSpec::RadialVector { .. } => true,
            SourceSpec::Modal { .. } => dom.d == 3,
        }
}

fn solve_shell(dom: &DomainSpec, f: &SourceSpec) -> Result<SolvedProblem> {
    if !dom.hole.is_concentric() {
        return Err(Error::BadGeometry {
            detail: "the shell pipeline needs a concentric spherical hole".into(),
        });
    }
    let eps = dom.inner_radius();
    let d = dom.d;
    if let Some(c) = f.constant_divergence(d) {
        return solve_constant_source(c, eps, d).map(SolvedProblem::Radial);
    }
    match f {
        SourceSpec::RadialVector { g } => {
            solve_radial_source(g, eps, d).map(SolvedProblem::Radial)
        }
        SourceSpec::Modal { l, m, h } => {
            if d != 3 {
                return Err(Error::BadDimension { d });
            }
            // The scalar equation for the mode amplitude has right-hand side
            // equal to the harmonic coefficient of div f, which for the
            // ansatz f = h(r) Y ê_r is h′ + 2h/r.
            let hh = h.clone();
            let rhs = RadialProfile::custom(move |r| {
                let value = hh.eval(r).unwrap_or(f64::NAN);
                let deriv = hh.deriv(r).unwrap_or(f64::NAN);
                deriv + 2.0 * value / r
            });
            solve_modal(*l, *m, &rhs, eps).map(SolvedProblem::Modal)
        }
        _ => unreachable!("sources with constant divergence are handled above"),
    }
}

/// Solve one problem with the requested pipeline.
///
/// `Auto` picks the closed-form shell solver whenever the hole is concentric
/// and the source is in its catalog, and falls back to the collocation solver
/// otherwise. `mfs_cfg` only matters on the collocation path.
///
/// # Errors
/// Whatever the chosen pipeline reports: geometry and catalog mismatches for
/// the shell path, conditioning and residual failures for collocation.
pub fn solve_problem(
    dom: &DomainSpec,
    f: &SourceSpec,
    solver: SolverChoice,
    mfs_cfg: &MfsConfig,
) -> Result<SolvedProblem> {
    let use_shell = match solver {
        SolverChoice::Shell => true,
        SolverChoice::Mfs => false,
        SolverChoice::Auto => shell_solvable(dom, f),
    };
    if use_shell {
        solve_shell(dom, f)
    } else {
        mfs::solve_divergence_source(dom, f, mfs_cfg).map(SolvedProblem::Mfs)
    }
}

fn sweep_row(
    field: &dyn SolutionField,
    dom: &DomainSpec,
    f: &SourceSpec,
    p: f64,
    cfg: &QuadratureConfig,
) -> SweepRow {
    let grad = lp_gradient_norm(field, dom, p, cfg);
    let src = lp_source_norm(f, dom, p, cfg);
    match (grad, src) {
        (Ok(g), Ok(s)) => SweepRow {
            eps: dom.eps,
            p,
            grad_lp: g.value,
            source_lp: s.value,
            ratio: g.value / s.value,
            converged: g.converged && s.converged,
        },
        _ => SweepRow::failed(dom.eps, p),
    }
}

/// Solve the same problem on a family of shrinking holes and fit the decay
/// of `‖∇u_ε‖_p` per exponent.
///
/// `base` fixes the dimension and hole geometry; its ε is replaced by each
/// entry of `epsilons` in turn (strictly decreasing, within `(0, 1/4]`). The
/// source is held fixed across the family — the regime question is only
/// meaningful for ε-independent data. Solver and quadrature failures mark
/// the affected cells (`converged = false`, NaN values) and the sweep
/// continues; the fit then uses the smallest four usable ε points of each
/// exponent.
///
/// # Errors
/// `BadEpsilonList` for malformed grids, `BadExponent` for `p ≤ 1`,
/// `SweepTooShort` when fewer than four rows are usable for some exponent,
/// and validation errors for an inadmissible base domain.
pub fn epsilon_sweep(
    base: &DomainSpec,
    epsilons: &[f64],
    f: &SourceSpec,
    ps: &[f64],
    solver: SolverChoice,
    cfg: &QuadratureConfig,
) -> Result<SweepResult> {
    check_epsilons(epsilons)?;
    if epsilons.len() < FIT_POINTS {
        return Err(Error::SweepTooShort {
            usable: epsilons.len(),
        });
    }
    for &p in ps {
        check_exponent(p)?;
    }
    cfg.validate()?;
    if base.frame != Frame::Original {
        return Err(Error::BadGeometry {
            detail: "sweeps run in the original (unit outer ball) frame".into(),
        });
    }
    let domains: Vec<DomainSpec> = epsilons
        .iter()
        .map(|&eps| DomainSpec { eps, ..base.clone() }.validated())
        .collect::<Result<_>>()?;
    // Rows are independent; solve in parallel, aggregate by index.
    let mfs_cfg = MfsConfig::default();
    let solved: Vec<Result<SolvedProblem>> = domains
        .par_iter()
        .map(|dom| solve_problem(dom, f, solver, &mfs_cfg))
        .collect();
    let mut rows = Vec::with_capacity(domains.len() * ps.len());
    for (dom, sol) in domains.iter().zip(&solved) {
        for &p in ps {
            rows.push(match sol {
                Ok(s) => sweep_row(s.field(), dom, f, p, cfg),
                Err(_) => SweepRow::failed(dom.eps, p),
            });
        }
    }
    let fits = ps
        .iter()
        .enumerate()
        .map(|(ip, &p)| {
            let usable: Vec<(f64, f64)> = rows
                .iter()
                .skip(ip)
                .step_by(ps.len())
                .filter(|r| r.converged && r.grad_lp > 0.0 && r.grad_lp.is_finite())
                .map(|r| (r.eps, r.grad_lp))
                .collect();
            fit_tail(base.d, p, &usable)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows, fits })
}

/// Exact factor relating the gradient norms of `u` on `Ω_ε` and of its
/// blow-up `ũ(x) = u(εx)` on the rescaled domain:
/// `‖∇ũ‖_{L^p} = ε^{1−d/p} ‖∇u‖_{L^p}`. At `p = d` the norm is scale
/// invariant and the factor is exactly 1.
pub fn rescale_factor(eps: f64, d: usize, p: f64) -> f64 {
    let exponent = 1.0 - d as f64 / p;
    if exponent == 0.0 {
        1.0
    } else {
        eps.powf(exponent)
    }
}

/// View of a solution through the substitution `x ↦ εx`: the field lives on
/// the rescaled domain and its gradient picks up one factor of ε.
struct ScaledField<'a> {
    inner: &'a dyn SolutionField,
    eps: f64,
}

impl SolutionField for ScaledField<'_> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let y: Vec<f64> = x.iter().map(|xi| self.eps * xi).collect();
        let (v, grad) = self.inner.value_grad(&y)?;
        Ok((v, grad.iter().map(|gi| self.eps * gi).collect()))
    }

    fn radial_gradient(&self) -> Option<RadialGradient<'_>> {
        let rg = self.inner.radial_gradient()?;
        let eps = self.eps;
        Some(RadialGradient {
            inner: rg.inner / eps,
            outer: rg.outer / eps,
            d: rg.d,
            zeros: rg.zeros.iter().map(|z| z / eps).collect(),
            dvalue: Box::new(move |r| eps * (rg.dvalue)(eps * r)),
        })
    }
}

/// Verify the change-of-variables identity on a concrete solution: compute
/// `‖∇ũ‖_{L^p}` on the rescaled domain by substitution quadrature and return
/// the relative deviation from `ε^{1−d/p} ‖∇u‖_{L^p}`.
///
/// For closed-form solutions the deviation is pure quadrature noise (both
/// sides integrate the same function through exactly mapped panels); for
/// fitted solutions it is bounded by the fit accuracy.
///
/// # Errors
/// Validation errors for an inadmissible domain, `ZeroGradient` when the
/// norm vanishes (no relative scale), and quadrature errors — the check is
/// only meaningful for converged values, so non-convergence is escalated via
/// [`LpReport::require_converged`](crate::norms::LpReport::require_converged).
pub fn rescale_check(
    field: &dyn SolutionField,
    dom: &DomainSpec,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let dom = dom.clone().validated()?;
    if dom.frame != Frame::Original {
        return Err(Error::BadGeometry {
            detail: "the rescale check starts from the original frame".into(),
        });
    }
    let original = lp_gradient_norm(field, &dom, p, cfg)?.require_converged()?;
    let target = rescale_factor(dom.eps, dom.d, p) * original;
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::ZeroGradient);
    }
    let rescaled_dom = DomainSpec {
        frame: Frame::Rescaled,
        ..dom.clone()
    };
    let scaled = ScaledField {
        inner: field,
        eps: dom.eps,
    };
    let rescaled = lp_gradient_norm(&scaled, &rescaled_dom, p, cfg)?.require_converged()?;
    Ok((rescaled - target).abs() / target)
}

/// Adaptive integral of `σ_{d−1} ∫₀¹ f(r) dr` on panels graded toward the
/// origin, escalating non-convergence to an error.
fn weighted_radial_integral(
    d: usize,
    cfg: &QuadratureConfig,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let panels = cfg
        .radial_panels
        .unwrap_or_else(|| default_panel_count(0.0, 1.0));
    let base = Composite1d::graded(0.0, 1.0, panels, cfg.grading_ratio, cfg.gauss_nodes, &[])?;
    let result = integrate_adaptive(&base, cfg.tolerance, cfg.max_refinements, &f);
    if !result.converged {
        return Err(Error::QuadratureNotConverged {
            delta: result.delta,
            tol: cfg.tolerance,
        });
    }
    Ok(sphere_area(d) * result.value)
}

/// The weighted divergence integral `∫_{B(0,1)} (|y|^{2−d} − 1) div f(y) dy`
/// over the full unit ball (no hole).
///
/// The weight is the fundamental solution minus its boundary value, up to
/// normalization, so `α_d` times this integral is the value at the origin of
/// the no-hole limit problem (see [`limit_point_value`]). A source with a
/// nonzero value therefore forces the limit solution to be nonzero at the
/// very point where the shrinking-hole solutions are pinned to zero — the
/// mismatch behind gradient blow-up above the dimension. This is the
/// quantity to check when hunting for counterexample sources.
///
/// The integrable singularity of the weight is handled by writing the
/// integrand in polar form: for constant divergence `c` it reduces to
/// `c σ_{d−1} ∫₀¹ (r − r^{d−1}) dr`, for radial fields to
/// `σ ∫ g′(r)(r − r^{d−1}) + (d−1) g(r)(1 − r^{d−2}) dr`, both smooth at the
/// origin. Modes with `l ≥ 1` integrate to zero against any radial weight
/// (the harmonic factor has zero mean) and short-circuit.
///
/// # Errors
/// `BadDimension` for `d < 3` (or a modal source outside dimension 3),
/// `QuadratureNotConverged`, and profile evaluation errors.
pub fn counterexample_integral(f: &SourceSpec, d: usize, cfg: &QuadratureConfig) -> Result<f64> {
    if d < 3 {
        return Err(Error::BadDimension { d });
    }
    cfg.validate()?;
    if let SourceSpec::Modal { l, h, .. } = f {
        if d != 3 {
            return Err(Error::BadDimension { d });
        }
        if *l > 0 {
            return Ok(0.0);
        }
        // The l = 0 mode is the radial field h(r)/√(4π) ê_r.
        let scale = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        return weighted_divergence_radial(h, scale, d, cfg);
    }
    if let Some(c) = f.constant_divergence(d) {
        return weighted_radial_integral(d, cfg, |r| c * (r - r.powi(d as i32 - 1)));
    }
    match f {
        SourceSpec::RadialVector { g } => weighted_divergence_radial(g, 1.0, d, cfg),
        _ => unreachable!("all other catalog sources have constant divergence"),
    }
}

fn weighted_divergence_radial(
    g: &RadialProfile,
    scale: f64,
    d: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    // Probe once so a broken profile surfaces its own error instead of a
    // silent non-convergence.
    g.eval(0.5)?;
    g.deriv(0.5)?;
    let dm1 = d as i32 - 1;
    let dm2 = d as i32 - 2;
    weighted_radial_integral(d, cfg, |r| {
        let gv = g.eval(r).unwrap_or(f64::NAN);
        let gd = g.deriv(r).unwrap_or(f64::NAN);
        scale * (gd * (r - r.powi(dm1)) + (d as f64 - 1.0) * gv * (1.0 - r.powi(dm2)))
    })
}

/// Value at the origin of the no-hole limit problem, `α_d` times the
/// weighted divergence integral. For constant divergence `c` this equals
/// `c/(2d)`, the center value of the exact ball solution — the two are
/// cross-checked in the tests.
///
/// # Errors
/// `UnsupportedSource` unless the source has constant divergence (the only
/// catalog case with a classical limit solution), plus quadrature errors.
pub fn limit_point_value(f: &SourceSpec, d: usize, cfg: &QuadratureConfig) -> Result<f64> {
    if f.constant_divergence(d).is_none() {
        return Err(Error::UnsupportedSource {
            detail: "the limit value needs a catalog source with constant divergence",
        });
    }
    let kernel = KernelConfig::new(d)?;
    Ok(kernel.alpha * counterexample_integral(f, d, cfg)?)
}

/// The conjugate-exponent source built from a radial solution `v`:
///
/// ```text
/// f = |v′|^{p′−2} v′ / ‖∇v‖_{p′}^{p′/p} · ê_r,
/// ```
///
/// normalized so `‖f‖_{L^p(Ω_ε)} = 1` exactly (because `(p′−1)p = p′`).
/// Solving with this source transports gradient growth at the conjugate
/// exponent down to `p`: pairing the two weak formulations gives
/// `‖∇u‖_p ≥ ‖∇v‖_{p′} / ‖F‖_{p′}` for the fixed source `F` that produced
/// `v`, which diverges when `p′ > d`.
///
/// # Errors
/// `BadExponent` for `p ≤ 1`, `ZeroGradient` when `v` has vanishing gradient
/// norm, quadrature errors from the normalization integral.
pub fn dual_source(v: &RadialSolution, p: f64, cfg: &QuadratureConfig) -> Result<SourceSpec> {
    check_exponent(p)?;
    cfg.validate()?;
    let pprime = p / (p - 1.0);
    let rg = v.radial_gradient().expect("radial solutions always reduce");
    let n = radial_lp_norm(&rg, pprime, cfg)?.require_converged()?;
    if !(n > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let scale = n.powf(pprime / p);
    let vv = v.clone();
    let g = RadialProfile::custom(move |r| {
        let s = vv.dvalue(r).unwrap_or(f64::NAN);
        // |s|^{p′−2} s written as sign(s) |s|^{p′−1}, finite at s = 0 for
        // every p > 1.
        s.signum() * s.abs().powf(pprime - 1.0) / scale
    });
    Ok(SourceSpec::radial(g))
}

fn dual_row(
    eps: f64,
    d: usize,
    p: f64,
    pprime: f64,
    fixed: &SourceSpec,
    cfg: &QuadratureConfig,
) -> Result<DualRow> {
    let dom = DomainSpec::concentric(d, eps).validated()?;
    let v = solve_constant_source(1.0, eps, d)?;
    let grad_v = lp_gradient_norm(&v, &dom, pprime, cfg)?.require_converged()?;
    let fixed_norm = lp_source_norm(fixed, &dom, pprime, cfg)?.require_converged()?;
    let f_eps = dual_source(&v, p, cfg)?;
    let g = match &f_eps {
        SourceSpec::RadialVector { g } => g.clone(),
        _ => unreachable!("dual sources are radial by construction"),
    };
    let u = solve_radial_source(&g, eps, d)?;
    let grad_u = lp_gradient_norm(&u, &dom, p, cfg)?;
    let src = lp_source_norm(&f_eps, &dom, p, cfg)?;
    Ok(DualRow {
        eps,
        p,
        source_lp: src.value,
        grad_lp: grad_u.value,
        lower_bound: grad_v / fixed_norm,
        converged: grad_u.converged && src.converged,
    })
}

/// Run the duality construction along a shrinking-hole family for an
/// exponent below the dual threshold, `1 < p < d′`.
///
/// Per ε: solve the auxiliary problem `−Δv = 1` (the divergence of the fixed
/// radial source `F = (r/d) ê_r`), build the unit-norm dual source from `v`
/// at exponent `p`, solve with it, and record the measured norm next to the
/// proved lower bound `‖∇v‖_{p′}/‖F‖_{p′}`. The lower-bound column diverges
/// because `p′ > d`; the fit classifies the measured decay.
///
/// # Errors
/// As [`epsilon_sweep`], plus `BadExponent` when `p` is not strictly inside
/// `(1, d′)` and `BadDimension` for `d < 3`.
pub fn dual_blowup_sweep(
    epsilons: &[f64],
    d: usize,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<DualSweep> {
    check_epsilons(epsilons)?;
    if epsilons.len() < FIT_POINTS {
        return Err(Error::SweepTooShort {
            usable: epsilons.len(),
        });
    }
    if d < 3 {
        return Err(Error::BadDimension { d });
    }
    let dprime = d as f64 / (d as f64 - 1.0);
    if !(p > 1.0 && p < dprime) || !p.is_finite() {
        return Err(Error::BadExponent { p });
    }
    cfg.validate()?;
    let pprime = p / (p - 1.0);
    let fixed = SourceSpec::radial(RadialProfile::linear(1.0 / d as f64));
    let rows: Vec<DualRow> = epsilons
        .par_iter()
        .map(|&eps| dual_row(eps, d, p, pprime, &fixed, cfg).unwrap_or_else(|_| DualRow::failed(eps, p)))
        .collect();
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.converged && r.grad_lp > 0.0 && r.grad_lp.is_finite())
        .map(|r| (r.eps, r.grad_lp))
        .collect();
    let fit = fit_tail(d, p, &usable)?;
    Ok(DualSweep { rows, fit })
}

/// Largest measured ratio `‖∇u‖_p / ‖f‖_p` over a library of sources on one
/// domain — a lower estimate of the operator norm of `f ↦ ∇u`. For `p = 2`
/// the energy identity caps it at 1; strictly between the conjugate
/// exponents it stays stable as ε shrinks, which is the desk-scale shadow of
/// an ε-uniform bound.
///
/// Sources with zero norm (nothing to divide by) are skipped; a library of
/// only such sources yields 0.
///
/// # Errors
/// `UnsupportedSource` for an empty library; solver and quadrature errors
/// propagate (this probe is only meaningful when every member is solved
/// accurately).
pub fn empirical_constant(
    d: usize,
    p: f64,
    eps: f64,
    library: &[SourceSpec],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if library.is_empty() {
        return Err(Error::UnsupportedSource {
            detail: "the empirical constant needs at least one source",
        });
    }
    check_exponent(p)?;
    cfg.validate()?;
    let dom = DomainSpec::concentric(d, eps).validated()?;
    let mut best = 0.0f64;
    for f in library {
        let sol = solve_problem(&dom, f, SolverChoice::Auto, &MfsConfig::default())?;
        let grad = lp_gradient_norm(sol.field(), &dom, p, cfg)?.require_converged()?;
        let src = lp_source_norm(f, &dom, p, cfg)?.require_converged()?;
        if src > 0.0 {
            best = best.max(grad / src);
        }
    }
    Ok(best)
}

/// The default library for [`empirical_constant`]: the linear-coordinate
/// field, a constant field (zero divergence, zero response), and the linear
/// radial field with unit divergence.
pub fn standard_source_library(d: usize) -> Vec<SourceSpec> {
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    vec![
        SourceSpec::linear_x1(),
        SourceSpec::constant(e1),
        SourceSpec::radial(RadialProfile::linear(1.0 / d as f64)),
    ]
}
