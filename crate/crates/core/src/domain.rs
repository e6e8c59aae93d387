//! Domain descriptions for the perforated ball and the catalog of source fields.
//!
//! A domain is the unit ball with a scaled hole removed, `Ω_ε = B(0,1) \ εT`,
//! or equivalently (after zooming by `1/ε`) the large ball with a unit-size
//! hole, `B(0,1/ε) \ T`. Both views are represented by [`DomainSpec`] via its
//! [`Frame`] field; all derived geometry (outer radius, hole reach) is exposed
//! through accessor methods so that a validated spec never needs mutation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sphharm;

/// Shape of the hole `T` before scaling by the hole scale.
#[derive(Debug, Clone, PartialEq)]
pub enum HoleShape {
    /// Ball of the given radius centered at the origin.
    ConcentricBall { radius: f64 },
    /// Ball of the given radius centered at `center`.
    OffCenterBall { center: Vec<f64>, radius: f64 },
    /// Axis-aligned ellipsoid.
    Ellipsoid {
        center: Vec<f64>,
        semi_axes: Vec<f64>,
    },
}

impl HoleShape {
    /// Distance from the origin to the farthest point of the (unscaled) hole.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            HoleShape::ConcentricBall { radius } => *radius,
            HoleShape::OffCenterBall { center, radius } => norm(center) + radius,
            HoleShape::Ellipsoid { center, semi_axes } => {
                norm(center) + semi_axes.iter().cloned().fold(0.0, f64::max)
            }
        }
    }

    /// Center of the hole (origin for the concentric case).
    pub fn center(&self, d: usize) -> Vec<f64> {
        match self {
            HoleShape::ConcentricBall { .. } => vec![0.0; d],
            HoleShape::OffCenterBall { center, .. } | HoleShape::Ellipsoid { center, .. } => {
                center.clone()
            }
        }
    }

    /// Distance from the hole center to the hole surface in direction `w`
    /// (`w` a unit vector).
    pub fn surface_radius(&self, w: &[f64]) -> f64 {
        match self {
            HoleShape::ConcentricBall { radius } | HoleShape::OffCenterBall { radius, .. } => {
                *radius
            }
            HoleShape::Ellipsoid { semi_axes, .. } => {
                let s: f64 = w
                    .iter()
                    .zip(semi_axes)
                    .map(|(wi, ai)| (wi / ai) * (wi / ai))
                    .sum();
                1.0 / s.sqrt()
            }
        }
    }

    /// True if the hole is a ball centered at the origin.
    pub fn is_concentric(&self) -> bool {
        matches!(self, HoleShape::ConcentricBall { .. })
    }
}

/// Which scaling of the perforated domain a spec describes.
///
/// The two frames are related by the change of variables `x ↦ x/ε`; solutions
/// transported between them satisfy the scaling identity checked by
/// `analysis::rescale_check`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Unit outer ball, hole scaled by ε.
    Original,
    /// Outer ball of radius 1/ε, hole at unit scale.
    Rescaled,
}

/// A validated description of the perforated ball `B \ (scaled hole)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    /// Ambient dimension, at least 3.
    pub d: usize,
    /// Hole scale in `(0, 1/4]`.
    pub eps: f64,
    /// Hole geometry before scaling.
    pub hole: HoleShape,
    /// Scaling frame.
    pub frame: Frame,
}

impl DomainSpec {
    /// Convenience constructor: concentric unit-radius hole in the original
    /// frame, i.e. the spherical shell `ε ≤ |x| ≤ 1`.
    pub fn concentric(d: usize, eps: f64) -> Self {
        DomainSpec {
            d,
            eps,
            hole: HoleShape::ConcentricBall { radius: 1.0 },
            frame: Frame::Original,
        }
    }

    /// The full unit ball, i.e. the `ε → 0` limit domain. Not accepted by
    /// [`validate_domain`] (there is no hole); used where limit objects are
    /// integrated or compared against.
    pub fn ball(d: usize) -> Self {
        DomainSpec {
            d,
            eps: 0.0,
            hole: HoleShape::ConcentricBall { radius: 1.0 },
            frame: Frame::Original,
        }
    }

    /// Validating constructor; see [`validate_domain`].
    pub fn validated(self) -> Result<Self> {
        validate_domain(self)
    }

    /// Radius of the outer ball in this frame.
    pub fn outer_radius(&self) -> f64 {
        match self.frame {
            Frame::Original => 1.0,
            Frame::Rescaled => 1.0 / self.eps,
        }
    }

    /// Factor by which the hole geometry is scaled in this frame.
    pub fn hole_scale(&self) -> f64 {
        match self.frame {
            Frame::Original => self.eps,
            Frame::Rescaled => 1.0,
        }
    }

    /// Center of the scaled hole.
    pub fn hole_center(&self) -> Vec<f64> {
        let s = self.hole_scale();
        self.hole.center(self.d).iter().map(|c| c * s).collect()
    }

    /// Distance from the origin to the farthest point of the scaled hole.
    pub fn hole_reach(&self) -> f64 {
        self.hole_scale() * self.hole.bounding_radius()
    }

    /// Inner radius for concentric domains (the scaled hole radius).
    pub fn inner_radius(&self) -> f64 {
        match &self.hole {
            HoleShape::ConcentricBall { radius } => self.hole_scale() * radius,
            _ => self.hole_reach(),
        }
    }

    /// True if `x` lies in the closure of the domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12 * self.outer_radius();
        if norm(x) > self.outer_radius() + tol {
            return false;
        }
        let c = self.hole_center();
        let rel: Vec<f64> = x.iter().zip(&c).map(|(xi, ci)| xi - ci).collect();
        let r = norm(&rel);
        if r < tol {
            return false;
        }
        let w: Vec<f64> = rel.iter().map(|v| v / r).collect();
        r + tol >= self.hole_scale() * self.hole.surface_radius(&w)
    }
}

/// Checks a domain spec and returns it unchanged if admissible.
///
/// Requirements:
/// * `d ≥ 3`;
/// * `eps ∈ (0, 1/4]` — larger holes are rejected rather than treated as a
///   classical fixed-domain problem, keeping every downstream asymptotic
///   statement honest;
/// * the scaled hole stays inside the ball of *half* the outer radius, so
///   that graded quadrature panels around the hole never touch the outer
///   boundary;
/// * centers and semi-axes have length `d`, radii and semi-axes are positive.
///
/// The function is idempotent: validating a validated spec returns it
/// unchanged (all derived geometry lives in accessor methods).
pub fn validate_domain(spec: DomainSpec) -> Result<DomainSpec> {
    if spec.d < 3 {
        return Err(Error::BadDimension { d: spec.d });
    }
    if !(spec.eps > 0.0 && spec.eps <= 0.25) || !spec.eps.is_finite() {
        return Err(Error::EpsOutOfRange { eps: spec.eps });
    }
    match &spec.hole {
        HoleShape::ConcentricBall { radius } => {
            if !(*radius > 0.0) {
                return Err(Error::BadGeometry {
                    detail: format!("hole radius {radius} must be positive"),
                });
            }
        }
        HoleShape::OffCenterBall { center, radius } => {
            if center.len() != spec.d {
                return Err(Error::BadGeometry {
                    detail: format!("hole center has {} entries, expected {}", center.len(), spec.d),
                });
            }
            if !(*radius > 0.0) {
                return Err(Error::BadGeometry {
                    detail: format!("hole radius {radius} must be positive"),
                });
            }
        }
        HoleShape::Ellipsoid { center, semi_axes } => {
            if center.len() != spec.d || semi_axes.len() != spec.d {
                return Err(Error::BadGeometry {
                    detail: format!(
                        "ellipsoid center/semi-axes have {}/{} entries, expected {}",
                        center.len(),
                        semi_axes.len(),
                        spec.d
                    ),
                });
            }
            if semi_axes.iter().any(|a| !(*a > 0.0)) {
                return Err(Error::BadGeometry {
                    detail: "ellipsoid semi-axes must all be positive".to_string(),
                });
            }
        }
    }
    let reach = spec.hole_reach();
    let limit = 0.5 * spec.outer_radius();
    if reach > limit {
        return Err(Error::HoleNotContained { reach, limit });
    }
    Ok(spec)
}

/// A scalar radial profile `g(r)`, closed-form or supplied as a closure.
#[derive(Clone)]
pub enum RadialProfile {
    /// `g(r) = slope · r`.
    Linear { slope: f64 },
    /// Arbitrary profile with an optional analytic derivative. When the
    /// derivative is absent it is approximated by central differences with
    /// fixed step `1e−6`.
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        df: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    },
}

impl RadialProfile {
    pub fn linear(slope: f64) -> Self {
        RadialProfile::Linear { slope }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialProfile::Custom {
            f: Arc::new(f),
            df: None,
        }
    }

    pub fn custom_with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RadialProfile::Custom {
            f: Arc::new(f),
            df: Some(Arc::new(df)),
        }
    }

    /// Profile value `g(r)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let v = match self {
            RadialProfile::Linear { slope } => slope * r,
            RadialProfile::Custom { f, .. } => f(r),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteProfile { r })
        }
    }

    /// Derivative `g′(r)`, analytic when available, otherwise second-order
    /// central differences.
    pub fn deriv(&self, r: f64) -> Result<f64> {
        let v = match self {
            RadialProfile::Linear { slope } => *slope,
            RadialProfile::Custom { f, df } => match df {
                Some(df) => df(r),
                None => {
                    let h = 1e-6;
                    (f(r + h) - f(r - h)) / (2.0 * h)
                }
            },
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteProfile { r })
        }
    }
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Linear { slope } => write!(f, "RadialProfile::Linear {{ slope: {slope} }}"),
            RadialProfile::Custom { df, .. } => write!(
                f,
                "RadialProfile::Custom {{ analytic derivative: {} }}",
                df.is_some()
            ),
        }
    }
}

/// Catalog of source fields `f` appearing on the right-hand side `div f`.
#[derive(Debug, Clone)]
pub enum SourceSpec {
    /// `f(x) = (x₁, 0, …, 0)`, the canonical field with `div f ≡ 1`.
    LinearX1,
    /// Constant vector field, `div f ≡ 0`.
    ConstantVector { v: Vec<f64> },
    /// Radial field `f(x) = g(|x|) x/|x|`.
    RadialVector { g: RadialProfile },
    /// Single-mode field `f(x) = h(|x|) Y_{lm}(x/|x|) x/|x|` (dimension 3 only).
    Modal { l: u32, m: i32, h: RadialProfile },
}

impl SourceSpec {
    pub fn linear_x1() -> Self {
        SourceSpec::LinearX1
    }

    pub fn constant(v: Vec<f64>) -> Self {
        SourceSpec::ConstantVector { v }
    }

    pub fn radial(g: RadialProfile) -> Self {
        SourceSpec::RadialVector { g }
    }

    pub fn modal(l: u32, m: i32, h: RadialProfile) -> Self {
        SourceSpec::Modal { l, m, h }
    }

    /// The field value `f(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            SourceSpec::LinearX1 => {
                let mut v = vec![0.0; x.len()];
                v[0] = x[0];
                Ok(v)
            }
            SourceSpec::ConstantVector { v } => {
                if v.len() != x.len() {
                    return Err(Error::BadGeometry {
                        detail: format!(
                            "constant vector has {} entries, point has {}",
                            v.len(),
                            x.len()
                        ),
                    });
                }
                Ok(v.clone())
            }
            SourceSpec::RadialVector { g } => {
                let r = norm(x);
                if r == 0.0 {
                    return Err(Error::EvaluationOutsideDomain {
                        r: 0.0,
                        lo: f64::MIN_POSITIVE,
                        hi: f64::INFINITY,
                    });
                }
                let gr = g.eval(r)?;
                Ok(x.iter().map(|xi| gr * xi / r).collect())
            }
            SourceSpec::Modal { l, m, h } => {
                if x.len() != 3 {
                    return Err(Error::BadDimension { d: x.len() });
                }
                let r = norm(x);
                if r == 0.0 {
                    return Err(Error::EvaluationOutsideDomain {
                        r: 0.0,
                        lo: f64::MIN_POSITIVE,
                        hi: f64::INFINITY,
                    });
                }
                let hr = h.eval(r)?;
                let y = sphharm::real_sph_harm_dir(*l, *m, &[x[0] / r, x[1] / r, x[2] / r]);
                Ok(x.iter().map(|xi| hr * y * xi / r).collect())
            }
        }
    }

    /// The divergence when it is a position-independent constant:
    /// 1 for the linear-coordinate field, 0 for constant fields, `slope · d`
    /// for a linear radial profile. `None` otherwise.
    pub fn constant_divergence(&self, d: usize) -> Option<f64> {
        match self {
            SourceSpec::LinearX1 => Some(1.0),
            SourceSpec::ConstantVector { .. } => Some(0.0),
            SourceSpec::RadialVector { g } => match g {
                RadialProfile::Linear { slope } => Some(slope * d as f64),
                RadialProfile::Custom { .. } => None,
            },
            SourceSpec::Modal { .. } => None,
        }
    }

    /// The field magnitude `|f(x)|`.
    pub fn magnitude(&self, x: &[f64]) -> Result<f64> {
        Ok(norm(&self.eval(x)?))
    }
}

/// Analytic divergence `div f` at `x`; the ambient dimension is taken from
/// the length of `x`.
///
/// For radial fields `div f = g′(r) + (d−1) g(r)/r`, which requires `r > 0`.
/// For modal fields (`d = 3`) the ansatz `f = h(r) Y_{lm} x̂` gives
/// `div f = (h′(r) + 2h(r)/r) Y_{lm}(x̂)`.
pub fn divergence(f: &SourceSpec, x: &[f64]) -> Result<f64> {
    let d = x.len();
    match f {
        SourceSpec::LinearX1 => Ok(1.0),
        SourceSpec::ConstantVector { v } => {
            if v.len() != d {
                return Err(Error::BadGeometry {
                    detail: format!("constant vector has {} entries, point has {}", v.len(), d),
                });
            }
            Ok(0.0)
        }
        SourceSpec::RadialVector { g } => {
            let r = norm(x);
            if r == 0.0 {
                return Err(Error::EvaluationOutsideDomain {
                    r: 0.0,
                    lo: f64::MIN_POSITIVE,
                    hi: f64::INFINITY,
                });
            }
            Ok(g.deriv(r)? + (d as f64 - 1.0) * g.eval(r)? / r)
        }
        SourceSpec::Modal { l, m, h } => {
            if d != 3 {
                return Err(Error::BadDimension { d });
            }
            let r = norm(x);
            if r == 0.0 {
                return Err(Error::EvaluationOutsideDomain {
                    r: 0.0,
                    lo: f64::MIN_POSITIVE,
                    hi: f64::INFINITY,
                });
            }
            let y = sphharm::real_sph_harm_dir(*l, *m, &[x[0] / r, x[1] / r, x[2] / r]);
            Ok((h.deriv(r)? + 2.0 * h.eval(r)? / r) * y)
        }
    }
}

/// Euclidean norm of a slice.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product of two slices.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn accepts_boundary_of_allowed_range() {
        let spec = DomainSpec::concentric(3, 0.25).validated().unwrap();
        assert_eq!(spec.d, 3);
        assert_relative_eq!(spec.inner_radius(), 0.25);
    }

    #[test]
    fn rejects_eps_outside_working_range() {
        let err = DomainSpec::concentric(3, 0.3).validated().unwrap_err();
        assert_eq!(err, Error::EpsOutOfRange { eps: 0.3 });
        assert!(DomainSpec::concentric(3, 0.0).validated().is_err());
        assert!(DomainSpec::concentric(3, -0.1).validated().is_err());
        assert!(DomainSpec::concentric(3, f64::NAN).validated().is_err());
    }

    #[test]
    fn rejects_hole_escaping_half_ball() {
        // 0.25 · (1.5 + 1.0) = 0.625 > 0.5.
        let spec = DomainSpec {
            d: 3,
            eps: 0.25,
            hole: HoleShape::OffCenterBall {
                center: vec![1.5, 0.0, 0.0],
                radius: 1.0,
            },
            frame: Frame::Original,
        };
        match spec.validated().unwrap_err() {
            Error::HoleNotContained { reach, limit } => {
                assert_relative_eq!(reach, 0.625);
                assert_relative_eq!(limit, 0.5);
            }
            other => panic!("expected HoleNotContained, got {other:?}"),
        }
    }

    #[test]
    fn rejects_low_dimension_and_bad_geometry() {
        assert_eq!(
            DomainSpec::concentric(2, 0.1).validated().unwrap_err(),
            Error::BadDimension { d: 2 }
        );
        let spec = DomainSpec {
            d: 3,
            eps: 0.1,
            hole: HoleShape::Ellipsoid {
                center: vec![0.0, 0.0, 0.0],
                semi_axes: vec![1.0, 0.5],
            },
            frame: Frame::Original,
        };
        assert!(matches!(
            spec.validated().unwrap_err(),
            Error::BadGeometry { .. }
        ));
    }

    #[test]
    fn validation_is_idempotent() {
        let spec = DomainSpec {
            d: 3,
            eps: 0.125,
            hole: HoleShape::OffCenterBall {
                center: vec![0.2, 0.0, 0.0],
                radius: 1.0,
            },
            frame: Frame::Original,
        };
        let once = spec.validated().unwrap();
        let twice = once.clone().validated().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn rescaled_frame_geometry() {
        let spec = DomainSpec {
            d: 3,
            eps: 0.125,
            hole: HoleShape::ConcentricBall { radius: 1.0 },
            frame: Frame::Rescaled,
        }
        .validated()
        .unwrap();
        assert_relative_eq!(spec.outer_radius(), 8.0);
        assert_relative_eq!(spec.inner_radius(), 1.0);
    }

    #[test]
    fn containment_test_excludes_hole_and_exterior() {
        let spec = DomainSpec::concentric(3, 0.25).validated().unwrap();
        assert!(spec.contains(&[0.5, 0.0, 0.0]));
        assert!(spec.contains(&[0.25, 0.0, 0.0])); // hole boundary (closure)
        assert!(!spec.contains(&[0.1, 0.0, 0.0])); // inside the hole
        assert!(!spec.contains(&[1.1, 0.0, 0.0])); // outside the ball
    }

    #[test]
    fn divergence_of_catalog_fields() {
        assert_relative_eq!(
            divergence(&SourceSpec::linear_x1(), &[0.3, -0.1, 0.9]).unwrap(),
            1.0
        );
        assert_relative_eq!(
            divergence(&SourceSpec::constant(vec![1.0, 2.0, 3.0]), &[0.1, 0.2, 0.3]).unwrap(),
            0.0
        );
        // g(r) = r in d = 3: div = g' + 2 g / r = 1 + 2 = 3.
        let f = SourceSpec::radial(RadialProfile::linear(1.0));
        assert_relative_eq!(divergence(&f, &[0.5, 0.0, 0.0]).unwrap(), 3.0);
        // Same profile read as a 4-dimensional field: div = 1 + 3 = 4.
        assert_relative_eq!(divergence(&f, &[0.5, 0.0, 0.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn divergence_matches_finite_differences_at_second_order() {
        let sources = [
            SourceSpec::linear_x1(),
            SourceSpec::radial(RadialProfile::custom_with_derivative(
                |r| r * r - 0.3 * r,
                |r| 2.0 * r - 0.3,
            )),
            SourceSpec::modal(2, 1, RadialProfile::custom(|r| r * (1.0 - r))),
        ];
        let x = [0.4, -0.3, 0.5];
        for f in &sources {
            let exact = divergence(f, &x).unwrap();
            let fd = |h: f64| -> f64 {
                let mut div = 0.0;
                for i in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    div += (f.eval(&xp).unwrap()[i] - f.eval(&xm).unwrap()[i]) / (2.0 * h);
                }
                div
            };
            let e1 = (fd(1e-3) - exact).abs();
            let e2 = (fd(5e-4) - exact).abs();
            assert!(e1 < 1e-4, "coarse FD error too large: {e1}");
            // O(h²): halving the step should shrink the error ~4x. Guard the
            // ratio only when the coarse error is above rounding noise.
            if e1 > 1e-11 {
                assert!(
                    e2 < e1 / 2.5,
                    "FD divergence not second order: e(h)={e1}, e(h/2)={e2}"
                );
            }
        }
    }

    #[test]
    fn custom_profile_uses_fd_when_derivative_missing() {
        let g = RadialProfile::custom(|r| r.powi(3));
        assert_relative_eq!(g.deriv(0.5).unwrap(), 0.75, max_relative = 1e-9);
        let g2 = RadialProfile::custom_with_derivative(|r| r.powi(3), |r| 3.0 * r * r);
        assert_relative_eq!(g2.deriv(0.5).unwrap(), 0.75);
    }

    #[test]
    fn radial_field_rejects_origin() {
        let f = SourceSpec::radial(RadialProfile::linear(1.0));
        assert!(divergence(&f, &[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn ellipsoid_surface_radius() {
        let hole = HoleShape::Ellipsoid {
            center: vec![0.0, 0.0, 0.0],
            semi_axes: vec![1.0, 0.5, 0.25],
        };
        assert_relative_eq!(hole.surface_radius(&[1.0, 0.0, 0.0]), 1.0);
        assert_relative_eq!(hole.surface_radius(&[0.0, 1.0, 0.0]), 0.5);
        assert_relative_eq!(hole.surface_radius(&[0.0, 0.0, 1.0]), 0.25);
    }
}
