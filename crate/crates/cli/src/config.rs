//! JSON run-configuration schema and its conversion to solver inputs.
//!
//! The schema is strict: unknown keys are rejected, so a typo in a sweep
//! configuration fails loudly instead of silently falling back to defaults.
//! Every descriptor here is plain data — sources and holes are chosen from a
//! small catalog rather than arbitrary closures, which is what keeps runs
//! reproducible from the configuration file alone.

use serde::Deserialize;

use perfball_core::analysis::SolverChoice;
use perfball_core::domain::{DomainSpec, Frame, HoleShape, RadialProfile, SourceSpec};
use perfball_core::mfs::MfsConfig;
use perfball_core::norms::QuadratureConfig;

use crate::CliError;

/// One run: geometry, exponents, source, solver, and numerical settings.
///
/// `epsilon`/`p` are single-value conveniences for `epsilons`/`ps`; giving
/// both spellings of the same field is an error. Which fields are required
/// depends on the subcommand — `solve` wants a single epsilon, `sweep` and
/// `dual-blowup` want a list, `check-counterexample` wants neither.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Ambient dimension (at least 3).
    pub dimension: usize,
    /// Single hole scale, for `solve`.
    pub epsilon: Option<f64>,
    /// Hole scales, strictly decreasing within (0, 1/4], for sweeps.
    pub epsilons: Option<Vec<f64>>,
    /// Single Lebesgue exponent.
    pub p: Option<f64>,
    /// Lebesgue exponents, for multi-exponent runs.
    pub ps: Option<Vec<f64>>,
    /// Hole geometry; a concentric unit-scale ball when omitted.
    #[serde(default)]
    pub hole: HoleConfig,
    /// Right-hand-side field `f` in `−Δu = div f`.
    pub source: Option<SourceConfig>,
    /// Which pipeline solves each problem.
    #[serde(default)]
    pub solver: SolverConfig,
    /// Overrides merged onto the default quadrature settings.
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    /// Overrides for the collocation solver (`solve` only).
    pub mfs: Option<MfsOverrides>,
    /// When set, `solve` also samples the field at this many points along
    /// the first coordinate axis and writes them as CSV.
    pub sample_points: Option<usize>,
    /// Report file names, resolved under `--out`.
    #[serde(default)]
    pub output: OutputConfig,
}

/// Hole geometry descriptor.
#[derive(Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum HoleConfig {
    /// Ball of the given radius centered at the origin (default radius 1,
    /// i.e. the hole is exactly `B(0, ε)`).
    Concentric {
        #[serde(default = "default_unit")]
        radius: f64,
    },
    /// Ball centered away from the origin; center is in hole-scale units.
    OffCenter { center: Vec<f64>, radius: f64 },
    /// Axis-aligned ellipsoid in hole-scale units.
    Ellipsoid { center: Vec<f64>, semi_axes: Vec<f64> },
}

fn default_unit() -> f64 {
    1.0
}

impl Default for HoleConfig {
    fn default() -> Self {
        HoleConfig::Concentric { radius: 1.0 }
    }
}

impl HoleConfig {
    fn to_shape(&self) -> HoleShape {
        match self {
            HoleConfig::Concentric { radius } => HoleShape::ConcentricBall { radius: *radius },
            HoleConfig::OffCenter { center, radius } => HoleShape::OffCenterBall {
                center: center.clone(),
                radius: *radius,
            },
            HoleConfig::Ellipsoid { center, semi_axes } => HoleShape::Ellipsoid {
                center: center.clone(),
                semi_axes: semi_axes.clone(),
            },
        }
    }
}

/// Source-field descriptor. The catalog matches what the solvers accept;
/// profiles are linear in `r` so that a configuration file pins them down
/// completely.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    /// `f = x₁ e₁`, divergence 1.
    LinearX1,
    /// Constant vector field, divergence 0.
    Constant { vector: Vec<f64> },
    /// Radial field `slope · r ê_r`, divergence `slope · d`.
    RadialLinear { slope: f64 },
    /// Single spherical-harmonic mode `slope · r · Y_{l,m} ê_r`
    /// (dimension 3 only).
    Modal { l: u32, m: i32, slope: f64 },
}

impl SourceConfig {
    pub fn to_spec(&self) -> SourceSpec {
        match self {
            SourceConfig::LinearX1 => SourceSpec::linear_x1(),
            SourceConfig::Constant { vector } => SourceSpec::constant(vector.clone()),
            SourceConfig::RadialLinear { slope } => {
                SourceSpec::radial(RadialProfile::linear(*slope))
            }
            SourceConfig::Modal { l, m, slope } => {
                SourceSpec::modal(*l, *m, RadialProfile::linear(*slope))
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SourceConfig::LinearX1 => "linear_x1",
            SourceConfig::Constant { .. } => "constant",
            SourceConfig::RadialLinear { .. } => "radial_linear",
            SourceConfig::Modal { .. } => "modal",
        }
    }
}

/// Solver selection.
#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SolverConfig {
    Shell,
    Mfs,
    #[default]
    Auto,
}

impl SolverConfig {
    pub fn to_choice(self) -> SolverChoice {
        match self {
            SolverConfig::Shell => SolverChoice::Shell,
            SolverConfig::Mfs => SolverChoice::Mfs,
            SolverConfig::Auto => SolverChoice::Auto,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SolverConfig::Shell => "shell",
            SolverConfig::Mfs => "mfs",
            SolverConfig::Auto => "auto",
        }
    }
}

/// Partial quadrature settings; anything omitted keeps its default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub radial_panels: Option<usize>,
    pub grading_ratio: Option<f64>,
    pub gauss_nodes: Option<usize>,
    pub polar_nodes: Option<usize>,
    pub azimuth_nodes: Option<usize>,
    pub tolerance: Option<f64>,
    pub max_refinements: Option<usize>,
}

impl QuadratureOverrides {
    pub fn build(&self) -> QuadratureConfig {
        let mut cfg = QuadratureConfig::default();
        if self.radial_panels.is_some() {
            cfg.radial_panels = self.radial_panels;
        }
        if let Some(v) = self.grading_ratio {
            cfg.grading_ratio = v;
        }
        if let Some(v) = self.gauss_nodes {
            cfg.gauss_nodes = v;
        }
        if let Some(v) = self.polar_nodes {
            cfg.polar_nodes = v;
        }
        if let Some(v) = self.azimuth_nodes {
            cfg.azimuth_nodes = v;
        }
        if let Some(v) = self.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = self.max_refinements {
            cfg.max_refinements = v;
        }
        cfg
    }
}

/// Overrides for the fundamental-solutions pipeline. Counts are totals over
/// both boundary surfaces and must be even.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfsOverrides {
    /// Total charge points (split evenly across the two surfaces).
    pub charges: Option<usize>,
    /// Total collocation points (split evenly; defaults to twice the
    /// charges).
    pub collocation: Option<usize>,
    /// Acceptable boundary residual before the solve is rejected.
    pub residual_tol: Option<f64>,
}

fn half_of_even(total: usize, what: &str) -> Result<usize, CliError> {
    if total == 0 || !total.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "mfs {what} count must be a positive even total split across the two surfaces, got {total}"
        )));
    }
    Ok(total / 2)
}

impl RunConfig {
    /// The ε values, from whichever spelling the file uses.
    pub fn epsilon_list(&self) -> Result<Option<Vec<f64>>, CliError> {
        match (&self.epsilon, &self.epsilons) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either 'epsilon' or 'epsilons', not both".into(),
            )),
            (Some(e), None) => Ok(Some(vec![*e])),
            (None, Some(list)) => Ok(Some(list.clone())),
            (None, None) => Ok(None),
        }
    }

    pub fn effective_epsilons(&self) -> Result<Vec<f64>, CliError> {
        self.epsilon_list()?
            .filter(|list| !list.is_empty())
            .ok_or_else(|| CliError::Config("the configuration needs 'epsilon' or a non-empty 'epsilons'".into()))
    }

    pub fn single_epsilon(&self) -> Result<f64, CliError> {
        let list = self.effective_epsilons()?;
        if list.len() != 1 {
            return Err(CliError::Config(format!(
                "this command takes a single epsilon, got {}",
                list.len()
            )));
        }
        Ok(list[0])
    }

    /// The p values, from whichever spelling the file uses.
    pub fn p_list(&self) -> Result<Option<Vec<f64>>, CliError> {
        match (&self.p, &self.ps) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either 'p' or 'ps', not both".into(),
            )),
            (Some(p), None) => Ok(Some(vec![*p])),
            (None, Some(list)) => Ok(Some(list.clone())),
            (None, None) => Ok(None),
        }
    }

    pub fn effective_ps(&self) -> Result<Vec<f64>, CliError> {
        self.p_list()?
            .filter(|list| !list.is_empty())
            .ok_or_else(|| CliError::Config("the configuration needs 'p' or a non-empty 'ps'".into()))
    }

    pub fn single_p(&self) -> Result<f64, CliError> {
        let list = self.effective_ps()?;
        if list.len() != 1 {
            return Err(CliError::Config(format!(
                "this command takes a single exponent, got {}",
                list.len()
            )));
        }
        Ok(list[0])
    }

    /// A validated domain at the given hole scale.
    pub fn domain(&self, eps: f64) -> Result<DomainSpec, CliError> {
        DomainSpec {
            d: self.dimension,
            eps,
            hole: self.hole.to_shape(),
            frame: Frame::Original,
        }
        .validated()
        .map_err(CliError::from)
    }

    pub fn source_spec(&self) -> Result<SourceSpec, CliError> {
        let source = self
            .source
            .as_ref()
            .ok_or_else(|| CliError::Config("the configuration needs a 'source' block".into()))?;
        if matches!(source, SourceConfig::Modal { .. }) && self.dimension != 3 {
            return Err(CliError::Config(
                "modal sources are only available in dimension 3".into(),
            ));
        }
        Ok(source.to_spec())
    }

    pub fn solver_choice(&self) -> SolverChoice {
        self.solver.to_choice()
    }

    pub fn mfs_config(&self) -> Result<MfsConfig, CliError> {
        let mut cfg = MfsConfig::default();
        if let Some(overrides) = &self.mfs {
            if let Some(total) = overrides.charges {
                cfg.charges_per_surface = half_of_even(total, "charge")?;
                cfg.collocation_per_surface = 2 * cfg.charges_per_surface;
            }
            if let Some(total) = overrides.collocation {
                cfg.collocation_per_surface = half_of_even(total, "collocation")?;
            }
            if let Some(tol) = overrides.residual_tol {
                cfg.residual_tol = tol;
            }
        }
        Ok(cfg)
    }
}

/// Report file names; defaults depend on the subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// JSON report file name.
    pub json: Option<String>,
    /// CSV table file name.
    pub csv: Option<String>,
}

impl OutputConfig {
    pub fn json_name<'a>(&'a self, default: &'a str) -> &'a str {
        self.json.as_deref().unwrap_or(default)
    }

    pub fn csv_name<'a>(&'a self, default: &'a str) -> &'a str {
        self.csv.as_deref().unwrap_or(default)
    }
}
