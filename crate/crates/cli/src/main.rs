//! Command-line frontend for the perforated-ball toolkit.
//!
//! Subcommands:
//! - `solve`: one domain, one source; JSON summary with boundary residuals
//!   and per-exponent norms, plus optional field samples as CSV.
//! - `sweep`: a family of shrinking holes; CSV table of per-(ε, p) norms
//!   and a JSON file with the fitted gradient decay per exponent.
//! - `check-counterexample`: the weighted divergence integral deciding
//!   whether the small-hole limit keeps a nonzero value at the hole.
//! - `dual-blowup`: the conjugate-exponent lower-bound sweep for
//!   `1 < p < d/(d−1)`.
//! - `validate`: parse and check a configuration without solving anything.
//!
//! Exit codes: 0 on success, 2 for configuration or validation problems,
//! 3 for numerical failures (ill-conditioned collocation, unconverged
//! quadrature). Bad input never panics. Report files go under `--out`;
//! error messages go to standard error.

mod config;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use perfball_core::analysis::{self, SolvedProblem};
use perfball_core::domain::DomainSpec;
use perfball_core::norms::{lp_gradient_norm, lp_source_norm};
use perfball_core::Error as CoreError;

use config::RunConfig;
use report::{
    dual_csv, samples_csv, sweep_csv, write_file, write_json, CounterexampleReport, DualReport,
    FitReport, MfsDetail, NormReport, SolveReport, SweepReport,
};

/// Failures, grouped by their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or inadmissible parameters — exit code 2.
    Config(String),
    /// A solver or quadrature failure on admissible input — exit code 3.
    Numerical(String),
    /// Filesystem trouble reading or writing — exit code 1.
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical: {msg}"),
            CliError::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let msg = err.to_string();
        match err {
            // Everything a careful reading of the configuration could have
            // avoided counts as a configuration problem.
            CoreError::EpsOutOfRange { .. }
            | CoreError::HoleNotContained { .. }
            | CoreError::BadDimension { .. }
            | CoreError::BadGeometry { .. }
            | CoreError::BadExponent { .. }
            | CoreError::ExponentOutOfRange { .. }
            | CoreError::UnsupportedSource { .. }
            | CoreError::InvalidQuadratureConfig { .. }
            | CoreError::BadEpsilonList { .. }
            | CoreError::SweepTooShort { .. }
            | CoreError::TooFewCharges { .. } => CliError::Config(msg),
            // The rest only shows up while solving or integrating.
            _ => CliError::Numerical(msg),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "perfball",
    version,
    about = "Norm sweeps and reports for the Dirichlet problem -Δu = div f \
             on a unit ball with a small hole"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for report files (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Worker threads for sweep rows (default: all cores). Results are
    /// identical for any thread count.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Seed for sampling-based diagnostics. The solver pipelines are
    /// deterministic and do not consume it.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write a JSON summary.
    Solve,
    /// Sweep a family of shrinking holes and fit the gradient growth.
    Sweep,
    /// Evaluate the integral that decides whether the small-hole limit
    /// keeps a nonzero value at the hole.
    CheckCounterexample,
    /// Run the conjugate-exponent lower-bound sweep.
    DualBlowup,
    /// Parse and validate a configuration without solving.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // The global pool can only be sized once per process; later calls
        // are no-ops, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Solve => cmd_solve(cli, &cfg),
        Command::Sweep => cmd_sweep(cli, &cfg),
        Command::CheckCounterexample => cmd_check_counterexample(cli, &cfg),
        Command::DualBlowup => cmd_dual_blowup(cli, &cfg),
        Command::Validate => cmd_validate(&cfg),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <PATH> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
}

fn cmd_solve(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let eps = cfg.single_epsilon()?;
    let ps = cfg.effective_ps()?;
    let dom = cfg.domain(eps)?;
    let source = cfg.source_spec()?;
    let quad = cfg.quadrature.build();
    let mfs_cfg = cfg.mfs_config()?;

    let solved = analysis::solve_problem(&dom, &source, cfg.solver_choice(), &mfs_cfg)?;

    let mut norms = Vec::with_capacity(ps.len());
    for &p in &ps {
        let grad = lp_gradient_norm(solved.field(), &dom, p, &quad)?;
        let src = lp_source_norm(&source, &dom, p, &quad)?;
        norms.push(NormReport {
            p,
            grad_lp: grad.value,
            source_lp: src.value,
            ratio: grad.value / src.value,
            converged: grad.converged && src.converged,
        });
    }

    let (solver, (inner, outer), mfs) = match &solved {
        SolvedProblem::Radial(s) => ("shell_radial", s.boundary_residual(), None),
        SolvedProblem::Modal(s) => ("shell_modal", s.boundary_residual(), None),
        SolvedProblem::Mfs(m) => (
            "mfs",
            (m.boundary_residual, m.boundary_residual),
            Some(MfsDetail {
                condition: m.condition,
                lsq_residual: m.lsq_residual,
            }),
        ),
    };
    let report = SolveReport {
        dimension: dom.d,
        epsilon: eps,
        solver,
        boundary_residual_inner: inner,
        boundary_residual_outer: outer,
        mfs,
        norms,
    };
    let path = write_json(&cli.out, cfg.output.json_name("solve.json"), &report)?;
    println!("wrote {}", path.display());

    if let Some(count) = cfg.sample_points {
        let samples = field_samples(&solved, &dom, count)?;
        let text = samples_csv(dom.d, &samples);
        let path = write_file(&cli.out, cfg.output.csv_name("solve_samples.csv"), &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Samples the solution along the first coordinate axis, skipping points
/// outside the domain (an off-center hole can shadow part of the axis).
fn field_samples(
    solved: &SolvedProblem,
    dom: &DomainSpec,
    count: usize,
) -> Result<Vec<(Vec<f64>, f64, f64)>, CliError> {
    if count < 2 {
        return Err(CliError::Config("sample_points must be at least 2".into()));
    }
    let (lo, hi) = (dom.inner_radius(), dom.outer_radius());
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let r = lo + (hi - lo) * i as f64 / (count - 1) as f64;
        let mut x = vec![0.0; dom.d];
        x[0] = r;
        if !dom.contains(&x) {
            continue;
        }
        let (value, grad) = solved.field().value_grad(&x)?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        rows.push((x, value, grad_norm));
    }
    Ok(rows)
}

fn cmd_sweep(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let epsilons = cfg.effective_epsilons()?;
    let ps = cfg.effective_ps()?;
    let source = cfg.source_spec()?;
    let quad = cfg.quadrature.build();
    if cfg.mfs.is_some() {
        eprintln!("note: 'mfs' overrides apply to solve only; sweeps use default collocation settings");
    }
    // The base fixes dimension and hole geometry; its ε is replaced per row.
    let base = cfg.domain(epsilons[0])?;
    let result = analysis::epsilon_sweep(
        &base,
        &epsilons,
        &source,
        &ps,
        cfg.solver_choice(),
        &quad,
    )?;

    let csv_path = write_file(
        &cli.out,
        cfg.output.csv_name("sweep.csv"),
        &sweep_csv(&result.rows),
    )?;
    let report = SweepReport {
        dimension: cfg.dimension,
        source: cfg.source.as_ref().map(|s| s.label()).unwrap_or(""),
        solver: cfg.solver.label(),
        epsilon_count: epsilons.len(),
        fits: result.fits.iter().map(FitReport::from_fit).collect(),
    };
    let json_path = write_json(&cli.out, cfg.output.json_name("sweep.json"), &report)?;

    for fit in &report.fits {
        println!(
            "p={}: slope={:.4} r_squared={:.5} regime={} prediction={} agreement={}",
            fit.p,
            fit.slope,
            fit.r_squared,
            fit.regime,
            fit.prediction,
            fit.agreement.map_or("none".into(), |a| a.to_string()),
        );
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn cmd_check_counterexample(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let source = cfg.source_spec()?;
    let quad = cfg.quadrature.build();
    let integral = analysis::counterexample_integral(&source, cfg.dimension, &quad)?;
    // The limit identity needs a constant divergence; other catalog sources
    // still have a well-defined integral, so report the value without it.
    let u0 = match analysis::limit_point_value(&source, cfg.dimension, &quad) {
        Ok(v) => Some(v),
        Err(CoreError::UnsupportedSource { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let report = CounterexampleReport {
        dimension: cfg.dimension,
        source: cfg.source.as_ref().map(|s| s.label()).unwrap_or(""),
        integral,
        u0,
        nonzero: integral.abs() > 1e-8,
    };
    let path = write_json(&cli.out, cfg.output.json_name("counterexample.json"), &report)?;
    println!(
        "integral={:.9} nonzero={}",
        report.integral, report.nonzero
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_dual_blowup(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let epsilons = cfg.effective_epsilons()?;
    let p = cfg.single_p()?;
    let quad = cfg.quadrature.build();
    let sweep = analysis::dual_blowup_sweep(&epsilons, cfg.dimension, p, &quad)?;

    let csv_path = write_file(
        &cli.out,
        cfg.output.csv_name("dual.csv"),
        &dual_csv(&sweep.rows),
    )?;
    let report = DualReport {
        dimension: cfg.dimension,
        p,
        fit: FitReport::from_fit(&sweep.fit),
    };
    let json_path = write_json(&cli.out, cfg.output.json_name("dual.json"), &report)?;

    println!(
        "p={}: slope={:.4} r_squared={:.5} regime={} prediction={}",
        p, report.fit.slope, report.fit.r_squared, report.fit.regime, report.fit.prediction
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.dimension < 3 {
        return Err(CliError::Config(format!(
            "dimension {} is not supported; need at least 3",
            cfg.dimension
        )));
    }
    let quad = cfg.quadrature.build();
    quad.validate()?;
    cfg.mfs_config()?;
    println!("dimension: {}", cfg.dimension);
    if let Some(epsilons) = cfg.epsilon_list()? {
        for &eps in &epsilons {
            cfg.domain(eps)?;
        }
        let lo = epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = epsilons.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("epsilons: {} value(s) in [{lo}, {hi}]", epsilons.len());
    }
    if let Some(ps) = cfg.p_list()? {
        for &p in &ps {
            let prediction = analysis::predict_regime(cfg.dimension, p)?;
            println!(
                "p = {p}: predicted regime {}",
                prediction.predicted.label()
            );
        }
    }
    if cfg.source.is_some() {
        cfg.source_spec()?;
        println!(
            "source: {}",
            cfg.source.as_ref().map(|s| s.label()).unwrap_or("")
        );
    }
    println!("solver: {}", cfg.solver.label());
    println!("configuration ok");
    Ok(())
}
