//! Report writers: CSV tables and JSON summaries.
//!
//! Numbers in CSV carry 17 significant digits (`{:.16e}`), enough to
//! round-trip an `f64` exactly, with a `.` decimal separator and no
//! grouping. Identical inputs therefore produce byte-identical files, which
//! downstream diffing relies on. JSON files go through `serde_json` and a
//! trailing newline.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use perfball_core::analysis::{DualRow, PredictedRegime, RegimeFit, SweepRow};

use crate::CliError;

/// One `(ε, p)` line of the solve report.
#[derive(Debug, Serialize)]
pub struct NormReport {
    pub p: f64,
    pub grad_lp: f64,
    pub source_lp: f64,
    pub ratio: f64,
    pub converged: bool,
}

/// Extra diagnostics present only on the collocation path.
#[derive(Debug, Serialize)]
pub struct MfsDetail {
    pub condition: f64,
    pub lsq_residual: f64,
}

/// JSON body of `solve`.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub dimension: usize,
    pub epsilon: f64,
    pub solver: &'static str,
    pub boundary_residual_inner: f64,
    pub boundary_residual_outer: f64,
    pub mfs: Option<MfsDetail>,
    pub norms: Vec<NormReport>,
}

/// One fitted exponent in the sweep and dual reports.
#[derive(Debug, Serialize)]
pub struct FitReport {
    pub p: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub regime: &'static str,
    pub prediction: &'static str,
    /// Predicted decay exponent, present only in the direct blow-up range.
    pub predicted_rate: Option<f64>,
    /// `null` on the borderline, where no claim is made either way.
    pub agreement: Option<bool>,
}

impl FitReport {
    pub fn from_fit(fit: &RegimeFit) -> Self {
        let predicted_rate = match fit.prediction.predicted {
            PredictedRegime::BlowUp { rate } => Some(rate),
            _ => None,
        };
        FitReport {
            p: fit.p,
            slope: fit.slope,
            r_squared: fit.r_squared,
            regime: fit.regime.label(),
            prediction: fit.prediction.predicted.label(),
            predicted_rate,
            agreement: fit.agreement,
        }
    }
}

/// JSON body of `sweep`.
#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub dimension: usize,
    pub source: &'static str,
    pub solver: &'static str,
    pub epsilon_count: usize,
    pub fits: Vec<FitReport>,
}

/// JSON body of `check-counterexample`.
#[derive(Debug, Serialize)]
pub struct CounterexampleReport {
    pub dimension: usize,
    pub source: &'static str,
    /// `∫_{B₁} (|y|^{2−d} − 1) div f dy`.
    pub integral: f64,
    /// Limit value at the hole, `α_d ·` integral; `null` when the source has
    /// no constant divergence and the limit identity does not apply.
    pub u0: Option<f64>,
    /// Whether the integral clears the 1e−8 detection threshold.
    pub nonzero: bool,
}

/// JSON body of `dual-blowup`.
#[derive(Debug, Serialize)]
pub struct DualReport {
    pub dimension: usize,
    pub p: f64,
    pub fit: FitReport,
}

fn fe(value: f64) -> String {
    format!("{value:.16e}")
}

/// CSV for `sweep`. Column order is a published contract; keep it stable.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut text = String::from("epsilon,p,grad_lp,source_lp,ratio,converged\n");
    for row in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            fe(row.eps),
            fe(row.p),
            fe(row.grad_lp),
            fe(row.source_lp),
            fe(row.ratio),
            row.converged
        );
    }
    text
}

/// CSV for `dual-blowup`: the sweep columns plus the proved lower bound.
pub fn dual_csv(rows: &[DualRow]) -> String {
    let mut text = String::from("epsilon,p,grad_lp,source_lp,ratio,converged,lower_bound\n");
    for row in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            fe(row.eps),
            fe(row.p),
            fe(row.grad_lp),
            fe(row.source_lp),
            fe(row.grad_lp / row.source_lp),
            row.converged,
            fe(row.lower_bound)
        );
    }
    text
}

/// CSV of field samples along the first coordinate axis.
pub fn samples_csv(dimension: usize, samples: &[(Vec<f64>, f64, f64)]) -> String {
    let mut text = String::new();
    for i in 1..=dimension {
        let _ = write!(text, "x{i},");
    }
    text.push_str("value,grad_norm\n");
    for (x, value, grad_norm) in samples {
        for xi in x {
            let _ = write!(text, "{},", fe(*xi));
        }
        let _ = writeln!(text, "{},{}", fe(*value), fe(*grad_norm));
    }
    text
}

/// Writes `content` under `dir`, creating the directory if needed, and
/// returns the full path for the run summary.
pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize {name}: {e}")))?;
    write_file(dir, name, &(text + "\n"))
}
