//! Report records and their CSV / JSON emission.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::{RunConfig, Tolerances};
use crate::error::Result;

/// One evaluation: a single operator value at one grid point and ladder step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub function_f: String,
    pub function_g: String,
    pub alpha: Option<f64>,
    pub x: Option<f64>,
    pub eps_or_r: f64,
    pub value_re: f64,
    pub value_im: f64,
    pub err_est: f64,
    /// `ok`, or the error code of the failed evaluation.
    pub status: String,
}

/// One point of a `θ_p` profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub function_id: String,
    pub x: f64,
    pub p: f64,
    pub r: f64,
    pub theta: f64,
    pub slope: Option<f64>,
    pub class: String,
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CellSummary {
    pub check: String,
    pub function_f: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function_g: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imaginary_residue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub pass: bool,
    /// `ok`, `failed`, or an error code.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counts {
    pub cells: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

/// The JSON summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    /// The resolved configuration, defaults included.
    pub config: RunConfig,
    pub tolerances: Tolerances,
    /// Per-cell limits, slopes and fit quality in cell order (`null` where not applicable).
    pub limits: Vec<Option<f64>>,
    pub slopes: Vec<Option<f64>>,
    pub r_squared: Vec<Option<f64>>,
    pub cells: Vec<CellSummary>,
    pub counts: Counts,
    pub pass: bool,
}

impl Summary {
    pub fn new(config: &RunConfig, cells: Vec<CellSummary>) -> Self {
        let counts = Counts {
            cells: cells.len(),
            passed: cells.iter().filter(|c| c.pass).count(),
            failed: cells.iter().filter(|c| !c.pass && c.status == "failed").count(),
            errors: cells
                .iter()
                .filter(|c| c.status != "ok" && c.status != "failed")
                .count(),
        };
        Summary {
            experiment: config.experiment.as_str().to_string(),
            config: config.clone(),
            tolerances: config.tolerances,
            limits: cells.iter().map(|c| c.limit).collect(),
            slopes: cells.iter().map(|c| c.slope).collect(),
            r_squared: cells.iter().map(|c| c.r_squared).collect(),
            pass: !cells.is_empty() && cells.iter().all(|c| c.pass),
            counts,
            cells,
        }
    }
}

pub const EVALUATIONS_FILE: &str = "evaluations.csv";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(!rows.is_empty())
        .from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `evaluations.csv`, `summary.json` and, when there are profiles,
/// `profiles.csv` into `dir`.
pub fn write_reports(dir: &Path, rows: &[Row], profiles: &[ProfileRow], summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(
        &dir.join(EVALUATIONS_FILE),
        rows,
        &[
            "experiment",
            "function_f",
            "function_g",
            "alpha",
            "x",
            "eps_or_r",
            "value_re",
            "value_im",
            "err_est",
            "status",
        ],
    )?;
    if !profiles.is_empty() {
        write_csv(&dir.join(PROFILES_FILE), profiles, &[])?;
    }
    let mut json = serde_json::to_string_pretty(summary)?;
    json.push('\n');
    fs::write(dir.join(SUMMARY_FILE), json)?;
    Ok(())
}
