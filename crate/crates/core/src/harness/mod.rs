//! Batch driver: expands a [`RunConfig`] into independent grid cells, runs them
//! on a bounded worker pool and gathers rows and summaries in config order.

pub mod config;
mod experiments;
pub mod report;

use std::path::Path;

use rayon::prelude::*;

pub use config::{
    DualSettings, Experiment, LebesgueSettings, PairSpec, ProbeSettings, ProductSettings, RunConfig, Tolerances,
};
pub use report::{
    write_reports, CellSummary, Counts, ProfileRow, Row, Summary, EVALUATIONS_FILE, PROFILES_FILE, SUMMARY_FILE,
};

use crate::error::{Error, Result};

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Assertion = 1,
    Config = 2,
    Numerical = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Status for an error that stops a run before any report is written.
    pub fn from_error(e: &Error) -> Self {
        if e.is_numerical() {
            ExitStatus::Numerical
        } else {
            ExitStatus::Config
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub profiles: Vec<ProfileRow>,
    pub summary: Summary,
}

const NUMERICAL_CODES: [&str; 3] = ["accuracy", "non_finite", "degenerate_fit"];

impl RunOutput {
    /// Errors other than numerical ones point at the configuration and take
    /// precedence; then numerical failures; then failed assertions.
    pub fn exit_status(&self) -> ExitStatus {
        let cells = &self.summary.cells;
        let errored = |c: &&CellSummary| c.status != "ok" && c.status != "failed";
        if cells
            .iter()
            .filter(errored)
            .any(|c| !NUMERICAL_CODES.contains(&c.status.as_str()))
        {
            ExitStatus::Config
        } else if cells.iter().any(|c| errored(&c)) {
            ExitStatus::Numerical
        } else if self.summary.pass {
            ExitStatus::Pass
        } else {
            ExitStatus::Assertion
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_reports(dir, &self.rows, &self.profiles, &self.summary)
    }
}

/// Rows, profile points and cell outcomes of one task.
#[derive(Debug, Default)]
pub(crate) struct CellOutput {
    pub rows: Vec<Row>,
    pub profiles: Vec<ProfileRow>,
    pub cells: Vec<CellSummary>,
}

pub(crate) type Task<'a> = Box<dyn Fn() -> CellOutput + Send + Sync + 'a>;

/// Runs `config` with `jobs` worker threads. The output does not depend on `jobs`.
pub fn run(config: &RunConfig, jobs: usize) -> Result<RunOutput> {
    config.validate()?;
    if jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let plan = experiments::Plan::new(config)?;
    let tasks = plan.tasks();
    log::debug!(
        "{}: {} tasks on {} threads",
        config.experiment.as_str(),
        tasks.len(),
        jobs
    );
    let outputs: Vec<CellOutput> = pool.install(|| tasks.par_iter().map(|t| t()).collect());

    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    let mut cells = Vec::new();
    for out in outputs {
        rows.extend(out.rows);
        profiles.extend(out.profiles);
        cells.extend(out.cells);
    }
    for c in cells.iter().filter(|c| !c.pass) {
        log::debug!("cell {} {} x={:?}: {}", c.check, c.function_f, c.x, c.status);
    }
    Ok(RunOutput {
        rows,
        profiles,
        summary: Summary::new(config, cells),
    })
}
