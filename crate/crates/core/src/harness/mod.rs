//! Experiment orchestration and reporting.
//!
//! Every experiment turns an [`ExperimentConfig`] into a [`Report`] holding a
//! raw data table, fitted slopes and pass/fail checks. Reports are written as
//! `<out>/<name>.csv`, `<out>/<name>.json` and optionally `<out>/<name>.svg`.

mod experiments;
mod fit;
mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_err, invalid, Error, Result};

pub use fit::{fit_loglog, FitReport};

/// Version of the JSON summary layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXPERIMENTS: [&str; 13] = [
    "region-table",
    "dsigma-decay",
    "symbol-sup-decay",
    "symbol-l2-growth",
    "partition-check",
    "cov-identity",
    "avg-crosscheck",
    "maximal-sanity",
    "squarefn-bound",
    "opnorm-trend",
    "cex-growth",
    "cex-divergence",
    "monotone-lemma",
];

/// Run parameters. `None` fields fall back to per-experiment defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: Option<u32>,
    pub j_min: Option<u32>,
    pub j_max: Option<u32>,
    pub epsilon: f64,
    pub grid_n: Option<usize>,
    pub grid_l: f64,
    pub t_ratio: f64,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub svg: bool,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            n: None,
            j_min: None,
            j_max: None,
            epsilon: crate::symbols::DEFAULT_EPSILON,
            grid_n: None,
            grid_l: 1.0,
            t_ratio: 2f64.powf(1.0 / 16.0),
            r_min: None,
            r_max: None,
            seed: 1,
            out: PathBuf::from("results"),
            svg: false,
            workers: None,
        }
    }

    /// SHA-256 of the sorted-key JSON of every field that affects results.
    /// Output location, plotting and worker count are excluded.
    pub fn config_hash(&self) -> String {
        // serde_json maps are ordered by key.
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::UnknownExperiment(self.experiment.clone()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(invalid(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if !(self.grid_l > 0.0 && self.grid_l.is_finite()) {
            return Err(invalid(format!("grid period must be positive, got {}", self.grid_l)));
        }
        if !(self.t_ratio > 1.0 && self.t_ratio.is_finite()) {
            return Err(invalid(format!("t ratio must exceed 1, got {}", self.t_ratio)));
        }
        if let (Some(a), Some(b)) = (self.j_min, self.j_max) {
            if a > b {
                return Err(invalid(format!("j-min {a} exceeds j-max {b}")));
            }
        }
        if let (Some(a), Some(b)) = (self.r_min, self.r_max) {
            if !(a > 0.0 && a < b) {
                return Err(invalid(format!("need 0 < r-min < r-max, got {a}, {b}")));
            }
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub limit: String,
    pub detail: String,
}

/// Raw data written as CSV. The header documents columns and units.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub experiment: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub fits: BTreeMap<String, FitReport>,
    pub values: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub table: Table,
    /// Key into `fits` for the optional plot.
    #[serde(skip)]
    pub plot: Option<String>,
}

impl Report {
    fn new(config: &ExperimentConfig, table: Table) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            experiment: config.experiment.clone(),
            config_hash: config.config_hash(),
            config: config.clone(),
            passed: true,
            checks: Vec::new(),
            fits: BTreeMap::new(),
            values: BTreeMap::new(),
            table,
            plot: None,
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, value: Option<f64>, limit: impl Into<String>, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, value, limit: limit.into(), detail: detail.into() });
    }

    fn fit(&mut self, key: impl Into<String>, fit: FitReport) {
        let hash = self.config_hash.clone();
        self.fits.insert(key.into(), fit.with_hash(hash));
    }

    fn value(&mut self, key: impl Into<String>, v: impl Serialize) {
        self.values.insert(key.into(), serde_json::to_value(v).expect("value serializes"));
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs one experiment, inside a dedicated thread pool when `workers` is set.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    match config.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
            pool.install(|| experiments::dispatch(config))
        }
        None => experiments::dispatch(config),
    }
}

/// Writes CSV, JSON and (if requested) SVG files; returns their paths.
pub fn write_outputs(report: &Report, out: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let base = out.join(&report.experiment);
    let csv_path = base.with_extension("csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| csv_err(&csv_path, e))?;
    w.write_record(&report.table.header).map_err(|e| csv_err(&csv_path, e))?;
    for row in &report.table.rows {
        w.write_record(row).map_err(|e| csv_err(&csv_path, e))?;
    }
    w.flush().map_err(io_err(&csv_path))?;

    let json_path = base.with_extension("json");
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(&json_path, text).map_err(io_err(&json_path))?;

    let mut paths = vec![csv_path, json_path];
    if svg {
        if let Some(fit) = report.plot.as_ref().and_then(|k| report.fits.get(k)) {
            let svg_path = base.with_extension("svg");
            let title = format!("{} ({})", report.experiment, report.plot.as_deref().unwrap_or_default());
            fs::write(&svg_path, svg::loglog_plot(&title, fit)).map_err(io_err(&svg_path))?;
            paths.push(svg_path);
        }
    }
    Ok(paths)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
        other => Error::Format(format!("csv output {}: {other:?}", path.display())),
    }
}

/// Shortest round-trip decimal form.
fn num(x: f64) -> String {
    format!("{x:?}")
}
