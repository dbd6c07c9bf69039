//! Batch experiment runner: config parsing, validation, dispatch, and
//! artifact emission.
//!
//! A run is described by a JSON config
//!
//! ```json
//! {
//!   "experiment": "shear-inflation",
//!   "params": { "eps": 0.1, "s": 1.0, "m_target": 10.0 },
//!   "output_dir": "out",
//!   "seed": 42
//! }
//! ```
//!
//! where `params` overrides per-experiment defaults field by field. Each run
//! writes `manifest.json` (resolved parameters, library version, seed,
//! measured constants, and one pass/fail entry per criterion) plus the
//! experiment's CSV time series into the output directory. Reruns with the
//! same config and seed produce byte-identical CSV payloads; only the
//! manifest timestamp differs.

mod experiments;

pub use experiments::EXPERIMENT_NAMES;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    ConfigParse(String),
    #[error("unknown experiment {name:?}; known: {known}")]
    UnknownExperiment { name: String, known: String },
    #[error("invalid parameter {field}: {message}")]
    InvalidParam { field: String, message: String },
    #[error("cannot write artifact {path}: {source}")]
    ArtifactWrite { path: PathBuf, source: std::io::Error },
    #[error("experiment failed: {0}")]
    Experiment(String),
}

/// Exit status conventions of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CRITERION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parsed run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        if !EXPERIMENT_NAMES.contains(&config.experiment.as_str()) {
            return Err(CliError::UnknownExperiment {
                name: config.experiment.clone(),
                known: EXPERIMENT_NAMES.join(", "),
            });
        }
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::ConfigRead { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text)
    }
}

/// One named check with its measured value and threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"<="` or `">="`: how `value` compares against `threshold` to pass.
    pub direction: &'static str,
    pub pass: bool,
}

impl CriterionResult {
    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, direction: "<=", pass: value <= threshold }
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, direction: ">=", pass: value >= threshold }
    }

    pub fn boolean(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
            direction: ">=",
            pass,
        }
    }
}

/// Everything a run leaves behind, mirrored into `manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    pub library_version: &'static str,
    pub seed: u64,
    /// Fully resolved parameters after defaults were applied.
    pub params: Value,
    pub criteria: Vec<CriterionResult>,
    /// Named measured constants beyond the pass/fail criteria.
    pub measured: Value,
    pub artifacts: Vec<String>,
    pub timestamp_unix: u64,
    pub pass: bool,
}

/// Validation report of `validate`.
#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub experiment: String,
    pub ok: bool,
    pub issues: Vec<String>,
}

/// Dry-run parameter validation: resolve parameters and check every
/// precondition that can be checked without computing.
pub fn validate(config: &RunConfig) -> Result<ValidationReport, CliError> {
    let issues = experiments::validate_params(config)?;
    Ok(ValidationReport {
        experiment: config.experiment.clone(),
        ok: issues.is_empty(),
        issues,
    })
}

/// Execute the configured experiment, write artifacts, and return the
/// summary. `Err` means the run could not execute (usage-level failure);
/// a clean run with failing criteria returns `Ok` with `pass == false`.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    let report = validate(config)?;
    if !report.ok {
        return Err(CliError::InvalidParam {
            field: "params".into(),
            message: report.issues.join("; "),
        });
    }
    let out_dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)
        .map_err(|source| CliError::ArtifactWrite { path: out_dir.clone(), source })?;
    let mut summary = experiments::dispatch(config, &out_dir)?;
    summary.pass = summary.criteria.iter().all(|c| c.pass);
    let manifest_path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&manifest_path, text)
        .map_err(|source| CliError::ArtifactWrite { path: manifest_path.clone(), source })?;
    Ok(summary)
}

pub(crate) fn write_artifact(
    out_dir: &Path,
    name: &str,
    contents: &[u8],
) -> Result<String, CliError> {
    let path = out_dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|source| CliError::ArtifactWrite { path: path.clone(), source })?;
    Ok(name.to_string())
}

pub(crate) fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
