//! Seeded, configured experiment runs that write plot-ready data files.
//!
//! A run owns one output directory holding the config echo, one CSV trace
//! per replica, the aggregate trace (mean and standard deviation per row),
//! plot series, experiment-specific reports and a `manifest.json`.
//! Replicas run in parallel, each on its own stream derived from the
//! master seed and the replica index, so identical configs reproduce every
//! data file byte for byte; only the manifest carries timestamps.

mod config;
mod experiments;
mod report;
mod trace;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    AnnealConfig, AttackConfig, AttackSource, ExperimentConfig, ExperimentKind, ModelKind,
    PercolationConfig, RewireSection, SeedGraphConfig, SpectrumConfig, SCHEMA_VERSION,
};
pub use report::{
    compare_with_theory, emit_plot_data, ComparisonEntry, PlotInputs, PlotKind, TheoryReport,
    TheoryValue, Tolerances, OBSERVABLES,
};
pub use trace::{aggregate, Trace};

use crate::error::ModelError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown plot kind {0:?}")]
    UnknownPlotKind(String),
    #[error("missing {0}")]
    Missing(String),
    #[error("all {replicas} replicas failed; first error: {first}")]
    AllReplicasFailed { replicas: usize, first: String },
}

impl HarnessError {
    /// Process exit code: 2 for configuration and usage problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownPlotKind(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicaFailure {
    pub replica: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub experiment: &'static str,
    pub seed: u64,
    pub replicas: usize,
    pub completed_replicas: usize,
    /// Completed over configured replicas.
    pub completeness: f64,
    pub failures: Vec<ReplicaFailure>,
    /// SHA-256 of the config echo.
    pub config_hash: String,
    pub code_version: &'static str,
    pub started_at_unix: u64,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    /// The experiment's headline numbers, also written to `summary.json`.
    pub summary: serde_json::Value,
}

/// Collects files written into one run directory.
pub(crate) struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    fn create(root: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(root).map_err(|e| HarnessError::Io {
            path: root.to_path_buf(),
            source: e,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub(crate) fn write(
        &mut self,
        name: &str,
        bytes: impl AsRef<[u8]>,
    ) -> Result<(), HarnessError> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| HarnessError::Io { path, source: e })?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub(crate) fn write_trace(&mut self, name: &str, trace: &Trace) -> Result<(), HarnessError> {
        self.write(name, trace.to_csv_string())
    }

    pub(crate) fn write_json<T: Serialize>(
        &mut self,
        name: &str,
        value: &T,
    ) -> Result<(), HarnessError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub(crate) fn write_plot(
        &mut self,
        kind: PlotKind,
        inputs: &PlotInputs,
    ) -> Result<(), HarnessError> {
        let text = emit_plot_data(kind, inputs)?;
        self.write(&format!("{}.dat", kind.name()), text)
    }
}

pub fn replica_file(k: usize) -> String {
    format!("replica_{k:03}.csv")
}

/// Validates `config` and runs its experiment into `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let started = Instant::now();
    let started_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let echo = config.to_toml_string();
    let mut dir = RunDir::create(out_dir)?;
    dir.write("config.toml", &echo)?;

    let outcome = experiments::run(config, &mut dir);
    let (failures, summary) = match &outcome {
        Ok(done) => (done.failures.clone(), Some(done.summary.clone())),
        Err(_) => (Vec::new(), None),
    };
    if let Some(s) = &summary {
        dir.write_json("summary.json", s)?;
    }
    let completed = match &outcome {
        Ok(_) => config.replicas - failures.len(),
        Err(_) => 0,
    };
    let mut files = dir.files.clone();
    files.push("manifest.json".into());
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        experiment: config.experiment.label(),
        seed: config.seed,
        replicas: config.replicas,
        completed_replicas: completed,
        completeness: completed as f64 / config.replicas as f64,
        failures: match &outcome {
            Ok(_) => failures,
            Err(e) => vec![ReplicaFailure {
                replica: 0,
                error: e.to_string(),
            }],
        },
        config_hash: hex::encode(Sha256::digest(echo.as_bytes())),
        code_version: env!("CARGO_PKG_VERSION"),
        started_at_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        files,
    };
    dir.write_json("manifest.json", &manifest)?;
    outcome?;
    Ok(RunOutput {
        out_dir: out_dir.to_path_buf(),
        manifest,
        summary: summary.unwrap_or(serde_json::Value::Null),
    })
}
