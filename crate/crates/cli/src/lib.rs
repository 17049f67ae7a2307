//! Experiment runner: builds networks from a JSON config, runs one suite
//! per seed and writes deterministic CSV or JSON data plus a manifest.

pub mod config;
pub mod suites;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use config::{Experiment, ExperimentConfig, Format, NetworkSpec, OutputSpec, Sweep};
pub use suites::{SeedRun, Status};

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "MERA_QEC_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration is malformed; `field` names the offending entry.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    /// Reading or writing a file failed.
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Mera(#[from] mera_qec::mera::MeraError),
    #[error(transparent)]
    Qec(#[from] mera_qec::qec::QecError),
    #[error(transparent)]
    Channel(#[from] mera_qec::channel::ChannelError),
    #[error(transparent)]
    Dynamics(#[from] mera_qec::dynamics::DynamicsError),
}

/// Column-named rows in seed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects with keys in column order.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (k, row) in self.rows.iter().enumerate() {
            out.push_str(if k == 0 { "\n  {" } else { ",\n  {" });
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| format!("{}: {}", Value::String(c.clone()), v))
                .collect();
            out.push_str(&fields.join(", "));
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    /// The listed columns only.
    pub fn select(&self, names: &[&str]) -> Table {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.columns.iter().position(|c| c == n).expect("known column"))
            .collect();
        Table {
            columns: names.iter().map(|s| s.to_string()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect(),
        }
    }

    /// Values of one column.
    pub fn column(&self, name: &str) -> Vec<&Value> {
        let i = self.columns.iter().position(|c| c == name).expect("known column");
        self.rows.iter().map(|r| &r[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedStatus {
    pub seed: Option<u64>,
    pub status: Status,
    pub rows: usize,
    pub violations: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: Experiment,
    pub config_hash: String,
    pub seeds: Vec<SeedStatus>,
    pub violations: usize,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn satisfied(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub table: Table,
}

/// Runs the suite over all seeds; nothing is written.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let start = Instant::now();
    let seeds: Vec<Option<u64>> =
        if config.experiment.uses_seeds() { config.seeds.iter().copied().map(Some).collect() } else { vec![None] };
    // rayon keeps the order of the collected results
    let runs: Vec<SeedRun> = seeds.par_iter().map(|&s| suites::run_seed(config, s)).collect();
    let columns = suites::columns(config.experiment).iter().map(|c| c.to_string()).collect();
    let mut rows = Vec::new();
    let mut statuses = Vec::new();
    for r in runs {
        statuses.push(SeedStatus { seed: r.seed, status: r.status, rows: r.rows.len(), violations: r.violations, detail: r.detail });
        rows.extend(r.rows);
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: config.experiment,
        config_hash: config.hash(),
        violations: statuses.iter().map(|s| s.violations).sum(),
        seeds: statuses,
        outputs: Vec::new(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome { manifest, table: Table { columns, rows } })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// Runs the suite and writes the data file, the plot file and the manifest
/// into the configured output directory.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let mut outcome = execute(config)?;
    let dir = &config.output.path;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.clone(), source: e })?;
    let name = config.experiment.name();
    let data = dir.join(format!("{name}.{}", config.output.format.extension()));
    let text = match config.output.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    write(&data, &text)?;
    outcome.manifest.outputs.push(data);
    let plot = emit_plotdata(&outcome, dir)?;
    outcome.manifest.outputs.extend(plot);
    let manifest_path = dir.join("manifest.json");
    outcome.manifest.outputs.push(manifest_path.clone());
    write(&manifest_path, &outcome.manifest.to_json())?;
    Ok(outcome)
}

/// Long-format CSV of the plotted columns; header only for an empty sweep.
pub fn emit_plotdata(outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let exp = outcome.manifest.experiment;
    let path = dir.join(format!("{}.plot.csv", exp.name()));
    write(&path, &outcome.table.select(suites::plot_columns(exp)).to_csv())?;
    Ok(vec![path])
}
