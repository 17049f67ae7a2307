use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mera_qec_cli::{run, CliError, Experiment, ExperimentConfig, Format, OUT_ENV};

/// Run a verification suite on seeded MERA networks.
///
/// Exit status: 0 when every bound check holds, 2 when any is violated,
/// 1 on errors.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Suite to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON config; defaults to a desk-scale preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config and MERA_QEC_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds (overrides the config).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::preset(cli.experiment),
    };
    if cfg.experiment != cli.experiment {
        return Err(CliError::Config {
            field: "experiment".into(),
            message: format!("config runs `{}` but `{}` was requested", cfg.experiment.name(), cli.experiment.name()),
        });
    }
    if let Some(seeds) = &cli.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(out) = &cli.out {
        cfg.output.path = out.clone();
    } else if let Some(dir) = std::env::var_os(OUT_ENV) {
        cfg.output.path = dir.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure(&cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => {
            let m = &o.manifest;
            for s in &m.seeds {
                let seed = s.seed.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
                println!("seed {seed}: {} ({} rows, {} violations) {}", s.status.name(), s.rows, s.violations, s.detail);
            }
            for p in &m.outputs {
                println!("wrote {}", p.display());
            }
            if m.satisfied() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
