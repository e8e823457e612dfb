//! Command-line front end: `run`, `compare` and `suite`.
//!
//! Each command writes per-checkpoint CSV files and a `summary.json` with the
//! aggregate curves, detection sample counts and the resolved configuration.

pub mod config;
pub mod output;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::error::Error;
use crate::harness::{desk_panels, run_panel, Algorithm, Panel, PanelResult, TrialRecord};
pub use config::{RunConfig, Settings};
pub use output::{read_csv, write_csv, Summary, CSV_HEADER};

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("config file {}: {message}", path.display())]
    ConfigFile { path: PathBuf, message: String },
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema: {0}")]
    Schema(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Config { .. } | Error::Domain(_)) | CliError::ConfigFile { .. } => {
                EXIT_VALIDATION
            }
            _ => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdr-bandit", version, about = "Adaptive multiple testing with anytime FDR/FWER control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run one algorithm on one instance.
    Run(CommonArgs),
    /// Run UCB, successive elimination and uniform allocation on one instance.
    Compare(CommonArgs),
    /// Run a preset collection of instances under all three algorithms.
    Suite {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "desk")]
        preset: Preset,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Constant unit gaps with k in {2, ceil(sqrt n), n/5} plus one linear-gap panel.
    Desk,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Ok(RunConfig::resolve(&self.settings.clone().over(file))?)
    }
}

/// What a command wrote.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary_path: PathBuf,
    pub csv_paths: Vec<PathBuf>,
    pub summary: Summary,
}

fn single_panel(cfg: &RunConfig) -> Panel {
    Panel {
        name: "main".into(),
        spec: cfg.instance,
        config: cfg.engine,
        horizon: cfg.horizon,
        trials: cfg.trials,
        base_seed: cfg.base_seed,
    }
}

fn write_trials(path: &Path, records: &[TrialRecord]) -> Result<PathBuf, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    write_csv(BufWriter::new(File::create(path)?), records)?;
    Ok(path.to_owned())
}

pub fn execute(command: &Command) -> Result<RunOutput, CliError> {
    let (name, common) = match command {
        Command::Run(c) => ("run", c),
        Command::Compare(c) => ("compare", c),
        Command::Suite { common, .. } => ("suite", common),
    };
    let cfg = common.resolve()?;
    fs::create_dir_all(&cfg.out)?;

    let mut csv_paths = Vec::new();
    let mut panels: Vec<PanelResult> = Vec::new();
    match command {
        Command::Run(_) => {
            let run = run_panel(&single_panel(&cfg), &[cfg.algo], cfg.target_tpr, cfg.workers)?;
            csv_paths.push(write_trials(&cfg.out.join("trials.csv"), &run.records[0].1)?);
            panels.push(run.result);
        }
        Command::Compare(_) => {
            let run = run_panel(&single_panel(&cfg), &Algorithm::ALL, cfg.target_tpr, cfg.workers)?;
            for (algo, records) in &run.records {
                csv_paths.push(write_trials(&cfg.out.join(format!("trials_{algo}.csv")), records)?);
            }
            panels.push(run.result);
        }
        Command::Suite { preset: Preset::Desk, .. } => {
            for panel in desk_panels(&cfg.engine, cfg.horizon, cfg.trials, cfg.base_seed) {
                let run = run_panel(&panel, &Algorithm::ALL, cfg.target_tpr, cfg.workers)?;
                for (algo, records) in &run.records {
                    let path = cfg.out.join(&panel.name).join(format!("trials_{algo}.csv"));
                    csv_paths.push(write_trials(&path, records)?);
                }
                panels.push(run.result);
            }
        }
    }

    let summary = Summary::new(name, cfg.clone(), panels);
    let summary_path = cfg.out.join("summary.json");
    let mut f = BufWriter::new(File::create(&summary_path)?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    std::io::Write::write_all(&mut f, b"\n")?;
    Ok(RunOutput { summary_path, csv_paths, summary })
}
