use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::confidence::ConfidenceSchedule;
use crate::engine::{DetectMode, EngineConfig, ErrorMode};
use crate::error::Error;
use crate::harness::{Algorithm, GapPattern, InstanceSpec, Noise};
use crate::selection::BhLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPatternArg {
    Constant,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    Gaussian,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorModeArg {
    Fdr,
    Fwer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectModeArg {
    Tpr,
    Fwpd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoArg {
    Ucb,
    Uniform,
    Se,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BhLevelArg {
    Practical,
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleArg {
    Simple,
    Kaufmann,
}

/// Run settings. Every field is optional so that a config file and command
/// line flags can be layered; the file uses the flag names as keys.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Number of arms.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of alternatives (the first k arms).
    #[arg(long)]
    pub k: Option<usize>,
    /// Target error level.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Alternative gap; the smallest gap under the linear pattern.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Largest gap under the linear pattern.
    #[arg(long)]
    pub gap_max: Option<f64>,
    #[arg(long, value_enum)]
    pub gap_pattern: Option<GapPatternArg>,
    /// Baseline mean.
    #[arg(long, allow_negative_numbers = true)]
    pub mu0: Option<f64>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseArg>,
    #[arg(long, value_enum)]
    pub error_mode: Option<ErrorModeArg>,
    #[arg(long, value_enum)]
    pub detect_mode: Option<DetectModeArg>,
    /// Algorithm for `run`; ignored by `compare` and `suite`.
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    /// Total sample budget per trial.
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub bh_level: Option<BhLevelArg>,
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleArg>,
    /// Constant of the simple schedule.
    #[arg(long)]
    pub c_phi: Option<f64>,
    /// Mean TPR that counts as detection (default 1 - delta).
    #[arg(long)]
    pub target_tpr: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! layer {
    ($top:expr, $bottom:expr, $($field:ident),+ $(,)?) => {
        Settings { $($field: $top.$field.or($bottom.$field)),+ }
    };
}

impl Settings {
    /// Flags in `self` win over values in `file`.
    pub fn over(self, file: Settings) -> Settings {
        layer!(
            self, file, n, k, delta, gap, gap_max, gap_pattern, mu0, noise, error_mode,
            detect_mode, algo, horizon, trials, seed, workers, bh_level, schedule, c_phi,
            target_tpr, out,
        )
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::ConfigFile { path: path.to_owned(), message: e.to_string() })
    }
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub algo: Algorithm,
    pub engine: EngineConfig,
    pub horizon: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub workers: usize,
    pub target_tpr: f64,
    pub out: PathBuf,
}

pub const DEFAULT_DELTA: f64 = 0.05;

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<RunConfig, Error> {
        let n = s.n.unwrap_or(100);
        let k = s.k.unwrap_or_else(|| (n / 10).max(1).min(n));
        let delta = s.delta.unwrap_or(DEFAULT_DELTA);
        let mu0 = s.mu0.unwrap_or(0.0);
        let gap = s.gap.unwrap_or(1.0);
        let gaps = match s.gap_pattern.unwrap_or(GapPatternArg::Constant) {
            GapPatternArg::Constant => {
                if s.gap_max.is_some() {
                    return Err(Error::config("gap-max", "only used with --gap-pattern linear"));
                }
                GapPattern::Constant { gap }
            }
            GapPatternArg::Linear => {
                let max = s
                    .gap_max
                    .ok_or_else(|| Error::config("gap-max", "required with --gap-pattern linear"))?;
                GapPattern::Linear { min: gap, max }
            }
        };
        let noise = match s.noise.unwrap_or(NoiseArg::Gaussian) {
            NoiseArg::Gaussian => Noise::Gaussian,
            NoiseArg::Bernoulli => Noise::Bernoulli,
        };
        let instance = InstanceSpec { n, k, mu0, noise, gaps };
        instance.validate()?;

        let schedule = match (s.schedule.unwrap_or(ScheduleArg::Kaufmann), s.c_phi) {
            (ScheduleArg::Simple, c) => ConfidenceSchedule::SimpleLil { c_phi: c.unwrap_or(4.0) },
            (ScheduleArg::Kaufmann, None) => ConfidenceSchedule::KaufmannLil,
            (ScheduleArg::Kaufmann, Some(_)) => {
                return Err(Error::config("c-phi", "only used with --schedule simple"));
            }
        };
        let engine = EngineConfig {
            n,
            mu0,
            delta,
            error_mode: match s.error_mode.unwrap_or(ErrorModeArg::Fdr) {
                ErrorModeArg::Fdr => ErrorMode::Fdr,
                ErrorModeArg::Fwer => ErrorMode::Fwer,
            },
            detect_mode: match s.detect_mode.unwrap_or(DetectModeArg::Tpr) {
                DetectModeArg::Tpr => DetectMode::Tpr,
                DetectModeArg::Fwpd => DetectMode::Fwpd,
            },
            schedule,
            bh_level: match s.bh_level.unwrap_or(BhLevelArg::Practical) {
                BhLevelArg::Practical => BhLevel::Practical,
                BhLevelArg::Theoretical => BhLevel::Theoretical,
            },
        };
        engine.validate()?;

        let algo = match s.algo.unwrap_or(AlgoArg::Ucb) {
            AlgoArg::Ucb => Algorithm::Ucb,
            AlgoArg::Uniform => Algorithm::Uniform,
            AlgoArg::Se => Algorithm::Se,
        };
        let horizon = s.horizon.unwrap_or(50_000);
        if horizon < n as u64 {
            return Err(Error::config("horizon", format!("must be at least n = {n}, got {horizon}")));
        }
        let trials = s.trials.unwrap_or(100);
        if trials == 0 {
            return Err(Error::config("trials", "need at least one trial"));
        }
        let target_tpr = s.target_tpr.unwrap_or(1.0 - delta);
        if !(0.0..=1.0).contains(&target_tpr) {
            return Err(Error::config("target-tpr", format!("must lie in [0, 1], got {target_tpr}")));
        }

        Ok(RunConfig {
            instance,
            algo,
            engine,
            horizon,
            trials,
            base_seed: s.seed.unwrap_or(0),
            workers: s.workers.unwrap_or(0),
            target_tpr,
            out: s.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}
