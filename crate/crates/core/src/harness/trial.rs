use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::{InstanceSpec, SimEnvironment};
use crate::baselines::{Baseline, BaselineKind};
use crate::engine::{Engine, EngineConfig, EngineState, ErrorMode, StepOutcome};
use crate::error::{Error, Result};

/// Growth ratio of the checkpoint grid.
pub const CHECKPOINT_RATIO: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ucb,
    Uniform,
    Se,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ucb, Algorithm::Se, Algorithm::Uniform];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ucb => "ucb",
            Algorithm::Uniform => "uniform",
            Algorithm::Se => "se",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ucb" => Ok(Algorithm::Ucb),
            "uniform" => Ok(Algorithm::Uniform),
            "se" => Ok(Algorithm::Se),
            other => Err(Error::config("algo", format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Discovery counts at one grid point. Alternatives are true positives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub total_samples: u64,
    pub s_tp: u32,
    pub s_fp: u32,
    pub r_tp: u32,
    pub r_fp: u32,
}

impl Checkpoint {
    fn of(state: &EngineState, k: usize, total_samples: u64) -> Self {
        let (s_tp, s_fp, r_tp, r_fp) = state.split_counts(k);
        Checkpoint {
            total_samples,
            s_tp: s_tp as u32,
            s_fp: s_fp as u32,
            r_tp: r_tp as u32,
            r_fp: r_fp as u32,
        }
    }

    pub fn s_size(&self) -> u32 {
        self.s_tp + self.s_fp
    }

    pub fn r_size(&self) -> u32 {
        self.r_tp + self.r_fp
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

/// `{n} ∪ {⌈1.1^x⌉ : n < ⌈1.1^x⌉ < horizon} ∪ {horizon}`, ascending.
pub fn checkpoint_grid(n: u64, horizon: u64) -> Vec<u64> {
    let mut grid = vec![n];
    let mut x = 0;
    loop {
        let g = CHECKPOINT_RATIO.powi(x).ceil() as u64;
        if g >= horizon {
            break;
        }
        if g > *grid.last().unwrap() {
            grid.push(g);
        }
        x += 1;
    }
    if horizon > n {
        grid.push(horizon);
    }
    grid
}

enum Runner {
    Ucb(Engine),
    Baseline(Baseline),
}

impl Runner {
    fn state(&self) -> &EngineState {
        match self {
            Runner::Ucb(e) => e.state(),
            Runner::Baseline(b) => b.state(),
        }
    }

    // Upper bound on the pulls the next advance can make.
    fn max_next_pulls(&self) -> u64 {
        match self {
            Runner::Ucb(e) if e.config().error_mode == ErrorMode::Fwer => 2,
            Runner::Ucb(_) => 1,
            Runner::Baseline(b) => b.pending_pulls() as u64,
        }
    }

    fn advance(&mut self, env: &mut SimEnvironment) -> Result<StepOutcome> {
        match self {
            Runner::Ucb(e) => e.step(env),
            Runner::Baseline(b) => b.round(env),
        }
    }
}

fn check_compatible(spec: &InstanceSpec, config: &EngineConfig, horizon: u64) -> Result<()> {
    spec.validate()?;
    config.validate()?;
    if config.n != spec.n {
        return Err(Error::config("n", format!("engine has {} arms, instance has {}", config.n, spec.n)));
    }
    if config.mu0 != spec.mu0 {
        return Err(Error::config(
            "mu0",
            format!("engine threshold {} differs from instance baseline {}", config.mu0, spec.mu0),
        ));
    }
    if horizon < spec.n as u64 {
        return Err(Error::config("horizon", format!("must be at least n = {}", spec.n)));
    }
    Ok(())
}

/// Runs one algorithm until `horizon` samples have been spent or nothing is
/// left to sample. Grid point `g` records the last state that used at most
/// `g` samples.
pub fn run_trial(
    spec: &InstanceSpec,
    algo: Algorithm,
    config: &EngineConfig,
    horizon: u64,
    trial: u64,
    seed: u64,
) -> Result<TrialRecord> {
    check_compatible(spec, config, horizon)?;
    let mut env = spec.environment(seed);
    let mut runner = match algo {
        Algorithm::Ucb => Runner::Ucb(Engine::initialize(*config, &mut env)?),
        Algorithm::Uniform => {
            Runner::Baseline(Baseline::initialize(*config, BaselineKind::Uniform, &mut env)?)
        }
        Algorithm::Se => Runner::Baseline(Baseline::initialize(
            *config,
            BaselineKind::SuccessiveElimination,
            &mut env,
        )?),
    };

    let grid = checkpoint_grid(spec.n as u64, horizon);
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut next = 0;
    let k = spec.k;

    while runner.state().total_samples < horizon {
        let before = runner.state().total_samples;
        let pending = (next < grid.len() && grid[next] < before + runner.max_next_pulls())
            .then(|| Checkpoint::of(runner.state(), k, 0));
        if runner.advance(&mut env)? == StepOutcome::Converged {
            break;
        }
        let after = runner.state().total_samples;
        while next < grid.len() && grid[next] < after {
            let cp = pending.expect("grid point crossed without a pending checkpoint");
            checkpoints.push(Checkpoint { total_samples: grid[next], ..cp });
            next += 1;
        }
    }
    let last = Checkpoint::of(runner.state(), k, 0);
    for &g in &grid[next..] {
        checkpoints.push(Checkpoint { total_samples: g, ..last });
    }

    Ok(TrialRecord { trial, seed, checkpoints })
}

/// Trial `i` uses seed `base_seed + i`. Records come back in trial order
/// regardless of `workers`; `workers = 0` uses rayon's default pool.
pub fn run_trials(
    spec: &InstanceSpec,
    algo: Algorithm,
    config: &EngineConfig,
    horizon: u64,
    trials: u64,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<TrialRecord>> {
    check_compatible(spec, config, horizon)?;
    let work = || {
        (0..trials)
            .into_par_iter()
            .map(|i| run_trial(spec, algo, config, horizon, i, base_seed.wrapping_add(i)))
            .collect::<Result<Vec<_>>>()
    };
    if workers == 0 {
        return work();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Environment(format!("worker pool: {e}")))?;
    pool.install(work)
}
