//! The adaptive sampling loop.
//!
//! Each round pulls the undiscovered arm with the highest upper confidence
//! bound, re-runs BH over all arms to grow the discovery set `S`, and, when
//! family-wise control is requested, pulls one more arm from `S \ R` and
//! promotes arms into `R` through the Bonferroni-like filter.

use serde::{Deserialize, Serialize};

use crate::confidence::ConfidenceSchedule;
use crate::error::{Error, Result};
use crate::selection::{self, bh_threshold, BhLevel, SelectionParams};

/// Source of rewards. Implementations own their randomness so that a seeded
/// environment yields the same reward stream on every run.
pub trait Environment {
    fn pull(&mut self, arm: usize) -> Result<f64>;
}

impl<F> Environment for F
where
    F: FnMut(usize) -> Result<f64>,
{
    fn pull(&mut self, arm: usize) -> Result<f64> {
        self(arm)
    }
}

/// Running statistics for one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmState {
    pulls: u64,
    reward_sum: f64,
}

impl ArmState {
    pub fn from_summary(pulls: u64, reward_sum: f64) -> Self {
        ArmState { pulls, reward_sum }
    }

    pub fn record(&mut self, reward: f64) {
        self.pulls += 1;
        self.reward_sum += reward;
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn reward_sum(&self) -> f64 {
        self.reward_sum
    }

    /// Empirical mean; NaN before the first pull.
    pub fn mean(&self) -> f64 {
        if self.pulls == 0 {
            f64::NAN
        } else {
            self.reward_sum / self.pulls as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    #[default]
    Fdr,
    Fwer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectMode {
    #[default]
    Tpr,
    Fwpd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub n: usize,
    pub mu0: f64,
    pub delta: f64,
    pub error_mode: ErrorMode,
    pub detect_mode: DetectMode,
    pub schedule: ConfidenceSchedule,
    pub bh_level: BhLevel,
}

impl EngineConfig {
    /// FDR + TPR with the Kaufmann radius and BH at `delta`.
    pub fn new(n: usize, delta: f64) -> Self {
        EngineConfig {
            n,
            mu0: 0.0,
            delta,
            error_mode: ErrorMode::Fdr,
            detect_mode: DetectMode::Tpr,
            schedule: ConfidenceSchedule::KaufmannLil,
            bh_level: BhLevel::Practical,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "need at least one arm"));
        }
        if !self.mu0.is_finite() {
            return Err(Error::config("mu0", format!("must be finite, got {}", self.mu0)));
        }
        if !(self.delta > 0.0 && self.delta <= crate::confidence::INV_E) {
            return Err(Error::config(
                "delta",
                format!("must lie in (0, e^-1], got {}", self.delta),
            ));
        }
        if self.detect_mode == DetectMode::Fwpd && self.delta >= 0.25 {
            return Err(Error::config(
                "delta",
                format!("FWPD detection needs delta < 1/4, got {}", self.delta),
            ));
        }
        self.schedule
            .validate()
            .map_err(|e| Error::config("schedule", e.to_string()))?;
        Ok(())
    }

    pub fn selection(&self) -> SelectionParams {
        SelectionParams { delta: self.delta, bh_level: self.bh_level }
    }
}

/// Inflation applied to the UCB level for `I_t`.
pub fn xi(config: &EngineConfig, s_size: usize) -> f64 {
    match config.detect_mode {
        DetectMode::Tpr => 1.0,
        DetectMode::Fwpd => {
            let d = config.delta;
            let floor = 5.0 / (3.0 * (1.0 - 4.0 * d)) * (1.0 / d).ln();
            (2.0 * s_size as f64).max(floor)
        }
    }
}

/// Inflation applied to the UCB level for `J_t`.
pub fn nu(config: &EngineConfig, s_size: usize) -> f64 {
    match config.detect_mode {
        DetectMode::Tpr => 1.0,
        DetectMode::Fwpd => s_size.max(1) as f64,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineState {
    pub arms: Vec<ArmState>,
    in_s: Vec<bool>,
    in_r: Vec<bool>,
    s_size: usize,
    r_size: usize,
    pub round: u64,
    pub total_samples: u64,
}

impl EngineState {
    pub(crate) fn new(n: usize) -> Self {
        EngineState {
            arms: vec![ArmState::default(); n],
            in_s: vec![false; n],
            in_r: vec![false; n],
            s_size: 0,
            r_size: 0,
            round: 0,
            total_samples: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.arms.len()
    }

    pub fn in_s(&self, i: usize) -> bool {
        self.in_s[i]
    }

    pub fn in_r(&self, i: usize) -> bool {
        self.in_r[i]
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn r_size(&self) -> usize {
        self.r_size
    }

    pub fn discoveries(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_s.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn confirmed(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_r.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// `(|S ∩ [0, k)|, |S \ [0, k)|, |R ∩ [0, k)|, |R \ [0, k)|)`.
    pub fn split_counts(&self, k: usize) -> (usize, usize, usize, usize) {
        let s_tp = self.in_s[..k].iter().filter(|&&b| b).count();
        let r_tp = self.in_r[..k].iter().filter(|&&b| b).count();
        (s_tp, self.s_size - s_tp, r_tp, self.r_size - r_tp)
    }

    pub(crate) fn add_to_s(&mut self, i: usize) -> bool {
        if self.in_s[i] {
            return false;
        }
        self.in_s[i] = true;
        self.s_size += 1;
        true
    }

    pub(crate) fn add_to_r(&mut self, i: usize) {
        debug_assert!(self.in_s[i], "R must stay inside S");
        if !self.in_r[i] {
            self.in_r[i] = true;
            self.r_size += 1;
        }
    }

    pub(crate) fn record(&mut self, arm: usize, reward: f64) {
        self.arms[arm].record(reward);
        self.total_samples += 1;
    }

    pub fn snapshot(&self) -> DiscoverySnapshot {
        DiscoverySnapshot {
            round: self.round,
            total_samples: self.total_samples,
            s: self.discoveries().collect(),
            r: self.confirmed().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoverySnapshot {
    pub round: u64,
    pub total_samples: u64,
    pub s: Vec<usize>,
    pub r: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// Number of pulls made this round.
    Pulled(usize),
    /// Nothing left to sample: every arm is in `S`, and in FWER mode also in `R`.
    Converged,
}

/// Algorithm state plus per-arm caches for the hot loop.
///
/// The caches hold exactly what a fresh computation would: the UCB index at
/// the current `delta / xi` and the BH entry rank at the policy level. Only
/// the arms pulled in a round are recomputed.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    state: EngineState,
    level: f64,
    delta_prime: f64,
    ucb: Vec<f64>,
    ucb_xi: f64,
    ranks: Vec<Option<usize>>,
    counts: Vec<usize>,
}

impl Engine {
    /// Pulls every arm once. `S` and `R` start empty.
    pub fn initialize<E: Environment + ?Sized>(config: EngineConfig, env: &mut E) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        let mut state = EngineState::new(n);
        for i in 0..n {
            let reward = env.pull(i)?;
            state.record(i, reward);
        }
        state.round = n as u64;
        let level = config.selection().level();
        let delta_prime = selection::delta_prime(config.delta)?;
        let mut engine = Engine {
            config,
            state,
            level,
            delta_prime,
            ucb: vec![0.0; n],
            ucb_xi: xi(&config, 0),
            ranks: vec![None; n],
            counts: Vec::with_capacity(n + 1),
        };
        for i in 0..n {
            engine.refresh_arm(i);
        }
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn snapshot(&self) -> DiscoverySnapshot {
        self.state.snapshot()
    }

    pub fn is_converged(&self) -> bool {
        let n = self.config.n;
        self.state.s_size == n
            && (self.config.error_mode == ErrorMode::Fdr || self.state.r_size == n)
    }

    fn ucb_index(&self, arm: usize, level: f64) -> f64 {
        let a = &self.state.arms[arm];
        a.mean() + self.config.schedule.radius(a.pulls() as f64, level)
    }

    fn refresh_arm(&mut self, i: usize) {
        let c = &self.config;
        self.ucb[i] = self.ucb_index(i, c.delta / self.ucb_xi);
        self.ranks[i] = selection::entry_rank(&self.state.arms[i], c.n, c.mu0, self.level, &c.schedule);
    }

    fn sync_xi(&mut self) {
        let current = xi(&self.config, self.state.s_size);
        if current != self.ucb_xi {
            self.ucb_xi = current;
            let level = self.config.delta / current;
            for i in 0..self.config.n {
                self.ucb[i] = self.ucb_index(i, level);
            }
        }
    }

    /// `argmax_{i not in S} mean_i + phi(T_i, delta / xi)`, lowest index on ties.
    /// `None` once every arm is in `S`.
    pub fn select_arm_i(&self) -> Option<usize> {
        argmax(
            (0..self.config.n)
                .filter(|&i| !self.state.in_s[i])
                .map(|i| (i, self.ucb[i])),
        )
    }

    /// `argmax_{i in S \ R} mean_i + phi(T_i, delta / nu)`, lowest index on ties.
    /// `None` outside FWER mode or when `S \ R` is empty.
    pub fn select_arm_j(&self) -> Option<usize> {
        if self.config.error_mode != ErrorMode::Fwer || self.state.s_size == 0 {
            return None;
        }
        let level = self.config.delta / nu(&self.config, self.state.s_size);
        argmax(
            (0..self.config.n)
                .filter(|&i| self.state.in_s[i] && !self.state.in_r[i])
                .map(|i| (i, self.ucb_index(i, level))),
        )
    }

    fn pull<E: Environment + ?Sized>(&mut self, arm: usize, env: &mut E) -> Result<()> {
        let reward = env.pull(arm)?;
        self.state.record(arm, reward);
        self.refresh_arm(arm);
        Ok(())
    }

    /// One round of the loop.
    pub fn step<E: Environment + ?Sized>(&mut self, env: &mut E) -> Result<StepOutcome> {
        if self.is_converged() {
            return Ok(StepOutcome::Converged);
        }
        let mut pulls = 0usize;

        if let Some(i) = self.select_arm_i() {
            self.pull(i, env)?;
            pulls += 1;
        }

        let n = self.config.n;
        let k_hat = selection::k_hat_from_ranks(self.ranks.iter().copied(), n, &mut self.counts);
        if let Some(k_hat) = k_hat {
            let mut grew = false;
            for i in 0..n {
                if matches!(self.ranks[i], Some(k) if k <= k_hat) {
                    grew |= self.state.add_to_s(i);
                }
            }
            if grew {
                self.sync_xi();
            }
        }

        if self.config.error_mode == ErrorMode::Fwer && self.state.s_size > 0 {
            if let Some(j) = self.select_arm_j() {
                self.pull(j, env)?;
                pulls += 1;
            }
            let chi = selection::chi(n, self.state.s_size, self.delta_prime);
            let state = &self.state;
            let candidates = (0..n)
                .filter(|&i| state.in_s[i] && !state.in_r[i])
                .map(|i| (i, &state.arms[i]));
            let accepted = selection::bonferroni_filter(
                candidates,
                chi,
                self.config.delta,
                self.config.mu0,
                &self.config.schedule,
            )?;
            for i in accepted {
                self.state.add_to_r(i);
            }
        }

        debug_assert!(pulls > 0, "a non-converged round always pulls");
        self.state.round += 1;
        Ok(StepOutcome::Pulled(pulls))
    }

    /// Threshold at which an arm currently enters the BH selection, for diagnostics.
    pub fn entry_threshold(&self, arm: usize) -> Option<f64> {
        self.ranks[arm].map(|k| bh_threshold(self.level, k, self.config.n))
    }
}

fn argmax(items: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in items {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
