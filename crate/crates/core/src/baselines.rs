//! Non-adaptive comparison strategies: uniform allocation and successive
//! elimination. Both share the engine's state and BH machinery, but run BH
//! only over arms not yet in `S` and grow `S` by union.

use serde::{Deserialize, Serialize};

use crate::engine::{EngineConfig, EngineState, Environment, StepOutcome};
use crate::error::Result;
use crate::selection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Every round pulls all `n` arms.
    Uniform,
    /// Every round pulls the arms not yet in `S`.
    SuccessiveElimination,
}

#[derive(Debug, Clone)]
pub struct Baseline {
    config: EngineConfig,
    kind: BaselineKind,
    state: EngineState,
    level: f64,
    ranks: Vec<Option<usize>>,
    counts: Vec<usize>,
}

impl Baseline {
    /// Pulls every arm once and applies the first BH pass, which is exactly
    /// the first round of either strategy.
    pub fn initialize<E: Environment + ?Sized>(
        config: EngineConfig,
        kind: BaselineKind,
        env: &mut E,
    ) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        let mut baseline = Baseline {
            config,
            kind,
            state: EngineState::new(n),
            level: config.selection().level(),
            ranks: vec![None; n],
            counts: Vec::with_capacity(n + 1),
        };
        for i in 0..n {
            baseline.pull(i, env)?;
        }
        baseline.state.round = 1;
        baseline.select();
        Ok(baseline)
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    fn pull<E: Environment + ?Sized>(&mut self, arm: usize, env: &mut E) -> Result<()> {
        let reward = env.pull(arm)?;
        self.state.record(arm, reward);
        let c = &self.config;
        self.ranks[arm] =
            selection::entry_rank(&self.state.arms[arm], c.n, c.mu0, self.level, &c.schedule);
        Ok(())
    }

    // BH over [n] \ S with thresholds on the full n; S grows by union.
    fn select(&mut self) {
        let n = self.config.n;
        let state = &self.state;
        let ranks = &self.ranks;
        let pool = (0..n).filter(|&i| !state.in_s(i)).map(|i| ranks[i]);
        if let Some(k_hat) = selection::k_hat_from_ranks(pool, n, &mut self.counts) {
            for i in 0..n {
                if !self.state.in_s(i) && matches!(self.ranks[i], Some(k) if k <= k_hat) {
                    self.state.add_to_s(i);
                }
            }
        }
    }

    /// Arms the next round will pull.
    pub fn pending_pulls(&self) -> usize {
        match self.kind {
            BaselineKind::Uniform => self.config.n,
            BaselineKind::SuccessiveElimination => self.config.n - self.state.s_size(),
        }
    }

    /// One round: pull the strategy's arm set once each, then apply BH.
    pub fn round<E: Environment + ?Sized>(&mut self, env: &mut E) -> Result<StepOutcome> {
        let n = self.config.n;
        let pulls = self.pending_pulls();
        if pulls == 0 {
            return Ok(StepOutcome::Converged);
        }
        for i in 0..n {
            if self.kind == BaselineKind::Uniform || !self.state.in_s(i) {
                self.pull(i, env)?;
            }
        }
        self.select();
        self.state.round += 1;
        Ok(StepOutcome::Pulled(pulls))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn recording_env(means: Vec<f64>) -> (impl FnMut(usize) -> Result<f64>, std::rc::Rc<std::cell::RefCell<Vec<usize>>>) {
        let log = std::rc::Rc::new(std::cell::RefCell::new(Vec::new()));
        let sink = log.clone();
        (
            move |i: usize| {
                sink.borrow_mut().push(i);
                Ok(means[i])
            },
            log,
        )
    }

    #[test]
    fn uniform_cost_is_constant() {
        let (mut env, _) = recording_env(vec![0.0; 10]);
        let mut b = Baseline::initialize(EngineConfig::new(10, 0.05), BaselineKind::Uniform, &mut env).unwrap();
        assert_eq!(b.state().total_samples, 10);
        for r in 1..=7u64 {
            assert_eq!(b.round(&mut env).unwrap(), StepOutcome::Pulled(10));
            assert_eq!(b.state().total_samples, 10 + 10 * r);
        }
    }

    #[test]
    fn elimination_skips_discovered_arms() {
        let means = vec![4.0, 4.0, 4.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let (mut env, log) = recording_env(means);
        let mut b = Baseline::initialize(
            EngineConfig::new(10, 0.05),
            BaselineKind::SuccessiveElimination,
            &mut env,
        )
        .unwrap();
        let mut last_cost = usize::MAX;
        while b.state().s_size() < 4 {
            let StepOutcome::Pulled(cost) = b.round(&mut env).unwrap() else { panic!() };
            assert!(cost <= last_cost);
            last_cost = cost;
        }
        assert_eq!(b.state().s_size(), 4);
        assert_eq!(b.pending_pulls(), 6);
        log.borrow_mut().clear();
        assert_eq!(b.round(&mut env).unwrap(), StepOutcome::Pulled(6));
        assert!(log.borrow().iter().all(|&i| i >= 4));
    }

    #[test]
    fn elimination_converges_once_everything_is_selected() {
        let (mut env, _) = recording_env(vec![3.0; 3]);
        let mut b = Baseline::initialize(
            EngineConfig::new(3, 0.05),
            BaselineKind::SuccessiveElimination,
            &mut env,
        )
        .unwrap();
        for _ in 0..1000 {
            if b.round(&mut env).unwrap() == StepOutcome::Converged {
                break;
            }
        }
        assert_eq!(b.state().s_size(), 3);
        assert_eq!(b.round(&mut env).unwrap(), StepOutcome::Converged);
    }

    #[test]
    fn propagates_environment_errors() {
        let mut env = |_: usize| -> Result<f64> { Err(Error::Environment("down".into())) };
        assert!(Baseline::initialize(EngineConfig::new(2, 0.05), BaselineKind::Uniform, &mut env).is_err());
    }
}
