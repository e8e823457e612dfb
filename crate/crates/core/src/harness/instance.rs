use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::engine::Environment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// `N(mu_i, 1)` rewards.
    #[default]
    Gaussian,
    /// `Bernoulli(mu_i)` rewards; every mean must lie in `[0, 1]`.
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum GapPattern {
    /// Every alternative sits `gap` above the baseline.
    Constant { gap: f64 },
    /// Gaps evenly spaced from `min` (arm 0) to `max` (arm k - 1).
    Linear { min: f64, max: f64 },
}

/// Ground truth for one simulated problem. Alternatives are the first `k` arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub k: usize,
    pub mu0: f64,
    pub noise: Noise,
    pub gaps: GapPattern,
}

impl InstanceSpec {
    pub fn constant(n: usize, k: usize, gap: f64) -> Self {
        InstanceSpec { n, k, mu0: 0.0, noise: Noise::Gaussian, gaps: GapPattern::Constant { gap } }
    }

    pub fn gaps(&self) -> Vec<f64> {
        match self.gaps {
            GapPattern::Constant { gap } => vec![gap; self.k],
            GapPattern::Linear { min, max } => {
                if self.k == 1 {
                    return vec![min];
                }
                let span = (self.k - 1) as f64;
                (0..self.k).map(|i| min + (max - min) * i as f64 / span).collect()
            }
        }
    }

    /// Smallest alternative gap, if there are alternatives.
    pub fn min_gap(&self) -> Option<f64> {
        self.gaps().into_iter().reduce(f64::min)
    }

    pub fn means(&self) -> Vec<f64> {
        let mut means = vec![self.mu0; self.n];
        for (m, g) in means.iter_mut().zip(self.gaps()) {
            *m += g;
        }
        means
    }

    pub fn is_alternative(&self, arm: usize) -> bool {
        arm < self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "need at least one arm"));
        }
        if self.k > self.n {
            return Err(Error::config("k", format!("{} alternatives exceed n = {}", self.k, self.n)));
        }
        if !self.mu0.is_finite() {
            return Err(Error::config("mu0", "must be finite"));
        }
        match self.gaps {
            GapPattern::Constant { gap } if !(gap > 0.0 && gap.is_finite()) => {
                return Err(Error::config("gap", format!("must be positive, got {gap}")));
            }
            GapPattern::Linear { min, max } if !(min > 0.0 && max >= min && max.is_finite()) => {
                return Err(Error::config(
                    "gap",
                    format!("linear gaps need 0 < min <= max, got [{min}, {max}]"),
                ));
            }
            _ => {}
        }
        if self.noise == Noise::Bernoulli {
            if let Some(bad) = self.means().into_iter().find(|m| !(0.0..=1.0).contains(m)) {
                return Err(Error::config(
                    "noise",
                    format!("bernoulli rewards need means in [0, 1], got {bad}"),
                ));
            }
        }
        Ok(())
    }

    pub fn environment(&self, seed: u64) -> SimEnvironment {
        SimEnvironment {
            means: self.means(),
            noise: self.noise,
            rngs: (0..self.n as u64)
                .map(|arm| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(arm);
                    rng
                })
                .collect(),
        }
    }
}

/// Seeded reward source for an [`InstanceSpec`]. Each arm draws from its own
/// stream, so the j-th reward of an arm depends only on the seed, the arm and
/// j, never on the order in which a strategy visits arms.
#[derive(Debug, Clone)]
pub struct SimEnvironment {
    means: Vec<f64>,
    noise: Noise,
    rngs: Vec<ChaCha8Rng>,
}

impl Environment for SimEnvironment {
    fn pull(&mut self, arm: usize) -> Result<f64> {
        let mean = *self
            .means
            .get(arm)
            .ok_or_else(|| Error::Environment(format!("no arm {arm}")))?;
        let rng = &mut self.rngs[arm];
        Ok(match self.noise {
            Noise::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                mean + z
            }
            Noise::Bernoulli => {
                if rng.gen_bool(mean) {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
}
