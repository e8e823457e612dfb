use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::InstanceSpec;
use super::trial::{Checkpoint, TrialRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Standard error of the mean; `None` with fewer than two trials.
    pub se: Option<f64>,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let m = values.len();
        let mean = values.iter().sum::<f64>() / m as f64;
        let se = (m >= 2).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            (var / m as f64).sqrt()
        });
        MeanSe { mean, se }
    }

    /// `mean <= bound + width * se`, treating a missing SE as zero.
    pub fn within(&self, bound: f64, width: f64) -> bool {
        self.mean <= bound + width * self.se.unwrap_or(0.0)
    }
}

/// Cross-trial statistics at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub total_samples: u64,
    /// `|S ∩ H1| / |H1|`, 1 when there are no alternatives.
    pub tpr: MeanSe,
    /// `|S ∩ H0| / max(|S|, 1)`.
    pub fdp: MeanSe,
    /// Fraction of trials with `H1 ⊆ S`.
    pub fwpd: f64,
    pub r_tpr: MeanSe,
    pub r_fdp: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub trials: usize,
    pub curve: Vec<CheckpointStats>,
    /// Fraction of trials in which `S` ever held a null.
    pub s_fwer: MeanSe,
    /// Fraction of trials in which `R` ever held a null.
    pub r_fwer: MeanSe,
}

fn rate(num: u32, den: u32, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

fn tpr(cp: &Checkpoint, k: u32) -> f64 {
    rate(cp.s_tp, k, 1.0)
}

fn check_grid(trials: &[TrialRecord]) -> Result<()> {
    let first = trials
        .first()
        .ok_or_else(|| Error::MismatchedGrid("no trials to aggregate".into()))?;
    for t in &trials[1..] {
        let same = t.checkpoints.len() == first.checkpoints.len()
            && t
                .checkpoints
                .iter()
                .zip(&first.checkpoints)
                .all(|(a, b)| a.total_samples == b.total_samples);
        if !same {
            return Err(Error::MismatchedGrid(format!(
                "trial {} differs from trial {}",
                t.trial, first.trial
            )));
        }
    }
    Ok(())
}

/// Per-checkpoint means and standard errors across trials.
pub fn aggregate(trials: &[TrialRecord], spec: &InstanceSpec) -> Result<AggregateMetrics> {
    check_grid(trials)?;
    let k = spec.k as u32;
    let points = trials[0].checkpoints.len();
    let mut curve = Vec::with_capacity(points);
    let column = |f: &dyn Fn(&Checkpoint) -> f64, j: usize| -> Vec<f64> {
        trials.iter().map(|t| f(&t.checkpoints[j])).collect()
    };
    for j in 0..points {
        let fwpd = column(&|c| f64::from(c.s_tp == k), j);
        curve.push(CheckpointStats {
            total_samples: trials[0].checkpoints[j].total_samples,
            tpr: MeanSe::of(&column(&|c| tpr(c, k), j)),
            fdp: MeanSe::of(&column(&|c| rate(c.s_fp, c.s_size(), 0.0), j)),
            fwpd: fwpd.iter().sum::<f64>() / fwpd.len() as f64,
            r_tpr: MeanSe::of(&column(&|c| rate(c.r_tp, k, 1.0), j)),
            r_fdp: MeanSe::of(&column(&|c| rate(c.r_fp, c.r_size(), 0.0), j)),
        });
    }
    // Both sets only grow, so "ever" is read off the last checkpoint.
    let ever = |f: &dyn Fn(&Checkpoint) -> bool| -> Vec<f64> {
        trials
            .iter()
            .map(|t| f64::from(t.checkpoints.last().is_some_and(f)))
            .collect()
    };
    Ok(AggregateMetrics {
        trials: trials.len(),
        curve,
        s_fwer: MeanSe::of(&ever(&|c| c.s_fp > 0)),
        r_fwer: MeanSe::of(&ever(&|c| c.r_fp > 0)),
    })
}

/// First checkpoint whose mean TPR reaches `target`.
pub fn samples_to_tpr(metrics: &AggregateMetrics, target: f64) -> Option<u64> {
    metrics
        .curve
        .iter()
        .find(|c| c.tpr.mean >= target)
        .map(|c| c.total_samples)
}

/// Bootstrap spread of [`samples_to_tpr`] over resampled trial sets.
///
/// Resamples whose mean curve never reaches `target` are dropped; returns
/// `None` if more than half of them are dropped or there are fewer than two trials.
pub fn samples_to_tpr_spread(
    trials: &[TrialRecord],
    spec: &InstanceSpec,
    target: f64,
    resamples: usize,
    seed: u64,
) -> Result<Option<f64>> {
    check_grid(trials)?;
    let m = trials.len();
    if m < 2 || resamples < 2 {
        return Ok(None);
    }
    let k = spec.k as u32;
    let points = trials[0].checkpoints.len();
    let tprs: Vec<Vec<f64>> = trials
        .iter()
        .map(|t| t.checkpoints.iter().map(|c| tpr(c, k)).collect())
        .collect();
    let grid: Vec<u64> = trials[0].checkpoints.iter().map(|c| c.total_samples).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = vec![0.0; points];
    let mut hits = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for _ in 0..m {
            let row = &tprs[rng.gen_range(0..m)];
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        if let Some(j) = sums.iter().position(|s| s / m as f64 >= target) {
            hits.push(grid[j] as f64);
        }
    }
    if hits.len() * 2 < resamples {
        return Ok(None);
    }
    Ok(MeanSe::of(&hits).se.map(|se| se * (hits.len() as f64).sqrt()))
}
