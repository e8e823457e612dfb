//! Selection rules applied every round: Benjamini-Hochberg on anytime p-values
//! (the FDR-controlled set) and the Bonferroni-like filter that promotes
//! discoveries into the FWER-controlled set.

use serde::{Deserialize, Serialize};

use crate::confidence::{ConfidenceSchedule, INV_E};
use crate::engine::ArmState;
use crate::error::{Error, Result};

/// Level at which Benjamini-Hochberg is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BhLevel {
    /// BH at `delta`. What the experiments use.
    #[default]
    Practical,
    /// BH at `delta' = delta / (6.4 ln(36 / delta))`.
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub delta: f64,
    pub bh_level: BhLevel,
}

impl SelectionParams {
    pub fn new(delta: f64, bh_level: BhLevel) -> Result<Self> {
        check_delta(delta)?;
        Ok(SelectionParams { delta, bh_level })
    }

    /// The level handed to BH under the configured policy.
    pub fn level(&self) -> f64 {
        match self.bh_level {
            BhLevel::Practical => self.delta,
            BhLevel::Theoretical => delta_prime_unchecked(self.delta),
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= INV_E {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must lie in (0, e^-1], got {delta}")))
    }
}

fn delta_prime_unchecked(delta: f64) -> f64 {
    delta / (6.4 * (36.0 / delta).ln())
}

/// `delta / (6.4 ln(36 / delta))` for `delta` in `(0, e^-1]`.
pub fn delta_prime(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(delta_prime_unchecked(delta))
}

/// BH threshold for rank `k` out of `n`. Every selection path goes through this.
#[inline]
pub fn bh_threshold(level: f64, k: usize, n: usize) -> f64 {
    level * k as f64 / n as f64
}

/// Output of a BH pass: the selected indices (ascending) and `k_hat`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BhSelection {
    pub selected: Vec<usize>,
    pub k_hat: Option<usize>,
}

impl BhSelection {
    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Benjamini-Hochberg on explicit p-values, `O(n log n)`.
///
/// `k_hat = max { k : |{ i : p_i <= level k / n }| >= k }` and the selection is
/// `s(k_hat)`. Ties at the threshold are included.
pub fn bh_select(p_values: &[f64], level: f64) -> BhSelection {
    let n = p_values.len();
    let mut sorted = p_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k_hat = (1..=n).rev().find(|&k| sorted[k - 1] <= bh_threshold(level, k, n));
    let Some(k_hat) = k_hat else {
        return BhSelection::default();
    };
    let cut = bh_threshold(level, k_hat, n);
    let selected = p_values
        .iter()
        .enumerate()
        .filter(|(_, &p)| p <= cut)
        .map(|(i, _)| i)
        .collect();
    BhSelection { selected, k_hat: Some(k_hat) }
}

/// Whether an arm's lower confidence bound at `level` clears `mu0`.
#[inline]
pub(crate) fn clears(arm: &ArmState, mu0: f64, level: f64, schedule: &ConfidenceSchedule) -> bool {
    arm.mean() - mu0 >= schedule.radius(arm.pulls() as f64, level)
}

/// Smallest `k` in `1..=n` at which the arm enters `s(k)`, if any.
///
/// `s(k)` grows with `k` because the radius is non-increasing in its level,
/// so a binary search over `k` is exact.
pub fn entry_rank(
    arm: &ArmState,
    n: usize,
    mu0: f64,
    level: f64,
    schedule: &ConfidenceSchedule,
) -> Option<usize> {
    if arm.pulls() == 0 || arm.mean() <= mu0 {
        return None;
    }
    let passes = |k: usize| clears(arm, mu0, bh_threshold(level, k, n), schedule);
    if !passes(n) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, n);
    // passes(hi) holds; passes(lo) fails or lo == 0.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `k_hat = max { k : #{ rank <= k } >= k }` over a stream of entry ranks.
/// `counts` is scratch space, resized to `n + 1`.
pub(crate) fn k_hat_from_ranks<I>(ranks: I, n: usize, counts: &mut Vec<usize>) -> Option<usize>
where
    I: IntoIterator<Item = Option<usize>>,
{
    counts.clear();
    counts.resize(n + 1, 0);
    for k in ranks.into_iter().flatten() {
        counts[k] += 1;
    }
    let mut cumulative = 0;
    let mut k_hat = None;
    for (k, c) in counts.iter().enumerate().skip(1) {
        cumulative += c;
        if cumulative >= k {
            k_hat = Some(k);
        }
    }
    k_hat
}

/// BH from per-candidate entry ranks. Thresholds always use the full `n`,
/// even when only a subset of arms are candidates.
pub fn select_from_ranks<I>(ranks: I, n: usize) -> BhSelection
where
    I: IntoIterator<Item = (usize, Option<usize>)> + Clone,
{
    let mut counts = Vec::new();
    let Some(k_hat) = k_hat_from_ranks(ranks.clone().into_iter().map(|(_, r)| r), n, &mut counts)
    else {
        return BhSelection::default();
    };
    let mut selected: Vec<usize> = ranks
        .into_iter()
        .filter(|(_, r)| matches!(r, Some(k) if *k <= k_hat))
        .map(|(i, _)| i)
        .collect();
    selected.sort_unstable();
    BhSelection { selected, k_hat: Some(k_hat) }
}

/// Threshold-form BH over every arm:
/// `s(k) = { i : mean_i - phi(T_i, level k / n) >= mu0 }`.
pub fn bh_select_from_arms(
    arms: &[ArmState],
    mu0: f64,
    level: f64,
    schedule: &ConfidenceSchedule,
) -> Result<BhSelection> {
    if let Some(i) = arms.iter().position(|a| a.pulls() == 0) {
        return Err(Error::Domain(format!("arm {i} has never been pulled")));
    }
    let n = arms.len();
    for k in [1, n] {
        schedule.check_delta(bh_threshold(level, k, n))?;
    }
    let ranks: Vec<_> = arms
        .iter()
        .enumerate()
        .map(|(i, a)| (i, entry_rank(a, n, mu0, level, schedule)))
        .collect();
    Ok(select_from_ranks(ranks.iter().copied(), n))
}

/// Surrogate for the number of nulls,
/// `n - (1 - 2d(1 + 4d)) |S| + (4(1 + 4d) / 3) ln(5 log2(n / d) / d)`, at least 1.
pub fn chi(n: usize, s_size: usize, delta_prime: f64) -> f64 {
    let d = delta_prime;
    let n_f = n as f64;
    let shrink = 1.0 - 2.0 * d * (1.0 + 4.0 * d);
    let slack = 4.0 * (1.0 + 4.0 * d) / 3.0 * (5.0 * (n_f / d).log2() / d).ln();
    (n_f - shrink * s_size as f64 + slack).max(1.0)
}

/// Candidates whose lower confidence bound at `delta / chi` clears `mu0`.
pub fn bonferroni_filter<'a, I>(
    candidates: I,
    chi_val: f64,
    delta: f64,
    mu0: f64,
    schedule: &ConfidenceSchedule,
) -> Result<Vec<usize>>
where
    I: IntoIterator<Item = (usize, &'a ArmState)>,
{
    let level = delta / chi_val.max(1.0);
    schedule.check_delta(level)?;
    Ok(candidates
        .into_iter()
        .filter(|(_, arm)| arm.pulls() > 0 && clears(arm, mu0, level, schedule))
        .map(|(i, _)| i)
        .collect())
}
