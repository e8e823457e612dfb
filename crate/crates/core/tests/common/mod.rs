//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use fdr_bandit::selection::bh_threshold;
use fdr_bandit::ConfidenceSchedule;

/// BH by enumerating every k: `s(k) = { i : p_i <= level k / n }`,
/// `k_hat = max { k : |s(k)| >= k }`.
pub fn brute_force_bh(p: &[f64], level: f64) -> (Vec<usize>, Option<usize>) {
    let n = p.len();
    let s = |k: usize| -> Vec<usize> {
        (0..n).filter(|&i| p[i] <= bh_threshold(level, k, n)).collect()
    };
    let mut best = None;
    for k in 1..=n {
        if s(k).len() >= k {
            best = Some(k);
        }
    }
    match best {
        Some(k) => (s(k), Some(k)),
        None => (Vec::new(), None),
    }
}

/// Smallest `t` with `phi(t) <= eps`, by plain scanning.
pub fn scan_inverse(schedule: &ConfidenceSchedule, eps: f64, delta: f64, limit: u64) -> Option<u64> {
    (1..=limit).find(|&t| schedule.phi(t, delta).unwrap() <= eps)
}

/// `count` values spaced evenly in log between `lo` and `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Sample counts 1..=1000 followed by a log-spaced tail up to 10^5.
pub fn t_grid() -> Vec<u64> {
    let mut ts: Vec<u64> = (1..=1000).collect();
    ts.extend(log_grid(1000.0, 1e5, 60).into_iter().map(|t| t.round() as u64));
    ts.dedup();
    ts
}

pub fn schedules() -> [ConfidenceSchedule; 2] {
    [ConfidenceSchedule::simple(), ConfidenceSchedule::KaufmannLil]
}
