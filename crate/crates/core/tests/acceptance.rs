//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Numeric arguments select a subset,
//! e.g. `cargo test --test acceptance -- 1 4`.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use common::{brute_force_bh, log_grid, schedules, t_grid};
use fdr_bandit::cli::write_csv;
use fdr_bandit::confidence::INV_E;
use fdr_bandit::harness::{
    aggregate, run_trials, samples_to_tpr, samples_to_tpr_spread, Algorithm, InstanceSpec, TrialRecord,
};
use fdr_bandit::selection::{bh_select, bh_select_from_arms};
use fdr_bandit::{ArmState, ConfidenceSchedule, EngineConfig, Environment, ErrorMode, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DELTA: f64 = 0.05;
/// Monte Carlo slack, in standard errors, for control checks.
const SE_WIDTH: f64 = 3.0;
const TRIALS: u64 = 500;
const HORIZON: u64 = 50_000;
const TARGET_TPR: f64 = 0.95;
/// Required Uniform / UCB ratio of samples to the target TPR.
const ADAPTIVITY_FACTOR: f64 = 2.0;
/// Slack, in bootstrap standard deviations, for SE sitting between UCB and Uniform.
const ORDER_WIDTH: f64 = 1.0;
const BOOTSTRAP_RESAMPLES: usize = 400;
const BH_VECTORS: usize = 1_000;
const BH_MAX_N: usize = 12;
const NULL_TRIALS: u64 = 10_000;
const NULL_SAMPLES: u64 = 1_000;
const NULL_LEVELS: [f64; 4] = [0.01, 0.05, 0.1, 0.5];
const DUALITY_CASES: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

type Criterion = fn() -> Result<Outcome>;

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(u32, &str, Criterion); 8] = [
        (1, "FDR control", fdr_control),
        (2, "FWER control", fwer_control),
        (3, "detection", detection),
        (4, "adaptivity advantage", adaptivity),
        (5, "BH oracle equivalence", bh_oracle),
        (6, "anytime p-value sub-uniformity", sub_uniformity),
        (7, "confidence-bound properties", confidence_properties),
        (8, "determinism", determinism),
    ];
    let mut failures = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = match panic::catch_unwind(AssertUnwindSafe(run)) {
            Ok(Ok(o)) => o,
            Ok(Err(e)) => Outcome::new(false, format!("error: {e}")),
            Err(_) => Outcome::new(false, "panicked"),
        };
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} [{verdict}] {name}: {} ({:.1}s)",
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        failures += usize::from(!outcome.pass);
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn binomial_se(p: f64, m: u64) -> f64 {
    (p * (1.0 - p) / m as f64).sqrt()
}

fn fdr_control() -> Result<Outcome> {
    let spec = InstanceSpec::constant(100, 10, 0.5);
    let config = EngineConfig::new(100, DELTA);
    let trials = run_trials(&spec, Algorithm::Ucb, &config, HORIZON, TRIALS, 1_000, 0)?;
    let m = aggregate(&trials, &spec)?;
    let violations = m.curve.iter().filter(|c| !c.fdp.within(DELTA, SE_WIDTH)).count();
    let worst = m.curve.iter().map(|c| c.fdp.mean).fold(0.0, f64::max);
    Ok(Outcome::new(
        violations == 0,
        format!(
            "max mean FDP {worst:.4} over {} checkpoints, {violations} above {DELTA} + {SE_WIDTH} SE",
            m.curve.len()
        ),
    ))
}

fn fwer_control() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, k) in [("mixed", 10), ("all-null", 0)] {
        let spec = InstanceSpec::constant(100, k, 0.5);
        let config = EngineConfig { error_mode: ErrorMode::Fwer, ..EngineConfig::new(100, DELTA) };
        let trials = run_trials(&spec, Algorithm::Ucb, &config, HORIZON, TRIALS, 2_000, 0)?;
        let m = aggregate(&trials, &spec)?;
        let ok = m.r_fwer.within(DELTA, SE_WIDTH);
        pass &= ok;
        let final_r_tpr = m.curve.last().map_or(0.0, |c| c.r_tpr.mean);
        parts.push(format!(
            "{label}: R-FWER {:.4} (SE {:.4}), final R-TPR {final_r_tpr:.3}",
            m.r_fwer.mean,
            m.r_fwer.se.unwrap_or(0.0)
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn detection() -> Result<Outcome> {
    let spec = InstanceSpec::constant(100, 10, 1.0);
    let config = EngineConfig::new(100, DELTA);
    let trials = run_trials(&spec, Algorithm::Ucb, &config, HORIZON, TRIALS, 3_000, 0)?;
    let m = aggregate(&trials, &spec)?;
    let monotone = m.curve.windows(2).all(|w| w[1].tpr.mean >= w[0].tpr.mean);
    let reached = samples_to_tpr(&m, TARGET_TPR);
    let final_tpr = m.curve.last().map_or(0.0, |c| c.tpr.mean);
    Ok(Outcome::new(
        monotone && reached.is_some(),
        format!(
            "mean TPR reaches {TARGET_TPR} at {} samples, final {final_tpr:.4}, non-decreasing: {monotone}",
            reached.map_or("never".to_owned(), |s| s.to_string())
        ),
    ))
}

fn adaptivity() -> Result<Outcome> {
    let spec = InstanceSpec::constant(200, 2, 1.0);
    let config = EngineConfig::new(200, DELTA);
    let mut at = Vec::new();
    for algo in [Algorithm::Ucb, Algorithm::Se, Algorithm::Uniform] {
        let trials = run_trials(&spec, algo, &config, HORIZON, TRIALS, 4_000, 0)?;
        let m = aggregate(&trials, &spec)?;
        let spread = samples_to_tpr_spread(&trials, &spec, TARGET_TPR, BOOTSTRAP_RESAMPLES, 17)?;
        at.push((algo, samples_to_tpr(&m, TARGET_TPR), spread.unwrap_or(0.0)));
    }
    let [(_, Some(ucb), s_ucb), (_, Some(se), s_se), (_, Some(uni), s_uni)] = at[..] else {
        return Ok(Outcome::new(false, format!("target TPR not reached by every algorithm: {at:?}")));
    };
    let (ucb, se, uni) = (ucb as f64, se as f64, uni as f64);
    let ratio = uni / ucb;
    let lower = ucb - ORDER_WIDTH * s_ucb.hypot(s_se);
    let upper = uni + ORDER_WIDTH * s_uni.hypot(s_se);
    let between = lower <= se && se <= upper;
    Ok(Outcome::new(
        ratio >= ADAPTIVITY_FACTOR && between,
        format!(
            "samples to TPR {TARGET_TPR}: UCB {ucb} (sd {s_ucb:.0}), SE {se} (sd {s_se:.0}), \
             Uniform {uni} (sd {s_uni:.0}); Uniform/UCB {ratio:.2}, SE/UCB {:.2}",
            se / ucb
        ),
    ))
}

fn bh_oracle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    for _ in 0..BH_VECTORS {
        let n = rng.gen_range(1..=BH_MAX_N);
        let p: Vec<f64> = (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => rng.gen_range(1..=40) as f64 / 400.0,
                1 => 1.0 - rng.gen::<f64>(),
                _ => rng.gen_range(0.0..0.02),
            })
            .collect();
        let level = rng.gen_range(0.01..0.3);
        let fast = bh_select(&p, level);
        let (set, k_hat) = brute_force_bh(&p, level);
        failures += usize::from(fast.selected != set || fast.k_hat != k_hat);
    }
    Ok(Outcome::new(failures == 0, format!("{failures} mismatches in {BH_VECTORS} vectors with n <= {BH_MAX_N}")))
}

fn sub_uniformity() -> Result<Outcome> {
    let spec = InstanceSpec::constant(1, 0, 1.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for schedule in schedules() {
        let mut hits = [0u64; NULL_LEVELS.len()];
        for trial in 0..NULL_TRIALS {
            let mut env = spec.environment(6_000 + trial);
            let mut sum = 0.0;
            let mut min_p: f64 = 1.0;
            for t in 1..=NULL_SAMPLES {
                sum += env.pull(0)?;
                let mean = sum / t as f64;
                // The running minimum can only move when the radius at the
                // current minimum is exceeded.
                let may_improve = mean > 0.0
                    && (min_p >= schedule.max_delta() || mean > schedule.phi(t, min_p)?);
                if may_improve {
                    min_p = min_p.min(schedule.anytime_p_value(mean, t, 0.0)?);
                }
            }
            for (h, &x) in hits.iter_mut().zip(&NULL_LEVELS) {
                *h += u64::from(min_p <= x);
            }
        }
        let rates: Vec<String> = NULL_LEVELS
            .iter()
            .zip(&hits)
            .map(|(&x, &h)| {
                let rate = h as f64 / NULL_TRIALS as f64;
                pass &= rate <= x + SE_WIDTH * binomial_se(x, NULL_TRIALS);
                format!("P(P*<={x})={rate:.4}")
            })
            .collect();
        parts.push(format!("{}: {}", schedule.name(), rates.join(" ")));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn confidence_properties() -> Result<Outcome> {
    let mut monotone_fail = 0usize;
    let mut inverse_fail = 0usize;
    let mut checked = 0usize;
    let deltas = log_grid(1e-6, 0.3, 40);
    let ts = t_grid();
    for schedule in schedules() {
        for &t in &ts {
            let radii: Vec<f64> = deltas.iter().map(|&d| schedule.phi(t, d)).collect::<Result<_>>()?;
            monotone_fail += radii.windows(2).filter(|w| w[0] < w[1]).count();
        }
        for &delta in &log_grid(1e-6, 0.3, 12) {
            for &eps in &log_grid(0.05, 5.0, 25) {
                let t = schedule.phi_inverse(eps, delta)?;
                let minimal = t == 1 || schedule.phi(t - 1, delta)? > eps;
                inverse_fail += usize::from(schedule.phi(t, delta)? > eps || !minimal);
                checked += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut duality_fail = 0usize;
    for _ in 0..DUALITY_CASES {
        let schedule = if rng.gen() { ConfidenceSchedule::KaufmannLil } else { ConfidenceSchedule::simple() };
        let n = rng.gen_range(1..=12);
        let mu0 = rng.gen_range(-0.2..0.2);
        let arms: Vec<ArmState> = (0..n)
            .map(|_| {
                let t = rng.gen_range(1..3_000u64);
                ArmState::from_summary(t, rng.gen_range(-0.5..1.5) * t as f64)
            })
            .collect();
        let level = rng.gen_range(0.005..INV_E.min(0.3));
        let direct = bh_select_from_arms(&arms, mu0, level, &schedule)?;
        let p: Vec<f64> = arms
            .iter()
            .map(|a| schedule.anytime_p_value(a.mean(), a.pulls(), mu0))
            .collect::<Result<_>>()?;
        duality_fail += usize::from(direct != bh_select(&p, level));
    }

    Ok(Outcome::new(
        monotone_fail + inverse_fail + duality_fail == 0,
        format!(
            "monotonicity violations {monotone_fail} on {}x{} grid per schedule, \
             inverse failures {inverse_fail}/{checked}, duality mismatches {duality_fail}/{DUALITY_CASES}",
            ts.len(),
            deltas.len()
        ),
    ))
}

fn csv_bytes(records: &[TrialRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("in-memory CSV");
    buf
}

fn determinism() -> Result<Outcome> {
    let spec = InstanceSpec::constant(50, 5, 0.8);
    let mut identical = true;
    for (algo, mode) in [
        (Algorithm::Ucb, ErrorMode::Fdr),
        (Algorithm::Ucb, ErrorMode::Fwer),
        (Algorithm::Se, ErrorMode::Fdr),
        (Algorithm::Uniform, ErrorMode::Fdr),
    ] {
        let config = EngineConfig { error_mode: mode, ..EngineConfig::new(50, DELTA) };
        let a = run_trials(&spec, algo, &config, 10_000, 20, 99, 0)?;
        let b = run_trials(&spec, algo, &config, 10_000, 20, 99, 1)?;
        identical &= csv_bytes(&a) == csv_bytes(&b);
    }

    let dir = tempfile::tempdir().map_err(|e| fdr_bandit::Error::Environment(e.to_string()))?;
    let mut cli_identical = true;
    for sub in ["run", "compare"] {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{sub}{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_fdr-bandit"))
                .args([sub, "--n", "40", "--k", "4", "--horizon", "8000", "--trials", "10", "--seed", "3"])
                .arg("--out")
                .arg(&out)
                .output()
                .expect("binary runs")
                .status;
            cli_identical &= status.success();
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .map(|d| d.filter_map(|e| e.ok()).map(|e| e.path()).collect())
                .unwrap_or_default();
            files.retain(|p| p.extension().is_some_and(|x| x == "csv"));
            files.sort();
            let contents: Vec<Vec<u8>> = files.iter().map(|p| std::fs::read(p).unwrap_or_default()).collect();
            outputs.push(contents);
        }
        cli_identical &= !outputs[0].is_empty() && outputs[0] == outputs[1];
    }
    Ok(Outcome::new(
        identical && cli_identical,
        format!("library CSV identical across reruns and worker counts: {identical}; CLI reruns identical: {cli_identical}"),
    ))
}
