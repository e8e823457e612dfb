use serde::{Deserialize, Serialize};

use super::instance::{GapPattern, InstanceSpec};
use super::metrics::{aggregate, samples_to_tpr, AggregateMetrics};
use super::trial::{run_trials, Algorithm, TrialRecord};
use crate::engine::EngineConfig;
use crate::error::Result;

/// One instance run under every algorithm with a shared engine configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub name: String,
    pub spec: InstanceSpec,
    pub config: EngineConfig,
    pub horizon: u64,
    pub trials: u64,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algo: Algorithm,
    pub metrics: AggregateMetrics,
    pub samples_to_tpr: Option<u64>,
    /// `samples_to_tpr` divided by the UCB figure, when both exist.
    pub ratio_to_ucb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelResult {
    pub panel: Panel,
    pub target_tpr: f64,
    pub results: Vec<AlgorithmResult>,
}

impl PanelResult {
    pub fn get(&self, algo: Algorithm) -> Option<&AlgorithmResult> {
        self.results.iter().find(|r| r.algo == algo)
    }
}

/// Full panel output, raw trial records included.
pub struct PanelRun {
    pub result: PanelResult,
    pub records: Vec<(Algorithm, Vec<TrialRecord>)>,
}

/// Runs `algos` on one panel and aggregates each. Every algorithm sees the same seeds.
pub fn run_panel(panel: &Panel, algos: &[Algorithm], target_tpr: f64, workers: usize) -> Result<PanelRun> {
    let mut records = Vec::with_capacity(algos.len());
    let mut results = Vec::with_capacity(algos.len());
    for &algo in algos {
        let trials = run_trials(
            &panel.spec,
            algo,
            &panel.config,
            panel.horizon,
            panel.trials,
            panel.base_seed,
            workers,
        )?;
        let metrics = aggregate(&trials, &panel.spec)?;
        let reached = samples_to_tpr(&metrics, target_tpr);
        results.push(AlgorithmResult { algo, metrics, samples_to_tpr: reached, ratio_to_ucb: None });
        records.push((algo, trials));
    }
    let ucb = results
        .iter()
        .find(|r| r.algo == Algorithm::Ucb)
        .and_then(|r| r.samples_to_tpr);
    for r in &mut results {
        r.ratio_to_ucb = match (r.samples_to_tpr, ucb) {
            (Some(s), Some(u)) => Some(s as f64 / u as f64),
            _ => None,
        };
    }
    Ok(PanelRun {
        result: PanelResult { panel: panel.clone(), target_tpr, results },
        records,
    })
}

/// Runs every panel under all three algorithms.
pub fn experiment_suite(panels: &[Panel], target_tpr: f64, workers: usize) -> Result<Vec<PanelResult>> {
    panels
        .iter()
        .map(|p| run_panel(p, &Algorithm::ALL, target_tpr, workers).map(|r| r.result))
        .collect()
}

/// Desk-scale panels: constant unit gaps with `k ∈ {2, ⌈√n⌉, n/5}` plus a
/// linear-gap panel with `k = ⌈√n⌉` and gaps spread over `[0.5, 1.5]`.
pub fn desk_panels(template: &EngineConfig, horizon: u64, trials: u64, base_seed: u64) -> Vec<Panel> {
    let n = template.n;
    let sqrt_n = (n as f64).sqrt().ceil() as usize;
    let mu0 = template.mu0;
    let base = InstanceSpec { mu0, ..InstanceSpec::constant(n, 0, 1.0) };
    let mut panels = Vec::new();
    let mut ks = vec![2, sqrt_n, n / 5];
    ks.retain(|&k| k >= 1 && k <= n);
    ks.dedup();
    for k in ks {
        panels.push(Panel {
            name: format!("constant-k{k}"),
            spec: InstanceSpec { k, ..base },
            config: *template,
            horizon,
            trials,
            base_seed,
        });
    }
    if sqrt_n >= 1 && sqrt_n <= n {
        panels.push(Panel {
            name: format!("linear-k{sqrt_n}"),
            spec: InstanceSpec { k: sqrt_n, gaps: GapPattern::Linear { min: 0.5, max: 1.5 }, ..base },
            config: *template,
            horizon,
            trials,
            base_seed,
        });
    }
    panels
}
