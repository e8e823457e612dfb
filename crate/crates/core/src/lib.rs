//! Adaptive sampling for multiple testing.
//!
//! Arms are sampled with a UCB rule, discoveries are selected by
//! Benjamini-Hochberg on anytime p-values (false discovery rate control), and
//! an optional second stage promotes discoveries into a family-wise
//! controlled set. Uniform allocation and successive elimination are
//! provided as baselines, along with a seeded Monte Carlo harness.

pub mod baselines;
pub mod cli;
pub mod confidence;
pub mod engine;
pub mod error;
pub mod harness;
pub mod selection;

pub use baselines::{Baseline, BaselineKind};
pub use confidence::ConfidenceSchedule;
pub use engine::{
    ArmState, DetectMode, DiscoverySnapshot, Engine, EngineConfig, EngineState, Environment,
    ErrorMode, StepOutcome,
};
pub use error::{Error, Result};
pub use selection::{BhLevel, BhSelection, SelectionParams};
