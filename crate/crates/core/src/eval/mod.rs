//! Evaluation harness: CMC, mAP, k sweeps and synthetic scenarios.

mod metrics;
mod report;
mod scenario;
mod sweep;
mod truth;

pub use metrics::{average_precision, cmc, mean_average_precision};
pub use report::{EvalReport, GainCurve, MethodSummary, MethodTiming};
pub use scenario::{generate_scenario, Scenario, ScenarioKind, ScenarioParams};
pub use sweep::{evaluate, k_sweep, run_trial, KSigmaRule, Trial, TrialOutcome, REPORT_RANKS};
pub use truth::GroundTruth;
