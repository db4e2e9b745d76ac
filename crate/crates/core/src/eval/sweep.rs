//! Multi-trial evaluation and k-parameter sweeps against the k-NN baseline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{cmc, mean_average_precision};
use super::report::{GainCurve, MethodSummary, MethodTiming};
use super::scenario::Scenario;
use super::truth::GroundTruth;
use crate::dakr::default_k_sigma;
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::metric::DistanceMetric;
use crate::rerank::{Method, RerankConfig, Reranker};
use crate::space::PolicyMode;

/// Ranks reported for gain curves.
pub const REPORT_RANKS: [usize; 4] = [1, 5, 10, 20];

/// One evaluation unit: a gallery, its probes and the ground truth.
#[derive(Debug, Clone, Copy)]
pub struct Trial<'a> {
    pub gallery: &'a FeatureSet,
    pub probes: &'a FeatureSet,
    pub truth: &'a GroundTruth,
}

impl Scenario {
    pub fn trial(&self) -> Trial<'_> {
        Trial {
            gallery: &self.gallery,
            probes: &self.probes,
            truth: &self.truth,
        }
    }
}

/// How the bandwidth neighbor count is derived during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSigmaRule {
    /// Use the swept `k` itself.
    SameAsK,
    Fixed(usize),
    /// A fraction of the gallery size, at least 1.
    GalleryFraction(f64),
    /// The mean number of true matches per probe, rounded, at least 1.
    MeanMultiplicity,
}

impl KSigmaRule {
    pub fn resolve(self, k: usize, trial: &Trial<'_>) -> usize {
        match self {
            KSigmaRule::SameAsK => k,
            KSigmaRule::Fixed(v) => v.max(1),
            KSigmaRule::GalleryFraction(0.05) => default_k_sigma(trial.gallery.len()),
            KSigmaRule::GalleryFraction(f) => ((trial.gallery.len() as f64 * f).round() as usize).max(1),
            KSigmaRule::MeanMultiplicity => (trial.truth.mean_multiplicity().round() as usize).max(1),
        }
    }
}

/// Per-trial outcome of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub cmc: Vec<f64>,
    pub map: f64,
    pub offline_ms: f64,
    pub online_ms_per_probe: f64,
}

pub fn run_trial(
    config: RerankConfig,
    trial: &Trial<'_>,
    metric: &DistanceMetric,
    max_rank: usize,
) -> Result<TrialOutcome> {
    let reranker = Reranker::prepare(config, trial.probes, trial.gallery, metric)?;
    let start = Instant::now();
    let lists = reranker.rank_all()?;
    let online = start.elapsed();
    Ok(TrialOutcome {
        cmc: cmc(&lists, trial.truth, max_rank)?,
        map: mean_average_precision(&lists, trial.truth)?,
        offline_ms: reranker.offline_time().as_secs_f64() * 1e3,
        online_ms_per_probe: online.as_secs_f64() * 1e3 / trial.probes.len() as f64,
    })
}

fn mean_vec(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let width = rows.first().map_or(0, Vec::len);
    (0..width).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n).collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Averages one configuration over every trial. `k_sigma` in `config` is
/// replaced per trial when `rule` is given.
pub fn evaluate(
    config: RerankConfig,
    rule: Option<KSigmaRule>,
    trials: &[Trial<'_>],
    metric: &DistanceMetric,
    max_rank: usize,
) -> Result<(MethodSummary, MethodTiming)> {
    if trials.is_empty() {
        return Err(Error::InvalidParams("no trials to evaluate".into()));
    }
    let mut outcomes = Vec::with_capacity(trials.len());
    let mut k_sigma = config.k_sigma;
    for t in trials {
        let mut cfg = config;
        if let Some(rule) = rule {
            cfg.k_sigma = rule.resolve(cfg.k, t);
        }
        k_sigma = cfg.k_sigma;
        outcomes.push(run_trial(cfg, t, metric, max_rank)?);
    }
    let label = config.method.label(config.policy);
    let cmcs: Vec<Vec<f64>> = outcomes.iter().map(|o| o.cmc.clone()).collect();
    let summary = MethodSummary {
        label: label.clone(),
        method: config.method,
        policy: config.policy,
        k: config.k,
        k_sigma,
        cmc: mean_vec(&cmcs),
        map: mean(outcomes.iter().map(|o| o.map)),
    };
    let timing = MethodTiming {
        label,
        offline_ms: mean(outcomes.iter().map(|o| o.offline_ms)),
        online_ms_per_probe: mean(outcomes.iter().map(|o| o.online_ms_per_probe)),
    };
    Ok((summary, timing))
}

/// For every `k` and method, the mean CMC at `ranks` minus the mean k-NN CMC
/// at the same ranks.
pub fn k_sweep(
    methods: &[(Method, PolicyMode)],
    trials: &[Trial<'_>],
    k_values: &[usize],
    rule: KSigmaRule,
    ranks: &[usize],
    metric: &DistanceMetric,
) -> Result<Vec<GainCurve>> {
    if trials.is_empty() {
        return Err(Error::InvalidParams("no trials to sweep".into()));
    }
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(Error::InvalidParams("k values must be non-empty and positive".into()));
    }
    let max_rank = ranks.iter().copied().max().unwrap_or(1);
    let at_ranks = |curve: &[f64]| -> Vec<f64> { ranks.iter().map(|&r| curve[r - 1]).collect() };

    let baseline_cfg = RerankConfig::new(Method::Knn, PolicyMode::GalleryOnly, 1, 1);
    let (baseline, _) = evaluate(baseline_cfg, None, trials, metric, max_rank)?;
    let baseline = at_ranks(&baseline.cmc);

    let mut curves = Vec::new();
    for &(method, policy) in methods {
        for &k in k_values {
            let cfg = RerankConfig::new(method, policy, k, k);
            let (summary, _) = evaluate(cfg, Some(rule), trials, metric, max_rank)?;
            let cmc_at = at_ranks(&summary.cmc);
            curves.push(GainCurve {
                label: summary.label,
                method,
                policy,
                k,
                k_sigma: summary.k_sigma,
                ranks: ranks.to_vec(),
                gains: cmc_at.iter().zip(&baseline).map(|(m, b)| m - b).collect(),
                cmc: cmc_at,
            });
        }
    }
    Ok(curves)
}
