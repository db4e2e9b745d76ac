use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::rerank::Method;
use crate::space::PolicyMode;

/// Seed-averaged accuracy of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub label: String,
    pub method: Method,
    pub policy: PolicyMode,
    pub k: usize,
    pub k_sigma: usize,
    /// Accuracy at ranks `1..=cmc.len()`.
    pub cmc: Vec<f64>,
    pub map: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub label: String,
    pub offline_ms: f64,
    pub online_ms_per_probe: f64,
}

/// Gain over the k-NN baseline at the listed ranks, for one method and `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCurve {
    pub label: String,
    pub method: Method,
    pub policy: PolicyMode,
    pub k: usize,
    pub k_sigma: usize,
    pub ranks: Vec<usize>,
    pub cmc: Vec<f64>,
    pub gains: Vec<f64>,
}

/// Evaluation output. Timings are kept out of the JSON/CSV data so those
/// files are reproducible byte for byte; they are written separately.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub methods: Vec<MethodSummary>,
    pub gain_curves: Vec<GainCurve>,
    #[serde(skip)]
    pub timings: Vec<MethodTiming>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One row per method x k x rank:
    /// `kind,method,k,k_sigma,rank,value` with `kind` one of `cmc`, `map`,
    /// `cmc_at`, `gain`. The `map` row leaves `rank` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,method,k,k_sigma,rank,value\n");
        for m in &self.methods {
            for (i, v) in m.cmc.iter().enumerate() {
                let _ = writeln!(out, "cmc,{},{},{},{},{}", m.label, m.k, m.k_sigma, i + 1, v);
            }
            let _ = writeln!(out, "map,{},{},{},,{}", m.label, m.k, m.k_sigma, m.map);
        }
        for c in &self.gain_curves {
            for ((r, v), g) in c.ranks.iter().zip(&c.cmc).zip(&c.gains) {
                let _ = writeln!(out, "cmc_at,{},{},{},{},{}", c.label, c.k, c.k_sigma, r, v);
                let _ = writeln!(out, "gain,{},{},{},{},{}", c.label, c.k, c.k_sigma, r, g);
            }
        }
        out
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("method,offline_ms,online_ms_per_probe\n");
        for t in &self.timings {
            let _ = writeln!(out, "{},{:.6},{:.6}", t.label, t.offline_ms, t.online_ms_per_probe);
        }
        out
    }
}
