//! Seeded synthetic matching scenarios.
//!
//! Identities are Gaussian clusters: centers uniform in the unit hypercube,
//! samples drawn as center plus isotropic noise. Gallery ids run from 0 and
//! probe ids continue after the last gallery id, so the two never collide.
//! Draw order is fixed (centers, then per identity its gallery shots and its
//! probe, then distractors), so raising `n_distractors` leaves the
//! identities themselves unchanged for a given seed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::truth::GroundTruth;
use crate::error::{Error, Result};
use crate::features::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// One gallery sample per identity, every gallery sample matched.
    PerfectSingleShot,
    /// One gallery sample per identity plus unmatched distractors.
    ImperfectSingleShot,
    /// Several gallery samples per identity.
    MultiShot,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::PerfectSingleShot => "perfect_single_shot",
            ScenarioKind::ImperfectSingleShot => "imperfect_single_shot",
            ScenarioKind::MultiShot => "multi_shot",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "perfect" | "perfect_single_shot" => Ok(ScenarioKind::PerfectSingleShot),
            "imperfect" | "imperfect_single_shot" => Ok(ScenarioKind::ImperfectSingleShot),
            "multi" | "multi_shot" => Ok(ScenarioKind::MultiShot),
            other => Err(Error::InvalidParams(format!("unknown scenario kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub kind: ScenarioKind,
    pub n_identities: usize,
    pub shots_per_id: usize,
    pub n_distractors: usize,
    pub dim: usize,
    pub cluster_spread: f64,
    pub seed: u64,
}

impl ScenarioParams {
    pub fn perfect(n_identities: usize, dim: usize, cluster_spread: f64, seed: u64) -> Self {
        ScenarioParams {
            kind: ScenarioKind::PerfectSingleShot,
            n_identities,
            shots_per_id: 1,
            n_distractors: 0,
            dim,
            cluster_spread,
            seed,
        }
    }

    pub fn imperfect(n_identities: usize, n_distractors: usize, dim: usize, cluster_spread: f64, seed: u64) -> Self {
        ScenarioParams {
            kind: ScenarioKind::ImperfectSingleShot,
            n_distractors,
            ..Self::perfect(n_identities, dim, cluster_spread, seed)
        }
    }

    pub fn multi_shot(n_identities: usize, shots_per_id: usize, dim: usize, cluster_spread: f64, seed: u64) -> Self {
        ScenarioParams {
            kind: ScenarioKind::MultiShot,
            shots_per_id,
            ..Self::perfect(n_identities, dim, cluster_spread, seed)
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ScenarioParams { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_identities < 2 {
            return bad(format!("need at least 2 identities, got {}", self.n_identities));
        }
        if self.dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if !(self.cluster_spread.is_finite() && self.cluster_spread >= 0.0) {
            return bad(format!(
                "cluster spread must be finite and >= 0, got {}",
                self.cluster_spread
            ));
        }
        match self.kind {
            ScenarioKind::PerfectSingleShot | ScenarioKind::ImperfectSingleShot if self.shots_per_id != 1 => {
                bad(format!("{} needs exactly one shot per identity", self.kind))
            }
            ScenarioKind::PerfectSingleShot if self.n_distractors != 0 => {
                bad("perfect single-shot scenarios have no distractors".into())
            }
            ScenarioKind::MultiShot if self.shots_per_id == 0 => bad("shots per identity must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub gallery: FeatureSet,
    pub probes: FeatureSet,
    pub truth: GroundTruth,
}

fn noisy(rng: &mut ChaCha8Rng, center: &[f64], spread: f64, out: &mut Vec<f64>) {
    for &c in center {
        let z: f64 = rng.sample(StandardNormal);
        out.push(c + spread * z);
    }
}

pub fn generate_scenario(params: ScenarioParams) -> Result<Scenario> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let dim = params.dim;
    let centers: Vec<Vec<f64>> = (0..params.n_identities)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();

    let mut gallery = Vec::new();
    let mut probes = Vec::new();
    let mut owner = Vec::new();
    for (identity, center) in centers.iter().enumerate() {
        for _ in 0..params.shots_per_id {
            noisy(&mut rng, center, params.cluster_spread, &mut gallery);
            owner.push(identity);
        }
        noisy(&mut rng, center, params.cluster_spread, &mut probes);
    }
    let matched = owner.len();
    for _ in 0..params.n_distractors {
        let center: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        noisy(&mut rng, &center, params.cluster_spread, &mut gallery);
    }

    let n_gallery = gallery.len() / dim;
    let gallery_ids: Vec<u64> = (0..n_gallery as u64).collect();
    let probe_ids: Vec<u64> = (0..params.n_identities as u64).map(|i| n_gallery as u64 + i).collect();

    let mut matches: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for (g, &identity) in owner.iter().enumerate() {
        matches.entry(probe_ids[identity]).or_default().insert(g as u64);
    }
    let distractors: BTreeSet<u64> = (matched as u64..n_gallery as u64).collect();
    Ok(Scenario {
        params,
        gallery: FeatureSet::new(gallery_ids, gallery, dim)?,
        probes: FeatureSet::new(probe_ids, probes, dim)?,
        truth: GroundTruth::new(matches, distractors)?,
    })
}
