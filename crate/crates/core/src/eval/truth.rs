use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True gallery matches per probe, plus gallery ids that match no probe.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    matches: BTreeMap<u64, BTreeSet<u64>>,
    distractors: BTreeSet<u64>,
}

impl GroundTruth {
    pub fn new(matches: BTreeMap<u64, BTreeSet<u64>>, distractors: BTreeSet<u64>) -> Result<Self> {
        for (probe, set) in &matches {
            if let Some(g) = set.iter().find(|g| distractors.contains(g)) {
                return Err(Error::InvalidParams(format!(
                    "gallery id {g} is both a match of probe {probe} and a distractor"
                )));
            }
        }
        Ok(GroundTruth { matches, distractors })
    }

    /// Builds from `(probe_id, gallery_id)` pairs; repeated probe ids give
    /// multi-shot match sets.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut matches: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for (p, g) in pairs {
            matches.entry(p).or_default().insert(g);
        }
        GroundTruth {
            matches,
            distractors: BTreeSet::new(),
        }
    }

    pub fn matches_for(&self, probe_id: u64) -> Option<&BTreeSet<u64>> {
        self.matches.get(&probe_id)
    }

    pub fn probes(&self) -> impl Iterator<Item = u64> + '_ {
        self.matches.keys().copied()
    }

    pub fn distractors(&self) -> &BTreeSet<u64> {
        &self.distractors
    }

    pub fn pairs(&self) -> Vec<(u64, u64)> {
        self.matches
            .iter()
            .flat_map(|(p, gs)| gs.iter().map(move |g| (*p, *g)))
            .collect()
    }

    /// Whether every probe has exactly one true match.
    pub fn is_single_shot(&self) -> bool {
        self.matches.values().all(|s| s.len() == 1)
    }

    /// Mean number of true matches per probe.
    pub fn mean_multiplicity(&self) -> f64 {
        if self.matches.is_empty() {
            return 0.0;
        }
        self.matches.values().map(BTreeSet::len).sum::<usize>() as f64 / self.matches.len() as f64
    }

    /// Checks that every referenced gallery id exists.
    pub fn check_against(&self, gallery_ids: &[u64]) -> Result<()> {
        let known: BTreeSet<u64> = gallery_ids.iter().copied().collect();
        for (p, gs) in &self.matches {
            if let Some(g) = gs.iter().find(|g| !known.contains(g)) {
                return Err(Error::InvalidParams(format!(
                    "probe {p} is matched to gallery id {g}, which is not in the gallery"
                )));
            }
        }
        if let Some(g) = self.distractors.iter().find(|g| !known.contains(g)) {
            return Err(Error::InvalidParams(format!("distractor {g} is not in the gallery")));
        }
        Ok(())
    }
}
