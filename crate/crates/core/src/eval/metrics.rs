//! Cumulative matching characteristic and mean average precision.

use std::collections::BTreeSet;

use log::warn;

use super::truth::GroundTruth;
use crate::error::{Error, Result};
use crate::ranking::RankedList;

fn match_set<'t>(list: &RankedList, truth: &'t GroundTruth) -> Result<Option<&'t BTreeSet<u64>>> {
    let set = truth
        .matches_for(list.probe_id)
        .ok_or(Error::MissingTruth(list.probe_id))?;
    if set.is_empty() {
        warn!("probe {} has no true matches; excluded from evaluation", list.probe_id);
        return Ok(None);
    }
    Ok(Some(set))
}

/// `cmc[r-1]` is the fraction of probes whose first true match sits at a
/// position `<= r`. Probes without any true match are left out.
pub fn cmc(rankings: &[RankedList], truth: &GroundTruth, max_rank: usize) -> Result<Vec<f64>> {
    let mut hits = vec![0usize; max_rank];
    let mut evaluated = 0usize;
    for list in rankings {
        let Some(set) = match_set(list, truth)? else {
            continue;
        };
        evaluated += 1;
        if let Some(pos) = list.entries.iter().position(|e| set.contains(&e.gallery_id)) {
            if pos < max_rank {
                hits[pos] += 1;
            }
        }
    }
    if evaluated == 0 {
        return Ok(vec![0.0; max_rank]);
    }
    let mut acc = 0usize;
    Ok(hits
        .into_iter()
        .map(|h| {
            acc += h;
            acc as f64 / evaluated as f64
        })
        .collect())
}

/// Average precision of one ranked list: the mean, over its true matches, of
/// the precision at each match position. Matches absent from the list count
/// as zero precision.
pub fn average_precision(list: &RankedList, matches: &BTreeSet<u64>) -> f64 {
    if matches.is_empty() {
        return 0.0;
    }
    let mut found = 0usize;
    let mut sum = 0.0;
    for (i, e) in list.entries.iter().enumerate() {
        if matches.contains(&e.gallery_id) {
            found += 1;
            sum += found as f64 / (i + 1) as f64;
            if found == matches.len() {
                break;
            }
        }
    }
    sum / matches.len() as f64
}

pub fn mean_average_precision(rankings: &[RankedList], truth: &GroundTruth) -> Result<f64> {
    let mut total = 0.0;
    let mut evaluated = 0usize;
    for list in rankings {
        let Some(set) = match_set(list, truth)? else {
            continue;
        };
        total += average_precision(list, set);
        evaluated += 1;
    }
    Ok(if evaluated == 0 { 0.0 } else { total / evaluated as f64 })
}
