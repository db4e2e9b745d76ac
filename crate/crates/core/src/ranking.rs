//! Deterministic sorting and ranked result lists.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Ascending,
    Descending,
}

/// Returns the permutation that sorts `values`; equal values keep ascending
/// index order.
pub fn sort_indices(values: &[f64], order: Order) -> Result<Vec<usize>> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(i));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // sort_by is stable, so ties keep the ascending index order
    match order {
        Order::Ascending => idx.sort_by(|&a, &b| values[a].total_cmp(&values[b])),
        Order::Descending => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
    }
    Ok(idx)
}

/// How the values of a [`RankedList`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOrder {
    AscendingDistance,
    DescendingScore,
}

/// One ranked candidate.
///
/// `tier` records which stage of a multi-stage ordering placed the entry:
/// reciprocal-neighbor rankings put set members in tier 0 (valued by their
/// set-based dissimilarity) and the remaining gallery in tier 1 (valued by
/// raw distance). Single-stage rankings use tier 0 throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub gallery_id: u64,
    pub value: f64,
    pub tier: u8,
}

/// Ordered gallery candidates for one probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub probe_id: u64,
    pub order: RankOrder,
    pub entries: Vec<RankEntry>,
}

impl RankedList {
    /// Sorts `(gallery_id, value)` pairs by value in `order`, ties by
    /// ascending gallery id.
    pub fn from_values(probe_id: u64, order: RankOrder, mut pairs: Vec<(u64, f64)>) -> Self {
        pairs.sort_by(|a, b| {
            let by_value = match order {
                RankOrder::AscendingDistance => a.1.total_cmp(&b.1),
                RankOrder::DescendingScore => b.1.total_cmp(&a.1),
            };
            by_value.then(a.0.cmp(&b.0))
        });
        RankedList {
            probe_id,
            order,
            entries: pairs
                .into_iter()
                .map(|(gallery_id, value)| RankEntry {
                    gallery_id,
                    value,
                    tier: 0,
                })
                .collect(),
        }
    }

    /// Wraps entries that are already in their final order.
    pub fn from_sorted(probe_id: u64, order: RankOrder, entries: Vec<RankEntry>) -> Self {
        RankedList {
            probe_id,
            order,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gallery_ids(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.gallery_id).collect()
    }

    /// 1-based position of `gallery_id`, if present.
    pub fn position_of(&self, gallery_id: u64) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.gallery_id == gallery_id)
            .map(|p| p + 1)
    }
}

/// Primary key ascending, then secondary ascending, then id.
pub(crate) fn cmp_key(a: (f64, f64, u64), b: (f64, f64, u64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2))
}
