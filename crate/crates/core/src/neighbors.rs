//! Classical neighbor-set re-ranking: k-NN, inverse k-NN, reciprocal k-NN
//! and the Jaccard dissimilarity between neighborhoods.
//!
//! Every function accepts an [`AugmentationPolicy`]. With
//! [`AugmentationPolicy::WithProbes`] the probe collection joins the pools as
//! unlabeled samples, which yields the "+" variants (k-NN+, k-INN+, k-RNN+).
//! Inverse neighborhoods are always computed by a full scan over the gallery.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{FeatureSet, Sample};
use crate::metric::DistanceMetric;
use crate::ranking::{cmp_key, RankEntry, RankOrder, RankedList};
use crate::space::{smallest_k, AugmentationPolicy, ProbeView, SampleRef, SearchSpace};

/// The `k` nearest members of a pool around an anchor sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSet {
    pub anchor: SampleRef,
    pub k: usize,
    pub members: BTreeSet<SampleRef>,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: SampleRef) -> bool {
        self.members.contains(&s)
    }

    /// Members that are gallery samples, by gallery id.
    pub fn gallery_members(&self) -> BTreeSet<u64> {
        self.members.iter().filter_map(|m| m.gallery_id()).collect()
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    Ok(())
}

/// `N(x_i, k)`: the probe's `k` nearest pool members.
pub fn knn_in(space: &SearchSpace<'_>, view: &ProbeView<'_>, k: usize) -> Result<NeighborSet> {
    check_k(k)?;
    let pool = space.probe_pool(view);
    if pool.is_empty() {
        return Err(Error::KTooLarge { k });
    }
    Ok(NeighborSet {
        anchor: SampleRef::Probe(view.probe.id),
        k,
        members: smallest_k(pool, k).into_iter().map(|(_, s)| s).collect(),
    })
}

/// `N(y_j, k)` for gallery index `j`, materialized from its full pool.
pub fn gallery_knn_in(space: &SearchSpace<'_>, view: &ProbeView<'_>, j: usize, k: usize) -> Result<NeighborSet> {
    check_k(k)?;
    let pool = space.gallery_pool(view, j);
    Ok(NeighborSet {
        anchor: SampleRef::Gallery(space.gallery().id(j)),
        k,
        members: smallest_k(pool, k).into_iter().map(|(_, s)| s).collect(),
    })
}

/// `I(x_i, k)`: gallery samples that count the probe among their `k`
/// nearest neighbors. Scans every gallery sample.
pub fn inn_in(space: &SearchSpace<'_>, view: &ProbeView<'_>, k: usize) -> Result<BTreeSet<u64>> {
    check_k(k)?;
    let gallery = space.gallery();
    let hits: Vec<u64> = (0..gallery.len())
        .into_par_iter()
        .filter(|&j| !view.is_skipped(j) && space.probe_in_gallery_neighborhood(view, j, k))
        .map(|j| gallery.id(j))
        .collect();
    Ok(hits.into_iter().collect())
}

/// `R(x_i, k) = N(x_i, k) ∩ I(x_i, k)`, restricted to gallery ids.
pub fn rnn_in(space: &SearchSpace<'_>, view: &ProbeView<'_>, k: usize) -> Result<BTreeSet<u64>> {
    let forward = knn_in(space, view, k)?.gallery_members();
    let inverse = inn_in(space, view, k)?;
    Ok(forward.intersection(&inverse).copied().collect())
}

/// `1 - |A ∩ B| / |A ∪ B|`; an empty union counts as maximally dissimilar.
pub fn jaccard_distance(a: &NeighborSet, b: &NeighborSet) -> f64 {
    let inter = a.members.intersection(&b.members).count();
    let union = a.members.len() + b.members.len() - inter;
    if union == 0 {
        return 1.0;
    }
    1.0 - inter as f64 / union as f64
}

/// Whole gallery ordered by distance to the probe.
pub fn rank_knn_in(space: &SearchSpace<'_>, view: &ProbeView<'_>) -> RankedList {
    let gallery = space.gallery();
    let pairs = view
        .to_gallery
        .iter()
        .enumerate()
        .filter(|(j, _)| !view.is_skipped(*j))
        .map(|(j, &d)| (gallery.id(j), d))
        .collect();
    RankedList::from_values(view.probe.id, RankOrder::AscendingDistance, pairs)
}

/// Members of `selected` first (tier 0, keyed by `key`, then raw distance),
/// the remaining gallery after them (tier 1, by raw distance).
fn two_tier_rank(
    space: &SearchSpace<'_>,
    view: &ProbeView<'_>,
    selected: &BTreeSet<u64>,
    key: impl Fn(usize) -> f64,
) -> RankedList {
    let gallery = space.gallery();
    let mut head = Vec::new();
    let mut tail = Vec::new();
    for j in 0..gallery.len() {
        if view.is_skipped(j) {
            continue;
        }
        let id = gallery.id(j);
        let d = view.to_gallery[j];
        if selected.contains(&id) {
            head.push((key(j), d, id));
        } else {
            tail.push((d, d, id));
        }
    }
    head.sort_by(|a, b| cmp_key(*a, *b));
    tail.sort_by(|a, b| cmp_key(*a, *b));
    let entries = head
        .into_iter()
        .map(|(v, _, id)| RankEntry {
            gallery_id: id,
            value: v,
            tier: 0,
        })
        .chain(tail.into_iter().map(|(d, _, id)| RankEntry {
            gallery_id: id,
            value: d,
            tier: 1,
        }))
        .collect();
    RankedList::from_sorted(view.probe.id, RankOrder::AscendingDistance, entries)
}

/// Inverse neighbors first by distance, then the rest of the gallery.
pub fn rank_inn_in(space: &SearchSpace<'_>, view: &ProbeView<'_>, k: usize) -> Result<RankedList> {
    let inverse = inn_in(space, view, k)?;
    Ok(two_tier_rank(space, view, &inverse, |j| view.to_gallery[j]))
}

/// Reciprocal neighbors first, ordered by the Jaccard distance between
/// `N(y_j, k)` and `N(x_i, k)` (ties by raw distance, then id); the rest of
/// the gallery follows by raw distance.
pub fn rank_rnn_in(space: &SearchSpace<'_>, view: &ProbeView<'_>, k: usize) -> Result<RankedList> {
    let forward = knn_in(space, view, k)?;
    let inverse = inn_in(space, view, k)?;
    let reciprocal: BTreeSet<u64> = forward.gallery_members().intersection(&inverse).copied().collect();
    let gallery = space.gallery();
    let mut jaccard = vec![0.0; gallery.len()];
    for (j, slot) in jaccard.iter_mut().enumerate() {
        if reciprocal.contains(&gallery.id(j)) {
            *slot = jaccard_distance(&gallery_knn_in(space, view, j, k)?, &forward);
        }
    }
    Ok(two_tier_rank(space, view, &reciprocal, |j| jaccard[j]))
}

fn single<'a>(
    gallery: &'a FeatureSet,
    metric: &'a DistanceMetric,
    policy: AugmentationPolicy<'a>,
) -> Result<SearchSpace<'a>> {
    SearchSpace::new(gallery, metric, policy)
}

pub fn knn(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    k: usize,
    policy: AugmentationPolicy<'_>,
) -> Result<NeighborSet> {
    let space = single(gallery, metric, policy)?;
    knn_in(&space, &space.view(probe)?, k)
}

pub fn inn(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    k: usize,
    policy: AugmentationPolicy<'_>,
) -> Result<BTreeSet<u64>> {
    let space = single(gallery, metric, policy)?;
    inn_in(&space, &space.view(probe)?, k)
}

pub fn rnn(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    k: usize,
    policy: AugmentationPolicy<'_>,
) -> Result<BTreeSet<u64>> {
    let space = single(gallery, metric, policy)?;
    rnn_in(&space, &space.view(probe)?, k)
}

pub fn rank_by_inn(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    k: usize,
    policy: AugmentationPolicy<'_>,
) -> Result<RankedList> {
    let space = single(gallery, metric, policy)?;
    rank_inn_in(&space, &space.view(probe)?, k)
}

pub fn rank_by_rnn(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    k: usize,
    policy: AugmentationPolicy<'_>,
) -> Result<RankedList> {
    let space = single(gallery, metric, policy)?;
    rank_rnn_in(&space, &space.view(probe)?, k)
}
