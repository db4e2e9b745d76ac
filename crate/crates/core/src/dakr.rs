//! Density-adaptive kernel re-ranking.
//!
//! Each gallery sample `y_j` carries a kernel `φ(‖x - y_j‖ / σ_j)` whose
//! bandwidth `σ_j` is its k-th nearest-neighbor distance, so samples in
//! dense regions respond more selectively than samples in sparse ones.
//!
//! * inverse scoring evaluates every gallery kernel at the probe,
//!   `s_j = φ(d_j / σ_j)`, a smoothed inverse k-NN;
//! * bidirectional scoring also places a kernel on the probe and combines
//!   both directions, `χ_j = φ(d_j² / (σ_i σ_j))`, a smoothed reciprocal
//!   k-NN.
//!
//! Rankings sort on the kernel argument `t` (ascending) rather than on
//! `φ(t)`, which orders identically for a strictly decreasing basis and does
//! not collapse distinct candidates once `φ(t)` underflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSet, Sample};
use crate::metric::DistanceMetric;
use crate::ranking::{RankEntry, RankOrder, RankedList};
use crate::sigma::{sigma_floor, SigmaTable};
use crate::space::{kth_smallest, AugmentationPolicy, ProbeView, SearchSpace};

/// Radial basis applied to the scaled distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[non_exhaustive]
pub enum Basis {
    /// `φ(t) = exp(-t)`
    #[default]
    ExpNeg,
}

impl Basis {
    #[inline]
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Basis::ExpNeg => (-t).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub basis: Basis,
    pub k_sigma: usize,
}

impl KernelSpec {
    pub fn new(k_sigma: usize) -> Self {
        KernelSpec {
            basis: Basis::ExpNeg,
            k_sigma,
        }
    }
}

/// Default bandwidth neighbor count for single-shot data: 5% of the gallery,
/// at least 1.
pub fn default_k_sigma(gallery_len: usize) -> usize {
    ((gallery_len as f64 * 0.05).round() as usize).max(1)
}

/// A bandwidth table bound to the search space it was verified against.
#[derive(Debug)]
pub struct KernelIndex<'s, 'a> {
    space: &'s SearchSpace<'a>,
    table: &'s SigmaTable,
    basis: Basis,
}

impl<'s, 'a> KernelIndex<'s, 'a> {
    pub fn new(space: &'s SearchSpace<'a>, table: &'s SigmaTable) -> Result<Self> {
        table.verify(space)?;
        Ok(KernelIndex {
            space,
            table,
            basis: Basis::ExpNeg,
        })
    }

    pub fn table(&self) -> &SigmaTable {
        self.table
    }

    pub fn space(&self) -> &SearchSpace<'a> {
        self.space
    }

    /// Kernel arguments `t_j = d_j / σ_j`.
    pub fn inv_arguments(&self, view: &ProbeView<'_>) -> Vec<f64> {
        view.to_gallery
            .iter()
            .zip(self.table.sigmas())
            .map(|(d, s)| d / s)
            .collect()
    }

    pub fn inv_scores(&self, view: &ProbeView<'_>) -> Vec<f64> {
        self.inv_arguments(view)
            .into_iter()
            .map(|t| self.basis.eval(t))
            .collect()
    }

    /// The probe's own bandwidth: its `k_sigma`-th nearest-neighbor distance
    /// within `Y`, or within `X ∪ Y` minus itself when augmented.
    pub fn probe_sigma(&self, view: &ProbeView<'_>) -> Result<f64> {
        let mut d: Vec<f64> = self.space.probe_pool(view).into_iter().map(|(d, _)| d).collect();
        let max = d.iter().copied().fold(0.0_f64, f64::max);
        let s = kth_smallest(&mut d, self.table.k_sigma()).ok_or(Error::KTooLarge {
            k: self.table.k_sigma(),
        })?;
        Ok(if s > 0.0 { s } else { sigma_floor(max) })
    }

    /// Kernel arguments `d_j² / (σ_i σ_j)`.
    pub fn bi_arguments(&self, view: &ProbeView<'_>, sigma_i: f64) -> Result<Vec<f64>> {
        if !(sigma_i > 0.0 && sigma_i.is_finite()) {
            return Err(Error::NonPositiveSigma(sigma_i));
        }
        Ok(view
            .to_gallery
            .iter()
            .zip(self.table.sigmas())
            .map(|(d, s)| d * d / (sigma_i * s))
            .collect())
    }

    pub fn bi_scores(&self, view: &ProbeView<'_>, sigma_i: f64) -> Result<Vec<f64>> {
        Ok(self
            .bi_arguments(view, sigma_i)?
            .into_iter()
            .map(|t| self.basis.eval(t))
            .collect())
    }

    fn rank_arguments(&self, view: &ProbeView<'_>, args: Vec<f64>) -> RankedList {
        let gallery = self.space.gallery();
        let mut keyed: Vec<(f64, u64)> = args
            .into_iter()
            .enumerate()
            .filter(|(j, _)| !view.is_skipped(*j))
            .map(|(j, t)| (t, gallery.id(j)))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let entries = keyed
            .into_iter()
            .map(|(t, id)| RankEntry {
                gallery_id: id,
                value: self.basis.eval(t),
                tier: 0,
            })
            .collect();
        RankedList::from_sorted(view.probe.id, RankOrder::DescendingScore, entries)
    }

    pub fn inv_rank(&self, view: &ProbeView<'_>) -> RankedList {
        self.rank_arguments(view, self.inv_arguments(view))
    }

    pub fn bi_rank(&self, view: &ProbeView<'_>) -> Result<RankedList> {
        let sigma_i = self.probe_sigma(view)?;
        Ok(self.rank_arguments(view, self.bi_arguments(view, sigma_i)?))
    }
}

/// `s_j = φ(d(x, y_j) / σ_j)` for every gallery sample.
pub fn inv_dakr_score(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    table: &SigmaTable,
    policy: AugmentationPolicy<'_>,
) -> Result<Vec<f64>> {
    let space = SearchSpace::new(gallery, metric, policy)?;
    let index = KernelIndex::new(&space, table)?;
    Ok(index.inv_scores(&space.view(probe)?))
}

pub fn inv_dakr_rank(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    table: &SigmaTable,
    policy: AugmentationPolicy<'_>,
) -> Result<RankedList> {
    let space = SearchSpace::new(gallery, metric, policy)?;
    let index = KernelIndex::new(&space, table)?;
    Ok(index.inv_rank(&space.view(probe)?))
}

/// `χ_j = φ(d(x, y_j)² / (σ_i σ_j))` for a caller-supplied probe bandwidth.
pub fn bi_dakr_score(
    probe: Sample<'_>,
    sigma_i: f64,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    table: &SigmaTable,
    policy: AugmentationPolicy<'_>,
) -> Result<Vec<f64>> {
    let space = SearchSpace::new(gallery, metric, policy)?;
    let index = KernelIndex::new(&space, table)?;
    index.bi_scores(&space.view(probe)?, sigma_i)
}

/// Bidirectional ranking; the probe bandwidth is computed on the fly from
/// the probe's own pool.
pub fn bi_dakr_rank(
    probe: Sample<'_>,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    table: &SigmaTable,
    policy: AugmentationPolicy<'_>,
) -> Result<RankedList> {
    let space = SearchSpace::new(gallery, metric, policy)?;
    let index = KernelIndex::new(&space, table)?;
    index.bi_rank(&space.view(probe)?)
}
