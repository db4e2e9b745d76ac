//! Candidate pools shared by the neighbor-set and kernel re-rankers.
//!
//! A [`SearchSpace`] binds a gallery, a metric and an optional augmentation
//! set of extra probes. Each probe is resolved once into a [`ProbeView`]
//! holding its distances to every gallery and augmentation sample, from which
//! the individual pools are assembled:
//!
//! * probe pool: `Y` (gallery only) or `X_{-i} ∪ Y` (with probes);
//! * pool of gallery sample `j`: `{x_i} ∪ Y_{-j}` or `X ∪ Y_{-j}`;
//! * density pool of gallery sample `j`: `Y_{-j}` or `(X ∪ Y)_{-j}`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSet, Sample};
use crate::metric::{DistanceMatrix, DistanceMetric};

/// Galleries up to this size get their pairwise distances cached when a
/// batch asks for it (8192^2 f64 = 512 MiB is past the point of usefulness).
pub const GALLERY_CACHE_LIMIT: usize = 4096;

/// Identifies a sample across the gallery and probe id namespaces.
///
/// Orders gallery samples before probe samples, then by id; this is the tie
/// break used whenever two pool members are equidistant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SampleRef {
    Gallery(u64),
    Probe(u64),
}

impl SampleRef {
    pub fn gallery_id(self) -> Option<u64> {
        match self {
            SampleRef::Gallery(id) => Some(id),
            SampleRef::Probe(_) => None,
        }
    }
}

/// Whether neighborhoods are formed from the gallery alone or from the
/// gallery augmented with the probe collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    GalleryOnly,
    WithProbes,
}

impl PolicyMode {
    pub fn as_u8(self) -> u8 {
        match self {
            PolicyMode::GalleryOnly => 0,
            PolicyMode::WithProbes => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(PolicyMode::GalleryOnly),
            1 => Some(PolicyMode::WithProbes),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AugmentationPolicy<'a> {
    GalleryOnly,
    WithProbes(&'a FeatureSet),
}

impl<'a> AugmentationPolicy<'a> {
    pub fn mode(&self) -> PolicyMode {
        match self {
            AugmentationPolicy::GalleryOnly => PolicyMode::GalleryOnly,
            AugmentationPolicy::WithProbes(_) => PolicyMode::WithProbes,
        }
    }

    pub fn probes(&self) -> Option<&'a FeatureSet> {
        match self {
            AugmentationPolicy::GalleryOnly => None,
            AugmentationPolicy::WithProbes(p) => Some(p),
        }
    }
}

/// A (distance, sample) pair; pools are totally ordered by this key.
pub type PoolEntry = (f64, SampleRef);

pub(crate) fn cmp_entry(a: &PoolEntry, b: &PoolEntry) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Keeps the `k` smallest entries, sorted.
pub(crate) fn smallest_k(mut pool: Vec<PoolEntry>, k: usize) -> Vec<PoolEntry> {
    if k < pool.len() {
        pool.select_nth_unstable_by(k, cmp_entry);
        pool.truncate(k);
    }
    pool.sort_by(cmp_entry);
    pool
}

/// Distance of the `k`-th smallest value (1-based), clamped to the pool size.
pub(crate) fn kth_smallest(values: &mut [f64], k: usize) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let idx = k.clamp(1, values.len()) - 1;
    let (_, v, _) = values.select_nth_unstable_by(idx, f64::total_cmp);
    Some(*v)
}

/// One probe resolved against a [`SearchSpace`].
#[derive(Debug, Clone)]
pub struct ProbeView<'p> {
    pub probe: Sample<'p>,
    /// Distance to every gallery sample, by gallery index.
    pub to_gallery: Vec<f64>,
    /// Augmentation samples visible to this probe (itself excluded), with
    /// their distance to the probe.
    pub to_augment: Vec<(usize, f64)>,
    /// Gallery index of the probe's own copy, excluded from all its pools.
    pub skip: Option<usize>,
}

impl ProbeView<'_> {
    pub fn is_skipped(&self, j: usize) -> bool {
        self.skip == Some(j)
    }
}

#[derive(Debug)]
pub struct SearchSpace<'a> {
    gallery: &'a FeatureSet,
    metric: &'a DistanceMetric,
    augment: Option<&'a FeatureSet>,
    augment_keep: Vec<usize>,
    shared_ids: bool,
    gallery_index: HashMap<u64, usize>,
    gallery_cache: Option<DistanceMatrix>,
    augment_cache: Option<DistanceMatrix>,
}

impl<'a> SearchSpace<'a> {
    pub fn new(gallery: &'a FeatureSet, metric: &'a DistanceMetric, policy: AugmentationPolicy<'a>) -> Result<Self> {
        Self::build(gallery, metric, policy, false)
    }

    /// Like [`SearchSpace::new`], but a probe whose id also names a gallery
    /// sample is treated as that sample: the copy is dropped from the
    /// probe's pools and not duplicated in the augmentation set.
    pub fn with_shared_ids(
        gallery: &'a FeatureSet,
        metric: &'a DistanceMetric,
        policy: AugmentationPolicy<'a>,
    ) -> Result<Self> {
        Self::build(gallery, metric, policy, true)
    }

    fn build(
        gallery: &'a FeatureSet,
        metric: &'a DistanceMetric,
        policy: AugmentationPolicy<'a>,
        shared_ids: bool,
    ) -> Result<Self> {
        if gallery.is_empty() {
            return Err(Error::EmptyGallery);
        }
        metric.check_compatible(gallery, gallery)?;
        let augment = policy.probes();
        if let Some(x) = augment {
            if !metric.is_precomputed() && x.dim() != gallery.dim() {
                return Err(Error::DimensionMismatch {
                    expected: gallery.dim(),
                    actual: x.dim(),
                });
            }
            metric.check_compatible(x, gallery)?;
            metric.check_compatible(x, x)?;
        }
        let gallery_index: HashMap<u64, usize> = gallery.ids().iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let augment_keep = match augment {
            Some(x) => (0..x.len())
                .filter(|&a| !(shared_ids && gallery_index.contains_key(&x.id(a))))
                .collect(),
            None => Vec::new(),
        };
        Ok(SearchSpace {
            gallery,
            metric,
            augment,
            augment_keep,
            shared_ids,
            gallery_index,
            gallery_cache: None,
            augment_cache: None,
        })
    }

    /// Precomputes gallery-gallery and augmentation-gallery distances when
    /// the gallery is small enough; otherwise distances are recomputed on
    /// demand. Results are identical either way.
    pub fn cache_distances(&mut self) -> Result<()> {
        if self.gallery.len() > GALLERY_CACHE_LIMIT {
            return Ok(());
        }
        if self.gallery_cache.is_none() {
            self.gallery_cache = Some(self.metric.distance_matrix(self.gallery, self.gallery)?);
        }
        if let (Some(x), None) = (self.augment, &self.augment_cache) {
            self.augment_cache = Some(self.metric.distance_matrix(x, self.gallery)?);
        }
        Ok(())
    }

    pub fn gallery(&self) -> &'a FeatureSet {
        self.gallery
    }

    pub fn metric(&self) -> &'a DistanceMetric {
        self.metric
    }

    pub fn augment(&self) -> Option<&'a FeatureSet> {
        self.augment
    }

    pub fn mode(&self) -> PolicyMode {
        if self.augment.is_some() {
            PolicyMode::WithProbes
        } else {
            PolicyMode::GalleryOnly
        }
    }

    #[inline]
    pub(crate) fn gallery_dist(&self, j: usize, l: usize) -> f64 {
        match &self.gallery_cache {
            Some(m) => m.get(j, l),
            None => self.metric.eval(self.gallery.sample(j), self.gallery.sample(l)),
        }
    }

    #[inline]
    pub(crate) fn augment_gallery_dist(&self, a: usize, j: usize) -> f64 {
        match (&self.augment_cache, self.augment) {
            (Some(m), _) => m.get(a, j),
            (None, Some(x)) => self.metric.eval(x.sample(a), self.gallery.sample(j)),
            (None, None) => unreachable!("augmentation distance requested without augmentation set"),
        }
    }

    fn augment_id(&self, a: usize) -> u64 {
        self.augment.map(|x| x.id(a)).expect("augmentation set present")
    }

    /// Resolves a probe: distances to the gallery and to the augmentation
    /// samples other than itself.
    pub fn view<'p>(&self, probe: Sample<'p>) -> Result<ProbeView<'p>> {
        let skip = if self.shared_ids {
            self.gallery_index.get(&probe.id).copied()
        } else {
            None
        };
        let to_gallery = self.distances_from(probe, self.gallery, (0..self.gallery.len()).collect())?;
        let to_augment = match self.augment {
            Some(x) => {
                let visible: Vec<usize> = self
                    .augment_keep
                    .iter()
                    .copied()
                    .filter(|&a| x.id(a) != probe.id)
                    .collect();
                let d = self.distances_from(probe, x, visible.clone())?;
                visible.into_iter().zip(d).collect()
            }
            None => Vec::new(),
        };
        Ok(ProbeView {
            probe,
            to_gallery,
            to_augment,
            skip,
        })
    }

    fn distances_from(&self, probe: Sample<'_>, set: &FeatureSet, indices: Vec<usize>) -> Result<Vec<f64>> {
        if self.metric.is_precomputed() {
            indices
                .into_iter()
                .map(|i| self.metric.between(probe, set.sample(i)))
                .collect()
        } else {
            if probe.vector.len() != set.dim() {
                return Err(Error::DimensionMismatch {
                    expected: set.dim(),
                    actual: probe.vector.len(),
                });
            }
            self.metric.check_dim(set.dim())?;
            Ok(indices
                .into_iter()
                .map(|i| self.metric.eval(probe, set.sample(i)))
                .collect())
        }
    }

    /// The probe's candidate pool: `Y` or `X_{-i} ∪ Y`.
    pub fn probe_pool(&self, view: &ProbeView<'_>) -> Vec<PoolEntry> {
        let mut pool = Vec::with_capacity(view.to_gallery.len() + view.to_augment.len());
        for (j, &d) in view.to_gallery.iter().enumerate() {
            if !view.is_skipped(j) {
                pool.push((d, SampleRef::Gallery(self.gallery.id(j))));
            }
        }
        for &(a, d) in &view.to_augment {
            pool.push((d, SampleRef::Probe(self.augment_id(a))));
        }
        pool
    }

    /// Pool of gallery sample `j` as seen from this probe: `{x_i} ∪ Y_{-j}`
    /// or `X ∪ Y_{-j}`.
    pub fn gallery_pool(&self, view: &ProbeView<'_>, j: usize) -> Vec<PoolEntry> {
        let mut pool = Vec::with_capacity(self.gallery.len() + view.to_augment.len());
        pool.push((view.to_gallery[j], SampleRef::Probe(view.probe.id)));
        for l in 0..self.gallery.len() {
            if l != j && !view.is_skipped(l) {
                pool.push((self.gallery_dist(j, l), SampleRef::Gallery(self.gallery.id(l))));
            }
        }
        for &(a, _) in &view.to_augment {
            pool.push((self.augment_gallery_dist(a, j), SampleRef::Probe(self.augment_id(a))));
        }
        pool
    }

    /// Whether the probe is among the `k` nearest members of gallery sample
    /// `j`'s pool. Scans the whole pool and counts the members ordered
    /// strictly before the probe.
    pub(crate) fn probe_in_gallery_neighborhood(&self, view: &ProbeView<'_>, j: usize, k: usize) -> bool {
        let key = (view.to_gallery[j], SampleRef::Probe(view.probe.id));
        let mut ahead = 0usize;
        for l in 0..self.gallery.len() {
            if l != j && !view.is_skipped(l) {
                let e = (self.gallery_dist(j, l), SampleRef::Gallery(self.gallery.id(l)));
                if cmp_entry(&e, &key).is_lt() {
                    ahead += 1;
                }
            }
        }
        for &(a, _) in &view.to_augment {
            let e = (self.augment_gallery_dist(a, j), SampleRef::Probe(self.augment_id(a)));
            if cmp_entry(&e, &key).is_lt() {
                ahead += 1;
            }
        }
        ahead < k
    }

    /// Size of gallery sample `j`'s density pool, `Y_{-j}` or `(X ∪ Y)_{-j}`.
    pub fn density_pool_len(&self) -> usize {
        self.gallery.len() - 1 + self.augment_keep.len()
    }

    /// `k`-th nearest-neighbor distance of every gallery sample within its
    /// density pool, together with the largest pairwise distance seen.
    /// Runs in parallel over gallery samples; each entry is computed
    /// independently so the output does not depend on the thread count.
    pub(crate) fn gallery_kth_distances(&self, k: usize) -> (Vec<f64>, f64) {
        let n = self.gallery.len();
        let rows: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut d: Vec<f64> = Vec::with_capacity(self.density_pool_len());
                for l in 0..n {
                    if l != j {
                        d.push(self.gallery_dist(j, l));
                    }
                }
                for &a in &self.augment_keep {
                    d.push(self.augment_gallery_dist(a, j));
                }
                let max = d.iter().copied().fold(0.0_f64, f64::max);
                (kth_smallest(&mut d, k).unwrap_or(0.0), max)
            })
            .collect();
        let max = rows.iter().map(|r| r.1).fold(0.0_f64, f64::max);
        (rows.into_iter().map(|r| r.0).collect(), max)
    }
}
