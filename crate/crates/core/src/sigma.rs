//! Density-adaptive bandwidths and their on-disk sidecar.
//!
//! Sidecar layout (little-endian):
//!
//! ```text
//! magic "SGT1" | u32 count | u32 k_sigma | u8 policy | [u8; 32] digest | count x f64
//! ```

use std::fs;
use std::path::Path;

use log::warn;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::metric::DistanceMetric;
use crate::space::{AugmentationPolicy, PolicyMode, SearchSpace};

pub const SIDECAR_MAGIC: &[u8; 4] = b"SGT1";
const HEADER_LEN: usize = 4 + 4 + 4 + 1 + 32;

/// Relative floor applied to zero bandwidths (coincident samples).
pub const SIGMA_FLOOR_REL: f64 = 1e-12;

/// Per-gallery-sample bandwidths: the distance from each sample to its
/// `k_sigma`-th nearest neighbor in its density pool.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTable {
    digest: [u8; 32],
    sigmas: Vec<f64>,
    k_sigma: usize,
    policy: PolicyMode,
}

impl SigmaTable {
    /// Offline phase: one k-th neighbor search per gallery sample.
    pub fn build(space: &SearchSpace<'_>, k_sigma: usize) -> Result<Self> {
        if k_sigma == 0 {
            return Err(Error::InvalidParams("k_sigma must be at least 1".into()));
        }
        let pool = space.density_pool_len();
        if pool == 0 {
            return Err(Error::InvalidParams(
                "density pool is empty: a single gallery sample has no neighbors".into(),
            ));
        }
        if k_sigma > pool {
            warn!("k_sigma = {k_sigma} exceeds the density pool size {pool}; clamping");
        }
        let (mut sigmas, max_dist) = space.gallery_kth_distances(k_sigma);
        let floor = sigma_floor(max_dist);
        for s in &mut sigmas {
            if *s <= 0.0 {
                *s = floor;
            }
        }
        Ok(SigmaTable {
            digest: reference_digest(space, k_sigma),
            sigmas,
            k_sigma,
            policy: space.mode(),
        })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn k_sigma(&self) -> usize {
        self.k_sigma
    }

    pub fn policy(&self) -> PolicyMode {
        self.policy
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    /// Fails with [`Error::StaleSigmaTable`] unless the table was built over
    /// exactly this gallery, metric, policy and augmentation set.
    pub fn verify(&self, space: &SearchSpace<'_>) -> Result<()> {
        if self.sigmas.len() != space.gallery().len()
            || self.policy != space.mode()
            || self.digest != reference_digest(space, self.k_sigma)
        {
            return Err(Error::StaleSigmaTable);
        }
        Ok(())
    }

    /// Replaces every bandwidth by `value`; used to probe degenerate cases.
    pub fn with_uniform_sigma(&self, value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveSigma(value));
        }
        Ok(SigmaTable {
            sigmas: vec![value; self.sigmas.len()],
            ..self.clone()
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.sigmas.len());
        out.extend_from_slice(SIDECAR_MAGIC);
        out.extend_from_slice(&(self.sigmas.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.k_sigma as u32).to_le_bytes());
        out.push(self.policy.as_u8());
        out.extend_from_slice(&self.digest);
        for s in &self.sigmas {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    /// Parses a sidecar; `origin` names the source in error messages.
    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::format(origin, "truncated sigma table header"));
        }
        if &bytes[0..4] != SIDECAR_MAGIC {
            return Err(Error::format(origin, "bad magic, expected SGT1"));
        }
        let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let k_sigma = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let policy = PolicyMode::from_u8(bytes[12])
            .ok_or_else(|| Error::format(origin, format!("unknown policy byte {}", bytes[12])))?;
        let digest: [u8; 32] = bytes[13..45].try_into().unwrap();
        let body = &bytes[HEADER_LEN..];
        if body.len() != count * 8 {
            return Err(Error::format(
                origin,
                format!(
                    "expected {count} sigma values ({} bytes), found {} bytes",
                    count * 8,
                    body.len()
                ),
            ));
        }
        let sigmas: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some(bad) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::format(
                origin,
                format!("sigma value {bad} is not positive and finite"),
            ));
        }
        if k_sigma == 0 {
            return Err(Error::format(origin, "k_sigma of 0 in header"));
        }
        Ok(SigmaTable {
            digest,
            sigmas,
            k_sigma,
            policy,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

pub(crate) fn sigma_floor(max_dist: f64) -> f64 {
    let scale = if max_dist > 0.0 { max_dist } else { 1.0 };
    SIGMA_FLOOR_REL * scale
}

/// Builds the bandwidth table for `gallery` (optionally augmented with the
/// probe collection).
pub fn compute_sigma_table(
    gallery: &FeatureSet,
    metric: &DistanceMetric,
    k_sigma: usize,
    policy: AugmentationPolicy<'_>,
) -> Result<SigmaTable> {
    let space = SearchSpace::new(gallery, metric, policy)?;
    SigmaTable::build(&space, k_sigma)
}

fn hash_features(h: &mut Sha256, fs: &FeatureSet) {
    h.update((fs.len() as u64).to_le_bytes());
    h.update((fs.dim() as u64).to_le_bytes());
    for id in fs.ids() {
        h.update(id.to_le_bytes());
    }
    for v in fs.as_slice() {
        h.update(v.to_le_bytes());
    }
}

fn hash_metric(h: &mut Sha256, metric: &DistanceMetric) {
    h.update(metric.name().as_bytes());
    match metric {
        DistanceMetric::Mahalanobis(m) => {
            h.update((m.dim() as u64).to_le_bytes());
            for v in m.as_slice() {
                h.update(v.to_le_bytes());
            }
        }
        DistanceMetric::Precomputed(p) => {
            let (r, c) = p.matrix().shape();
            h.update((r as u64).to_le_bytes());
            h.update((c as u64).to_le_bytes());
            for ids in [p.row_ids(), p.col_ids()].into_iter().flatten() {
                for id in ids {
                    h.update(id.to_le_bytes());
                }
            }
            for v in p.matrix().as_slice() {
                h.update(v.to_le_bytes());
            }
        }
        DistanceMetric::Euclidean | DistanceMetric::SquaredEuclidean => {}
    }
}

/// Content digest of everything a bandwidth table depends on.
pub fn reference_digest(space: &SearchSpace<'_>, k_sigma: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"dakr-sigma-ref-v1");
    hash_features(&mut h, space.gallery());
    hash_metric(&mut h, space.metric());
    h.update((k_sigma as u64).to_le_bytes());
    h.update([space.mode().as_u8()]);
    if let Some(x) = space.augment() {
        hash_features(&mut h, x);
    }
    h.finalize().into()
}
