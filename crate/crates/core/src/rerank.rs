//! Batch re-ranking over a probe collection.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dakr::KernelIndex;
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::metric::DistanceMetric;
use crate::neighbors::{rank_inn_in, rank_knn_in, rank_rnn_in};
use crate::ranking::RankedList;
use crate::sigma::SigmaTable;
use crate::space::{AugmentationPolicy, PolicyMode, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Knn,
    Inn,
    Rnn,
    InvDakr,
    BiDakr,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Knn, Method::Inn, Method::Rnn, Method::InvDakr, Method::BiDakr];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Knn => "knn",
            Method::Inn => "inn",
            Method::Rnn => "rnn",
            Method::InvDakr => "inv_dakr",
            Method::BiDakr => "bi_dakr",
        }
    }

    pub fn uses_kernel(self) -> bool {
        matches!(self, Method::InvDakr | Method::BiDakr)
    }

    /// Display label including the augmentation suffix, e.g. `bi_dakr+`.
    pub fn label(self, mode: PolicyMode) -> String {
        match mode {
            PolicyMode::GalleryOnly => self.as_str().to_string(),
            PolicyMode::WithProbes => format!("{}+", self.as_str()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "knn" => Ok(Method::Knn),
            "inn" => Ok(Method::Inn),
            "rnn" => Ok(Method::Rnn),
            "inv_dakr" => Ok(Method::InvDakr),
            "bi_dakr" => Ok(Method::BiDakr),
            other => Err(Error::InvalidParams(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerankConfig {
    pub method: Method,
    pub policy: PolicyMode,
    /// Neighborhood size for the k-NN family.
    pub k: usize,
    /// Bandwidth neighbor count for the kernel methods.
    pub k_sigma: usize,
    /// Treat probes whose id appears in the gallery as gallery members.
    pub shared_ids: bool,
}

impl RerankConfig {
    pub fn new(method: Method, policy: PolicyMode, k: usize, k_sigma: usize) -> Self {
        RerankConfig {
            method,
            policy,
            k,
            k_sigma,
            shared_ids: false,
        }
    }
}

/// A prepared batch: the search space, and for kernel methods the bandwidth
/// table computed (or loaded) once and shared by every probe.
#[derive(Debug)]
pub struct Reranker<'a> {
    config: RerankConfig,
    probes: &'a FeatureSet,
    space: SearchSpace<'a>,
    table: Option<SigmaTable>,
    offline: Duration,
}

impl<'a> Reranker<'a> {
    /// Runs the offline phase (bandwidth table for the kernel methods).
    pub fn prepare(
        config: RerankConfig,
        probes: &'a FeatureSet,
        gallery: &'a FeatureSet,
        metric: &'a DistanceMetric,
    ) -> Result<Self> {
        Self::build(config, probes, gallery, metric, None)
    }

    /// Uses an existing bandwidth table, which must match the inputs.
    pub fn with_table(
        config: RerankConfig,
        probes: &'a FeatureSet,
        gallery: &'a FeatureSet,
        metric: &'a DistanceMetric,
        table: SigmaTable,
    ) -> Result<Self> {
        Self::build(config, probes, gallery, metric, Some(table))
    }

    fn build(
        mut config: RerankConfig,
        probes: &'a FeatureSet,
        gallery: &'a FeatureSet,
        metric: &'a DistanceMetric,
        table: Option<SigmaTable>,
    ) -> Result<Self> {
        if config.k == 0 || config.k_sigma == 0 {
            return Err(Error::InvalidParams("k and k_sigma must be at least 1".into()));
        }
        if config.policy == PolicyMode::WithProbes && probes.len() < 2 {
            warn!("augmentation needs at least two probes; falling back to gallery-only neighborhoods");
            config.policy = PolicyMode::GalleryOnly;
        }
        if !metric.is_precomputed() && probes.dim() != gallery.dim() {
            return Err(Error::DimensionMismatch {
                expected: gallery.dim(),
                actual: probes.dim(),
            });
        }
        let policy = match config.policy {
            PolicyMode::GalleryOnly => AugmentationPolicy::GalleryOnly,
            PolicyMode::WithProbes => AugmentationPolicy::WithProbes(probes),
        };
        let mut space = if config.shared_ids {
            SearchSpace::with_shared_ids(gallery, metric, policy)?
        } else {
            SearchSpace::new(gallery, metric, policy)?
        };
        let start = Instant::now();
        let table = if config.method.uses_kernel() {
            let table = match table {
                Some(t) => {
                    t.verify(&space)?;
                    t
                }
                None => SigmaTable::build(&space, config.k_sigma)?,
            };
            Some(table)
        } else {
            if matches!(config.method, Method::Inn | Method::Rnn) {
                space.cache_distances()?;
            }
            None
        };
        let offline = start.elapsed();
        Ok(Reranker {
            config,
            probes,
            space,
            table,
            offline,
        })
    }

    pub fn config(&self) -> &RerankConfig {
        &self.config
    }

    pub fn table(&self) -> Option<&SigmaTable> {
        self.table.as_ref()
    }

    pub fn offline_time(&self) -> Duration {
        self.offline
    }

    pub fn space(&self) -> &SearchSpace<'a> {
        &self.space
    }

    /// Online phase for the probe at `index`.
    pub fn rank(&self, index: usize) -> Result<RankedList> {
        let view = self.space.view(self.probes.sample(index))?;
        let k = self.config.k;
        match self.config.method {
            Method::Knn => Ok(rank_knn_in(&self.space, &view)),
            Method::Inn => rank_inn_in(&self.space, &view, k),
            Method::Rnn => rank_rnn_in(&self.space, &view, k),
            Method::InvDakr | Method::BiDakr => {
                let table = self.table.as_ref().expect("kernel methods always carry a table");
                let index = KernelIndex::new(&self.space, table)?;
                if self.config.method == Method::InvDakr {
                    Ok(index.inv_rank(&view))
                } else {
                    index.bi_rank(&view)
                }
            }
        }
    }

    /// Ranks every probe; probes are processed in parallel and returned in
    /// input order.
    pub fn rank_all(&self) -> Result<Vec<RankedList>> {
        (0..self.probes.len()).into_par_iter().map(|i| self.rank(i)).collect()
    }
}

/// One ranked list per probe.
pub fn rerank(
    config: RerankConfig,
    probes: &FeatureSet,
    gallery: &FeatureSet,
    metric: &DistanceMetric,
) -> Result<Vec<RankedList>> {
    Reranker::prepare(config, probes, gallery, metric)?.rank_all()
}
