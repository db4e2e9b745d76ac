//! Re-ranking for retrieval and re-identification.
//!
//! Given a probe collection and a gallery, the crate produces per-probe
//! ranked gallery lists with
//!
//! - classical neighbor-set methods: k-NN, inverse k-NN (k-INN), reciprocal
//!   k-NN (k-RNN, ordered by neighborhood Jaccard distance);
//! - density-adaptive kernel methods: inverse (`inv_dakr`) and
//!   bidirectional (`bi_dakr`) kernel scoring with per-sample bandwidths;
//! - "+" variants of all of the above, where the probe collection augments
//!   the gallery neighborhoods as unlabeled samples.
//!
//! The [`eval`] module provides CMC/mAP evaluation, parameter sweeps and a
//! synthetic scenario generator.
//!
//! ```
//! use dakr::{rerank, DistanceMetric, FeatureSet, Method, PolicyMode, RerankConfig};
//!
//! let gallery = FeatureSet::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
//! let probes = FeatureSet::new(vec![10], vec![2.1], 1).unwrap();
//! let config = RerankConfig::new(Method::BiDakr, PolicyMode::GalleryOnly, 2, 2);
//! let lists = rerank(config, &probes, &gallery, &DistanceMetric::Euclidean).unwrap();
//! assert_eq!(lists[0].gallery_ids(), vec![2, 1, 0]);
//! ```

pub mod dakr;
pub mod error;
pub mod eval;
pub mod features;
pub mod metric;
pub mod neighbors;
pub mod ranking;
pub mod rerank;
pub mod sigma;
pub mod space;

pub use dakr::{
    bi_dakr_rank, bi_dakr_score, default_k_sigma, inv_dakr_rank, inv_dakr_score, Basis, KernelIndex, KernelSpec,
};
pub use error::{Error, Result};
pub use features::{FeatureSet, Sample};
pub use metric::{DistanceMatrix, DistanceMetric, MahalanobisMatrix, PrecomputedDistances};
pub use neighbors::{inn, jaccard_distance, knn, rank_by_inn, rank_by_rnn, rnn, NeighborSet};
pub use ranking::{sort_indices, Order, RankEntry, RankOrder, RankedList};
pub use rerank::{rerank, Method, RerankConfig, Reranker};
pub use sigma::{compute_sigma_table, SigmaTable};
pub use space::{AugmentationPolicy, PolicyMode, ProbeView, SampleRef, SearchSpace};
