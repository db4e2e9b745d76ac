mod common;

use std::collections::BTreeSet;

use common::fixtures::*;
use common::oracle::{self, Instance};
use dakr::{
    compute_sigma_table, inn, inv_dakr_rank, knn, rank_by_rnn, rnn, AugmentationPolicy, DistanceMetric, FeatureSet,
    SampleRef,
};

const E: DistanceMetric = DistanceMetric::Euclidean;
const G: AugmentationPolicy<'static> = AugmentationPolicy::GalleryOnly;

fn ids(v: &[u64]) -> BTreeSet<u64> {
    v.iter().copied().collect()
}

fn instance(gallery: &FeatureSet, probes: &FeatureSet) -> Instance {
    Instance {
        gallery: (0..gallery.len())
            .map(|j| (gallery.id(j), gallery.row(j).to_vec()))
            .collect(),
        probes: (0..probes.len())
            .map(|i| (probes.id(i), probes.row(i).to_vec()))
            .collect(),
    }
}

#[test]
fn figure_one_sets() {
    let gallery = figure_one_gallery();
    let probes = figure_one_probes();
    let x = probes.sample(0);
    let forward = knn(x, &gallery, &E, 3, G).unwrap();
    assert_eq!(forward.gallery_members(), ids(&[1, 2, 3]));
    assert_eq!(inn(x, &gallery, &E, 3, G).unwrap(), ids(&[2, 3]));
    assert_eq!(rnn(x, &gallery, &E, 3, G).unwrap(), ids(&[2, 3]));

    let inst = instance(&gallery, &probes);
    assert_eq!(oracle::inn(&inst, 0, 3, false), ids(&[2, 3]));
    assert_eq!(oracle::rnn(&inst, 0, 3, false), ids(&[2, 3]));
}

#[test]
fn figure_one_reciprocal_ranking_puts_reciprocal_samples_first() {
    let gallery = figure_one_gallery();
    let probes = figure_one_probes();
    let list = rank_by_rnn(probes.sample(0), &gallery, &E, 3, G).unwrap();
    let order = list.gallery_ids();
    assert_eq!(ids(&order[..2]), ids(&[2, 3]));
    assert_eq!(order[2], 1);
    assert_eq!(order, oracle::rank_rnn(&instance(&gallery, &probes), 0, 3, false));
    assert!(list.entries[..2].iter().all(|e| e.tier == 0));
    assert!(list.entries[2..].iter().all(|e| e.tier == 1));
}

#[test]
fn figure_two_extra_probe_evicts_y3() {
    let gallery = figure_one_gallery();
    let probes = figure_two_probes();
    let x = probes.sample(0);
    let plus = AugmentationPolicy::WithProbes(&probes);

    let forward = knn(x, &gallery, &E, 3, plus).unwrap();
    assert_eq!(forward.gallery_members(), ids(&[1, 2, 3]));
    assert!(!forward.contains(SampleRef::Probe(EXTRA_PROBE_ID)));
    assert_eq!(inn(x, &gallery, &E, 3, plus).unwrap(), ids(&[2]));
    assert_eq!(rnn(x, &gallery, &E, 3, plus).unwrap(), ids(&[2]));

    // without augmentation the extra probe changes nothing
    assert_eq!(inn(x, &gallery, &E, 3, G).unwrap(), ids(&[2, 3]));

    let inst = instance(&gallery, &probes);
    assert_eq!(oracle::inn(&inst, 0, 3, true), ids(&[2]));
    assert_eq!(oracle::rnn(&inst, 0, 3, true), ids(&[2]));
}

#[test]
fn full_scan_finds_inverse_neighbors_outside_the_forward_set() {
    let gallery = isolated_gallery();
    let probes = figure_one_probes();
    let x = probes.sample(0);
    let forward = knn(x, &gallery, &E, 3, G).unwrap().gallery_members();
    let inverse = inn(x, &gallery, &E, 3, G).unwrap();
    assert!(inverse.contains(&10));
    assert!(!forward.contains(&10));

    let restricted: BTreeSet<u64> = inverse.intersection(&forward).copied().collect();
    assert_ne!(inverse, restricted);
    assert_eq!(inverse, oracle::inn(&instance(&gallery, &probes), 0, 3, false));
}

#[test]
fn one_dimensional_neighbor_examples() {
    let gallery = FeatureSet::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
    let probe = [0.9];
    let got = knn(dakr::Sample::new(7, &probe), &gallery, &E, 2, G).unwrap();
    assert_eq!(got.gallery_members(), ids(&[0, 1]));

    let on_point = [3.0];
    let got = knn(dakr::Sample::new(7, &on_point), &gallery, &E, 1, G).unwrap();
    assert_eq!(got.gallery_members(), ids(&[2]));
}

#[test]
fn denser_region_sample_drops_below_sparser_one() {
    // dense cluster near 0, sparse samples at 3 and 6; probe at 1.4 is
    // nearer to 0.2 than to 3 in raw distance
    let gallery = FeatureSet::from_rows(&[vec![0.0], vec![0.1], vec![0.2], vec![3.0], vec![6.0]]).unwrap();
    let probe = [1.4];
    let table = compute_sigma_table(&gallery, &E, 1, G).unwrap();
    let list = inv_dakr_rank(dakr::Sample::new(50, &probe), &gallery, &E, &table, G).unwrap();
    let order = list.gallery_ids();
    assert!(order.iter().position(|&g| g == 3) < order.iter().position(|&g| g == 2));

    let inst = Instance::new(
        &[vec![0.0], vec![0.1], vec![0.2], vec![3.0], vec![6.0]],
        &[probe.to_vec()],
    );
    let sig = oracle::sigmas(&inst, 1, false);
    let by_formula = oracle::inv_rank(&inst, 0, &sig);
    assert_eq!(order, by_formula);
    let scores = oracle::inv_scores(&inst, 0, &sig);
    assert!(scores[3] > scores[2]);
}
