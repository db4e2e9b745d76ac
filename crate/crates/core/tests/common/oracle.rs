//! Brute-force reference implementations. Every neighborhood is built by
//! sorting its whole candidate pool and every kernel value is evaluated
//! directly from coordinates, with no code shared with the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dakr::FeatureSet;
use rand::seq::SliceRandom;
use rand::Rng;

/// A candidate in some pool. Gallery samples order before probes on exact
/// distance ties, then by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Gallery(u64),
    Probe(u64),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub gallery: Vec<(u64, Vec<f64>)>,
    pub probes: Vec<(u64, Vec<f64>)>,
}

impl Instance {
    pub fn new(gallery: &[Vec<f64>], probes: &[Vec<f64>]) -> Self {
        Instance {
            gallery: gallery
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, v)| (i as u64, v))
                .collect(),
            probes: probes
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, v)| (1000 + i as u64, v))
                .collect(),
        }
    }

    /// Shuffled, non-contiguous gallery ids so id/index mix-ups surface.
    pub fn random(rng: &mut impl Rng, n_gallery: usize, n_probes: usize, dim: usize) -> Self {
        let mut ids: Vec<u64> = (0..3 * n_gallery as u64).map(|i| i * 7 + 3).collect();
        ids.shuffle(rng);
        let mut point = || -> Vec<f64> { (0..dim).map(|_| rng.random::<f64>() * 10.0).collect() };
        let gallery = (0..n_gallery).map(|i| (ids[i], point())).collect();
        let probes = (0..n_probes).map(|i| (100_000 + i as u64, point())).collect();
        Instance { gallery, probes }
    }

    pub fn gallery_set(&self) -> FeatureSet {
        set_of(&self.gallery)
    }

    pub fn probe_set(&self) -> FeatureSet {
        set_of(&self.probes)
    }

    pub fn gallery_ids(&self) -> Vec<u64> {
        self.gallery.iter().map(|(id, _)| *id).collect()
    }
}

fn set_of(rows: &[(u64, Vec<f64>)]) -> FeatureSet {
    let ids = rows.iter().map(|(id, _)| *id).collect();
    let vecs: Vec<Vec<f64>> = rows.iter().map(|(_, v)| v.clone()).collect();
    FeatureSet::with_ids_from_rows(ids, &vecs).unwrap()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sorted(mut pool: Vec<(f64, Node)>) -> Vec<(f64, Node)> {
    pool.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    pool
}

fn top(pool: Vec<(f64, Node)>, k: usize) -> BTreeSet<Node> {
    sorted(pool).into_iter().take(k).map(|(_, n)| n).collect()
}

/// `Y` or `X_{-i} ∪ Y`, as seen from probe `i`.
pub fn probe_pool(inst: &Instance, i: usize, with_probes: bool) -> Vec<(f64, Node)> {
    let x = &inst.probes[i].1;
    let mut pool: Vec<(f64, Node)> = inst
        .gallery
        .iter()
        .map(|(id, y)| (euclid(x, y), Node::Gallery(*id)))
        .collect();
    if with_probes {
        for (a, (id, z)) in inst.probes.iter().enumerate() {
            if a != i {
                pool.push((euclid(x, z), Node::Probe(*id)));
            }
        }
    }
    pool
}

/// `{x_i} ∪ Y_{-j}` or `X ∪ Y_{-j}`, as seen from gallery sample `j`.
pub fn gallery_pool(inst: &Instance, i: usize, j: usize, with_probes: bool) -> Vec<(f64, Node)> {
    let y = &inst.gallery[j].1;
    let mut pool = Vec::new();
    for (a, (id, z)) in inst.probes.iter().enumerate() {
        if with_probes || a == i {
            pool.push((euclid(y, z), Node::Probe(*id)));
        }
    }
    for (l, (id, w)) in inst.gallery.iter().enumerate() {
        if l != j {
            pool.push((euclid(y, w), Node::Gallery(*id)));
        }
    }
    pool
}

pub fn knn(inst: &Instance, i: usize, k: usize, with_probes: bool) -> BTreeSet<Node> {
    top(probe_pool(inst, i, with_probes), k)
}

pub fn gallery_neighborhood(inst: &Instance, i: usize, j: usize, k: usize, with_probes: bool) -> BTreeSet<Node> {
    top(gallery_pool(inst, i, j, with_probes), k)
}

pub fn inn(inst: &Instance, i: usize, k: usize, with_probes: bool) -> BTreeSet<u64> {
    let me = Node::Probe(inst.probes[i].0);
    (0..inst.gallery.len())
        .filter(|&j| gallery_neighborhood(inst, i, j, k, with_probes).contains(&me))
        .map(|j| inst.gallery[j].0)
        .collect()
}

pub fn gallery_members(set: &BTreeSet<Node>) -> BTreeSet<u64> {
    set.iter()
        .filter_map(|n| match n {
            Node::Gallery(id) => Some(*id),
            Node::Probe(_) => None,
        })
        .collect()
}

pub fn rnn(inst: &Instance, i: usize, k: usize, with_probes: bool) -> BTreeSet<u64> {
    let forward = gallery_members(&knn(inst, i, k, with_probes));
    forward.intersection(&inn(inst, i, k, with_probes)).copied().collect()
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    1.0 - a.intersection(b).count() as f64 / union as f64
}

fn distance_to(inst: &Instance, i: usize, j: usize) -> f64 {
    euclid(&inst.probes[i].1, &inst.gallery[j].1)
}

/// Gallery ids ordered by `(key, distance, id)` for `chosen`, followed by
/// the rest ordered by `(distance, id)`.
fn two_tier(inst: &Instance, i: usize, chosen: &BTreeSet<u64>, key: impl Fn(usize) -> f64) -> Vec<u64> {
    let mut head = Vec::new();
    let mut tail = Vec::new();
    for (j, (id, _)) in inst.gallery.iter().enumerate() {
        let d = distance_to(inst, i, j);
        if chosen.contains(id) {
            head.push((key(j), d, *id));
        } else {
            tail.push((d, d, *id));
        }
    }
    let cmp = |a: &(f64, f64, u64), b: &(f64, f64, u64)| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(&b.2))
    };
    head.sort_by(cmp);
    tail.sort_by(cmp);
    head.into_iter().chain(tail).map(|(_, _, id)| id).collect()
}

pub fn rank_knn(inst: &Instance, i: usize) -> Vec<u64> {
    two_tier(inst, i, &BTreeSet::new(), |_| 0.0)
}

pub fn rank_inn(inst: &Instance, i: usize, k: usize, with_probes: bool) -> Vec<u64> {
    two_tier(inst, i, &inn(inst, i, k, with_probes), |j| distance_to(inst, i, j))
}

pub fn rank_rnn(inst: &Instance, i: usize, k: usize, with_probes: bool) -> Vec<u64> {
    let forward = knn(inst, i, k, with_probes);
    two_tier(inst, i, &rnn(inst, i, k, with_probes), |j| {
        jaccard(&gallery_neighborhood(inst, i, j, k, with_probes), &forward)
    })
}

fn kth(mut d: Vec<f64>, k: usize) -> f64 {
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d[k.min(d.len()) - 1]
}

/// Gallery bandwidths: `k_sigma`-th nearest distance within `Y_{-j}` or
/// `(X ∪ Y)_{-j}`.
pub fn sigmas(inst: &Instance, k_sigma: usize, with_probes: bool) -> Vec<f64> {
    (0..inst.gallery.len())
        .map(|j| {
            let y = &inst.gallery[j].1;
            let mut d: Vec<f64> = inst
                .gallery
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != j)
                .map(|(_, (_, w))| euclid(y, w))
                .collect();
            if with_probes {
                d.extend(inst.probes.iter().map(|(_, z)| euclid(y, z)));
            }
            kth(d, k_sigma)
        })
        .collect()
}

pub fn probe_sigma(inst: &Instance, i: usize, k_sigma: usize, with_probes: bool) -> f64 {
    kth(
        probe_pool(inst, i, with_probes).into_iter().map(|(d, _)| d).collect(),
        k_sigma,
    )
}

pub fn inv_scores(inst: &Instance, i: usize, sigma: &[f64]) -> Vec<f64> {
    (0..inst.gallery.len())
        .map(|j| (-distance_to(inst, i, j) / sigma[j]).exp())
        .collect()
}

pub fn bi_scores(inst: &Instance, i: usize, sigma_i: f64, sigma: &[f64]) -> Vec<f64> {
    (0..inst.gallery.len())
        .map(|j| {
            let d = distance_to(inst, i, j);
            (-(d * d) / (sigma_i * sigma[j])).exp()
        })
        .collect()
}

/// Gallery ids by ascending kernel argument (descending score for a
/// strictly decreasing basis), ties by id. Sorting the argument keeps the
/// order exact where `exp(-t)` underflows.
fn by_argument(inst: &Instance, args: Vec<f64>) -> Vec<u64> {
    let mut order: Vec<(f64, u64)> = args
        .into_iter()
        .zip(&inst.gallery)
        .map(|(t, (id, _))| (t, *id))
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    order.into_iter().map(|(_, id)| id).collect()
}

pub fn inv_rank(inst: &Instance, i: usize, sigma: &[f64]) -> Vec<u64> {
    let args = (0..inst.gallery.len())
        .map(|j| distance_to(inst, i, j) / sigma[j])
        .collect();
    by_argument(inst, args)
}

pub fn bi_rank(inst: &Instance, i: usize, sigma_i: f64, sigma: &[f64]) -> Vec<u64> {
    let args = (0..inst.gallery.len())
        .map(|j| {
            let d = distance_to(inst, i, j);
            d * d / (sigma_i * sigma[j])
        })
        .collect();
    by_argument(inst, args)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
