//! Library-versus-oracle comparison on one instance, both policies, every
//! probe. Returns a description of each disagreement.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dakr::{
    bi_dakr_rank, bi_dakr_score, compute_sigma_table, inn, inv_dakr_rank, inv_dakr_score, knn, rank_by_inn,
    rank_by_rnn, rerank, rnn, AugmentationPolicy, DistanceMetric, FeatureSet, Method, PolicyMode, RerankConfig,
    SampleRef,
};

use super::oracle::{self, close, Instance, Node};

const REL: f64 = 1e-12;

fn node(s: &SampleRef) -> Node {
    match *s {
        SampleRef::Gallery(id) => Node::Gallery(id),
        SampleRef::Probe(id) => Node::Probe(id),
    }
}

fn policy(with_probes: bool, probes: &FeatureSet) -> AugmentationPolicy<'_> {
    if with_probes {
        AugmentationPolicy::WithProbes(probes)
    } else {
        AugmentationPolicy::GalleryOnly
    }
}

pub fn mismatches(inst: &Instance, k: usize, k_sigma: usize) -> Vec<String> {
    let gallery = inst.gallery_set();
    let probes = inst.probe_set();
    let metric = DistanceMetric::Euclidean;
    let mut out = Vec::new();
    let mut expect = |ok: bool, what: String| {
        if !ok {
            out.push(what);
        }
    };

    for with_probes in [false, true] {
        let tag = if with_probes { "+" } else { "" };
        let table = compute_sigma_table(&gallery, &metric, k_sigma, policy(with_probes, &probes)).unwrap();
        let sig = oracle::sigmas(inst, k_sigma, with_probes);
        let sig_ok = table.sigmas().iter().zip(&sig).all(|(a, b)| close(*a, *b, REL));
        expect(sig_ok, format!("sigma{tag}: {:?} vs {:?}", table.sigmas(), sig));

        for i in 0..inst.probes.len() {
            let x = probes.sample(i);
            let pol = || policy(with_probes, &probes);

            let got: BTreeSet<Node> = knn(x, &gallery, &metric, k, pol())
                .unwrap()
                .members
                .iter()
                .map(node)
                .collect();
            let want = oracle::knn(inst, i, k, with_probes);
            expect(got == want, format!("knn{tag} probe {i}: {got:?} vs {want:?}"));

            let got = inn(x, &gallery, &metric, k, pol()).unwrap();
            let want = oracle::inn(inst, i, k, with_probes);
            expect(got == want, format!("inn{tag} probe {i}: {got:?} vs {want:?}"));

            let got = rnn(x, &gallery, &metric, k, pol()).unwrap();
            let want = oracle::rnn(inst, i, k, with_probes);
            expect(got == want, format!("rnn{tag} probe {i}: {got:?} vs {want:?}"));

            let got = rank_by_inn(x, &gallery, &metric, k, pol()).unwrap().gallery_ids();
            let want = oracle::rank_inn(inst, i, k, with_probes);
            expect(got == want, format!("rank_by_inn{tag} probe {i}: {got:?} vs {want:?}"));

            let got = rank_by_rnn(x, &gallery, &metric, k, pol()).unwrap().gallery_ids();
            let want = oracle::rank_rnn(inst, i, k, with_probes);
            expect(got == want, format!("rank_by_rnn{tag} probe {i}: {got:?} vs {want:?}"));

            let got = inv_dakr_score(x, &gallery, &metric, &table, pol()).unwrap();
            let want = oracle::inv_scores(inst, i, &sig);
            let ok = got.iter().zip(&want).all(|(a, b)| close(*a, *b, 1e-9));
            expect(ok, format!("inv score{tag} probe {i}: {got:?} vs {want:?}"));

            let got = inv_dakr_rank(x, &gallery, &metric, &table, pol())
                .unwrap()
                .gallery_ids();
            let want = oracle::inv_rank(inst, i, &sig);
            expect(got == want, format!("inv rank{tag} probe {i}: {got:?} vs {want:?}"));

            let sigma_i = oracle::probe_sigma(inst, i, k_sigma, with_probes);
            let got = bi_dakr_score(x, sigma_i, &gallery, &metric, &table, pol()).unwrap();
            let want = oracle::bi_scores(inst, i, sigma_i, &sig);
            let ok = got.iter().zip(&want).all(|(a, b)| close(*a, *b, 1e-9));
            expect(ok, format!("bi score{tag} probe {i}: {got:?} vs {want:?}"));

            let got = bi_dakr_rank(x, &gallery, &metric, &table, pol()).unwrap().gallery_ids();
            let want = oracle::bi_rank(inst, i, sigma_i, &sig);
            expect(got == want, format!("bi rank{tag} probe {i}: {got:?} vs {want:?}"));
        }

        // the batch façade must agree with the same oracles
        let mode = if with_probes {
            PolicyMode::WithProbes
        } else {
            PolicyMode::GalleryOnly
        };
        if with_probes && inst.probes.len() < 2 {
            continue;
        }
        for method in Method::ALL {
            let lists = rerank(RerankConfig::new(method, mode, k, k_sigma), &probes, &gallery, &metric).unwrap();
            for (i, list) in lists.iter().enumerate() {
                let want = match method {
                    Method::Knn => oracle::rank_knn(inst, i),
                    Method::Inn => oracle::rank_inn(inst, i, k, with_probes),
                    Method::Rnn => oracle::rank_rnn(inst, i, k, with_probes),
                    Method::InvDakr => oracle::inv_rank(inst, i, &sig),
                    Method::BiDakr => {
                        oracle::bi_rank(inst, i, oracle::probe_sigma(inst, i, k_sigma, with_probes), &sig)
                    }
                };
                let got = list.gallery_ids();
                expect(
                    got == want,
                    format!("batch {}{tag} probe {i}: {got:?} vs {want:?}", method.as_str()),
                );
            }
        }
    }
    out
}

/// With every gallery bandwidth forced to `value`, both kernel rankings
/// must reproduce the plain distance ranking.
pub fn uniform_sigma_mismatches(inst: &Instance, k_sigma: usize, value: f64) -> Vec<String> {
    let gallery = inst.gallery_set();
    let probes = inst.probe_set();
    let metric = DistanceMetric::Euclidean;
    let mut out = Vec::new();
    for with_probes in [false, true] {
        let table = compute_sigma_table(&gallery, &metric, k_sigma, policy(with_probes, &probes))
            .unwrap()
            .with_uniform_sigma(value)
            .unwrap();
        for i in 0..inst.probes.len() {
            let x = probes.sample(i);
            let plain = oracle::rank_knn(inst, i);
            let inv = inv_dakr_rank(x, &gallery, &metric, &table, policy(with_probes, &probes))
                .unwrap()
                .gallery_ids();
            let bi = bi_dakr_rank(x, &gallery, &metric, &table, policy(with_probes, &probes))
                .unwrap()
                .gallery_ids();
            if inv != plain || bi != plain {
                out.push(format!(
                    "probe {i} (+={with_probes}): knn {plain:?} inv {inv:?} bi {bi:?}"
                ));
            }
        }
    }
    out
}

/// Rankings and scores at feature scale `c` against scale 1.
pub fn scale_mismatches(inst: &Instance, k_sigma: usize, c: f64, rel: f64) -> Vec<String> {
    let metric = DistanceMetric::Euclidean;
    let base_g = inst.gallery_set();
    let base_p = inst.probe_set();
    let g = base_g.scaled(c).unwrap();
    let p = base_p.scaled(c).unwrap();
    let mut out = Vec::new();
    for with_probes in [false, true] {
        let t0 = compute_sigma_table(&base_g, &metric, k_sigma, policy(with_probes, &base_p)).unwrap();
        let t1 = compute_sigma_table(&g, &metric, k_sigma, policy(with_probes, &p)).unwrap();
        for i in 0..inst.probes.len() {
            let (x0, x1) = (base_p.sample(i), p.sample(i));
            let (p0, p1) = (policy(with_probes, &base_p), policy(with_probes, &p));
            let inv0 = inv_dakr_rank(x0, &base_g, &metric, &t0, p0).unwrap();
            let inv1 = inv_dakr_rank(x1, &g, &metric, &t1, policy(with_probes, &p)).unwrap();
            let bi0 = bi_dakr_rank(x0, &base_g, &metric, &t0, policy(with_probes, &base_p)).unwrap();
            let bi1 = bi_dakr_rank(x1, &g, &metric, &t1, p1).unwrap();
            for (name, a, b) in [("inv", &inv0, &inv1), ("bi", &bi0, &bi1)] {
                if a.gallery_ids() != b.gallery_ids() {
                    out.push(format!("{name} rank, probe {i}, c={c}, +={with_probes}"));
                }
                let same = a
                    .entries
                    .iter()
                    .zip(&b.entries)
                    .all(|(u, v)| close(u.value, v.value, rel));
                if !same {
                    out.push(format!("{name} scores, probe {i}, c={c}, +={with_probes}"));
                }
            }
        }
    }
    out
}
