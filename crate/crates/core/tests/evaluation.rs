use std::collections::BTreeSet;

use dakr::eval::{
    average_precision, cmc, evaluate, generate_scenario, k_sweep, mean_average_precision, GroundTruth, KSigmaRule,
    Scenario, ScenarioParams, Trial, REPORT_RANKS,
};
use dakr::{rerank, DistanceMetric, Error, Method, PolicyMode, RankOrder, RankedList, RerankConfig};

const E: DistanceMetric = DistanceMetric::Euclidean;

fn list(probe: u64, ids: &[u64]) -> RankedList {
    RankedList::from_values(
        probe,
        RankOrder::AscendingDistance,
        ids.iter().enumerate().map(|(i, &g)| (g, i as f64)).collect(),
    )
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `n` fair coin flips.
fn sign_test_p(wins: u64, n: u64) -> f64 {
    let mut total = 0.0;
    for j in wins..=n {
        let mut c = 1.0f64;
        for t in 0..j {
            c *= (n - t) as f64 / (t + 1) as f64;
        }
        total += c;
    }
    total / 2f64.powi(n as i32)
}

#[test]
fn cmc_hand_fixtures() {
    let truth = GroundTruth::from_pairs([(0, 10), (1, 20)]);
    let rankings = vec![list(0, &[11, 10, 12, 13]), list(1, &[21, 22, 23, 20])];
    assert_eq!(cmc(&rankings, &truth, 4).unwrap(), vec![0.0, 0.5, 0.5, 1.0]);

    let reversed = vec![list(0, &[13, 12, 11, 10])];
    assert_eq!(cmc(&reversed, &truth, 4).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);

    let perfect = vec![list(0, &[10, 11]), list(1, &[20, 21])];
    assert_eq!(cmc(&perfect, &truth, 2).unwrap(), vec![1.0, 1.0]);
}

#[test]
fn average_precision_hand_fixtures() {
    let l = list(0, &[1, 2, 3, 4, 5]);
    assert_eq!(average_precision(&l, &BTreeSet::from([1])), 1.0);
    assert!((average_precision(&l, &BTreeSet::from([1, 3])) - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    assert!((average_precision(&l, &BTreeSet::from([5])) - 0.2).abs() < 1e-15);
}

#[test]
fn unknown_probe_is_missing_truth() {
    let truth = GroundTruth::from_pairs([(0, 1)]);
    let err = cmc(&[list(9, &[1, 2])], &truth, 2).unwrap_err();
    assert!(matches!(err, Error::MissingTruth(9)));
    assert!(matches!(
        mean_average_precision(&[list(9, &[1])], &truth),
        Err(Error::MissingTruth(9))
    ));
}

#[test]
fn cmc_and_map_invariants_on_generated_data() {
    for seed in 0..5 {
        let s = generate_scenario(ScenarioParams::multi_shot(15, 3, 4, 0.3, seed)).unwrap();
        let n = s.gallery.len();
        for method in Method::ALL {
            let lists = rerank(
                RerankConfig::new(method, PolicyMode::GalleryOnly, 4, 3),
                &s.probes,
                &s.gallery,
                &E,
            )
            .unwrap();
            let curve = cmc(&lists, &s.truth, n).unwrap();
            assert!(curve.windows(2).all(|w| w[0] <= w[1]));
            assert!(curve.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(curve[n - 1], 1.0);
            for l in &lists {
                let matches = s.truth.matches_for(l.probe_id).unwrap();
                let ap = average_precision(l, matches);
                assert!((0.0..=1.0).contains(&ap));
                if matches.contains(&l.entries[0].gallery_id) {
                    assert!(ap >= 1.0 / matches.len() as f64);
                }
            }
        }
    }
}

#[test]
fn noiseless_scenarios_are_solved_at_rank_one() {
    for params in [
        ScenarioParams::perfect(20, 4, 0.0, 1),
        ScenarioParams::imperfect(20, 30, 4, 0.0, 2),
        ScenarioParams::multi_shot(10, 3, 4, 0.0, 3),
    ] {
        let s = generate_scenario(params).unwrap();
        for method in Method::ALL {
            let (summary, _) = evaluate(
                RerankConfig::new(method, PolicyMode::GalleryOnly, 3, 2),
                None,
                &[s.trial()],
                &E,
                5,
            )
            .unwrap();
            assert_eq!(summary.cmc[0], 1.0, "{:?} {}", params.kind, summary.label);
        }
    }
}

#[test]
fn generator_is_deterministic_and_structured() {
    let p = ScenarioParams::imperfect(30, 90, 8, 0.2, 11);
    let a = generate_scenario(p).unwrap();
    assert_eq!(a, generate_scenario(p).unwrap());
    assert_eq!(a.gallery.len(), 120);
    assert_eq!(a.probes.len(), 30);
    assert!(a.truth.is_single_shot());
    assert_eq!(a.truth.distractors().len(), 90);

    let m = generate_scenario(ScenarioParams::multi_shot(10, 4, 3, 0.2, 0)).unwrap();
    assert_eq!(m.truth.mean_multiplicity(), 4.0);
}

#[test]
fn distractors_do_not_help_knn() {
    let seeds = 24;
    let (mut worse, mut better) = (0, 0);
    for seed in 0..seeds {
        let clean = generate_scenario(ScenarioParams::perfect(100, 16, 0.21, seed)).unwrap();
        let noisy = generate_scenario(ScenarioParams::imperfect(100, 300, 16, 0.21, seed)).unwrap();
        let at_one = |s: &Scenario| {
            let cfg = RerankConfig::new(Method::Knn, PolicyMode::GalleryOnly, 1, 1);
            evaluate(cfg, None, &[s.trial()], &E, 1).unwrap().0.cmc[0]
        };
        let (a, b) = (at_one(&clean), at_one(&noisy));
        if b < a {
            worse += 1;
        } else if b > a {
            better += 1;
        }
    }
    assert!(
        better <= worse,
        "distractors improved k-NN on {better} of {seeds} seeds"
    );
    assert!(
        sign_test_p(worse, worse + better) < 0.01,
        "{worse} worse, {better} better"
    );
}

#[test]
fn knn_sweep_against_itself_has_zero_gain() {
    let scenarios: Vec<Scenario> = (0..3)
        .map(|s| generate_scenario(ScenarioParams::perfect(30, 4, 0.2, s)).unwrap())
        .collect();
    let trials: Vec<Trial<'_>> = scenarios.iter().map(Scenario::trial).collect();
    let curves = k_sweep(
        &[
            (Method::Knn, PolicyMode::GalleryOnly),
            (Method::InvDakr, PolicyMode::GalleryOnly),
        ],
        &trials,
        &[1, 2, 5],
        KSigmaRule::SameAsK,
        &REPORT_RANKS,
        &E,
    )
    .unwrap();
    for c in curves.iter().filter(|c| c.method == Method::Knn) {
        assert!(c.gains.iter().all(|&g| g == 0.0));
    }
    assert!(curves.iter().all(|c| c.gains.iter().all(|g| g.is_finite())));
}
