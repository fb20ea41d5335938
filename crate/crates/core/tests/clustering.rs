mod common;

use std::collections::VecDeque;

use common::*;
use neotaxis::clustering::{tkm, ClustererSnapshot, HistoryEntry, Weights};
use neotaxis::{Clusterer, ClustererConfig, ClustererKind};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn winners_match_exhaustive_scan() {
    for (i, kind) in ClustererKind::ALL.into_iter().enumerate() {
        winner_oracle(kind, 1000, 10 + i as u64).unwrap();
    }
}

#[test]
fn training_is_local() {
    for (i, kind) in ClustererKind::ALL.into_iter().enumerate() {
        locality(kind, 1000, 20 + i as u64).unwrap();
    }
}

#[test]
fn tkm_without_memory_picks_nearest() {
    tkm_gamma_zero(1000, 30).unwrap();
}

#[test]
fn lloyd_cost_never_rises() {
    for seed in 0..5 {
        lloyd_monotone(100, 5, 20, seed).unwrap();
    }
}

#[test]
fn online_kmeans_contracts_geometrically() {
    online_contraction(60, 4).unwrap();
}

#[test]
fn som_pull_shrinks_distance() {
    let mut rng = rng(5);
    for _ in 0..500 {
        let rows = random_rows(&mut rng, 8, 6);
        let input: Vec<f64> = (0..6).map(|_| rng.random()).collect();
        let eta = rng.random_range(0.01..=1.0);
        let mut config = ClustererConfig::new(ClustererKind::SomRing, 0);
        config.eta = eta;
        let mut c = Clusterer::with_weights(config, Weights::from_rows(&rows).unwrap()).unwrap();
        let winner = c.classify(&input).unwrap().winner;
        let before = sq_dist(&rows[winner], &input);
        c.train(&input, winner).unwrap();
        assert!(sq_dist(c.weights().row(winner), &input) < before);
    }
}

#[test]
fn tkm_activity_decays_by_gamma_on_mismatch() {
    let weights = Weights::from_rows(&[vec![0.0], vec![0.1], vec![0.2]]).unwrap();
    let mut config = ClustererConfig::<f64>::new(ClustererKind::Tkm, 0);
    config.gamma = 0.4;
    let mut c = Clusterer::with_weights(config, weights).unwrap();
    c.set_activities(vec![1.0, 2.0, 3.0]).unwrap();
    let far = [60.0];
    for step in 1..=10 {
        let prev = c.activities().to_vec();
        c.classify(&far).unwrap();
        for (a, p) in c.activities().iter().zip(&prev) {
            assert!((a - 0.4 * p).abs() < 1e-300, "step {step}: {a} vs {}", 0.4 * p);
        }
    }
}

#[test]
fn deeper_history_changes_updates_by_at_most_the_discount_tail() {
    let mut rng = rng(6);
    let eta = 0.25;
    let gamma = 0.4;
    for _ in 0..200 {
        let rows = random_rows(&mut rng, 6, 1);
        let start = Weights::from_rows(&rows).unwrap();
        let past: VecDeque<HistoryEntry<f64>> = (0..10)
            .map(|_| HistoryEntry {
                input: vec![rng.random()],
                weights: Weights::from_rows(&random_rows(&mut rng, 6, 1)).unwrap(),
            })
            .collect();
        let input = [rng.random::<f64>()];
        let winner = rng.random_range(0..6);
        let run = |depth: usize| {
            let mut w = start.clone();
            let mut h = past.clone();
            tkm::train(&mut w, &mut h, &input, winner, eta, gamma, depth).unwrap();
            w
        };
        let (short, long) = (run(3), run(10));
        // every remembered difference lies in [-1, 1]
        let tail: f64 = (4..=10).map(|k| gamma.powi(k)).sum::<f64>() * eta;
        for i in 0..6 {
            let gap = (short.row(i)[0] - long.row(i)[0]).abs();
            assert!(gap <= tail + 1e-15, "row {i}: {gap} > {tail}");
        }
    }
}

#[test]
fn same_seed_same_state() {
    for kind in ClustererKind::ALL {
        let feed = |seed: u64| {
            let mut c = Clusterer::<f64>::new(ClustererConfig::new(kind, seed)).unwrap();
            let mut rng = rng(99);
            for _ in 0..300 {
                let x: Vec<f64> = (0..c.input_dim()).map(|_| rng.random()).collect();
                let w = c.classify(&x).unwrap().winner;
                c.train(&x, w).unwrap();
            }
            c.snapshot().to_json().unwrap()
        };
        assert_eq!(feed(7), feed(7));
        assert_ne!(feed(7), feed(8));
    }
}

#[test]
fn snapshot_round_trip_and_version_check() {
    let mut c = Clusterer::<f64>::new(ClustererConfig::new(ClustererKind::Tkm, 3)).unwrap();
    for t in 0..20 {
        let x = [(t % 3) as f64 / 2.0];
        let w = c.classify(&x).unwrap().winner;
        c.train(&x, w).unwrap();
    }
    let json = c.snapshot().to_json().unwrap();
    let back = Clusterer::from_snapshot(ClustererSnapshot::from_json(&json).unwrap()).unwrap();
    assert_eq!(back, c);
    let mut snap = c.snapshot();
    snap.version = 99;
    assert!(Clusterer::from_snapshot(snap).is_err());
}

#[test]
fn single_precision_agrees_with_double_on_winners() {
    let mut rng = rng(8);
    for kind in [ClustererKind::SomRing, ClustererKind::Kmeans] {
        let rows = random_rows(&mut rng, 10, 6);
        let rows32: Vec<Vec<f32>> = rows.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
        let mut a = Clusterer::with_weights(ClustererConfig::new(kind, 0), Weights::from_rows(&rows).unwrap()).unwrap();
        let mut b = Clusterer::with_weights(ClustererConfig::new(kind, 0), Weights::from_rows(&rows32).unwrap()).unwrap();
        let mut agree = 0;
        for _ in 0..200 {
            let x: Vec<f64> = (0..6).map(|_| rng.random()).collect();
            let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
            if a.classify(&x).unwrap().winner == b.classify(&x32).unwrap().winner {
                agree += 1;
            }
        }
        assert!(agree >= 195, "{kind}: {agree}/200");
    }
}

fn kind_strategy() -> impl Strategy<Value = ClustererKind> {
    prop::sample::select(ClustererKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn winner_is_in_range_and_match_is_bounded(
        kind in kind_strategy(),
        seed in any::<u64>(),
        inputs in prop::collection::vec(0.0f64..=1.0, 1..40),
    ) {
        let mut c = Clusterer::<f64>::new(ClustererConfig::new(kind, seed)).unwrap();
        let dim = c.input_dim();
        for chunk in inputs.chunks(dim).filter(|ch| ch.len() == dim) {
            let r = c.classify(chunk).unwrap();
            prop_assert!(r.winner < c.num_neurons());
            prop_assert!((0.0..=1.0).contains(&r.normalized_match));
            c.train(chunk, r.winner).unwrap();
        }
    }

    #[test]
    fn weights_stay_in_unit_box(
        kind in prop::sample::select(vec![ClustererKind::SomRing, ClustererKind::Kmeans]),
        seed in any::<u64>(),
        inputs in prop::collection::vec(0.0f64..=1.0, 6..200),
    ) {
        let mut c = Clusterer::<f64>::new(ClustererConfig::new(kind, seed)).unwrap();
        for chunk in inputs.chunks_exact(c.input_dim()) {
            let w = c.classify(chunk).unwrap().winner;
            c.train(chunk, w).unwrap();
        }
        prop_assert!(c.weights().iter_rows().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn wrong_dimension_is_rejected(kind in kind_strategy(), extra in 1usize..4) {
        let mut c = Clusterer::<f64>::new(ClustererConfig::new(kind, 1)).unwrap();
        let x = vec![0.5; c.input_dim() + extra];
        prop_assert!(c.classify(&x).is_err());
        prop_assert!(c.train(&x, 0).is_err());
    }
}
