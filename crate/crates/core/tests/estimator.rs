mod common;

use adaqec_core::estimator::{boundary_probability, estimate_all, pair_probability, EstimatorConfig, MomentAccumulator, MomentCounts};
use adaqec_core::{NoiseSchedule, SyndromeStream};
use common::SmallGraph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn inversion_is_exact_on_enumerated_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let g = SmallGraph::random(&mut rng, 6, 0.01, 0.3);
        let (m, mm) = g.moments();
        for (k, &(i, j, p)) in g.edges.iter().enumerate() {
            let p_hat = match j {
                Some(j) => pair_probability(m[i], m[j], mm[i][j]).unwrap().p_hat,
                None => {
                    let others: Vec<f64> = g.incident(i).filter(|&o| o != k).map(|o| g.edges[o].2).collect();
                    boundary_probability(m[i], &others).unwrap().p_hat
                }
            };
            assert!((p_hat - p).abs() < 1e-12, "{g:?}: edge {k} gave {p_hat}");
        }
    }
}

#[test]
fn sampled_detector_mean_matches_four_neighbours() {
    // Every d = 3 detector away from the ends sees four edges at 0.005.
    let expected = 0.5 * (1.0 - 0.99f64.powi(4));
    assert!((expected - 0.0197).abs() < 1e-4);
    let s = NoiseSchedule::uniform(3, 0.005).unwrap();
    let mut stream = SyndromeStream::new(&s, 1, 17, 0).unwrap();
    let mut acc = MomentAccumulator::new(3, 1, None).unwrap();
    let mut row = vec![false; 2];
    for _ in 0..200_000 {
        let t = stream.next_row(&mut row).unwrap();
        acc.push_row(t, &row).unwrap();
    }
    for c in &acc.counts().detector {
        let mean = c.sum as f64 / c.n as f64;
        let se = (expected * (1.0 - expected) / c.n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean}");
    }
}

fn stream_rows(d: usize, gamma: f64, seed: u64, n: usize) -> Vec<Vec<bool>> {
    let s = NoiseSchedule::uniform(d, gamma).unwrap();
    let mut stream = SyndromeStream::new(&s, 1, seed, 0).unwrap();
    (0..n)
        .map(|_| {
            let mut row = vec![false; d - 1];
            stream.next_row(&mut row).unwrap();
            row
        })
        .collect()
}

#[test]
fn sliding_window_forgets_old_rounds() {
    for lag in [1, 2] {
        let n = 500;
        let s = NoiseSchedule::uniform(5, 0.05).unwrap();
        let mut stream = SyndromeStream::new(&s, lag, 4, 0).unwrap();
        let rows: Vec<Vec<bool>> = (0..2 * n)
            .map(|_| {
                let mut row = vec![false; 4];
                stream.next_row(&mut row).unwrap();
                row
            })
            .collect();
        let mut windowed = MomentAccumulator::new(5, lag, Some(n)).unwrap();
        windowed.accumulate(0, &rows).unwrap();
        let mut fresh = MomentAccumulator::new(5, lag, None).unwrap();
        fresh.accumulate(n, &rows[n..]).unwrap();
        assert_eq!(windowed.counts(), fresh.counts(), "lag {lag}");
        assert_eq!(windowed.rounds_in_window(), n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn merging_counts_is_associative(seeds in prop::array::uniform3(0u64..1000), len in 5usize..60) {
        let counts: Vec<MomentCounts> = seeds
            .iter()
            .map(|&s| {
                let mut acc = MomentAccumulator::new(5, 1, None).unwrap();
                acc.accumulate(0, &stream_rows(5, 0.1, s, len)).unwrap();
                acc.counts().clone()
            })
            .collect();
        let mut left = counts[0].clone();
        left.merge(&counts[1]).unwrap();
        left.merge(&counts[2]).unwrap();
        let mut bc = counts[1].clone();
        bc.merge(&counts[2]).unwrap();
        let mut right = counts[0].clone();
        right.merge(&bc).unwrap();
        prop_assert_eq!(&left, &right);
        let mut swapped = counts[2].clone();
        swapped.merge(&counts[0]).unwrap();
        swapped.merge(&counts[1]).unwrap();
        prop_assert_eq!(left, swapped);
    }

    #[test]
    fn short_training_still_returns(seed in 0u64..10_000) {
        // Well below 1/p cycles: estimates come back, many of them clamped.
        let mut acc = MomentAccumulator::new(3, 1, None).unwrap();
        acc.accumulate(0, &stream_rows(3, 0.005, seed, 50)).unwrap();
        let est = estimate_all(acc.counts(), &EstimatorConfig::default()).unwrap();
        prop_assert!(est.iter_classes().all(|(_, _, e)| (0.0..0.5).contains(&e.p_hat)));
    }
}

#[test]
fn below_minimum_training_length_clamps() {
    let mut clamped = 0;
    for seed in 0..20 {
        let mut acc = MomentAccumulator::new(3, 1, None).unwrap();
        acc.accumulate(0, &stream_rows(3, 0.005, seed, 50)).unwrap();
        clamped += usize::from(estimate_all(acc.counts(), &EstimatorConfig::default()).unwrap().any_clamped());
    }
    assert!(clamped >= 15, "{clamped}/20");
}
