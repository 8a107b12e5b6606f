mod common;

use adaqec_core::decoder::decode_events;
use adaqec_core::harness::{logical_error_rate, DecoderTables, TestSet};
use adaqec_core::matching::{min_weight_perfect_matching, MatchingProblem};
use adaqec_core::weights::{weights_all, Backend};
use adaqec_core::{build_repetition_dem, DetectorId, EdgeKind, Error, NoiseSchedule, Qubit};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detectors_are_linear_in_edge_samples(a in prop::collection::vec(any::<bool>(), 64), b in prop::collection::vec(any::<bool>(), 64)) {
        let model = build_repetition_dem(5, 4, 1, &|_: Qubit, _: usize| 0.01).unwrap();
        let e = model.edges().len();
        let (a, b) = (&a[..e], &b[..e]);
        let ab: Vec<bool> = a.iter().zip(b).map(|(x, y)| x ^ y).collect();
        let va = model.evaluate_detectors(a).unwrap();
        let vb = model.evaluate_detectors(b).unwrap();
        let vab = model.evaluate_detectors(&ab).unwrap();
        for k in 0..va.len() {
            prop_assert_eq!(vab[k], va[k] ^ vb[k]);
        }
        // Pair edges flip two detectors, boundary edges one.
        let events = vab.iter().filter(|&&x| x).count();
        let boundary = model.edges().iter().zip(&ab).filter(|(e, &on)| on && e.kind == EdgeKind::Boundary).count();
        prop_assert_eq!(events % 2, boundary % 2);
    }

    #[test]
    fn blossom_equals_brute_force(n in 0usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pair = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.random_range(0..1024) as f64 / 64.0;
                pair[i * n + j] = w;
                pair[j * n + i] = w;
            }
        }
        let boundary = (0..n).map(|_| rng.random_range(0..1024) as f64 / 64.0).collect();
        let ids = (0..n).map(|k| DetectorId::new(0, k)).collect();
        let p = MatchingProblem::new(ids, pair, boundary).unwrap();
        let m = min_weight_perfect_matching(&p).unwrap();
        prop_assert_eq!(Some(m.total_weight), common::brute_force_matching(&p));
    }
}

#[test]
fn finite_boundaries_always_admit_a_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(1..12);
        let pair = vec![f64::INFINITY; n * n];
        let boundary = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let ids = (0..n).map(|k| DetectorId::new(0, k)).collect();
        let p = MatchingProblem::new(ids, pair, boundary).unwrap();
        assert_eq!(min_weight_perfect_matching(&p).unwrap().to_boundary.len(), n);
    }
}

#[test]
fn ideal_decoder_is_well_below_physical_rate_and_improves_with_distance() {
    let mut eps = Vec::new();
    for d in [3, 5] {
        let s = NoiseSchedule::uniform(d, 0.005).unwrap();
        let test = TestSet::sample(&s, 1, 100, 3000, 99, 0).unwrap();
        let tables = DecoderTables::build(&s.window(0), &test, Backend::Exact).unwrap();
        eps.push(logical_error_rate(&tables, &test).unwrap().epsilon);
    }
    assert!(eps[0] > 0.0 && eps[0] < 0.005 / 5.0, "{eps:?}");
    assert!(eps[1] < eps[0], "{eps:?}");
}

#[test]
fn verdict_is_the_same_for_either_logical_cut() {
    // Sample edges directly so both cuts' true frames are known.
    let (d, rounds) = (5, 30);
    let model = build_repetition_dem(d, rounds, 1, &|_: Qubit, _: usize| 0.03).unwrap();
    let table = weights_all(&model, Backend::Dijkstra).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let on: Vec<bool> = model.edges().iter().map(|e| rng.random_bool(e.probability)).collect();
        let bits = model.evaluate_detectors(&on).unwrap();
        let events: Vec<DetectorId> = (0..bits.len()).filter(|&i| bits[i]).map(|i| model.detector_id(i)).collect();
        let left = model.logical_parity(&on).unwrap();
        let right = model
            .edges()
            .iter()
            .zip(&on)
            .filter(|(e, &x)| x && e.kind == EdgeKind::Boundary && !e.logical_crossing)
            .count()
            % 2
            == 1;
        let res = match decode_events(&events, &table) {
            Err(Error::Infeasible) => continue,
            r => r.unwrap(),
        };
        let idx: Vec<usize> = events.iter().map(|&e| table.index_of(e).unwrap()).collect();
        // A boundary match crosses exactly one of the two cuts; pair chains cross neither.
        let predicted_right = res.matching.to_boundary.iter().fold(false, |acc, &a| acc ^ !table.boundary_parity(idx[a]));
        assert_eq!(res.predicted_logical == left, predicted_right == right);
    }
}
