mod common;

use adaqec_core::weights::{path_sum_walks, weights_exact, weights_shortest_path};
use adaqec_core::{build_repetition_dem, DetectorErrorModel, DetectorId, EdgeEndpoint, Qubit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(d: usize, rounds: usize, lag: usize, rng: &mut impl Rng) -> DetectorErrorModel {
    let data: Vec<f64> = (0..d * rounds).map(|_| rng.random_range(0.001..0.2)).collect();
    let anc: Vec<f64> = (0..(d - 1) * rounds).map(|_| rng.random_range(0.001..0.2)).collect();
    let rates = move |q: Qubit, t: usize| match q {
        Qubit::Data(k) => data[t * d + k - 1],
        Qubit::Ancilla(a) => anc[t * (d - 1) + a],
    };
    build_repetition_dem(d, rounds, lag, &rates).unwrap()
}

fn all_ids(model: &DetectorErrorModel) -> Vec<DetectorId> {
    (0..model.num_detectors()).map(|i| model.detector_id(i)).collect()
}

#[test]
fn exact_weights_match_walk_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (d, rounds, lag) in common::small_shapes(8) {
        let model = random_model(d, rounds, lag, &mut rng);
        let table = weights_exact(&model, 0..rounds).unwrap();
        for (i, &u) in table.nodes().iter().enumerate() {
            let b = path_sum_walks(&model, u, EdgeEndpoint::Boundary).unwrap();
            assert!(((-table.boundary_weight(i)).exp() - b).abs() < 1e-10);
            for (j, &v) in table.nodes().iter().enumerate().skip(i + 1) {
                let w = path_sum_walks(&model, u, EdgeEndpoint::Detector(v)).unwrap();
                assert!(((-table.pair_weight(i, j)).exp() - w).abs() < 1e-10, "d={d} rounds={rounds} {u:?}-{v:?}");
            }
        }
    }
}

#[test]
fn raising_an_edge_probability_never_raises_a_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let model = random_model(5, 3, 1, &mut rng);
        let base = weights_exact(&model, 0..3).unwrap();
        let mut edges = model.edges().to_vec();
        let k = rng.random_range(0..edges.len());
        edges[k].probability = (edges[k].probability * 1.5).min(0.25);
        let bumped = DetectorErrorModel::from_edges(5, 3, 1, edges).unwrap();
        let after = weights_exact(&bumped, 0..3).unwrap();
        let n = base.nodes().len();
        for i in 0..n {
            assert!(after.boundary_weight(i) <= base.boundary_weight(i) + 1e-12);
            for j in 0..n {
                if i != j {
                    assert!(after.pair_weight(i, j) <= base.pair_weight(i, j) + 1e-12);
                }
            }
        }
    }
}

#[test]
fn shortest_path_tracks_exact_where_one_chain_dominates() {
    for (d, rounds, lag) in common::small_shapes(12) {
        let model = build_repetition_dem(d, rounds, lag, &|_: Qubit, _: usize| 0.01).unwrap();
        let exact = weights_exact(&model, 0..rounds).unwrap();
        let sp = weights_shortest_path(&model, &all_ids(&model)).unwrap();
        let n = model.num_detectors();
        for i in 0..n {
            let (_, count) = common::chain_counts(&model, i);
            let rel = |a: f64, b: f64| ((-a).exp() - (-b).exp()).abs() / (-a).exp();
            if count[n] == 1 {
                assert!(rel(exact.boundary_weight(i), sp.boundary_weight(i)) < 0.05);
            }
            for (j, &c) in count[..n].iter().enumerate() {
                if j != i && c == 1 {
                    assert!(rel(exact.pair_weight(i, j), sp.pair_weight(i, j)) < 0.05);
                }
            }
        }
    }
}
