//! Fixtures shared by the decoder benchmarks.

use adaqec_core::matching::MatchingProblem;
use adaqec_core::weights::{weights_all, Backend, WeightTable};
use adaqec_core::{build_repetition_dem, sample_trial, DetectorErrorModel, NoiseSchedule, Qubit, SyndromeRecord};

pub fn uniform_dem(d: usize, rounds: usize, p: f64) -> DetectorErrorModel {
    build_repetition_dem(d, rounds, 1, &|_: Qubit, _: usize| p).expect("valid shape")
}

/// A weight table over the full `rounds`-cycle graph plus `trials` sampled trials.
pub struct DecodeFixture {
    pub table: WeightTable,
    pub records: Vec<SyndromeRecord>,
}

impl DecodeFixture {
    pub fn new(d: usize, rounds: usize, gamma: f64, trials: usize, backend: Backend) -> Self {
        let schedule = NoiseSchedule::uniform(d, gamma).expect("valid schedule");
        let records = (0..trials as u64)
            .map(|seed| sample_trial(&schedule, rounds, 1, seed, 0).expect("sampling"))
            .collect();
        let table = weights_all(&uniform_dem(d, rounds, gamma), backend).expect("weights");
        DecodeFixture { table, records }
    }
}

/// Matching problem over the first `n` detectors of a dense table.
pub fn dense_problem(n: usize) -> MatchingProblem {
    let d = 2 * n + 1;
    let table = weights_all(&uniform_dem(d, 1, 0.01), Backend::Dijkstra).expect("weights");
    MatchingProblem::from_table(&table, &table.nodes()[..n]).expect("problem")
}
