//! Training/testing protocols and the two reference experiments.

pub mod config;
pub mod experiments;
pub mod metrics;

pub use config::{ExperimentConfig, OneOrMany, ScheduleKind, ScheduleSpec, Targets, SCHEMA};
pub use experiments::{exp_convergence, exp_fluctuation, train_static, ConvergenceResult, ConvergenceRow, FluctuationResult};
pub use metrics::{
    checkpoints, fit_fidelity, logical_error_rate, power_law_exponent, relative_error, DecoderTables, FidelityCurve, TestSet,
};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-task `index` under `seed` (SplitMix64 mixing).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix(mix(seed.wrapping_add(GOLDEN)) ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}
