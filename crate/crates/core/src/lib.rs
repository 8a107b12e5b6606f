//! Adaptive minimum-weight perfect matching for the repetition code.
//!
//! Edge probabilities of the space-time detector graph are inferred directly
//! from syndrome correlations, turned into matching weights and fed to an
//! exact blossom matcher. The [`harness`] module runs the training/testing
//! experiments on top of these pieces.

pub mod decoder;
pub mod dem;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod matching;
pub mod noise;
pub mod weights;

pub use dem::{build_repetition_dem, DetectorErrorModel, DetectorId, EdgeEndpoint, EdgeKind, EdgeSpec, Qubit, RateTable};
pub use error::{Error, Result};
pub use noise::{sample_trial, true_probabilities, NoiseSchedule, RateFn, SyndromeRecord, SyndromeStream, TrialFlips};
pub use decoder::{decode, CorrectionResult};
pub use estimator::{estimate_all, ClassEstimates, EstimatorConfig, MomentAccumulator};
pub use harness::ExperimentConfig;
pub use matching::{min_weight_perfect_matching, Matching, MatchingProblem};
pub use weights::{weights_all, Backend, WeightTable};
