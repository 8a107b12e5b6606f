//! Matching-based decoding of one syndrome record to a logical verdict.

use crate::dem::DetectorId;
use crate::error::Result;
use crate::matching::{min_weight_perfect_matching, Matching, MatchingProblem};
use crate::noise::SyndromeRecord;
use crate::weights::WeightTable;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    /// Predicted flip of the logical frame.
    pub predicted_logical: bool,
    /// Indices refer to the detection events in `(round, ancilla)` order.
    pub matching: Matching,
}

/// Decodes all detection events of `record`.
pub fn decode(record: &SyndromeRecord, weights: &WeightTable) -> Result<CorrectionResult> {
    decode_events(&record.events(), weights)
}

/// Matches `events` and XORs the logical parity of the chain behind every
/// chosen match.
pub fn decode_events(events: &[DetectorId], weights: &WeightTable) -> Result<CorrectionResult> {
    let idx: Vec<usize> = events
        .iter()
        .map(|&id| weights.index_of(id).ok_or(crate::Error::MissingWeight(id)))
        .collect::<Result<_>>()?;
    let problem = MatchingProblem::from_table(weights, events)?;
    let matching = min_weight_perfect_matching(&problem)?;
    let mut predicted_logical = false;
    for &(a, b) in &matching.pairs {
        predicted_logical ^= weights.pair_parity(idx[a], idx[b]);
    }
    for &a in &matching.to_boundary {
        predicted_logical ^= weights.boundary_parity(idx[a]);
    }
    Ok(CorrectionResult { predicted_logical, matching })
}

/// Whether the decoder recovered the true logical frame.
pub fn score(record: &SyndromeRecord, result: &CorrectionResult) -> bool {
    result.predicted_logical == record.true_logical
}
