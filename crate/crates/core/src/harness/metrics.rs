//! Logical error rate per cycle from decay of the logical fidelity.

use rayon::prelude::*;

use crate::decoder::decode_events;
use crate::dem::{build_repetition_dem, DetectorId, RateTable};
use crate::error::{Error, Result};
use crate::noise::{NoiseSchedule, TrialFlips};
use crate::weights::{weights_all, Backend, WeightTable};

use super::derive_seed;

/// `{T/10, 2T/10, ..., T}` for a trial of `T` rounds.
pub fn checkpoints(rounds_test: usize) -> Vec<usize> {
    (1..=10).map(|k| k * rounds_test / 10).collect()
}

/// One testing trial, truncated at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
struct TestTrial {
    events: Vec<Vec<DetectorId>>,
    logical: Vec<bool>,
}

/// A fixed batch of testing trials. Decoders compared on the same set see
/// the same noise realisations.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    d: usize,
    lag: usize,
    checkpoints: Vec<usize>,
    trials: Vec<TestTrial>,
}

impl TestSet {
    /// Samples `trials` histories of `rounds_test` cycles starting at cycle
    /// `t_offset`; trial `j` uses seed `derive_seed(seed, j)`.
    pub fn sample(
        schedule: &NoiseSchedule,
        lag: usize,
        rounds_test: usize,
        trials: usize,
        seed: u64,
        t_offset: usize,
    ) -> Result<Self> {
        let checkpoints = checkpoints(rounds_test);
        if checkpoints[0] == 0 {
            return Err(Error::Config("rounds_test must be at least 10".into()));
        }
        let trials = (0..trials as u64)
            .into_par_iter()
            .map(|j| {
                let flips = TrialFlips::sample(schedule, rounds_test, lag, derive_seed(seed, j), t_offset)?;
                let mut events = Vec::with_capacity(checkpoints.len());
                let mut logical = Vec::with_capacity(checkpoints.len());
                for &t in &checkpoints {
                    let mut ev = Vec::new();
                    flips.events(t, &mut ev);
                    events.push(ev);
                    logical.push(flips.logical(t));
                }
                Ok(TestTrial { events, logical })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d: schedule.d(), lag, checkpoints, trials })
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }
}

/// Weight tables of one decoder, one per checkpoint length.
#[derive(Debug, Clone)]
pub struct DecoderTables {
    tables: Vec<WeightTable>,
}

impl DecoderTables {
    /// Tables for the catalogs `rates` defines on `t` rounds, for each
    /// checkpoint `t` of `test`.
    pub fn build(rates: &impl RateTable, test: &TestSet, backend: Backend) -> Result<Self> {
        let tables = test
            .checkpoints
            .iter()
            .map(|&t| weights_all(&build_repetition_dem(test.d, t, test.lag, rates)?, backend))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tables })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCurve {
    pub checkpoints: Vec<usize>,
    /// Fraction of trials whose logical frame was recovered.
    pub fidelity: Vec<f64>,
    pub epsilon: f64,
    /// Root-mean-square residual of the fit in `ln(2F - 1)`.
    pub residual: f64,
}

/// Least-squares fit of `F(t) = 1/2 + (1 - 2 eps)^t / 2` on `ln(2F - 1)`,
/// through the origin, over points with `F > 1/2`.
pub fn fit_fidelity(checkpoints: &[usize], fidelity: &[f64]) -> Result<FidelityCurve> {
    let pts: Vec<(f64, f64)> = checkpoints
        .iter()
        .zip(fidelity)
        .filter(|(_, &f)| f > 0.5)
        .map(|(&t, &f)| (t as f64, (2.0 * f - 1.0).ln()))
        .collect();
    if pts.is_empty() {
        return Err(Error::AtChance);
    }
    let slope = pts.iter().map(|(t, y)| t * y).sum::<f64>() / pts.iter().map(|(t, _)| t * t).sum::<f64>();
    let residual = (pts.iter().map(|(t, y)| (y - slope * t).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    let epsilon = (-slope.exp_m1() / 2.0).max(0.0);
    Ok(FidelityCurve { checkpoints: checkpoints.to_vec(), fidelity: fidelity.to_vec(), epsilon, residual })
}

/// Decodes every trial of `test` at every checkpoint and fits the decay.
/// A trial whose events cannot be matched counts as a failure.
pub fn logical_error_rate(tables: &DecoderTables, test: &TestSet) -> Result<FidelityCurve> {
    let k = test.checkpoints.len();
    if tables.tables.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: tables.tables.len() });
    }
    let successes = test
        .trials
        .par_iter()
        .map(|trial| -> Result<Vec<u64>> {
            let mut out = vec![0u64; k];
            for (c, slot) in out.iter_mut().enumerate() {
                let ok = if trial.events[c].is_empty() {
                    !trial.logical[c]
                } else {
                    match decode_events(&trial.events[c], &tables.tables[c]) {
                        Ok(res) => res.predicted_logical == trial.logical[c],
                        Err(Error::Infeasible) => false,
                        Err(e) => return Err(e),
                    }
                };
                *slot = u64::from(ok);
            }
            Ok(out)
        })
        .try_reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let n = test.trials.len().max(1) as f64;
    let fidelity: Vec<f64> = successes.iter().map(|&s| s as f64 / n).collect();
    fit_fidelity(&test.checkpoints, &fidelity)
}

/// `eps_adaptive / eps_0 - 1`.
pub fn relative_error(eps_adaptive: f64, eps_0: f64) -> Result<f64> {
    if eps_0 <= 0.0 || !eps_0.is_finite() {
        return Err(Error::Domain(format!("reference error rate {eps_0} must be positive")));
    }
    Ok(eps_adaptive / eps_0 - 1.0)
}

/// Exponent `alpha` of `y ~ x^(-alpha)` by least squares in log-log space,
/// using only points with `y > 0`. `None` with fewer than two such points.
pub fn power_law_exponent(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, &y)| y > 0.0).map(|(&x, &y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}
