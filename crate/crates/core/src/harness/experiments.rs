//! Convergence of the adaptive decoder with training length, and tracking
//! of a drifting noise source with a sliding window.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{estimate_all, ClassEstimates, EstimatorConfig, MomentAccumulator};
use crate::noise::{NoiseSchedule, SyndromeStream};

use super::config::{ExperimentConfig, DEFAULT_CONVERGENCE_REPETITIONS, DEFAULT_FLUCTUATION_REPETITIONS};
use super::derive_seed;
use super::metrics::{logical_error_rate, power_law_exponent, relative_error, DecoderTables, TestSet};

// Sub-seed tags under the master seed.
const TAG_TEST: u64 = 1;
const TAG_TRAIN: u64 = 2;
const TAG_STAGE: u64 = 3;

/// Estimates edge classes from `n` cycles of a stream starting at `t_start`.
pub fn train_static(
    schedule: &NoiseSchedule,
    lag: usize,
    n: usize,
    seed: u64,
    t_start: usize,
    config: &EstimatorConfig,
) -> Result<ClassEstimates> {
    let d = schedule.d();
    let mut stream = SyndromeStream::new(schedule, lag, seed, t_start)?;
    let mut acc = MomentAccumulator::new(d, lag, None)?;
    let mut row = vec![false; d - 1];
    for _ in 0..n {
        let t = stream.next_row(&mut row)?;
        acc.push_row(t, &row)?;
    }
    estimate_all(acc.counts(), config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub delta_mean: f64,
    pub delta_stderr: f64,
    /// Mean adaptive error rate per cycle.
    pub eps_mean: f64,
    /// Fraction of training stages with at least one class clamped to zero.
    pub clamped_fraction: f64,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub eps_0: f64,
    pub rows: Vec<ConvergenceRow>,
    pub alpha: Option<f64>,
}

impl ConvergenceResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,delta_mean,delta_stderr,alpha_fit\n");
        let alpha = self.alpha.unwrap_or(f64::NAN);
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.n, r.delta_mean, r.delta_stderr, alpha);
        }
        out
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// For each training length `N`: repeat {train on `N` fresh cycles, decode a
/// shared test set}, and compare with the decoder that knows the true
/// probabilities on that same test set.
pub fn exp_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    cfg.validate()?;
    let schedule = cfg.noise()?;
    let reps = cfg.repetitions.unwrap_or(DEFAULT_CONVERGENCE_REPETITIONS);
    let est_cfg = EstimatorConfig { z: cfg.z, ..EstimatorConfig::default() };
    let test = TestSet::sample(&schedule, cfg.lag, cfg.rounds_test, cfg.trials, derive_seed(cfg.seed, TAG_TEST), 0)?;
    let oracle = DecoderTables::build(&schedule.window(0), &test, cfg.backend)?;
    let eps_0 = logical_error_rate(&oracle, &test)?.epsilon;

    let train_root = derive_seed(cfg.seed, TAG_TRAIN);
    let mut rows = Vec::new();
    for (i, &n) in cfg.n_grid().iter().enumerate() {
        let stage_root = derive_seed(train_root, i as u64);
        let stages = (0..reps as u64)
            .into_par_iter()
            .map(|r| -> Result<(f64, bool)> {
                if cfg.oracle_training {
                    return Ok((eps_0, false));
                }
                let est = train_static(&schedule, cfg.lag, n, derive_seed(stage_root, r), 0, &est_cfg)?;
                let tables = DecoderTables::build(&est, &test, cfg.backend)?;
                Ok((logical_error_rate(&tables, &test)?.epsilon, est.any_clamped()))
            })
            .collect::<Result<Vec<_>>>()?;
        let deltas = stages.iter().map(|&(e, _)| relative_error(e, eps_0)).collect::<Result<Vec<_>>>()?;
        let (delta_mean, delta_stderr) = mean_and_stderr(&deltas);
        rows.push(ConvergenceRow {
            n,
            delta_mean,
            delta_stderr,
            eps_mean: stages.iter().map(|s| s.0).sum::<f64>() / reps as f64,
            clamped_fraction: stages.iter().filter(|s| s.1).count() as f64 / reps as f64,
            deltas,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.delta_mean).collect();
    Ok(ConvergenceResult { eps_0, alpha: power_law_exponent(&xs, &ys), rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationResult {
    pub windows: Vec<usize>,
    pub times: Vec<usize>,
    /// `eps[w][k]`: error rate of window `w` at `times[k]`, averaged over stages.
    pub eps: Vec<Vec<f64>>,
    pub eps_oracle: Vec<f64>,
}

impl FluctuationResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for w in &self.windows {
            let _ = write!(out, ",eps_w{w}");
        }
        out.push_str(",eps_oracle\n");
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t}");
            for e in &self.eps {
                let _ = write!(out, ",{}", e[k]);
            }
            let _ = writeln!(out, ",{}", self.eps_oracle[k]);
        }
        out
    }

    /// Time average of window `w`'s curve.
    pub fn mean_eps(&self, w: usize) -> f64 {
        self.eps[w].iter().sum::<f64>() / self.times.len() as f64
    }

    pub fn mean_oracle(&self) -> f64 {
        self.eps_oracle.iter().sum::<f64>() / self.times.len() as f64
    }
}

/// Sliding-window estimation under a time-dependent schedule.
///
/// Each stage streams syndromes once; every window keeps its own
/// accumulator and re-estimates every `window / 4` cycles. At each
/// evaluation time `t` the latest estimate is scored on a test set sampled
/// at `t`, shared by all stages and windows, next to the decoder that uses
/// the instantaneous true probabilities.
pub fn exp_fluctuation(cfg: &ExperimentConfig) -> Result<FluctuationResult> {
    cfg.validate()?;
    let schedule = cfg.noise()?;
    let windows = cfg.windows();
    let stages = cfg.repetitions.unwrap_or(DEFAULT_FLUCTUATION_REPETITIONS);
    let est_cfg = EstimatorConfig { z: cfg.z, ..EstimatorConfig::default() };
    let eval_start = cfg.eval_start.unwrap_or(20_000);
    let eval_end = cfg.eval_end.unwrap_or(39_000);
    let step = cfg.eval_step.unwrap_or(1000);
    if eval_end < eval_start {
        return Err(Error::Config("eval_end must not precede eval_start".into()));
    }
    let times: Vec<usize> = (eval_start..=eval_end).step_by(step).collect();
    let max_window = *windows.iter().max().expect("at least one window");
    let stream_start = eval_start.saturating_sub(max_window);
    schedule.validate(stream_start, eval_end + cfg.rounds_test - stream_start)?;

    let test_root = derive_seed(cfg.seed, TAG_TEST);
    let tests = times
        .iter()
        .enumerate()
        .map(|(k, &t)| TestSet::sample(&schedule, cfg.lag, cfg.rounds_test, cfg.trials, derive_seed(test_root, k as u64), t))
        .collect::<Result<Vec<_>>>()?;
    let eps_oracle = times
        .iter()
        .zip(&tests)
        .map(|(&t, test)| Ok(logical_error_rate(&DecoderTables::build(&schedule.window(t), test, cfg.backend)?, test)?.epsilon))
        .collect::<Result<Vec<_>>>()?;

    let stage_root = derive_seed(cfg.seed, TAG_STAGE);
    let per_stage = (0..stages as u64)
        .into_par_iter()
        .map(|s| -> Result<Vec<Vec<f64>>> {
            let d = schedule.d();
            let mut stream = SyndromeStream::new(&schedule, cfg.lag, derive_seed(stage_root, s), stream_start)?;
            let mut accs = windows
                .iter()
                .map(|&w| MomentAccumulator::new(d, cfg.lag, Some(w)))
                .collect::<Result<Vec<_>>>()?;
            let cadence: Vec<usize> = windows.iter().map(|&w| (w / 4).max(1)).collect();
            let mut current: Vec<Option<ClassEstimates>> = vec![None; windows.len()];
            let mut eps = vec![vec![0.0; times.len()]; windows.len()];
            let mut row = vec![false; d - 1];
            let mut k = 0;
            for t in stream_start..=eval_end {
                while k < times.len() && times[k] == t {
                    for (w, est) in current.iter().enumerate() {
                        let est = est.as_ref().ok_or_else(|| Error::Config("window has no estimate yet".into()))?;
                        let tables = DecoderTables::build(est, &tests[k], cfg.backend)?;
                        eps[w][k] = logical_error_rate(&tables, &tests[k])?.epsilon;
                    }
                    k += 1;
                }
                if t == eval_end {
                    break;
                }
                let got = stream.next_row(&mut row)?;
                debug_assert_eq!(got, t);
                for (w, acc) in accs.iter_mut().enumerate() {
                    acc.push_row(t, &row)?;
                    if (t + 1) % cadence[w] == 0 {
                        current[w] = Some(estimate_all(acc.counts(), &est_cfg)?);
                    }
                }
            }
            Ok(eps)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut eps = vec![vec![0.0; times.len()]; windows.len()];
    for stage in &per_stage {
        for (w, curve) in stage.iter().enumerate() {
            for (k, e) in curve.iter().enumerate() {
                eps[w][k] += e;
            }
        }
    }
    for curve in &mut eps {
        for e in curve.iter_mut() {
            *e /= stages as f64;
        }
    }
    Ok(FluctuationResult { windows, times, eps, eps_oracle })
}
