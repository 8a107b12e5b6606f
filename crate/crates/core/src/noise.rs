//! Stochastic sampling of syndrome histories under independent bit flips.
//!
//! # Random number contract
//!
//! Every trial owns a `ChaCha8Rng` seeded with `seed_from_u64(seed)` on
//! stream 0. Round `t` (absolute cycle index, including any offset) starts at
//! word position `t * 2 * (2d - 1)` and consumes one `u64` per qubit, data
//! qubits `1..=d` first and then ancillas `0..d-1`. A qubit flips in round `t`
//! when its uniform draw in `[0, 1)` is below its rate. Each flip is therefore
//! keyed by `(seed, round, qubit)`, independent of how many rounds are
//! sampled, so truncated and streamed histories agree with full ones.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dem::{build_repetition_dem, parse_header, validate_shape, DetectorErrorModel, DetectorId, EdgeKind, Qubit, RateTable};
use crate::error::{Error, Result};

/// Rates this close below zero are treated as zero (the sinusoid touches 0).
const NEGATIVE_SLACK: f64 = 1e-12;

/// Flip probability of one qubit as a function of the cycle index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RateFn {
    Constant { gamma0: f64 },
    /// `gamma0 + amplitude * sin(omega * t + phase)`, `omega` in radians per cycle.
    Sinusoid { gamma0: f64, amplitude: f64, omega: f64, phase: f64 },
}

impl RateFn {
    pub fn eval(&self, t: f64) -> f64 {
        let g = match *self {
            RateFn::Constant { gamma0 } => gamma0,
            RateFn::Sinusoid { gamma0, amplitude, omega, phase } => gamma0 + amplitude * (omega * t + phase).sin(),
        };
        if g < 0.0 && g > -NEGATIVE_SLACK {
            0.0
        } else {
            g
        }
    }

    /// Largest and smallest value over the cycles `[t0, t0 + rounds)`.
    fn range(&self, t0: usize, rounds: usize) -> (f64, f64) {
        match *self {
            RateFn::Constant { gamma0 } => (gamma0, gamma0),
            RateFn::Sinusoid { omega, .. } if omega == 0.0 || rounds as f64 * omega.abs() >= 2.0 * PI => {
                // Full periods (or a constant): the continuous extremes bound the samples.
                let (lo, hi) = self.bounds();
                (lo, hi)
            }
            _ => (t0..t0 + rounds)
                .map(|t| self.eval(t as f64))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(g), hi.max(g))),
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            RateFn::Constant { gamma0 } => (gamma0, gamma0),
            RateFn::Sinusoid { gamma0, amplitude, .. } => {
                let a = amplitude.abs();
                let lo = gamma0 - a;
                (if lo < 0.0 && lo > -NEGATIVE_SLACK { 0.0 } else { lo }, gamma0 + a)
            }
        }
    }
}

/// Per-qubit rate functions for a distance-`d` repetition code.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    d: usize,
    data: Vec<RateFn>,
    ancilla: Vec<RateFn>,
}

impl NoiseSchedule {
    pub fn new(d: usize, data: Vec<RateFn>, ancilla: Vec<RateFn>) -> Result<Self> {
        validate_shape(d, 1, 1)?;
        if data.len() != d || ancilla.len() != d - 1 {
            return Err(Error::Config(format!(
                "schedule for d={d} needs {d} data and {} ancilla rates, got {} and {}",
                d - 1,
                data.len(),
                ancilla.len()
            )));
        }
        Ok(Self { d, data, ancilla })
    }

    pub fn uniform(d: usize, gamma: f64) -> Result<Self> {
        Self::split(d, RateFn::Constant { gamma0: gamma }, RateFn::Constant { gamma0: gamma })
    }

    /// Same rate function on all data qubits and another on all ancillas.
    pub fn split(d: usize, data: RateFn, ancilla: RateFn) -> Result<Self> {
        Self::new(d, vec![data; d], vec![ancilla; d.saturating_sub(1)])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rate_fn(&self, qubit: Qubit) -> &RateFn {
        match qubit {
            Qubit::Data(k) => &self.data[k - 1],
            Qubit::Ancilla(a) => &self.ancilla[a],
        }
    }

    /// Flip probability of `qubit` in cycle `t`.
    pub fn gamma_at(&self, qubit: Qubit, t: f64) -> f64 {
        self.rate_fn(qubit).eval(t)
    }

    /// Checks `0 <= gamma < 1/2` on every qubit over `[t0, t0 + rounds)`.
    pub fn validate(&self, t0: usize, rounds: usize) -> Result<()> {
        if rounds == 0 {
            return Ok(());
        }
        let qubits = (1..=self.d).map(Qubit::Data).chain((0..self.d - 1).map(Qubit::Ancilla));
        for q in qubits {
            let (lo, hi) = self.rate_fn(q).range(t0, rounds);
            for g in [lo, hi] {
                if !(g.is_finite() && (0.0..0.5).contains(&g)) {
                    return Err(Error::ProbabilityOutOfRange { what: format!("{q:?} rate"), p: g });
                }
            }
        }
        Ok(())
    }

    /// View of the schedule with round 0 mapped to cycle `t_offset`.
    pub fn window(&self, t_offset: usize) -> ScheduleWindow<'_> {
        ScheduleWindow { schedule: self, t_offset }
    }

    fn rates_at(&self, t: usize, data: &mut [f64], ancilla: &mut [f64]) {
        let t = t as f64;
        for (g, f) in data.iter_mut().zip(&self.data) {
            *g = f.eval(t);
        }
        for (g, f) in ancilla.iter_mut().zip(&self.ancilla) {
            *g = f.eval(t);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScheduleWindow<'a> {
    schedule: &'a NoiseSchedule,
    t_offset: usize,
}

impl RateTable for ScheduleWindow<'_> {
    fn rate(&self, qubit: Qubit, round: usize) -> f64 {
        self.schedule.gamma_at(qubit, (self.t_offset + round) as f64)
    }
}

/// The exact catalog the sampler draws from over `[t_offset, t_offset + rounds)`.
pub fn true_probabilities(
    schedule: &NoiseSchedule,
    rounds: usize,
    lag: usize,
    t_offset: usize,
) -> Result<DetectorErrorModel> {
    schedule.validate(t_offset, rounds)?;
    build_repetition_dem(schedule.d, rounds, lag, &schedule.window(t_offset))
}

/// Draws the per-round qubit flips following the module-level RNG contract.
pub struct FlipSampler<'a> {
    schedule: &'a NoiseSchedule,
    rng: ChaCha8Rng,
    t: usize,
    data_rates: Vec<f64>,
    anc_rates: Vec<f64>,
}

impl<'a> FlipSampler<'a> {
    pub fn new(schedule: &'a NoiseSchedule, seed: u64, t_start: usize) -> Self {
        let d = schedule.d;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(words_per_round(d) * t_start as u128);
        Self { schedule, rng, t: t_start, data_rates: vec![0.0; d], anc_rates: vec![0.0; d - 1] }
    }

    /// Cycle index of the next round to be drawn.
    pub fn next_round(&self) -> usize {
        self.t
    }

    /// Fills `data` (length `d`) and `ancilla` (length `d - 1`) with this
    /// round's flips and advances by one round.
    pub fn draw(&mut self, data: &mut [bool], ancilla: &mut [bool]) {
        self.schedule.rates_at(self.t, &mut self.data_rates, &mut self.anc_rates);
        for (flip, &g) in data.iter_mut().zip(&self.data_rates) {
            *flip = self.rng.random::<f64>() < g;
        }
        for (flip, &g) in ancilla.iter_mut().zip(&self.anc_rates) {
            *flip = self.rng.random::<f64>() < g;
        }
        self.t += 1;
    }
}

fn words_per_round(d: usize) -> u128 {
    2 * (2 * d as u128 - 1)
}

/// Raw qubit flips of one finite trial, from which closed syndromes of any
/// prefix length can be read off cheaply.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFlips {
    d: usize,
    lag: usize,
    rounds: usize,
    data: Vec<bool>,
    ancilla: Vec<bool>,
}

impl TrialFlips {
    pub fn sample(schedule: &NoiseSchedule, rounds: usize, lag: usize, seed: u64, t_offset: usize) -> Result<Self> {
        validate_shape(schedule.d, rounds, lag)?;
        schedule.validate(t_offset, rounds)?;
        let d = schedule.d;
        let mut data = vec![false; rounds * d];
        let mut ancilla = vec![false; rounds * (d - 1)];
        let mut sampler = FlipSampler::new(schedule, seed, t_offset);
        for t in 0..rounds {
            sampler.draw(&mut data[t * d..(t + 1) * d], &mut ancilla[t * (d - 1)..(t + 1) * (d - 1)]);
        }
        Ok(Self { d, lag, rounds, data, ancilla })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn data_flip(&self, k: usize, t: usize) -> bool {
        self.data[t * self.d + k - 1]
    }

    fn anc_flip(&self, a: usize, t: usize) -> bool {
        self.ancilla[t * (self.d - 1) + a]
    }

    /// Detection events of the closed record truncated to `rounds` rounds.
    pub fn events(&self, rounds: usize, out: &mut Vec<DetectorId>) {
        out.clear();
        let lag = self.lag;
        for t in 0..rounds.min(self.rounds) {
            for a in 0..self.d - 1 {
                let mut s = self.data_flip(a + 1, t) ^ self.data_flip(a + 2, t);
                if t + lag < rounds {
                    s ^= self.anc_flip(a, t);
                }
                if t >= lag {
                    s ^= self.anc_flip(a, t - lag);
                }
                if s {
                    out.push(DetectorId::new(a, t));
                }
            }
        }
    }

    /// Logical frame after `rounds` rounds: parity of flips of data qubit 1.
    pub fn logical(&self, rounds: usize) -> bool {
        (0..rounds.min(self.rounds)).filter(|&t| self.data_flip(1, t)).count() % 2 == 1
    }

    /// Whether the underlying error of `edge` occurred.
    fn edge_on(&self, edge: &crate::dem::EdgeSpec) -> bool {
        let first = edge.detectors().min().expect("edge has a detector");
        match edge.kind {
            EdgeKind::Space => self.data_flip(first.ancilla + 2, first.round),
            EdgeKind::Boundary if edge.logical_crossing => self.data_flip(1, first.round),
            EdgeKind::Boundary => self.data_flip(self.d, first.round),
            EdgeKind::Time => self.anc_flip(first.ancilla, first.round),
        }
    }
}

/// Binary detection-event matrix of one trial plus its true logical frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeRecord {
    pub d: usize,
    pub rounds: usize,
    pub lag: usize,
    /// Row-major `rounds x (d - 1)`.
    pub bits: Vec<bool>,
    pub true_logical: bool,
    pub trial_seed: u64,
}

impl SyndromeRecord {
    pub fn width(&self) -> usize {
        self.d - 1
    }

    pub fn row(&self, t: usize) -> &[bool] {
        &self.bits[t * self.width()..(t + 1) * self.width()]
    }

    pub fn get(&self, id: DetectorId) -> bool {
        self.bits[id.round * self.width() + id.ancilla]
    }

    /// Detection events in `(round, ancilla)` order.
    pub fn events(&self) -> Vec<DetectorId> {
        let w = self.width();
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| DetectorId::new(i % w, i / w))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# syndrome d={} rounds={} lag={} seed={} logical={}\n",
            self.d,
            self.rounds,
            self.lag,
            self.trial_seed,
            u8::from(self.true_logical)
        );
        for t in 0..self.rounds {
            let _ = write!(out, "{t}");
            for &b in self.row(t) {
                out.push_str(if b { " 1" } else { " 0" });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let f = parse_header(header, "syndrome", &["d", "rounds", "lag", "seed", "logical"])
            .map_err(|msg| Error::Parse { line: 1, msg })?;
        let (d, rounds, lag) = (f[0] as usize, f[1] as usize, f[2] as usize);
        validate_shape(d, rounds, lag)?;
        if f[4] > 1 {
            return Err(Error::Parse { line: 1, msg: "logical must be 0 or 1".into() });
        }
        let mut bits = Vec::with_capacity(rounds * (d - 1));
        for (expected_t, (no, line)) in lines.enumerate() {
            let err = |msg: String| Error::Parse { line: no + 1, msg };
            let mut tok = line.split_whitespace();
            let t: usize = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad round index".into()))?;
            if t != expected_t {
                return Err(err(format!("expected round {expected_t}, got {t}")));
            }
            let row: Vec<bool> = tok
                .map(|b| match b {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(err(format!("bad bit `{other}`"))),
                })
                .collect::<Result<_>>()?;
            if row.len() != d - 1 {
                return Err(err(format!("expected {} bits, got {}", d - 1, row.len())));
            }
            bits.extend(row);
        }
        if bits.len() != rounds * (d - 1) {
            return Err(Error::Parse { line: 0, msg: format!("expected {rounds} rounds") });
        }
        Ok(Self { d, rounds, lag, bits, true_logical: f[4] == 1, trial_seed: f[3] })
    }
}

/// Samples one trial by drawing every edge of the true catalog.
pub fn sample_trial(
    schedule: &NoiseSchedule,
    rounds: usize,
    lag: usize,
    seed: u64,
    t_offset: usize,
) -> Result<SyndromeRecord> {
    let model = true_probabilities(schedule, rounds, lag, t_offset)?;
    let flips = TrialFlips::sample(schedule, rounds, lag, seed, t_offset)?;
    let samples: Vec<bool> = model.edges().iter().map(|e| flips.edge_on(e)).collect();
    Ok(SyndromeRecord {
        d: schedule.d,
        rounds,
        lag,
        bits: model.evaluate_detectors(&samples)?,
        true_logical: model.logical_parity(&samples)?,
        trial_seed: seed,
    })
}

/// Unbounded syndrome source: rows are produced one cycle at a time and no
/// final readout ever closes the stream. A stream started at `t_start`
/// yields the same rows as one started at 0 from that cycle on; the logical
/// frame counts only flips from `t_start`.
pub struct SyndromeStream<'a> {
    sampler: FlipSampler<'a>,
    lag: usize,
    /// Ancilla flips of the last `lag` rounds, oldest first.
    history: std::collections::VecDeque<Vec<bool>>,
    data: Vec<bool>,
    logical: bool,
}

impl<'a> SyndromeStream<'a> {
    pub fn new(schedule: &'a NoiseSchedule, lag: usize, seed: u64, t_start: usize) -> Result<Self> {
        validate_shape(schedule.d, 1, lag)?;
        // Replay the ancilla flips of the `lag` rounds before `t_start` so the
        // stream continues a history that began at cycle 0.
        let warm = t_start.min(lag);
        schedule.validate(t_start - warm, warm)?;
        let mut sampler = FlipSampler::new(schedule, seed, t_start - warm);
        let mut history = std::collections::VecDeque::new();
        let mut data = vec![false; schedule.d];
        for _ in 0..warm {
            let mut anc = vec![false; schedule.d - 1];
            sampler.draw(&mut data, &mut anc);
            history.push_back(anc);
        }
        data.fill(false);
        Ok(Self { sampler, lag, history, data, logical: false })
    }

    /// Cycle index of the next row.
    pub fn next_round(&self) -> usize {
        self.sampler.next_round()
    }

    /// Writes the next row of detection events into `row` (length `d - 1`).
    pub fn next_row(&mut self, row: &mut [bool]) -> Result<usize> {
        let d = self.data.len();
        let t = self.sampler.next_round();
        self.sampler.schedule.validate(t, 1)?;
        let mut anc = vec![false; d - 1];
        self.sampler.draw(&mut self.data, &mut anc);
        let old = if self.history.len() == self.lag { self.history.pop_front() } else { None };
        for (a, s) in row.iter_mut().enumerate().take(d - 1) {
            *s = self.data[a] ^ self.data[a + 1] ^ anc[a] ^ old.as_ref().is_some_and(|o| o[a]);
        }
        self.logical ^= self.data[0];
        self.history.push_back(anc);
        Ok(t)
    }

    /// Parity of data-qubit-1 flips so far.
    pub fn logical(&self) -> bool {
        self.logical
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_examples() {
        let c = NoiseSchedule::uniform(3, 0.005).unwrap();
        assert_eq!(c.gamma_at(Qubit::Data(2), 12345.0), 0.005);
        let s = NoiseSchedule::split(
            3,
            RateFn::Constant { gamma0: 0.005 },
            RateFn::Sinusoid { gamma0: 0.005, amplitude: 0.005, omega: PI * 1e-4, phase: 0.0 },
        )
        .unwrap();
        assert_eq!(s.gamma_at(Qubit::Ancilla(0), 0.0), 0.005);
        assert!((s.gamma_at(Qubit::Ancilla(1), 5000.0) - 0.010).abs() < 1e-15);
        // Trough of the sinusoid is exactly zero, not a tiny negative number.
        assert_eq!(s.gamma_at(Qubit::Ancilla(1), 15000.0), 0.0);
        assert!(s.validate(0, 40000).is_ok());
    }

    #[test]
    fn validation_catches_out_of_range_rates() {
        let s = NoiseSchedule::split(
            3,
            RateFn::Constant { gamma0: 0.01 },
            RateFn::Sinusoid { gamma0: 0.3, amplitude: 0.3, omega: 0.01, phase: 0.0 },
        )
        .unwrap();
        assert!(s.validate(0, 10).is_ok());
        assert!(s.validate(0, 200).is_err());
        assert!(sample_trial(&s, 200, 1, 0, 0).is_err());
        assert!(NoiseSchedule::uniform(3, 0.6).unwrap().validate(0, 1).is_err());
    }

    #[test]
    fn zero_noise_gives_empty_syndrome() {
        let s = NoiseSchedule::uniform(5, 0.0).unwrap();
        let r = sample_trial(&s, 50, 1, 7, 0).unwrap();
        assert!(r.bits.iter().all(|&b| !b));
        assert!(!r.true_logical);
        let m = true_probabilities(&s, 10, 1, 0).unwrap();
        assert!(m.edges().iter().all(|e| e.probability == 0.0));
    }

    #[test]
    fn true_probabilities_follow_the_schedule() {
        let u = true_probabilities(&NoiseSchedule::uniform(3, 0.005).unwrap(), 6, 1, 0).unwrap();
        assert!(u.edges().iter().all(|e| e.probability == 0.005));

        let anc = RateFn::Sinusoid { gamma0: 0.005, amplitude: 0.005, omega: PI * 1e-4, phase: 0.0 };
        let s = NoiseSchedule::split(3, RateFn::Constant { gamma0: 0.005 }, anc).unwrap();
        let m = true_probabilities(&s, 20, 1, 4000).unwrap();
        for e in m.edges().iter().filter(|e| e.kind == EdgeKind::Time) {
            let origin = e.detectors().map(|i| i.round).min().unwrap();
            assert_eq!(e.probability, anc.eval((4000 + origin) as f64));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = NoiseSchedule::uniform(5, 0.05).unwrap();
        let a = sample_trial(&s, 40, 2, 99, 13).unwrap();
        let b = sample_trial(&s, 40, 2, 99, 13).unwrap();
        assert_eq!(a, b);
        let c = sample_trial(&s, 40, 2, 100, 13).unwrap();
        assert_ne!(a.bits, c.bits);
    }

    #[test]
    fn flips_match_edge_sampling_for_every_prefix() {
        let s = NoiseSchedule::uniform(5, 0.08).unwrap();
        for lag in 1..=2 {
            for seed in 0..20 {
                let flips = TrialFlips::sample(&s, 30, lag, seed, 5).unwrap();
                let mut ev = Vec::new();
                for t in [1, 7, 30] {
                    let rec = sample_trial(&s, t, lag, seed, 5).unwrap();
                    flips.events(t, &mut ev);
                    assert_eq!(ev, rec.events());
                    assert_eq!(flips.logical(t), rec.true_logical);
                }
            }
        }
    }

    #[test]
    fn stream_matches_record_before_the_closing_rounds() {
        let s = NoiseSchedule::uniform(3, 0.1).unwrap();
        for lag in 1..=2 {
            for offset in [0, 100] {
                let rec = sample_trial(&s, 40, lag, 3, offset).unwrap();
                let mut stream = SyndromeStream::new(&s, lag, 3, offset).unwrap();
                let mut row = vec![false; 2];
                for t in 0..40 {
                    assert_eq!(stream.next_row(&mut row).unwrap(), offset + t);
                    // A record starts without earlier rounds; the stream
                    // continues a history from cycle 0.
                    if t + lag < 40 && (offset == 0 || t >= lag) {
                        assert_eq!(row, rec.row(t), "lag {lag} offset {offset} round {t}");
                    }
                }
                assert_eq!(stream.logical(), rec.true_logical);
            }
        }
    }

    #[test]
    fn late_stream_continues_early_stream() {
        let s = NoiseSchedule::uniform(5, 0.1).unwrap();
        let mut early = SyndromeStream::new(&s, 2, 11, 0).unwrap();
        let mut late = SyndromeStream::new(&s, 2, 11, 30).unwrap();
        let (mut a, mut b) = (vec![false; 4], vec![false; 4]);
        for _ in 0..30 {
            early.next_row(&mut a).unwrap();
        }
        for _ in 0..20 {
            early.next_row(&mut a).unwrap();
            late.next_row(&mut b).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn syndrome_text_round_trip() {
        let s = NoiseSchedule::uniform(5, 0.1).unwrap();
        let rec = sample_trial(&s, 12, 1, 42, 0).unwrap();
        let text = rec.to_text();
        assert!(text.starts_with("# syndrome d=5 rounds=12 lag=1 seed=42 logical="));
        assert!(text.lines().nth(1).unwrap().starts_with("0 "));
        assert_eq!(SyndromeRecord::from_text(&text).unwrap(), rec);
        assert!(SyndromeRecord::from_text("# syndrome d=3 rounds=1 lag=1 seed=0 logical=0\n0 1\n").is_err());
    }
}
