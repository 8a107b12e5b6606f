//! Edge probabilities from detection-event correlations.
//!
//! For two detectors `i`, `j` joined by an edge of probability `p`,
//!
//! ```text
//! p (1 - p) = (<v_i v_j> - <v_i><v_j>) / (1 - 2 <v_i xor v_j>)
//! ```
//!
//! holds exactly whatever the rest of the graph looks like, so `p` follows
//! from first and second moments alone. A boundary edge at `i` then follows
//! from `<v_i>` and the already known pair edges of `i`:
//!
//! ```text
//! p_ii = 1/2 + (<v_i> - 1/2) / prod_j (1 - 2 p_ij)
//! ```
//!
//! Moments are pooled per time-translation class (one class per space pair,
//! per ancilla time pair and per ancilla detector) and can be restricted to a
//! sliding window of rounds.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dem::{validate_shape, EdgeKind, Qubit, RateTable};
use crate::error::{Error, Result};
use crate::noise::SyndromeRecord;

const DEGENERATE: f64 = 1e-6;

/// Statistical uncertainty `sqrt(p (1 - p) / n)` of an estimated probability.
pub fn uncertainty(p: f64, n: u64) -> Result<f64> {
    if !(0.0..0.5).contains(&p) || n == 0 {
        return Err(Error::Domain(format!("uncertainty needs 0 <= p < 1/2 and n >= 1, got p={p}, n={n}")));
    }
    Ok((p * (1.0 - p) / n as f64).sqrt())
}

/// Minimum number of cycles for a reliable estimate, `ceil(1 / p_bar)`.
pub fn n_min(p_bar: f64) -> Result<u64> {
    if !(p_bar > 0.0 && p_bar < 0.5) {
        return Err(Error::Domain(format!("n_min needs 0 < p < 1/2, got {p_bar}")));
    }
    // Guard against 1/0.005 = 200.00000000000003.
    Ok((1.0 / p_bar - 1e-9).ceil() as u64)
}

/// Window length balancing sampling error against drift of a noise
/// component with angular frequency `omega` (radians per cycle):
/// `(p_bar omega^2)^(-1/3)`.
pub fn n_opt(p_bar: f64, omega: f64) -> Result<u64> {
    if !(p_bar > 0.0 && p_bar < 0.5) || omega.is_nan() || omega <= 0.0 {
        return Err(Error::Domain(format!("n_opt needs 0 < p < 1/2 and omega > 0, got {p_bar}, {omega}")));
    }
    Ok((p_bar * omega * omega).powf(-1.0 / 3.0).round() as u64)
}

/// Highest noise frequency the estimator can follow, `p_bar` per cycle.
pub fn omega_c(p_bar: f64) -> Result<f64> {
    if !(p_bar > 0.0 && p_bar < 0.5) {
        return Err(Error::Domain(format!("omega_c needs 0 < p < 1/2, got {p_bar}")));
    }
    Ok(p_bar)
}

/// An inverted edge probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    /// Set when the estimate was forced to zero (or clamped below 1/2).
    pub clamped: bool,
    pub n_samples: u64,
}

impl EdgeEstimate {
    fn new(p_hat: f64, clamped: bool) -> Self {
        Self { p_hat, std_err: 0.0, clamped, n_samples: 0 }
    }

    fn zero() -> Self {
        Self::new(0.0, true)
    }

    /// Attaches the sample count and the matching uncertainty.
    pub fn with_samples(mut self, n: u64) -> Self {
        self.n_samples = n;
        self.std_err = if n == 0 { 0.0 } else { (self.p_hat * (1.0 - self.p_hat) / n as f64).sqrt() };
        self
    }
}

/// Probability of the edge between two detectors from their means and the
/// mean of their product.
pub fn pair_probability(mean_i: f64, mean_j: f64, mean_ij: f64) -> Result<EdgeEstimate> {
    for m in [mean_i, mean_j, mean_ij] {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Domain(format!("moment {m} outside [0, 1]")));
        }
    }
    // Tolerate rounding in moments computed by summation.
    if mean_ij > mean_i.min(mean_j) + 1e-12 {
        return Err(Error::Domain(format!("<v_i v_j> = {mean_ij} exceeds min(<v_i>, <v_j>)")));
    }
    let xor_mean = mean_i + mean_j - 2.0 * mean_ij;
    let denom = 1.0 - 2.0 * xor_mean;
    if denom.abs() < DEGENERATE {
        return Err(Error::DegenerateDenominator(denom));
    }
    let cov = mean_ij - mean_i * mean_j;
    if cov <= 0.0 {
        return Ok(EdgeEstimate::zero());
    }
    let ratio = cov / denom;
    let disc = 0.25 - ratio;
    let p = 0.5 - disc.clamp(0.0, 0.25).sqrt();
    // A negative ratio (opposite-sign denominator) or a discriminant outside
    // [0, 1/4] has no admissible solution; clamp and flag it.
    let clamped = !(0.0..=0.25).contains(&disc);
    Ok(EdgeEstimate::new(p, clamped))
}

/// Probability of the boundary edge of a detector from its mean and the
/// probabilities of all its other edges.
pub fn boundary_probability(mean_i: f64, neighbor_ps: &[f64]) -> Result<EdgeEstimate> {
    if !(0.0..=1.0).contains(&mean_i) {
        return Err(Error::Domain(format!("mean {mean_i} outside [0, 1]")));
    }
    if let Some(&p) = neighbor_ps.iter().find(|p| !(0.0..0.5).contains(*p)) {
        return Err(Error::ProbabilityOutOfRange { what: "neighbour edge".into(), p });
    }
    let prod: f64 = neighbor_ps.iter().map(|p| 1.0 - 2.0 * p).product();
    if prod < DEGENERATE {
        return Err(Error::DegenerateProduct(prod));
    }
    let p = 0.5 + (mean_i - 0.5) / prod;
    if p < 0.0 {
        Ok(EdgeEstimate::zero())
    } else if p >= 0.5 {
        Ok(EdgeEstimate::new(0.5_f64.next_down(), true))
    } else {
        Ok(EdgeEstimate::new(p, false))
    }
}

/// Counts for one detector class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorCount {
    pub n: u64,
    pub sum: u64,
}

/// Counts for one pair class; `u` is the earlier (or lower) detector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub n: u64,
    pub sum_u: u64,
    pub sum_v: u64,
    pub sum_uv: u64,
}

impl PairCount {
    fn add(&mut self, u: bool, v: bool, sign: i64) {
        let step = |x: &mut u64, on: bool| {
            if on {
                *x = x.wrapping_add_signed(sign);
            }
        };
        self.n = self.n.wrapping_add_signed(sign);
        step(&mut self.sum_u, u);
        step(&mut self.sum_v, v);
        step(&mut self.sum_uv, u && v);
    }

    fn merge(&mut self, o: &PairCount) {
        self.n += o.n;
        self.sum_u += o.sum_u;
        self.sum_v += o.sum_v;
        self.sum_uv += o.sum_uv;
    }

    fn means(&self) -> (f64, f64, f64) {
        let n = self.n as f64;
        (self.sum_u as f64 / n, self.sum_v as f64 / n, self.sum_uv as f64 / n)
    }

    /// Plug-in covariance and its sampling standard error, exact for binary
    /// variables given the four cell frequencies.
    fn covariance_with_error(&self) -> (f64, f64) {
        let (mu, mv, muv) = self.means();
        let cov = muv - mu * mv;
        let cells = [
            (muv, 1.0, 1.0),
            (mu - muv, 1.0, 0.0),
            (mv - muv, 0.0, 1.0),
            (1.0 - mu - mv + muv, 0.0, 0.0),
        ];
        let second: f64 = cells
            .iter()
            .map(|&(w, x, y)| w * ((x - mu) * (y - mv)).powi(2))
            .sum();
        let var = (second - cov * cov).max(0.0);
        (cov, (var / self.n as f64).sqrt())
    }
}

/// Exact integer moment sums pooled per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentCounts {
    pub d: usize,
    pub lag: usize,
    /// One class per ancilla; only detectors with their full set of time
    /// neighbours are counted.
    pub detector: Vec<DetectorCount>,
    /// One class per adjacent ancilla pair `(a, a + 1)` in the same round.
    pub space: Vec<PairCount>,
    /// One class per ancilla pair `(a, t - lag), (a, t)`.
    pub time: Vec<PairCount>,
}

impl MomentCounts {
    pub fn new(d: usize, lag: usize) -> Result<Self> {
        validate_shape(d, 1, lag)?;
        Ok(Self {
            d,
            lag,
            detector: vec![DetectorCount::default(); d - 1],
            space: vec![PairCount::default(); d - 2],
            time: vec![PairCount::default(); d - 1],
        })
    }

    /// Adds the counts of `other`, which must describe the same code.
    pub fn merge(&mut self, other: &MomentCounts) -> Result<()> {
        if (self.d, self.lag) != (other.d, other.lag) {
            return Err(Error::Config("cannot merge counts of different codes".into()));
        }
        for (a, b) in self.detector.iter_mut().zip(&other.detector) {
            a.n += b.n;
            a.sum += b.sum;
        }
        for (a, b) in self.space.iter_mut().zip(&other.space).chain(self.time.iter_mut().zip(&other.time)) {
            a.merge(b);
        }
        Ok(())
    }

    fn add_space(&mut self, row: &[bool], sign: i64) {
        for (a, c) in self.space.iter_mut().enumerate() {
            c.add(row[a], row[a + 1], sign);
        }
    }

    /// Time pairs between `earlier` and the row `lag` rounds later, plus the
    /// detector means of `earlier`, which only count once its forward time
    /// neighbour exists (and, via `with_detectors`, its backward one).
    fn add_time(&mut self, earlier: &[bool], later: &[bool], with_detectors: bool, sign: i64) {
        for (a, c) in self.time.iter_mut().enumerate() {
            c.add(earlier[a], later[a], sign);
        }
        if with_detectors {
            for (a, c) in self.detector.iter_mut().enumerate() {
                c.n = c.n.wrapping_add_signed(sign);
                if earlier[a] {
                    c.sum = c.sum.wrapping_add_signed(sign);
                }
            }
        }
    }
}

/// Streaming accumulator of detection-event moments over an optional
/// sliding window of rounds.
///
/// Every contribution is attributed to the earliest round it involves; a
/// round's contributions are retired together when that round leaves the
/// window. The window therefore only ever reflects rows inside it.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    counts: MomentCounts,
    window: Option<usize>,
    rows: VecDeque<Vec<bool>>,
    /// Absolute round of `rows[0]`.
    first: usize,
    /// Absolute round the next row must have; `None` before any row.
    next: Option<usize>,
}

impl MomentAccumulator {
    /// `window = None` keeps every round; otherwise only the last `window`
    /// rounds contribute (`window > lag`).
    pub fn new(d: usize, lag: usize, window: Option<usize>) -> Result<Self> {
        let counts = MomentCounts::new(d, lag)?;
        if let Some(w) = window {
            if w <= lag {
                return Err(Error::Config(format!("window {w} must exceed the lag {lag}")));
            }
        }
        Ok(Self { counts, window, rows: VecDeque::new(), first: 0, next: None })
    }

    pub fn counts(&self) -> &MomentCounts {
        &self.counts
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    /// Number of rows ingested since the oldest retained round.
    pub fn rounds_in_window(&self) -> usize {
        self.next.map_or(0, |n| n - self.first)
    }

    /// Ingests consecutive rows starting at absolute round `first_round`.
    pub fn accumulate(&mut self, first_round: usize, rows: &[Vec<bool>]) -> Result<()> {
        for (i, row) in rows.iter().enumerate() {
            self.push_row(first_round + i, row)?;
        }
        Ok(())
    }

    /// Ingests every row of a closed record.
    pub fn accumulate_record(&mut self, record: &SyndromeRecord) -> Result<()> {
        if (record.d, record.lag) != (self.counts.d, self.counts.lag) {
            return Err(Error::Config("record does not match the accumulator's code".into()));
        }
        for t in 0..record.rounds {
            self.push_row(t, record.row(t))?;
        }
        Ok(())
    }

    pub fn push_row(&mut self, t: usize, row: &[bool]) -> Result<()> {
        let width = self.counts.d - 1;
        if row.len() != width {
            return Err(Error::RowWidth { expected: width, got: row.len() });
        }
        match self.next {
            Some(expected) if expected != t => return Err(Error::NonContiguous { expected, got: t }),
            None => self.first = t,
            _ => {}
        }
        self.next = Some(t + 1);
        let lag = self.counts.lag;
        self.rows.push_back(row.to_vec());
        self.counts.add_space(row, 1);
        if t >= self.first + lag {
            let earlier = &self.rows[self.rows.len() - 1 - lag];
            self.counts.add_time(earlier, row, t - lag >= lag, 1);
        }

        match self.window {
            Some(w) => {
                while t + 1 - self.first > w {
                    let old = self.rows.pop_front().expect("window holds rows");
                    let anchor = self.first;
                    self.first += 1;
                    self.counts.add_space(&old, -1);
                    self.counts.add_time(&old, &self.rows[lag - 1], anchor >= lag, -1);
                }
            }
            None => {
                while self.rows.len() > lag {
                    self.rows.pop_front();
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Pair estimates whose covariance is within `z` standard errors of zero
    /// are set to zero.
    pub z: f64,
    /// Minimum samples per class.
    pub min_samples: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { z: 2.0, min_samples: 2 }
    }
}

/// Estimated probability of every edge class of the repetition code.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEstimates {
    pub d: usize,
    pub lag: usize,
    /// Space class `a` joins ancillas `a` and `a + 1` (data qubit `a + 2`).
    pub space: Vec<EdgeEstimate>,
    /// Time class `a` joins ancilla `a` with itself `lag` rounds later.
    pub time: Vec<EdgeEstimate>,
    /// Boundary edge on ancilla 0 (data qubit 1).
    pub boundary_left: EdgeEstimate,
    /// Boundary edge on ancilla `d - 2` (data qubit `d`).
    pub boundary_right: EdgeEstimate,
}

/// Pair classes first, significance-filtered; boundary classes from them.
pub fn estimate_all(counts: &MomentCounts, config: &EstimatorConfig) -> Result<ClassEstimates> {
    let d = counts.d;
    let check = |class: String, n: u64| {
        if n < config.min_samples {
            Err(Error::InsufficientSamples { class, n, min: config.min_samples })
        } else {
            Ok(())
        }
    };
    let pair = |c: &PairCount, class: String| -> Result<EdgeEstimate> {
        check(class, c.n)?;
        let (mu, mv, muv) = c.means();
        let est = pair_probability(mu, mv, muv)?;
        let (cov, se) = c.covariance_with_error();
        let est = if est.p_hat > 0.0 && cov <= config.z * se { EdgeEstimate::zero() } else { est };
        Ok(est.with_samples(c.n))
    };
    let space = (0..d - 2)
        .map(|a| pair(&counts.space[a], format!("space {a}")))
        .collect::<Result<Vec<_>>>()?;
    let time = (0..d - 1)
        .map(|a| pair(&counts.time[a], format!("time {a}")))
        .collect::<Result<Vec<_>>>()?;

    let boundary = |a: usize| -> Result<EdgeEstimate> {
        let c = counts.detector[a];
        check(format!("detector {a}"), c.n)?;
        let mut neighbors = vec![time[a].p_hat, time[a].p_hat];
        if a > 0 {
            neighbors.push(space[a - 1].p_hat);
        }
        if a + 2 < d {
            neighbors.push(space[a].p_hat);
        }
        Ok(boundary_probability(c.sum as f64 / c.n as f64, &neighbors)?.with_samples(c.n))
    };
    let boundary_left = boundary(0)?;
    let boundary_right = boundary(d - 2)?;
    Ok(ClassEstimates { d, lag: counts.lag, space, time, boundary_left, boundary_right })
}

impl RateTable for ClassEstimates {
    fn rate(&self, qubit: Qubit, _round: usize) -> f64 {
        match qubit {
            Qubit::Data(1) => self.boundary_left.p_hat,
            Qubit::Data(k) if k == self.d => self.boundary_right.p_hat,
            Qubit::Data(k) => self.space[k - 2].p_hat,
            Qubit::Ancilla(a) => self.time[a].p_hat,
        }
    }
}

/// One JSON record per edge class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub kind: EdgeKind,
    pub ancilla: usize,
    pub p_hat: f64,
    pub std_err: f64,
    pub clamped: bool,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatesFile {
    pub d: usize,
    pub lag: usize,
    pub classes: Vec<ClassRecord>,
}

impl ClassEstimates {
    pub fn iter_classes(&self) -> impl Iterator<Item = (EdgeKind, usize, &EdgeEstimate)> {
        let space = self.space.iter().enumerate().map(|(a, e)| (EdgeKind::Space, a, e));
        let time = self.time.iter().enumerate().map(|(a, e)| (EdgeKind::Time, a, e));
        space
            .chain(time)
            .chain([(EdgeKind::Boundary, 0, &self.boundary_left), (EdgeKind::Boundary, self.d - 2, &self.boundary_right)])
    }

    pub fn any_clamped(&self) -> bool {
        self.iter_classes().any(|(_, _, e)| e.clamped)
    }

    pub fn to_file(&self) -> EstimatesFile {
        EstimatesFile {
            d: self.d,
            lag: self.lag,
            classes: self
                .iter_classes()
                .map(|(kind, ancilla, e)| ClassRecord {
                    kind,
                    ancilla,
                    p_hat: e.p_hat,
                    std_err: e.std_err,
                    clamped: e.clamped,
                    n: e.n_samples,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("estimates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EstimatesFile = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &EstimatesFile) -> Result<Self> {
        let d = file.d;
        validate_shape(d, 1, file.lag)?;
        let mut space = vec![None; d - 2];
        let mut time = vec![None; d - 1];
        let (mut left, mut right) = (None, None);
        for c in &file.classes {
            let e = EdgeEstimate { p_hat: c.p_hat, std_err: c.std_err, clamped: c.clamped, n_samples: c.n };
            if !(0.0..0.5).contains(&c.p_hat) {
                return Err(Error::ProbabilityOutOfRange { what: format!("{:?} class {}", c.kind, c.ancilla), p: c.p_hat });
            }
            let slot = match c.kind {
                EdgeKind::Space => space.get_mut(c.ancilla),
                EdgeKind::Time => time.get_mut(c.ancilla),
                EdgeKind::Boundary if c.ancilla == 0 => Some(&mut left),
                EdgeKind::Boundary if c.ancilla == d - 2 => Some(&mut right),
                EdgeKind::Boundary => None,
            };
            *slot.ok_or_else(|| Error::Config(format!("unexpected class {:?} {}", c.kind, c.ancilla)))? = Some(e);
        }
        let missing = || Error::Config("estimates file is missing a class".into());
        Ok(Self {
            d,
            lag: file.lag,
            space: space.into_iter().collect::<Option<_>>().ok_or_else(missing)?,
            time: time.into_iter().collect::<Option<_>>().ok_or_else(missing)?,
            boundary_left: left.ok_or_else(missing)?,
            boundary_right: right.ok_or_else(missing)?,
        })
    }
}
