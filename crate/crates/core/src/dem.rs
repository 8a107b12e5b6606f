//! Space-time detector graph of the repetition code.
//!
//! A detector `(ancilla, round)` fires when the parity check of `ancilla`
//! changes relative to `lag` rounds earlier. Every physical error mechanism
//! is an edge that toggles either two detectors or one detector and the
//! boundary. A detector fires iff an odd number of its incident edges is on.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex of the space-time graph.
///
/// Ordering is lexicographic in `(round, ancilla)`, which is the canonical
/// tie-break order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DetectorId {
    pub round: usize,
    pub ancilla: usize,
}

impl DetectorId {
    pub fn new(ancilla: usize, round: usize) -> Self {
        Self { round, ancilla }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeEndpoint {
    Detector(DetectorId),
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Space,
    Time,
    Boundary,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Space => "space",
            EdgeKind::Time => "time",
            EdgeKind::Boundary => "boundary",
        }
    }
}

impl FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "space" => Ok(EdgeKind::Space),
            "time" => Ok(EdgeKind::Time),
            "boundary" => Ok(EdgeKind::Boundary),
            other => Err(format!("unknown edge kind `{other}`")),
        }
    }
}

/// A physical qubit of the distance-`d` repetition code.
///
/// Data qubits are numbered `1..=d`. Ancillas use the same 0-based index as
/// the detectors they drive, `0..d-1`; ancilla `a` checks data qubits `a+1`
/// and `a+2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qubit {
    Data(usize),
    Ancilla(usize),
}

/// Per-qubit, per-round flip probabilities used to populate a catalog.
pub trait RateTable {
    fn rate(&self, qubit: Qubit, round: usize) -> f64;
}

impl<F: Fn(Qubit, usize) -> f64> RateTable for F {
    fn rate(&self, qubit: Qubit, round: usize) -> f64 {
        self(qubit, round)
    }
}

/// A single probabilistic edge of the detector graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSpec {
    pub u: EdgeEndpoint,
    pub v: EdgeEndpoint,
    pub probability: f64,
    pub kind: EdgeKind,
    /// Set when the underlying error flips the tracked logical observable.
    pub logical_crossing: bool,
}

impl EdgeSpec {
    /// The detector endpoints of the edge (one for boundary edges).
    pub fn detectors(&self) -> impl Iterator<Item = DetectorId> + '_ {
        [self.u, self.v].into_iter().filter_map(|e| match e {
            EdgeEndpoint::Detector(id) => Some(id),
            EdgeEndpoint::Boundary => None,
        })
    }

    /// The largest round touched by the edge.
    pub fn closing_round(&self) -> usize {
        self.detectors().map(|id| id.round).max().unwrap_or(0)
    }
}

/// Catalog of edges over the detectors `[0, d-1) x [0, rounds)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorErrorModel {
    d: usize,
    rounds: usize,
    lag: usize,
    edges: Vec<EdgeSpec>,
    adjacency: Vec<Vec<usize>>,
}

pub(crate) fn validate_shape(d: usize, rounds: usize, lag: usize) -> Result<()> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDistance(d));
    }
    if rounds == 0 {
        return Err(Error::InvalidRounds);
    }
    if !(1..=2).contains(&lag) {
        return Err(Error::InvalidLag(lag));
    }
    Ok(())
}

fn check_probability(p: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if p.is_finite() && (0.0..0.5).contains(&p) {
        Ok(p)
    } else {
        Err(Error::ProbabilityOutOfRange { what: what(), p })
    }
}

/// Builds the phenomenological bit-flip catalog of a distance-`d` repetition
/// code over `rounds` rounds.
///
/// Edges are ordered by the last round they touch, so the catalog for fewer
/// rounds is a prefix of the catalog for more rounds (given the same rates).
/// Time edges that would leave the window are omitted, which amounts to a
/// noiseless final readout.
pub fn build_repetition_dem(
    d: usize,
    rounds: usize,
    lag: usize,
    rates: &impl RateTable,
) -> Result<DetectorErrorModel> {
    validate_shape(d, rounds, lag)?;
    let det = |a: usize, t: usize| EdgeEndpoint::Detector(DetectorId::new(a, t));
    let mut edges = Vec::with_capacity(rounds * (2 * d - 1));
    for t in 0..rounds {
        for k in 2..d {
            let p = check_probability(rates.rate(Qubit::Data(k), t), || {
                format!("data qubit {k} at round {t}")
            })?;
            edges.push(EdgeSpec {
                u: det(k - 2, t),
                v: det(k - 1, t),
                probability: p,
                kind: EdgeKind::Space,
                logical_crossing: false,
            });
        }
        for (k, a, crossing) in [(1, 0, true), (d, d - 2, false)] {
            let p = check_probability(rates.rate(Qubit::Data(k), t), || {
                format!("data qubit {k} at round {t}")
            })?;
            edges.push(EdgeSpec {
                u: det(a, t),
                v: EdgeEndpoint::Boundary,
                probability: p,
                kind: EdgeKind::Boundary,
                logical_crossing: crossing,
            });
        }
        if t >= lag {
            let origin = t - lag;
            for a in 0..d - 1 {
                let p = check_probability(rates.rate(Qubit::Ancilla(a), origin), || {
                    format!("ancilla {a} at round {origin}")
                })?;
                edges.push(EdgeSpec {
                    u: det(a, origin),
                    v: det(a, t),
                    probability: p,
                    kind: EdgeKind::Time,
                    logical_crossing: false,
                });
            }
        }
    }
    DetectorErrorModel::from_edges(d, rounds, lag, edges)
}

impl DetectorErrorModel {
    /// Assembles a catalog from arbitrary edges, checking endpoints and
    /// rejecting duplicates. `d` fixes the number of ancillas (`d - 1`).
    pub fn from_edges(d: usize, rounds: usize, lag: usize, edges: Vec<EdgeSpec>) -> Result<Self> {
        validate_shape(d, rounds, lag)?;
        let width = d - 1;
        let mut adjacency = vec![Vec::new(); width * rounds];
        let mut seen = std::collections::HashSet::new();
        for (idx, e) in edges.iter().enumerate() {
            check_probability(e.probability, || format!("edge {idx}"))?;
            let key = match (e.u, e.v) {
                (EdgeEndpoint::Boundary, EdgeEndpoint::Boundary) => {
                    return Err(Error::InvalidEdge(format!("edge {idx} has two boundary endpoints")));
                }
                (EdgeEndpoint::Detector(a), EdgeEndpoint::Detector(b)) if a == b => {
                    return Err(Error::InvalidEdge(format!("edge {idx} is a self loop")));
                }
                (a, b) => (a.min(b), a.max(b), e.kind),
            };
            if (e.kind == EdgeKind::Boundary) != key.1.eq(&EdgeEndpoint::Boundary) {
                return Err(Error::InvalidEdge(format!(
                    "edge {idx}: kind {} does not match its endpoints",
                    e.kind.as_str()
                )));
            }
            if !seen.insert(key) {
                return Err(Error::InvalidEdge(format!("edge {idx} duplicates an earlier edge")));
            }
            for id in e.detectors() {
                if id.ancilla >= width || id.round >= rounds {
                    return Err(Error::UnknownDetector(id));
                }
                adjacency[id.round * width + id.ancilla].push(idx);
            }
        }
        Ok(Self { d, rounds, lag, edges, adjacency })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn num_detectors(&self) -> usize {
        (self.d - 1) * self.rounds
    }

    /// Dense index `round * (d - 1) + ancilla`; consistent with the
    /// `(round, ancilla)` ordering of [`DetectorId`].
    pub fn detector_index(&self, id: DetectorId) -> Option<usize> {
        (id.ancilla < self.d - 1 && id.round < self.rounds)
            .then(|| id.round * (self.d - 1) + id.ancilla)
    }

    pub fn detector_id(&self, index: usize) -> DetectorId {
        DetectorId::new(index % (self.d - 1), index / (self.d - 1))
    }

    /// Indices of the edges incident on `id`.
    pub fn incident(&self, id: DetectorId) -> Result<&[usize]> {
        let idx = self.detector_index(id).ok_or(Error::UnknownDetector(id))?;
        Ok(&self.adjacency[idx])
    }

    fn check_len(&self, samples: &[bool]) -> Result<()> {
        if samples.len() != self.edges.len() {
            return Err(Error::LengthMismatch { expected: self.edges.len(), got: samples.len() });
        }
        Ok(())
    }

    /// Detection events produced by an edge configuration, indexed like
    /// [`Self::detector_index`].
    pub fn evaluate_detectors(&self, samples: &[bool]) -> Result<Vec<bool>> {
        self.check_len(samples)?;
        let mut out = vec![false; self.num_detectors()];
        for (e, _) in self.edges.iter().zip(samples).filter(|(_, &on)| on) {
            for id in e.detectors() {
                out[id.round * (self.d - 1) + id.ancilla] ^= true;
            }
        }
        Ok(out)
    }

    /// Whether the configuration flips the logical observable.
    pub fn logical_parity(&self, samples: &[bool]) -> Result<bool> {
        self.check_len(samples)?;
        Ok(self
            .edges
            .iter()
            .zip(samples)
            .filter(|(e, &on)| on && e.logical_crossing)
            .count()
            % 2
            == 1)
    }

    /// Text form: a `# dem` header, then one edge per line as
    /// `kind ancilla_u round_u ancilla_v round_v p logical_crossing`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# dem d={} rounds={} lag={}\n", self.d, self.rounds, self.lag);
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                e.kind.as_str(),
                Endpoint(e.u),
                Endpoint(e.v),
                e.probability,
                u8::from(e.logical_crossing)
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let fields = parse_header(header, "dem", &["d", "rounds", "lag"])
            .map_err(|msg| Error::Parse { line: 1, msg })?;
        let (d, rounds, lag) = (fields[0] as usize, fields[1] as usize, fields[2] as usize);
        let mut edges = Vec::new();
        for (no, line) in lines {
            let err = |msg: String| Error::Parse { line: no + 1, msg };
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 7 {
                return Err(err(format!("expected 7 fields, got {}", tok.len())));
            }
            let kind: EdgeKind = tok[0].parse().map_err(err)?;
            let u = parse_endpoint(tok[1], tok[2]).map_err(err)?;
            let v = parse_endpoint(tok[3], tok[4]).map_err(err)?;
            let probability: f64 = tok[5].parse().map_err(|_| err(format!("bad probability `{}`", tok[5])))?;
            let logical_crossing = match tok[6] {
                "0" => false,
                "1" => true,
                other => return Err(err(format!("bad logical flag `{other}`"))),
            };
            edges.push(EdgeSpec { u, v, probability, kind, logical_crossing });
        }
        Self::from_edges(d, rounds, lag, edges)
    }
}

struct Endpoint(EdgeEndpoint);

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            EdgeEndpoint::Detector(id) => write!(f, "{} {}", id.ancilla, id.round),
            EdgeEndpoint::Boundary => f.write_str("B B"),
        }
    }
}

fn parse_endpoint(a: &str, r: &str) -> std::result::Result<EdgeEndpoint, String> {
    match (a, r) {
        ("B", "B") => Ok(EdgeEndpoint::Boundary),
        _ => {
            let ancilla = a.parse().map_err(|_| format!("bad ancilla `{a}`"))?;
            let round = r.parse().map_err(|_| format!("bad round `{r}`"))?;
            Ok(EdgeEndpoint::Detector(DetectorId::new(ancilla, round)))
        }
    }
}

/// Parses `# <tag> k1=v1 k2=v2 ...`, returning the values of `keys` in order.
pub(crate) fn parse_header(line: &str, tag: &str, keys: &[&str]) -> std::result::Result<Vec<u64>, String> {
    let mut tok = line.split_whitespace();
    if tok.next() != Some("#") || tok.next() != Some(tag) {
        return Err(format!("expected `# {tag}` header"));
    }
    let pairs: Vec<(&str, &str)> = tok.filter_map(|t| t.split_once('=')).collect();
    keys.iter()
        .map(|k| {
            let (_, v) = pairs
                .iter()
                .find(|(name, _)| name == k)
                .ok_or_else(|| format!("header is missing `{k}`"))?;
            v.parse().map_err(|_| format!("bad value for `{k}`: `{v}`"))
        })
        .collect()
}
