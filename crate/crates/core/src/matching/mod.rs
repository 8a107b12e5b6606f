//! Minimum-weight perfect matching of detection events with a boundary.
//!
//! Each event `u` gets a virtual twin `u'` joined to it with the boundary
//! weight of `u`; twins form a zero-weight clique among themselves, so any
//! number of events can be sent to the boundary. Weights are quantised to
//! integers and handed to an exact blossom solver.

mod blossom;

use std::fmt::Write as _;

use crate::dem::DetectorId;
use crate::error::{Error, Result};
use crate::weights::WeightTable;

pub use blossom::max_weight_matching;

/// Largest quantised weight, in units of the working scale.
const QUANT_BITS: i32 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingProblem {
    nodes: Vec<DetectorId>,
    pair: Vec<f64>,
    boundary: Vec<f64>,
}

impl MatchingProblem {
    /// `pair` is row-major `n x n` and must be symmetric; infinite entries
    /// mark forbidden matches. The diagonal is ignored.
    pub fn new(nodes: Vec<DetectorId>, pair: Vec<f64>, boundary: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if pair.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: pair.len() });
        }
        if boundary.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: boundary.len() });
        }
        for i in 0..n {
            check_weight(boundary[i])?;
            for j in i + 1..n {
                let w = pair[i * n + j];
                check_weight(w)?;
                if w != pair[j * n + i] {
                    return Err(Error::Domain(format!("pair weights ({i},{j}) are not symmetric")));
                }
            }
        }
        Ok(Self { nodes, pair, boundary })
    }

    /// Problem over `events`, looked up in `table`.
    pub fn from_table(table: &WeightTable, events: &[DetectorId]) -> Result<Self> {
        let idx = events
            .iter()
            .map(|&id| table.index_of(id).ok_or(Error::MissingWeight(id)))
            .collect::<Result<Vec<_>>>()?;
        let n = idx.len();
        let mut pair = vec![f64::INFINITY; n * n];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a + 1) {
                let w = table.pair_weight(i, j);
                pair[a * n + b] = w;
                pair[b * n + a] = w;
            }
        }
        let boundary = idx.iter().map(|&i| table.boundary_weight(i)).collect();
        Self::new(events.to_vec(), pair, boundary)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[DetectorId] {
        &self.nodes
    }

    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.pair[i * self.nodes.len() + j]
    }

    pub fn boundary_weight(&self, i: usize) -> f64 {
        self.boundary[i]
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_nan() || w < 0.0 {
        return Err(Error::Domain(format!("matching weight {w} must be non-negative")));
    }
    Ok(())
}

/// A perfect matching, as indices into the problem's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Matched pairs `(i, j)` with `i < j`, sorted.
    pub pairs: Vec<(usize, usize)>,
    /// Nodes matched to the boundary, sorted.
    pub to_boundary: Vec<usize>,
    pub total_weight: f64,
}

impl Matching {
    pub fn empty() -> Self {
        Self { pairs: Vec::new(), to_boundary: Vec::new(), total_weight: 0.0 }
    }

    /// Builds a matching and its weight, summed pairs first then boundary
    /// matches, each in sorted order.
    pub fn from_parts(problem: &MatchingProblem, mut pairs: Vec<(usize, usize)>, mut to_boundary: Vec<usize>) -> Self {
        for p in &mut pairs {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        to_boundary.sort_unstable();
        let total_weight = pairs.iter().map(|&(i, j)| problem.pair_weight(i, j)).sum::<f64>()
            + to_boundary.iter().map(|&i| problem.boundary_weight(i)).sum::<f64>();
        Self { pairs, to_boundary, total_weight }
    }

    /// Text dump, one match per line.
    pub fn to_text(&self, problem: &MatchingProblem) -> String {
        let mut out = String::new();
        let id = |i: usize| problem.nodes()[i];
        for &(i, j) in &self.pairs {
            let (u, v) = (id(i), id(j));
            let _ = writeln!(out, "{} {} {} {} {}", u.ancilla, u.round, v.ancilla, v.round, problem.pair_weight(i, j));
        }
        for &i in &self.to_boundary {
            let u = id(i);
            let _ = writeln!(out, "{} {} B B {}", u.ancilla, u.round, problem.boundary_weight(i));
        }
        let _ = writeln!(out, "total {}", self.total_weight);
        out
    }
}

/// Power-of-two scale mapping the largest finite weight to about `2^40`.
fn quantisation_scale(problem: &MatchingProblem) -> f64 {
    let n = problem.len();
    let mut max = 0.0f64;
    for i in 0..n {
        let b = problem.boundary_weight(i);
        if b.is_finite() {
            max = max.max(b);
        }
        for j in i + 1..n {
            let w = problem.pair_weight(i, j);
            if w.is_finite() {
                max = max.max(w);
            }
        }
    }
    if max == 0.0 {
        return 1.0;
    }
    let exp = QUANT_BITS - max.log2().ceil() as i32;
    2f64.powi(exp.clamp(-1000, 1000))
}

/// Exact minimum-weight perfect matching with boundary.
///
/// Fails with [`Error::Infeasible`] if no matching uses only finite weights.
/// Among optimal matchings the result depends only on the input order.
pub fn min_weight_perfect_matching(problem: &MatchingProblem) -> Result<Matching> {
    let n = problem.len();
    if n == 0 {
        return Ok(Matching::empty());
    }
    if n == 1 {
        return if problem.boundary_weight(0).is_finite() {
            Ok(Matching::from_parts(problem, Vec::new(), vec![0]))
        } else {
            Err(Error::Infeasible)
        };
    }

    let scale = quantisation_scale(problem);
    let quant = |w: f64| (w * scale).round() as i64;
    let mut edges: Vec<(usize, usize, i64)> = Vec::with_capacity(n * n + n);
    for i in 0..n {
        for j in i + 1..n {
            let w = problem.pair_weight(i, j);
            if w.is_finite() {
                edges.push((i, j, quant(w)));
            }
        }
        let b = problem.boundary_weight(i);
        if b.is_finite() {
            edges.push((i, n + i, quant(b)));
        }
    }
    let big = edges.iter().map(|e| e.2).max().unwrap_or(0) + 1;
    for e in &mut edges {
        e.2 = big - e.2;
    }
    for i in 0..n {
        for j in i + 1..n {
            edges.push((n + i, n + j, big));
        }
    }

    let mate = max_weight_matching(2 * n, &edges, true);
    let mut pairs = Vec::new();
    let mut to_boundary = Vec::new();
    for (i, &m) in mate.iter().enumerate().take(n) {
        if m == usize::MAX {
            return Err(Error::Infeasible);
        } else if m == n + i {
            to_boundary.push(i);
        } else if m < n {
            if i < m {
                pairs.push((i, m));
            }
        } else {
            return Err(Error::Infeasible);
        }
    }
    Ok(Matching::from_parts(problem, pairs, to_boundary))
}
