//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use adaqec_core::matching::MatchingProblem;
use adaqec_core::{DetectorErrorModel, EdgeEndpoint};
use rand::Rng;

/// A small error graph: `nodes` detectors and independent edges, each either
/// a pair `(i, Some(j))` or a boundary edge `(i, None)`.
#[derive(Debug, Clone)]
pub struct SmallGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, Option<usize>, f64)>,
}

impl SmallGraph {
    /// Up to `max_edges` distinct edges with probabilities in `[lo, hi]`.
    pub fn random(rng: &mut impl Rng, max_edges: usize, lo: f64, hi: f64) -> Self {
        let nodes = rng.random_range(2..=4);
        let mut slots: Vec<(usize, Option<usize>)> = Vec::new();
        for i in 0..nodes {
            slots.push((i, None));
            for j in i + 1..nodes {
                slots.push((i, Some(j)));
            }
        }
        let count = rng.random_range(1..=max_edges.min(slots.len()));
        let mut edges = Vec::new();
        for _ in 0..count {
            let (i, j) = slots.swap_remove(rng.random_range(0..slots.len()));
            edges.push((i, j, rng.random_range(lo..=hi)));
        }
        Self { nodes, edges }
    }

    pub fn incident(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, &(a, b, _))| a == i || b == Some(i))
            .map(|(k, _)| k)
    }

    /// Exact `<v_i>` and `<v_i v_j>` by summing over all `2^E` edge subsets.
    pub fn moments(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let e = self.edges.len();
        let mut m = vec![0.0; self.nodes];
        let mut mm = vec![vec![0.0; self.nodes]; self.nodes];
        for mask in 0u32..(1 << e) {
            let mut weight = 1.0;
            let mut v = vec![false; self.nodes];
            for (k, &(a, b, p)) in self.edges.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    weight *= p;
                    v[a] ^= true;
                    if let Some(b) = b {
                        v[b] ^= true;
                    }
                } else {
                    weight *= 1.0 - p;
                }
            }
            for i in 0..self.nodes {
                if v[i] {
                    m[i] += weight;
                    for j in 0..self.nodes {
                        if v[j] {
                            mm[i][j] += weight;
                        }
                    }
                }
            }
        }
        (m, mm)
    }
}

/// Minimum total weight over every perfect matching with boundary, by
/// exhaustive recursion. `None` if all of them use an infinite weight.
pub fn brute_force_matching(problem: &MatchingProblem) -> Option<f64> {
    fn go(p: &MatchingProblem, used: &mut Vec<bool>, pairs: &mut Vec<(usize, usize)>, bnd: &mut Vec<usize>, best: &mut Option<f64>) {
        let Some(i) = used.iter().position(|u| !u) else {
            let mut ps = pairs.clone();
            ps.sort_unstable();
            let mut bs = bnd.clone();
            bs.sort_unstable();
            let total: f64 = ps.iter().map(|&(a, b)| p.pair_weight(a, b)).sum::<f64>()
                + bs.iter().map(|&a| p.boundary_weight(a)).sum::<f64>();
            if total.is_finite() && best.is_none_or(|b| total < b) {
                *best = Some(total);
            }
            return;
        };
        used[i] = true;
        bnd.push(i);
        go(p, used, pairs, bnd, best);
        bnd.pop();
        for j in i + 1..used.len() {
            if !used[j] {
                used[j] = true;
                pairs.push((i, j));
                go(p, used, pairs, bnd, best);
                pairs.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    let mut best = None;
    go(problem, &mut vec![false; problem.len()], &mut Vec::new(), &mut Vec::new(), &mut best);
    best
}

/// Every repetition-code shape `(d, rounds, lag)` with at most `cap`
/// detectors.
pub fn small_shapes(cap: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for d in (3..).step_by(2).take_while(|d| d - 1 <= cap) {
        for rounds in 1..=cap / (d - 1) {
            for lag in [1, 2] {
                out.push((d, rounds, lag));
            }
        }
    }
    out
}

/// Number of fewest-edge chains from detector index `src` to every detector
/// and to the boundary (last entry), with their edge counts. Uses only
/// edges with positive probability.
pub fn chain_counts(model: &DetectorErrorModel, src: usize) -> (Vec<usize>, Vec<u64>) {
    let n = model.num_detectors();
    let boundary = n;
    let mut adj = vec![Vec::new(); n + 1];
    for e in model.edges().iter().filter(|e| e.probability > 0.0) {
        let idx = |x: EdgeEndpoint| match x {
            EdgeEndpoint::Detector(id) => model.detector_index(id).unwrap(),
            EdgeEndpoint::Boundary => boundary,
        };
        let (a, b) = (idx(e.u), idx(e.v));
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![usize::MAX; n + 1];
    let mut count = vec![0u64; n + 1];
    dist[src] = 0;
    count[src] = 1;
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        // Chains end at the boundary; they do not pass through it.
        if x == boundary {
            continue;
        }
        for &y in &adj[x] {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
            if dist[y] == dist[x] + 1 {
                count[y] += count[x];
            }
        }
    }
    (dist, count)
}
