//! Matching weights from edge probabilities.
//!
//! The weight between two detectors is `-ln` of the total probability of all
//! error chains joining them. Summed over every walk in the interior of the
//! graph this is an entry of `(1 - A)^{-1}` with `A_ij = p_ij` for `i != j`;
//! a boundary weight sums chains that end on a boundary edge instead. The
//! exact backend evaluates that inverse densely on a block of rounds. The
//! shortest-path backend keeps only the most probable chain, which is what a
//! decoder uses in practice.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dem::{DetectorErrorModel, DetectorId, EdgeEndpoint};
use crate::error::{Error, Result};

/// Default largest matrix dimension for the exact backend.
pub const DEFAULT_EXACT_CAP: usize = 4096;
/// Default number of rounds dropped next to an artificial block edge.
pub const DEFAULT_MARGIN: usize = 5;
/// Largest graph accepted by the walk-sum oracle.
pub const WALK_ORACLE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    #[serde(alias = "shortest-path", alias = "shortest_path")]
    Dijkstra,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "dijkstra" | "shortest-path" | "shortest_path" => Ok(Backend::Dijkstra),
            other => Err(format!("unknown backend `{other}` (expected exact or dijkstra)")),
        }
    }
}

/// Pairwise and boundary weights for a set of detectors, plus the logical
/// parity of the dominant chain behind each weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    backend: Backend,
    nodes: Vec<DetectorId>,
    pair: Vec<f64>,
    pair_parity: Vec<bool>,
    boundary: Vec<f64>,
    boundary_parity: Vec<bool>,
}

impl WeightTable {
    fn empty(backend: Backend, nodes: Vec<DetectorId>) -> Self {
        let n = nodes.len();
        Self {
            backend,
            nodes,
            pair: vec![f64::INFINITY; n * n],
            pair_parity: vec![false; n * n],
            boundary: vec![f64::INFINITY; n],
            boundary_parity: vec![false; n],
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Detectors covered, in `(round, ancilla)` order.
    pub fn nodes(&self) -> &[DetectorId] {
        &self.nodes
    }

    pub fn index_of(&self, id: DetectorId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }

    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.pair[i * self.nodes.len() + j]
    }

    pub fn pair_parity(&self, i: usize, j: usize) -> bool {
        self.pair_parity[i * self.nodes.len() + j]
    }

    pub fn boundary_weight(&self, i: usize) -> f64 {
        self.boundary[i]
    }

    pub fn boundary_parity(&self, i: usize) -> bool {
        self.boundary_parity[i]
    }

    fn set_pair(&mut self, i: usize, j: usize, w: f64, parity: bool) {
        let n = self.nodes.len();
        self.pair[i * n + j] = w;
        self.pair[j * n + i] = w;
        self.pair_parity[i * n + j] = parity;
        self.pair_parity[j * n + i] = parity;
    }

    /// Sub-table over `ids`, which must all be covered.
    pub fn restrict(&self, ids: &[DetectorId]) -> Result<WeightTable> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let idx = ids
            .iter()
            .map(|&id| self.index_of(id).ok_or(Error::MissingWeight(id)))
            .collect::<Result<Vec<_>>>()?;
        let mut out = WeightTable::empty(self.backend, ids);
        for (a, &i) in idx.iter().enumerate() {
            out.boundary[a] = self.boundary[i];
            out.boundary_parity[a] = self.boundary_parity[i];
            for (b, &j) in idx.iter().enumerate().skip(a + 1) {
                out.set_pair(a, b, self.pair_weight(i, j), self.pair_parity(i, j));
            }
        }
        Ok(out)
    }

    /// CSV dump `u_ancilla,u_round,v_ancilla,v_round,weight`, boundary as `B,B`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u_ancilla,u_round,v_ancilla,v_round,weight\n");
        for (i, u) in self.nodes.iter().enumerate() {
            for (j, v) in self.nodes.iter().enumerate().skip(i + 1) {
                let _ = writeln!(out, "{},{},{},{},{}", u.ancilla, u.round, v.ancilla, v.round, self.pair_weight(i, j));
            }
            let _ = writeln!(out, "{},{},B,B,{}", u.ancilla, u.round, self.boundary[i]);
        }
        out
    }
}

const BOUNDARY: usize = usize::MAX;

/// Detector graph with additive costs `-ln p`; zero-probability edges are
/// dropped.
#[derive(Debug, Clone)]
pub struct PathGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    costs: Vec<f64>,
    parities: Vec<bool>,
    width: usize,
}

/// Distances from one source.
#[derive(Debug, Clone, Default)]
pub struct PathSearch {
    dist: Vec<f64>,
    parity: Vec<bool>,
    done: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<Reverse<(Cost, usize)>>,
    boundary: (f64, bool),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PathSearch {
    pub fn distance(&self, node: usize) -> (f64, bool) {
        (self.dist[node], self.parity[node])
    }

    pub fn boundary(&self) -> (f64, bool) {
        self.boundary
    }
}

impl PathGraph {
    pub fn new(model: &DetectorErrorModel) -> Self {
        Self::with_block(model, 0..model.rounds())
    }

    /// Graph on the detectors with rounds in `block`; edges leaving the block
    /// are dropped. Node `i` is detector `block.start * (d - 1) + i`.
    pub fn with_block(model: &DetectorErrorModel, block: Range<usize>) -> Self {
        let width = model.d() - 1;
        let base = block.start * width;
        let n = block.len() * width;
        let local = |id: DetectorId| block.contains(&id.round).then(|| id.round * width + id.ancilla - base);
        let mut adj: Vec<Vec<(usize, f64, bool)>> = vec![Vec::new(); n];
        for e in model.edges() {
            if e.probability <= 0.0 {
                continue;
            }
            let cost = -e.probability.ln();
            match (e.u, e.v) {
                (EdgeEndpoint::Detector(a), EdgeEndpoint::Detector(b)) => {
                    if let (Some(i), Some(j)) = (local(a), local(b)) {
                        adj[i].push((j, cost, e.logical_crossing));
                        adj[j].push((i, cost, e.logical_crossing));
                    }
                }
                (EdgeEndpoint::Detector(a), EdgeEndpoint::Boundary) | (EdgeEndpoint::Boundary, EdgeEndpoint::Detector(a)) => {
                    if let Some(i) = local(a) {
                        adj[i].push((BOUNDARY, cost, e.logical_crossing));
                    }
                }
                (EdgeEndpoint::Boundary, EdgeEndpoint::Boundary) => {}
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let (mut targets, mut costs, mut parities) = (Vec::new(), Vec::new(), Vec::new());
        offsets.push(0);
        for list in adj {
            for (t, c, p) in list {
                targets.push(t);
                costs.push(c);
                parities.push(p);
            }
            offsets.push(targets.len());
        }
        Self { offsets, targets, costs, parities, width }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Single-source shortest paths from `source`. The search stops early
    /// once every node in `targets` and the boundary are settled. Ties keep
    /// the path found first, which follows `(round, ancilla)` order.
    pub fn search(&self, source: usize, targets: &[usize], ws: &mut PathSearch) {
        let n = self.num_nodes();
        if ws.dist.len() != n {
            ws.dist = vec![f64::INFINITY; n];
            ws.parity = vec![false; n];
            ws.done = vec![false; n];
            ws.touched.clear();
        }
        for &i in &ws.touched {
            ws.dist[i] = f64::INFINITY;
            ws.parity[i] = false;
            ws.done[i] = false;
        }
        ws.touched.clear();
        ws.heap.clear();
        ws.boundary = (f64::INFINITY, false);

        ws.dist[source] = 0.0;
        ws.touched.push(source);
        ws.heap.push(Reverse((Cost(0.0), source)));
        let mut remaining = targets.iter().filter(|&&t| t != source).count();
        while let Some(Reverse((Cost(d), u))) = ws.heap.pop() {
            if ws.done[u] {
                continue;
            }
            if remaining == 0 && d >= ws.boundary.0 {
                break;
            }
            ws.done[u] = true;
            if u != source && targets.contains(&u) {
                remaining -= 1;
            }
            for k in self.offsets[u]..self.offsets[u + 1] {
                let nd = d + self.costs[k];
                let np = ws.parity[u] ^ self.parities[k];
                let v = self.targets[k];
                if v == BOUNDARY {
                    if nd < ws.boundary.0 {
                        ws.boundary = (nd, np);
                    }
                } else if nd < ws.dist[v] {
                    if ws.dist[v].is_infinite() {
                        ws.touched.push(v);
                    }
                    ws.dist[v] = nd;
                    ws.parity[v] = np;
                    ws.heap.push(Reverse((Cost(nd), v)));
                }
            }
        }
    }

    fn node(&self, id: DetectorId, block_start: usize) -> Option<usize> {
        let i = (id.round.checked_sub(block_start)?) * self.width + id.ancilla;
        (id.ancilla < self.width && i < self.num_nodes()).then_some(i)
    }

    /// Shortest-path weights among `sources` (detectors of a graph built
    /// with [`PathGraph::new`]).
    pub fn table(&self, sources: &[DetectorId], ws: &mut PathSearch) -> Result<WeightTable> {
        self.table_in_block(sources, 0, ws)
    }

    fn table_in_block(&self, sources: &[DetectorId], block_start: usize, ws: &mut PathSearch) -> Result<WeightTable> {
        let mut nodes = sources.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let idx = nodes
            .iter()
            .map(|&id| self.node(id, block_start).ok_or(Error::UnknownDetector(id)))
            .collect::<Result<Vec<_>>>()?;
        let mut table = WeightTable::empty(Backend::Dijkstra, nodes);
        for (a, &src) in idx.iter().enumerate() {
            self.search(src, &idx[a + 1..], ws);
            let (bw, bp) = ws.boundary();
            table.boundary[a] = bw;
            table.boundary_parity[a] = bp;
            for (b, &dst) in idx.iter().enumerate().skip(a + 1) {
                let (w, p) = ws.distance(dst);
                table.set_pair(a, b, w, if w.is_finite() { p } else { false });
            }
        }
        Ok(table)
    }
}

/// Weights of the single most probable chain between each pair of
/// `sources`, and from each source to the boundary.
pub fn weights_shortest_path(model: &DetectorErrorModel, sources: &[DetectorId]) -> Result<WeightTable> {
    PathGraph::new(model).table(sources, &mut PathSearch::default())
}

/// Weights between every pair of detectors of `model`.
pub fn weights_all(model: &DetectorErrorModel, backend: Backend) -> Result<WeightTable> {
    match backend {
        Backend::Exact => weights_exact(model, 0..model.rounds()),
        Backend::Dijkstra => {
            let all: Vec<DetectorId> = (0..model.num_detectors()).map(|i| model.detector_id(i)).collect();
            weights_shortest_path(model, &all)
        }
    }
}

/// Exact all-chain weights on the detectors of `block`, using the default
/// dimension cap and no margin.
pub fn weights_exact(model: &DetectorErrorModel, block: Range<usize>) -> Result<WeightTable> {
    weights_exact_with(model, block, 0, DEFAULT_EXACT_CAP)
}

/// Exact all-chain weights evaluated on the rounds of `block`.
///
/// Weights are reported only for detectors at least `margin` rounds away
/// from a block end that cuts through the model; ends that coincide with the
/// model's own first or last round need no margin. Logical parities come
/// from the dominant chain.
pub fn weights_exact_with(model: &DetectorErrorModel, block: Range<usize>, margin: usize, cap: usize) -> Result<WeightTable> {
    if block.start >= block.end || block.end > model.rounds() {
        return Err(Error::Config(format!("block {block:?} outside rounds 0..{}", model.rounds())));
    }
    let width = model.d() - 1;
    let dim = block.len() * width;
    if dim > cap {
        return Err(Error::CapExceeded { dim, cap });
    }
    let base = block.start * width;
    let local = |id: DetectorId| block.contains(&id.round).then(|| id.round * width + id.ancilla - base);

    let mut m = DMatrix::<f64>::identity(dim, dim);
    let mut boundary_p = vec![0.0; dim];
    for e in model.edges() {
        match (e.u, e.v) {
            (EdgeEndpoint::Detector(a), EdgeEndpoint::Detector(b)) => {
                if let (Some(i), Some(j)) = (local(a), local(b)) {
                    m[(i, j)] -= e.probability;
                    m[(j, i)] -= e.probability;
                }
            }
            (EdgeEndpoint::Detector(a), EdgeEndpoint::Boundary) | (EdgeEndpoint::Boundary, EdgeEndpoint::Detector(a)) => {
                if let Some(i) = local(a) {
                    boundary_p[i] += e.probability;
                }
            }
            (EdgeEndpoint::Boundary, EdgeEndpoint::Boundary) => {}
        }
    }
    let inv = m.lu().try_inverse().ok_or(Error::Singular)?;

    let lo = if block.start > 0 { block.start + margin } else { block.start };
    let hi = if block.end < model.rounds() { block.end.saturating_sub(margin) } else { block.end };
    let nodes: Vec<DetectorId> = (lo..hi.max(lo))
        .flat_map(|t| (0..width).map(move |a| DetectorId::new(a, t)))
        .collect();
    let idx: Vec<usize> = nodes.iter().map(|&id| local(id).expect("node inside block")).collect();

    let graph = PathGraph::with_block(model, block.clone());
    let mut ws = PathSearch::default();
    let mut table = WeightTable::empty(Backend::Exact, nodes);
    for (a, &i) in idx.iter().enumerate() {
        graph.search(i, &idx[a + 1..], &mut ws);
        let sum: f64 = (0..dim).map(|k| inv[(i, k)] * boundary_p[k]).sum();
        table.boundary[a] = neg_ln(sum);
        table.boundary_parity[a] = ws.boundary().1;
        for (b, &j) in idx.iter().enumerate().skip(a + 1) {
            table.set_pair(a, b, neg_ln(inv[(i, j)]), ws.distance(j).1);
        }
    }
    Ok(table)
}

fn neg_ln(x: f64) -> f64 {
    if x > 0.0 {
        -x.ln()
    } else {
        f64::INFINITY
    }
}

/// Total probability `e^{-w}` of all interior walks from `u` to `target`
/// (a detector, or the boundary through a boundary edge), accumulated walk
/// length by walk length until the remaining tail is negligible.
///
/// Independent of the matrix inverse; intended as a check on small graphs.
pub fn path_sum_walks(model: &DetectorErrorModel, u: DetectorId, target: EdgeEndpoint) -> Result<f64> {
    let n = model.num_detectors();
    if n > WALK_ORACLE_CAP {
        return Err(Error::CapExceeded { dim: n, cap: WALK_ORACLE_CAP });
    }
    let start = model.detector_index(u).ok_or(Error::UnknownDetector(u))?;
    let mut links: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut boundary_p = vec![0.0; n];
    for e in model.edges() {
        match (e.u, e.v) {
            (EdgeEndpoint::Detector(a), EdgeEndpoint::Detector(b)) => {
                let (i, j) = (model.detector_index(a).unwrap(), model.detector_index(b).unwrap());
                links[i].push((j, e.probability));
                links[j].push((i, e.probability));
            }
            (EdgeEndpoint::Detector(a), EdgeEndpoint::Boundary) | (EdgeEndpoint::Boundary, EdgeEndpoint::Detector(a)) => {
                boundary_p[model.detector_index(a).unwrap()] += e.probability;
            }
            (EdgeEndpoint::Boundary, EdgeEndpoint::Boundary) => {}
        }
    }
    let readout = |x: &[f64]| -> f64 {
        match target {
            EdgeEndpoint::Detector(v) => x[model.detector_index(v).unwrap()],
            EdgeEndpoint::Boundary => x.iter().zip(&boundary_p).map(|(a, b)| a * b).sum(),
        }
    };
    if let EdgeEndpoint::Detector(v) = target {
        if model.detector_index(v).is_none() {
            return Err(Error::UnknownDetector(v));
        }
    }

    const MAX_STEPS: usize = 200_000;
    const TAIL: f64 = 1e-15;
    // x[k] = sum over walks of the current length from `start` to k.
    let mut x = vec![0.0; n];
    x[start] = 1.0;
    let diagonal = matches!(target, EdgeEndpoint::Detector(v) if v == u);
    let mut total = if diagonal { 0.0 } else { readout(&x) };
    let scale = boundary_p.iter().fold(1.0_f64, |m, &p| m.max(p));
    for _ in 0..MAX_STEPS {
        let mut next = vec![0.0; n];
        for (i, &xi) in x.iter().enumerate().filter(|(_, &xi)| xi != 0.0) {
            for &(j, p) in &links[i] {
                next[j] += xi * p;
            }
        }
        x = next;
        total += readout(&x);
        let norm: f64 = x.iter().sum();
        if norm * scale < TAIL {
            return Ok(total);
        }
    }
    Err(Error::NoConvergence(MAX_STEPS))
}
