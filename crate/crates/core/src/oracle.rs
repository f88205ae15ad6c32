//! Bounded distance oracles.
//!
//! An oracle over an integer-weighted graph answers `D`-bounded distance
//! queries: exact oracles return `dist(u, v)` when it is at most `D` and ∞
//! otherwise; `α`-approximate oracles never underestimate, stay within
//! `α·dist` whenever `dist ≤ D`, and never report a finite value above
//! `α·D`. The implementations here recompute on query; the reduction built
//! on top of them only sees the trait.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, DynamicGraph, WeightDomain};

/// A bounded distance; `Dist::INF` is the "beyond the bound / unreachable"
/// sentinel and compares greater than every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Dist(u64);

impl Dist {
    pub const INF: Dist = Dist(u64::MAX);
    pub const ZERO: Dist = Dist(0);

    pub fn new(d: u64) -> Self {
        assert!(d != u64::MAX, "u64::MAX is reserved for infinity");
        Dist(d)
    }

    pub fn is_finite(self) -> bool {
        self != Self::INF
    }

    pub fn finite(self) -> Option<u64> {
        self.is_finite().then_some(self.0)
    }

    /// `self + len`, saturating to ∞.
    pub fn plus(self, len: u64) -> Dist {
        match self.finite() {
            Some(d) => d.checked_add(len).filter(|&s| s != u64::MAX).map_or(Dist::INF, Dist),
            None => Dist::INF,
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("inf"),
        }
    }
}

/// Row-major `|S₁| × |S₂|` block of oracle answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Dist>,
}

impl DistMatrix {
    pub fn filled(rows: usize, cols: usize, value: Dist) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Dist {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, d: Dist) {
        self.data[i * self.cols + j] = d;
    }

    pub fn row(&self, i: usize) -> &[Dist] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<Dist> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.data.len()
    }
}

/// Accuracy class of an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Accuracy {
    Exact,
    TwoApprox,
    OnePlus(f64),
}

impl Accuracy {
    /// The multiplicative factor `α`.
    pub fn factor(self) -> f64 {
        match self {
            Accuracy::Exact => 1.0,
            Accuracy::TwoApprox => 2.0,
            Accuracy::OnePlus(eps) => 1.0 + eps,
        }
    }
}

/// Contract shared by every bounded distance oracle.
pub trait DistanceOracle: Send + Sync {
    fn accuracy(&self) -> Accuracy;

    /// The distance cutoff `D`.
    fn bound(&self) -> u64;

    /// Sets the length of `(u, v)`; `None` removes the edge.
    fn update(&mut self, u: usize, v: usize, len: Option<u64>);

    fn query(&self, u: usize, v: usize) -> Dist;

    /// `result[i][j] = query(sources[i], targets[j])`.
    fn query_all(&self, sources: &[usize], targets: &[usize]) -> DistMatrix;
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle graphs must be integer weighted")]
    NotInteger,
    #[error("dense min-plus oracle refuses n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },
}

/// Truncated Dijkstra over an integer graph. Returns a length-`n` vector of
/// `D`-bounded distances from (forward) or to (backward) `root`. With
/// `target` set the search stops once it is settled.
pub fn bounded_search(
    g: &DynamicGraph,
    root: usize,
    bound: u64,
    direction: Direction,
    target: Option<usize>,
) -> Vec<Dist> {
    let n = g.vertex_count();
    let mut dist = vec![Dist::INF; n];
    let mut heap = BinaryHeap::new();
    dist[root] = Dist::ZERO;
    heap.push(Reverse((0u64, root)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if Dist(d) > dist[u] {
            continue;
        }
        if Some(u) == target {
            break;
        }
        for &(v, w) in g.neighbors(u, direction) {
            let nd = d + w as u64;
            if nd <= bound && Dist(nd) < dist[v] {
                dist[v] = Dist(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// Exact oracle: one pruned Dijkstra per query (or per row of a batch).
#[derive(Debug, Clone)]
pub struct TruncatedDijkstraOracle {
    graph: DynamicGraph,
    bound: u64,
}

impl TruncatedDijkstraOracle {
    pub fn new(graph: DynamicGraph, bound: u64) -> Result<Self, OracleError> {
        if graph.domain() != WeightDomain::Integer {
            return Err(OracleError::NotInteger);
        }
        Ok(Self { graph, bound })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }
}

fn apply_update(graph: &mut DynamicGraph, u: usize, v: usize, len: Option<u64>) {
    let stored = len.map_or(f64::INFINITY, |l| l as f64);
    graph
        .set_edge(u, v, stored)
        .expect("oracle update outside the copy's weight domain");
}

impl DistanceOracle for TruncatedDijkstraOracle {
    fn accuracy(&self) -> Accuracy {
        Accuracy::Exact
    }

    fn bound(&self) -> u64 {
        self.bound
    }

    fn update(&mut self, u: usize, v: usize, len: Option<u64>) {
        apply_update(&mut self.graph, u, v, len);
    }

    fn query(&self, u: usize, v: usize) -> Dist {
        if u == v {
            return Dist::ZERO;
        }
        bounded_search(&self.graph, u, self.bound, Direction::Forward, Some(v))[v]
    }

    fn query_all(&self, sources: &[usize], targets: &[usize]) -> DistMatrix {
        let mut out = DistMatrix::filled(sources.len(), targets.len(), Dist::INF);
        // Search from whichever side is smaller.
        if sources.len() <= targets.len() {
            let rows: Vec<Vec<Dist>> = sources
                .par_iter()
                .map(|&s| bounded_search(&self.graph, s, self.bound, Direction::Forward, None))
                .collect();
            for (i, row) in rows.iter().enumerate() {
                for (j, &t) in targets.iter().enumerate() {
                    out.set(i, j, row[t]);
                }
            }
        } else {
            let cols: Vec<Vec<Dist>> = targets
                .par_iter()
                .map(|&t| bounded_search(&self.graph, t, self.bound, Direction::Backward, None))
                .collect();
            for (j, col) in cols.iter().enumerate() {
                for (i, &s) in sources.iter().enumerate() {
                    out.set(i, j, col[s]);
                }
            }
        }
        out
    }
}

/// Genuine 2-approximation: the exact bounded distance rounded up to the
/// next power of two (0 stays 0).
#[derive(Debug, Clone)]
pub struct Pow2ApproxOracle {
    inner: TruncatedDijkstraOracle,
}

impl Pow2ApproxOracle {
    pub fn new(graph: DynamicGraph, bound: u64) -> Result<Self, OracleError> {
        Ok(Self {
            inner: TruncatedDijkstraOracle::new(graph, bound)?,
        })
    }
}

/// Rounds a finite distance up to the next power of two.
pub fn pow2_round(d: Dist) -> Dist {
    match d.finite() {
        Some(0) => Dist::ZERO,
        Some(x) => Dist::new(x.next_power_of_two()),
        None => Dist::INF,
    }
}

impl DistanceOracle for Pow2ApproxOracle {
    fn accuracy(&self) -> Accuracy {
        Accuracy::TwoApprox
    }

    fn bound(&self) -> u64 {
        self.inner.bound
    }

    fn update(&mut self, u: usize, v: usize, len: Option<u64>) {
        self.inner.update(u, v, len);
    }

    fn query(&self, u: usize, v: usize) -> Dist {
        pow2_round(self.inner.query(u, v))
    }

    fn query_all(&self, sources: &[usize], targets: &[usize]) -> DistMatrix {
        let mut m = self.inner.query_all(sources, targets);
        m.data.iter_mut().for_each(|d| *d = pow2_round(*d));
        m
    }
}

/// Genuine `(1+ε)`-approximation that always overestimates by the maximum
/// allowed integer slack: `d + ⌊ε·d⌋`.
#[derive(Debug, Clone)]
pub struct SlackApproxOracle {
    inner: TruncatedDijkstraOracle,
    epsilon: f64,
}

impl SlackApproxOracle {
    pub fn new(graph: DynamicGraph, bound: u64, epsilon: f64) -> Result<Self, OracleError> {
        Ok(Self {
            inner: TruncatedDijkstraOracle::new(graph, bound)?,
            epsilon,
        })
    }

    fn inflate(&self, d: Dist) -> Dist {
        match d.finite() {
            Some(x) => Dist::new(x + (self.epsilon * x as f64).floor() as u64),
            None => Dist::INF,
        }
    }
}

impl DistanceOracle for SlackApproxOracle {
    fn accuracy(&self) -> Accuracy {
        if self.epsilon == 0.0 {
            Accuracy::Exact
        } else {
            Accuracy::OnePlus(self.epsilon)
        }
    }

    fn bound(&self) -> u64 {
        self.inner.bound
    }

    fn update(&mut self, u: usize, v: usize, len: Option<u64>) {
        self.inner.update(u, v, len);
    }

    fn query(&self, u: usize, v: usize) -> Dist {
        self.inflate(self.inner.query(u, v))
    }

    fn query_all(&self, sources: &[usize], targets: &[usize]) -> DistMatrix {
        let mut m = self.inner.query_all(sources, targets);
        for i in 0..m.data.len() {
            m.data[i] = self.inflate(m.data[i]);
        }
        m
    }
}

/// Default size cap of the dense min-plus oracle.
pub const DEFAULT_DENSE_LIMIT: usize = 2048;

/// Dense size cap, overridable through `DSP_DENSE_LIMIT`.
pub fn dense_limit() -> usize {
    std::env::var("DSP_DENSE_LIMIT")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_LIMIT)
}

/// Exact oracle computing all bounded distances by repeated min-plus
/// squaring of the weight matrix. The closure is rebuilt lazily after
/// updates.
#[derive(Debug)]
pub struct MinPlusBatchOracle {
    graph: DynamicGraph,
    bound: u64,
    closure: OnceLock<Vec<Dist>>,
}

impl MinPlusBatchOracle {
    pub fn new(graph: DynamicGraph, bound: u64) -> Result<Self, OracleError> {
        Self::with_limit(graph, bound, dense_limit())
    }

    pub fn with_limit(graph: DynamicGraph, bound: u64, limit: usize) -> Result<Self, OracleError> {
        if graph.domain() != WeightDomain::Integer {
            return Err(OracleError::NotInteger);
        }
        let n = graph.vertex_count();
        if n > limit {
            return Err(OracleError::TooLarge { n, limit });
        }
        Ok(Self {
            graph,
            bound,
            closure: OnceLock::new(),
        })
    }

    fn closure(&self) -> &[Dist] {
        self.closure.get_or_init(|| min_plus_closure(&self.graph, self.bound))
    }
}

/// All-pairs `bound`-capped distances by min-plus squaring.
pub fn min_plus_closure(g: &DynamicGraph, bound: u64) -> Vec<Dist> {
    let n = g.vertex_count();
    let mut m = vec![Dist::INF; n * n];
    for v in 0..n {
        m[v * n + v] = Dist::ZERO;
    }
    for (u, v, w) in g.edges() {
        let w = w as u64;
        if w <= bound {
            m[u * n + v] = m[u * n + v].min(Dist::new(w));
            if !g.is_directed() {
                m[v * n + u] = m[v * n + u].min(Dist::new(w));
            }
        }
    }
    let mut hops = 1usize;
    while hops < n {
        let next: Vec<Dist> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let row = &m[i * n..(i + 1) * n];
                let mut out = row.to_vec();
                for (l, &dil) in row.iter().enumerate() {
                    let Some(a) = dil.finite() else { continue };
                    let lrow = &m[l * n..(l + 1) * n];
                    for (j, &dlj) in lrow.iter().enumerate() {
                        if let Some(b) = dlj.finite() {
                            let s = a + b;
                            if s <= bound && Dist(s) < out[j] {
                                out[j] = Dist(s);
                            }
                        }
                    }
                }
                out
            })
            .collect();
        let changed = next != m;
        m = next;
        hops *= 2;
        if !changed {
            break;
        }
    }
    m
}

impl DistanceOracle for MinPlusBatchOracle {
    fn accuracy(&self) -> Accuracy {
        Accuracy::Exact
    }

    fn bound(&self) -> u64 {
        self.bound
    }

    fn update(&mut self, u: usize, v: usize, len: Option<u64>) {
        apply_update(&mut self.graph, u, v, len);
        self.closure = OnceLock::new();
    }

    fn query(&self, u: usize, v: usize) -> Dist {
        let n = self.graph.vertex_count();
        self.closure()[u * n + v]
    }

    fn query_all(&self, sources: &[usize], targets: &[usize]) -> DistMatrix {
        let n = self.graph.vertex_count();
        let c = self.closure();
        let mut out = DistMatrix::filled(sources.len(), targets.len(), Dist::INF);
        for (i, &s) in sources.iter().enumerate() {
            for (j, &t) in targets.iter().enumerate() {
                out.set(i, j, c[s * n + t]);
            }
        }
        out
    }
}

/// Selectable reference oracle implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Exact truncated Dijkstra.
    Dijkstra,
    /// Exact dense min-plus closure.
    MinPlus,
    /// Next-power-of-two 2-approximation.
    Pow2,
    /// `d + ⌊ε·d⌋` (1+ε)-approximation.
    Slack,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Dijkstra => "dijkstra",
            OracleKind::MinPlus => "min-plus",
            OracleKind::Pow2 => "pow2",
            OracleKind::Slack => "slack",
        }
    }

    /// Builds an oracle over `graph` with cutoff `bound`; `epsilon` only
    /// matters for [`OracleKind::Slack`].
    pub fn build(
        self,
        graph: DynamicGraph,
        bound: u64,
        epsilon: f64,
    ) -> Result<Box<dyn DistanceOracle>, OracleError> {
        Ok(match self {
            OracleKind::Dijkstra => Box::new(TruncatedDijkstraOracle::new(graph, bound)?),
            OracleKind::MinPlus => Box::new(MinPlusBatchOracle::new(graph, bound)?),
            OracleKind::Pow2 => Box::new(Pow2ApproxOracle::new(graph, bound)?),
            OracleKind::Slack => Box::new(SlackApproxOracle::new(graph, bound, epsilon)?),
        })
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dijkstra" => Ok(OracleKind::Dijkstra),
            "min-plus" | "minplus" => Ok(OracleKind::MinPlus),
            "pow2" => Ok(OracleKind::Pow2),
            "slack" => Ok(OracleKind::Slack),
            other => Err(format!("unknown oracle kind `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Directedness;

    fn d1() -> DynamicGraph {
        let mut g = DynamicGraph::new(4, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        for (u, v, w) in [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 4.0), (1, 3, 4.0)] {
            g.set_edge(u, v, w).unwrap();
        }
        g
    }

    #[test]
    fn truncated_cutoff() {
        let o = TruncatedDijkstraOracle::new(d1(), 8).unwrap();
        assert_eq!(o.query(0, 3), Dist::new(4));
        let o = TruncatedDijkstraOracle::new(d1(), 3).unwrap();
        assert_eq!(o.query(0, 3), Dist::INF);
        assert_eq!(o.query(2, 2), Dist::ZERO);
        let zero = TruncatedDijkstraOracle::new(d1(), 0).unwrap();
        assert_eq!(zero.query(1, 1), Dist::ZERO);
    }

    #[test]
    fn pow2_values() {
        assert_eq!(pow2_round(Dist::new(3)), Dist::new(4));
        assert_eq!(pow2_round(Dist::new(4)), Dist::new(4));
        assert_eq!(pow2_round(Dist::ZERO), Dist::ZERO);
        assert_eq!(pow2_round(Dist::INF), Dist::INF);
    }

    #[test]
    fn minplus_matches_dijkstra_on_d1() {
        let mp = MinPlusBatchOracle::new(d1(), 8).unwrap();
        let dj = TruncatedDijkstraOracle::new(d1(), 8).unwrap();
        let all = [0, 1, 2, 3];
        let a = mp.query_all(&all, &all);
        assert_eq!(a, dj.query_all(&all, &all));
        for v in all {
            assert_eq!(a.get(v, v), Dist::ZERO);
        }
        // Nothing reaches vertex 0.
        assert_eq!(a.get(3, 0), Dist::INF);
    }

    #[test]
    fn minplus_refuses_large() {
        let g = DynamicGraph::new(10, Directedness::Directed, WeightDomain::Integer, 1.0).unwrap();
        assert_eq!(
            MinPlusBatchOracle::with_limit(g, 5, 4).unwrap_err(),
            OracleError::TooLarge { n: 10, limit: 4 }
        );
    }

    #[test]
    fn minplus_sees_updates() {
        let mut mp = MinPlusBatchOracle::new(d1(), 8).unwrap();
        assert_eq!(mp.query(0, 3), Dist::new(4));
        mp.update(1, 2, None);
        assert_eq!(mp.query(0, 3), Dist::new(5));
    }

    #[test]
    fn slack_inflates() {
        let o = SlackApproxOracle::new(d1(), 8, 0.5).unwrap();
        assert_eq!(o.query(0, 3), Dist::new(6));
        assert_eq!(o.query(0, 1), Dist::new(1));
    }

    #[test]
    fn rejects_real_graphs() {
        let g = DynamicGraph::new(3, Directedness::Directed, WeightDomain::Real, 4.0).unwrap();
        assert_eq!(TruncatedDijkstraOracle::new(g, 4).unwrap_err(), OracleError::NotInteger);
    }

    #[test]
    fn dist_arithmetic() {
        assert_eq!(Dist::new(3).plus(4), Dist::new(7));
        assert_eq!(Dist::INF.plus(1), Dist::INF);
        assert!(Dist::new(5) < Dist::INF);
        assert_eq!(Dist::INF.to_string(), "inf");
    }
}
