//! Mutable weighted (di)graph with length-sorted adjacency, plus the
//! ground-truth Dijkstra used to referee every other component.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whether edges are ordered pairs or unordered pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directedness {
    Directed,
    Undirected,
}

/// Which edge lengths are legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDomain {
    /// Integers in `[1, W]`.
    Integer,
    /// Reals in `[1, W]`.
    Real,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least one vertex")]
    NoVertices,
    #[error("max weight must be at least 1, got {0}")]
    MaxWeightTooSmall(f64),
    #[error("integer graphs need an integral max weight, got {0}")]
    FractionalMaxWeight(f64),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("length {length} outside the weight domain [1, {max}]")]
    WeightOutOfDomain { length: f64, max: f64 },
    #[error("length {0} is not an integer")]
    FractionalLength(f64),
}

/// A single adjacency entry: neighbor and edge length.
pub type Arc = (usize, f64);

fn arc_order(a: &Arc, b: &Arc) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// The graph under updates. Adjacency lists stay sorted ascending by
/// `(length, neighbor)` at all times; an absent edge has length ∞.
#[derive(Debug, Clone)]
pub struct DynamicGraph {
    n: usize,
    directedness: Directedness,
    domain: WeightDomain,
    max_weight: f64,
    lengths: HashMap<(usize, usize), f64>,
    out_adj: Vec<Vec<Arc>>,
    // Only populated for directed graphs; undirected graphs reuse `out_adj`.
    in_adj: Vec<Vec<Arc>>,
}

impl PartialEq for DynamicGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.directedness == other.directedness
            && self.domain == other.domain
            && self.max_weight == other.max_weight
            && self.out_adj == other.out_adj
            && self.in_adj == other.in_adj
    }
}

impl DynamicGraph {
    pub fn new(
        n: usize,
        directedness: Directedness,
        domain: WeightDomain,
        max_weight: f64,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        if !(max_weight >= 1.0) || !max_weight.is_finite() {
            return Err(GraphError::MaxWeightTooSmall(max_weight));
        }
        if domain == WeightDomain::Integer && max_weight.fract() != 0.0 {
            return Err(GraphError::FractionalMaxWeight(max_weight));
        }
        let in_adj = match directedness {
            Directedness::Directed => vec![Vec::new(); n],
            Directedness::Undirected => Vec::new(),
        };
        Ok(Self {
            n,
            directedness,
            domain,
            max_weight,
            lengths: HashMap::new(),
            out_adj: vec![Vec::new(); n],
            in_adj,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn directedness(&self) -> Directedness {
        self.directedness
    }

    pub fn is_directed(&self) -> bool {
        self.directedness == Directedness::Directed
    }

    pub fn domain(&self) -> WeightDomain {
        self.domain
    }

    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    /// Number of edges (unordered pairs for undirected graphs).
    pub fn edge_count(&self) -> usize {
        match self.directedness {
            Directedness::Directed => self.lengths.len(),
            Directedness::Undirected => self.lengths.len() / 2,
        }
    }

    /// Checks that `length` is legal for this graph; `∞` is always legal.
    pub fn check_length(&self, length: f64) -> Result<(), GraphError> {
        if length == f64::INFINITY {
            return Ok(());
        }
        if !(length >= 1.0 && length <= self.max_weight) {
            return Err(GraphError::WeightOutOfDomain {
                length,
                max: self.max_weight,
            });
        }
        if self.domain == WeightDomain::Integer && length.fract() != 0.0 {
            return Err(GraphError::FractionalLength(length));
        }
        Ok(())
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.n {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Sets the length of `(u, v)`; `f64::INFINITY` deletes the edge.
    /// Returns the previous length, if any.
    pub fn set_edge(&mut self, u: usize, v: usize, length: f64) -> Result<Option<f64>, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.check_length(length)?;
        let previous = self.lengths.get(&(u, v)).copied();
        match self.directedness {
            Directedness::Directed => {
                Self::set_arc(&mut self.out_adj[u], v, previous, length);
                Self::set_arc(&mut self.in_adj[v], u, previous, length);
            }
            Directedness::Undirected => {
                Self::set_arc(&mut self.out_adj[u], v, previous, length);
                Self::set_arc(&mut self.out_adj[v], u, previous, length);
            }
        }
        if length == f64::INFINITY {
            self.lengths.remove(&(u, v));
            if !self.is_directed() {
                self.lengths.remove(&(v, u));
            }
        } else {
            self.lengths.insert((u, v), length);
            if !self.is_directed() {
                self.lengths.insert((v, u), length);
            }
        }
        Ok(previous)
    }

    fn set_arc(list: &mut Vec<Arc>, neighbor: usize, previous: Option<f64>, length: f64) {
        if let Some(old) = previous {
            let pos = list
                .binary_search_by(|a| arc_order(a, &(neighbor, old)))
                .expect("adjacency out of sync with length map");
            list.remove(pos);
        }
        if length != f64::INFINITY {
            let arc = (neighbor, length);
            let pos = list
                .binary_search_by(|a| arc_order(a, &arc))
                .unwrap_or_else(|p| p);
            list.insert(pos, arc);
        }
    }

    /// Length of `(u, v)`, `None` when absent.
    pub fn length(&self, u: usize, v: usize) -> Option<f64> {
        self.lengths.get(&(u, v)).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.lengths.contains_key(&(u, v))
    }

    /// Outgoing neighbors of `u`, sorted ascending by length then id.
    pub fn out_neighbors(&self, u: usize) -> &[Arc] {
        &self.out_adj[u]
    }

    /// Incoming neighbors of `v`, sorted ascending by length then id.
    pub fn in_neighbors(&self, v: usize) -> &[Arc] {
        match self.directedness {
            Directedness::Directed => &self.in_adj[v],
            Directedness::Undirected => &self.out_adj[v],
        }
    }

    /// Neighbors of `v` in the requested direction.
    pub fn neighbors(&self, v: usize, direction: Direction) -> &[Arc] {
        match direction {
            Direction::Forward => self.out_neighbors(v),
            Direction::Backward => self.in_neighbors(v),
        }
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_adj[v].len()
    }

    /// All edges in deterministic order. Undirected edges are listed once with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let directed = self.is_directed();
        self.out_adj.iter().enumerate().flat_map(move |(u, list)| {
            let mut row: Vec<_> = list
                .iter()
                .filter(move |&&(v, _)| directed || u < v)
                .map(move |&(v, w)| (u, v, w))
                .collect();
            row.sort_by_key(|&(_, v, _)| v);
            row
        })
    }

    /// Sum of edge lengths along `path`, or `None` if some hop is not an edge.
    pub fn path_length(&self, path: &[usize]) -> Option<f64> {
        let mut total = 0.0;
        for pair in path.windows(2) {
            total += self.length(pair[0], pair[1])?;
        }
        Some(total)
    }
}

/// Search direction over a directed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Follow out-edges (distances *from* the root).
    Forward,
    /// Follow in-edges (distances *to* the root).
    Backward,
}

/// Output of the ground-truth Dijkstra.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub root: usize,
    pub direction: Direction,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    pub fn distance(&self, v: usize) -> f64 {
        self.dist[v]
    }

    /// Vertex sequence from the root to `t` (forward) or from `t` to the
    /// root (backward); `None` when unreachable.
    pub fn path(&self, t: usize) -> Option<Vec<usize>> {
        if self.dist[t] == f64::INFINITY {
            return None;
        }
        let mut walk = vec![t];
        let mut cur = t;
        while let Some(p) = self.pred[cur] {
            walk.push(p);
            cur = p;
        }
        if self.direction == Direction::Forward {
            walk.reverse();
        }
        Some(walk)
    }
}

#[derive(PartialEq)]
struct HeapKey(f64);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Exact single-source distances and a shortest-path tree. Ties between
/// equal-length predecessors go to the smaller vertex id. With `target`
/// set, the search stops once that vertex is settled.
pub fn dijkstra(g: &DynamicGraph, s: usize, target: Option<usize>) -> ShortestPaths {
    dijkstra_directed(g, s, target, Direction::Forward)
}

/// [`dijkstra`] in either direction.
pub fn dijkstra_directed(
    g: &DynamicGraph,
    root: usize,
    target: Option<usize>,
    direction: Direction,
) -> ShortestPaths {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(Reverse((HeapKey(0.0), root)));
    while let Some(Reverse((HeapKey(d), u))) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if Some(u) == target {
            break;
        }
        for &(v, w) in g.neighbors(u, direction) {
            if settled[v] {
                continue;
            }
            let nd = d + w;
            let better = nd < dist[v] || (nd == dist[v] && pred[v].map_or(true, |p| u < p));
            if better {
                if nd < dist[v] {
                    heap.push(Reverse((HeapKey(nd), v)));
                }
                dist[v] = nd;
                pred[v] = Some(u);
            }
        }
    }
    ShortestPaths {
        root,
        direction,
        dist,
        pred,
    }
}

/// Error raised while reading the line-oriented graph format.
#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Reads the text format: a header `n m directed|undirected int|real W`
/// followed by `m` lines `u v w`. Blank lines and `#` comments are ignored.
pub fn parse_graph(text: &str) -> Result<DynamicGraph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(ParseError::new(
            hline,
            "header must be `n m directed|undirected int|real W`",
        ));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| ParseError::new(hline, format!("bad vertex count `{}`", fields[0])))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| ParseError::new(hline, format!("bad edge count `{}`", fields[1])))?;
    let directedness = match fields[2] {
        "directed" => Directedness::Directed,
        "undirected" => Directedness::Undirected,
        other => return Err(ParseError::new(hline, format!("unknown directedness `{other}`"))),
    };
    let domain = match fields[3] {
        "int" => WeightDomain::Integer,
        "real" => WeightDomain::Real,
        other => return Err(ParseError::new(hline, format!("unknown weight domain `{other}`"))),
    };
    let max_weight: f64 = fields[4]
        .parse()
        .map_err(|_| ParseError::new(hline, format!("bad max weight `{}`", fields[4])))?;
    let mut g = DynamicGraph::new(n, directedness, domain, max_weight)
        .map_err(|e| ParseError::new(hline, e.to_string()))?;

    let mut seen = 0;
    for (lineno, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(ParseError::new(lineno, "edge line must be `u v w`"));
        }
        let u: usize = parts[0]
            .parse()
            .map_err(|_| ParseError::new(lineno, format!("bad vertex `{}`", parts[0])))?;
        let v: usize = parts[1]
            .parse()
            .map_err(|_| ParseError::new(lineno, format!("bad vertex `{}`", parts[1])))?;
        let w: f64 = parts[2]
            .parse()
            .map_err(|_| ParseError::new(lineno, format!("bad weight `{}`", parts[2])))?;
        if !w.is_finite() {
            return Err(ParseError::new(lineno, format!("weight {w} must be finite")));
        }
        g.set_edge(u, v, w)
            .map_err(|e| ParseError::new(lineno, e.to_string()))?;
        seen += 1;
    }
    if seen != m {
        return Err(ParseError::new(
            hline,
            format!("header announces {m} edges, found {seen}"),
        ));
    }
    Ok(g)
}

/// Writes `g` in the format read by [`parse_graph`].
pub fn write_graph(g: &DynamicGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} {} {} {} {}\n",
        g.vertex_count(),
        g.edge_count(),
        match g.directedness() {
            Directedness::Directed => "directed",
            Directedness::Undirected => "undirected",
        },
        match g.domain() {
            WeightDomain::Integer => "int",
            WeightDomain::Real => "real",
        },
        g.max_weight()
    ));
    for (u, v, w) in g.edges() {
        out.push_str(&format!("{u} {v} {w}\n"));
    }
    out
}

impl fmt::Display for Directedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Directedness::Directed => "directed",
            Directedness::Undirected => "undirected",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1() -> DynamicGraph {
        let mut g = DynamicGraph::new(4, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        for (u, v, w) in [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 4.0), (1, 3, 4.0)] {
            g.set_edge(u, v, w).unwrap();
        }
        g
    }

    #[test]
    fn empty_construction() {
        let g = DynamicGraph::new(4, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 0);
        let sp = dijkstra(&g, 0, None);
        assert_eq!(sp.distance(0), 0.0);
        assert!(sp.distance(3).is_infinite());

        let single = DynamicGraph::new(1, Directedness::Undirected, WeightDomain::Real, 10.0).unwrap();
        assert_eq!(dijkstra(&single, 0, None).distance(0), 0.0);

        let tri = DynamicGraph::new(3, Directedness::Undirected, WeightDomain::Integer, 1.0).unwrap();
        assert_eq!(tri.edge_count(), 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            DynamicGraph::new(0, Directedness::Directed, WeightDomain::Integer, 4.0),
            Err(GraphError::NoVertices)
        );
        assert!(matches!(
            DynamicGraph::new(3, Directedness::Directed, WeightDomain::Integer, 0.5),
            Err(GraphError::MaxWeightTooSmall(_))
        ));
    }

    #[test]
    fn insert_keeps_sorted_order() {
        let mut g = DynamicGraph::new(3, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        g.set_edge(0, 2, 4.0).unwrap();
        g.set_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.out_neighbors(0), &[(1, 1.0), (2, 4.0)]);
    }

    #[test]
    fn reweight_resorts() {
        let mut g = DynamicGraph::new(3, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        g.set_edge(0, 1, 1.0).unwrap();
        g.set_edge(0, 2, 2.0).unwrap();
        g.set_edge(0, 1, 3.0).unwrap();
        assert_eq!(g.out_neighbors(0), &[(2, 2.0), (1, 3.0)]);
        assert_eq!(g.in_neighbors(1), &[(0, 3.0)]);
    }

    #[test]
    fn delete_via_infinity() {
        let mut g = DynamicGraph::new(2, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        g.set_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.set_edge(0, 1, f64::INFINITY).unwrap(), Some(1.0));
        assert!(!g.has_edge(0, 1));
        assert!(g.out_neighbors(0).is_empty());
        assert!(dijkstra(&g, 0, None).distance(1).is_infinite());
    }

    #[test]
    fn undirected_is_symmetric() {
        let mut g = DynamicGraph::new(3, Directedness::Undirected, WeightDomain::Real, 8.0).unwrap();
        g.set_edge(2, 0, 2.5).unwrap();
        assert_eq!(g.length(0, 2), Some(2.5));
        assert_eq!(g.length(2, 0), Some(2.5));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 2, 2.5)]);
        g.set_edge(0, 2, f64::INFINITY).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.out_neighbors(2).is_empty());
    }

    #[test]
    fn domain_violations() {
        let mut g = DynamicGraph::new(3, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        assert!(matches!(g.set_edge(0, 1, 0.5), Err(GraphError::WeightOutOfDomain { .. })));
        assert!(matches!(g.set_edge(0, 1, 5.0), Err(GraphError::WeightOutOfDomain { .. })));
        assert!(matches!(g.set_edge(0, 1, 2.5), Err(GraphError::FractionalLength(_))));
        assert_eq!(g.set_edge(1, 1, 2.0), Err(GraphError::SelfLoop(1)));
        assert!(matches!(g.set_edge(0, 7, 2.0), Err(GraphError::VertexOutOfRange { .. })));
        assert!(matches!(g.set_edge(0, 1, f64::NAN), Err(GraphError::WeightOutOfDomain { .. })));
    }

    #[test]
    fn dijkstra_on_d1() {
        let sp = dijkstra(&d1(), 0, None);
        assert_eq!(sp.distance(3), 4.0);
        assert_eq!(sp.path(3).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn dijkstra_unit_path() {
        let mut g = DynamicGraph::new(4, Directedness::Undirected, WeightDomain::Integer, 1.0).unwrap();
        for v in 0..3 {
            g.set_edge(v, v + 1, 1.0).unwrap();
        }
        assert_eq!(dijkstra(&g, 0, Some(3)).distance(3), 3.0);
        let back = dijkstra_directed(&g, 3, None, Direction::Backward);
        assert_eq!(back.path(0).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn backward_search_reports_paths_into_root() {
        let back = dijkstra_directed(&d1(), 3, None, Direction::Backward);
        assert_eq!(back.distance(0), 4.0);
        assert_eq!(back.path(0).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn parse_round_trip() {
        let text = write_graph(&d1());
        let g = parse_graph(&text).unwrap();
        assert_eq!(g, d1());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "3 2 directed int 4\n0 1 2\n1 2 9\n";
        let err = parse_graph(text).unwrap_err();
        assert_eq!(err.line, 3);
        let text = "3 1 sideways int 4\n0 1 2\n";
        assert_eq!(parse_graph(text).unwrap_err().line, 1);
        let text = "3 2 directed int 4\n0 1 2\n";
        assert!(parse_graph(text).is_err());
    }
}
