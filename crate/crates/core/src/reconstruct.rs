//! Segment reconstruction: plausible-set filtering and the two
//! `ShortestSubpath` procedures that rebuild an exact shortest path inside
//! the rounded copy that well-approximates a hub edge, using only oracle
//! answers and adjacency lookups.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::DynamicGraph;
use crate::oracle::{Dist, DistanceOracle};
use crate::overlay::HubPath;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReconstructError {
    #[error("segment ({from}, {to}): {reason}")]
    Failure { from: usize, to: usize, reason: String },
    #[error("no cached 2-approximate row for vertex {vertex} in copy {copy}")]
    MissingRow { vertex: usize, copy: usize },
}

fn failure(from: usize, to: usize, reason: impl Into<String>) -> ReconstructError {
    ReconstructError::Failure {
        from,
        to,
        reason: reason.into(),
    }
}

/// Integer length of `(u, v)` in a rounded copy, `None` for a non-edge.
fn int_len(g: &DynamicGraph, u: usize, v: usize) -> Option<u64> {
    g.length(u, v).map(|w| w as u64)
}

/// Source of cached 2-approximate distance rows, one set per rounded copy.
pub trait RowLookup {
    /// Estimates of `dist(source, ·)` in copy `copy`.
    fn from_row(&self, copy: usize, source: usize) -> Option<&[Dist]>;
    /// Estimates of `dist(·, target)` in copy `copy`.
    fn to_row(&self, copy: usize, target: usize) -> Option<&[Dist]>;
}

/// Per-copy row storage.
#[derive(Debug, Clone, Default)]
pub struct RowCache {
    from: Vec<HashMap<usize, Vec<Dist>>>,
    to: Vec<HashMap<usize, Vec<Dist>>>,
}

impl RowCache {
    pub fn new(copies: usize) -> Self {
        Self {
            from: vec![HashMap::new(); copies],
            to: vec![HashMap::new(); copies],
        }
    }

    pub fn insert_from(&mut self, copy: usize, source: usize, row: Vec<Dist>) {
        self.from[copy].insert(source, row);
    }

    pub fn insert_to(&mut self, copy: usize, target: usize, row: Vec<Dist>) {
        self.to[copy].insert(target, row);
    }

    /// Total number of cached cells.
    pub fn cell_count(&self) -> usize {
        self.from
            .iter()
            .chain(self.to.iter())
            .flat_map(|m| m.values())
            .map(Vec::len)
            .sum()
    }
}

impl RowLookup for RowCache {
    fn from_row(&self, copy: usize, source: usize) -> Option<&[Dist]> {
        self.from.get(copy)?.get(&source).map(Vec::as_slice)
    }

    fn to_row(&self, copy: usize, target: usize) -> Option<&[Dist]> {
        self.to.get(copy)?.get(&target).map(Vec::as_slice)
    }
}

/// Query-time rows layered over update-time rows.
pub struct LayeredRows<'a> {
    pub query: &'a RowCache,
    pub update: &'a RowCache,
}

impl RowLookup for LayeredRows<'_> {
    fn from_row(&self, copy: usize, source: usize) -> Option<&[Dist]> {
        self.query
            .from_row(copy, source)
            .or_else(|| self.update.from_row(copy, source))
    }

    fn to_row(&self, copy: usize, target: usize) -> Option<&[Dist]> {
        self.query
            .to_row(copy, target)
            .or_else(|| self.update.to_row(copy, target))
    }
}

/// Vertices that may lie on a shortest path of one hub edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlausibleSet {
    pub segment: (usize, usize),
    pub copy: usize,
    /// Sorted ascending.
    pub members: Vec<usize>,
    pub baseline: Dist,
}

impl PlausibleSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Builds one plausible set per hub edge from cached 2-approximate rows:
/// `v` is kept when both `Õ(h_i, v)` and `Õ(v, h_{i+1})` are at most twice
/// the exact bounded distance `O(h_i, h_{i+1})` in the edge's copy.
/// Returns the sets and the number of exact-oracle calls made.
pub fn build_plausible_sets(
    hubs: &HubPath,
    rows: &impl RowLookup,
    exact: &[Box<dyn DistanceOracle>],
) -> Result<(Vec<PlausibleSet>, usize), ReconstructError> {
    let mut sets = Vec::with_capacity(hubs.segment_count());
    let mut calls = 0;
    for i in 0..hubs.segment_count() {
        let (a, b) = hubs.segment(i);
        let x = hubs.copies[i];
        let baseline = exact[x].query(a, b);
        calls += 1;
        let from = rows
            .from_row(x, a)
            .ok_or(ReconstructError::MissingRow { vertex: a, copy: x })?;
        let to = rows
            .to_row(x, b)
            .ok_or(ReconstructError::MissingRow { vertex: b, copy: x })?;
        let members = match baseline.finite() {
            Some(base) => {
                let limit = 2 * base;
                (0..from.len())
                    .filter(|&v| {
                        from[v].finite().is_some_and(|d| d <= limit)
                            && to[v].finite().is_some_and(|d| d <= limit)
                    })
                    .collect()
            }
            None => Vec::new(),
        };
        sets.push(PlausibleSet {
            segment: (a, b),
            copy: x,
            members,
            baseline,
        });
    }
    Ok((sets, calls))
}

/// A reconstructed path inside one rounded copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subpath {
    pub vertices: Vec<usize>,
    /// Length in the rounded copy.
    pub length: u64,
    pub oracle_calls: usize,
}

/// Directed `ShortestSubpath`: scan the plausible set in ascending order of
/// exact distance from `h_i` (ties by id) and append `v` whenever
/// `len(v_last, v) + O(v, h_{i+1}) = O(v_last, h_{i+1})`.
pub fn shortest_subpath_directed(
    gx: &DynamicGraph,
    segment: (usize, usize),
    plausible: &[usize],
    oracle: &dyn DistanceOracle,
) -> Result<Subpath, ReconstructError> {
    let (from, to) = segment;
    if from == to {
        return Ok(Subpath {
            vertices: vec![from],
            length: 0,
            oracle_calls: 0,
        });
    }
    let mut calls = 0;
    let mut queue: Vec<(Dist, usize)> = plausible
        .iter()
        .map(|&v| {
            calls += 1;
            (oracle.query(from, v), v)
        })
        .collect();
    queue.sort_unstable();

    let mut path = vec![from];
    let mut last = from;
    let mut last_to_target = oracle.query(last, to);
    calls += 1;
    if !last_to_target.is_finite() {
        return Err(failure(from, to, "segment endpoints farther apart than the oracle bound"));
    }
    let mut length = 0u64;
    for &(_, v) in &queue {
        // A non-edge has length ∞, so the check cannot pass.
        let Some(w) = int_len(gx, last, v) else { continue };
        let rest = oracle.query(v, to);
        calls += 1;
        if rest.plus(w) == last_to_target {
            path.push(v);
            length += w;
            last = v;
            last_to_target = rest;
            if last == to {
                break;
            }
        }
    }
    if last != to {
        return Err(failure(
            from,
            to,
            format!("plausible set of {} vertices exhausted at {last}", plausible.len()),
        ));
    }
    Ok(Subpath {
        vertices: path,
        length,
        oracle_calls: calls,
    })
}

/// A reconstructed undirected segment with scan instrumentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedSubpath {
    pub path: Subpath,
    /// `|Q|`: vertices ever inserted into the seen-set.
    pub seen: usize,
    /// Total neighbor iterations across the whole call.
    pub neighbor_iterations: usize,
    /// Largest number of times one vertex was iterated over through edges
    /// of one weight class `[2^ℓ, 2^{ℓ+1})`.
    pub max_touches: u32,
}

/// Weight class `ℓ` with `w ∈ [2^ℓ, 2^{ℓ+1})`.
pub fn weight_class(w: u64) -> u32 {
    63 - w.max(1).leading_zeros()
}

/// Undirected `ShortestSubpath`: walk from `h_i`, scanning neighbors of
/// the current vertex in ascending edge-length order, skipping vertices
/// already seen, and stepping to the first `w` that satisfies
/// `len(v_last, w) + O(w, h_{i+1}) = O(v_last, h_{i+1})`.
pub fn shortest_subpath_undirected(
    gx: &DynamicGraph,
    segment: (usize, usize),
    oracle: &dyn DistanceOracle,
) -> Result<UndirectedSubpath, ReconstructError> {
    let (from, to) = segment;
    let mut touches: HashMap<(usize, u32), u32> = HashMap::new();
    let mut seen = vec![false; gx.vertex_count()];
    let mut seen_count = 0;
    let mut iterations = 0;
    let mut calls = 0;
    let mut path = vec![from];
    let mut length = 0u64;
    let mut last = from;
    let mut last_to_target = Dist::ZERO;
    if from != to {
        last_to_target = oracle.query(from, to);
        calls += 1;
        if !last_to_target.is_finite() {
            return Err(failure(from, to, "segment endpoints farther apart than the oracle bound"));
        }
    }
    while last != to {
        let mut next = None;
        for &(w, len) in gx.out_neighbors(last) {
            let len = len as u64;
            iterations += 1;
            *touches.entry((w, weight_class(len))).or_insert(0) += 1;
            if seen[w] {
                continue;
            }
            seen[w] = true;
            seen_count += 1;
            let rest = oracle.query(w, to);
            calls += 1;
            if rest.plus(len) == last_to_target {
                next = Some((w, len, rest));
                break;
            }
        }
        let Some((w, len, rest)) = next else {
            return Err(failure(from, to, format!("no admissible neighbor of {last}")));
        };
        path.push(w);
        length += len;
        last = w;
        last_to_target = rest;
    }
    Ok(UndirectedSubpath {
        path: Subpath {
            vertices: path,
            length,
            oracle_calls: calls,
        },
        seen: seen_count,
        neighbor_iterations: iterations,
        max_touches: touches.values().copied().max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Directedness, WeightDomain};
    use crate::oracle::{Pow2ApproxOracle, TruncatedDijkstraOracle};

    fn d1() -> DynamicGraph {
        let mut g = DynamicGraph::new(4, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        for (u, v, w) in [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 4.0), (1, 3, 4.0)] {
            g.set_edge(u, v, w).unwrap();
        }
        g
    }

    fn undirected(n: usize, edges: &[(usize, usize, f64)]) -> DynamicGraph {
        let mut g = DynamicGraph::new(n, Directedness::Undirected, WeightDomain::Integer, 8.0).unwrap();
        for &(u, v, w) in edges {
            g.set_edge(u, v, w).unwrap();
        }
        g
    }

    fn hub_path(hubs: Vec<usize>, lens: Vec<f64>) -> HubPath {
        let copies = vec![0; lens.len()];
        let categories = lens.iter().map(|&l| crate::overlay::weight_category(l)).collect();
        HubPath {
            total: lens.iter().sum(),
            hubs,
            edge_lengths: lens,
            categories,
            copies,
        }
    }

    fn rows_for(g: &DynamicGraph, oracle: &dyn DistanceOracle, vertices: &[usize]) -> RowCache {
        let all: Vec<usize> = (0..g.vertex_count()).collect();
        let mut rows = RowCache::new(1);
        let from = oracle.query_all(vertices, &all);
        let to = oracle.query_all(&all, vertices);
        for (i, &v) in vertices.iter().enumerate() {
            rows.insert_from(0, v, from.row(i).to_vec());
            rows.insert_to(0, v, to.column(i));
        }
        rows
    }

    #[test]
    fn plausible_on_d1() {
        let g = d1();
        let exact: Vec<Box<dyn DistanceOracle>> =
            vec![Box::new(TruncatedDijkstraOracle::new(g.clone(), 8).unwrap())];
        let rows = rows_for(&g, exact[0].as_ref(), &[0, 3]);
        let (sets, calls) = build_plausible_sets(&hub_path(vec![0, 3], vec![4.0]), &rows, &exact).unwrap();
        assert_eq!(calls, 1);
        assert_eq!(sets[0].members, vec![0, 1, 2, 3]);
        assert_eq!(sets[0].baseline, Dist::new(4));
    }

    #[test]
    fn unreachable_vertices_are_not_plausible() {
        let mut g = d1();
        g.set_edge(3, 0, 4.0).unwrap();
        let mut h = DynamicGraph::new(5, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        for (u, v, w) in g.edges() {
            h.set_edge(u, v, w).unwrap();
        }
        let exact: Vec<Box<dyn DistanceOracle>> =
            vec![Box::new(TruncatedDijkstraOracle::new(h.clone(), 8).unwrap())];
        let rows = rows_for(&h, exact[0].as_ref(), &[0, 3]);
        let (sets, _) = build_plausible_sets(&hub_path(vec![0, 3], vec![4.0]), &rows, &exact).unwrap();
        assert!(!sets[0].members.contains(&4));
    }

    #[test]
    fn pow2_rows_give_supersets() {
        let g = d1();
        let exact: Vec<Box<dyn DistanceOracle>> =
            vec![Box::new(TruncatedDijkstraOracle::new(g.clone(), 8).unwrap())];
        let pow2 = Pow2ApproxOracle::new(g.clone(), 8).unwrap();
        let hp = hub_path(vec![1, 3], vec![3.0]);
        let exact_rows = rows_for(&g, exact[0].as_ref(), &[1, 3]);
        let pow2_rows = rows_for(&g, &pow2, &[1, 3]);
        let (a, _) = build_plausible_sets(&hp, &exact_rows, &exact).unwrap();
        let (b, _) = build_plausible_sets(&hp, &pow2_rows, &exact).unwrap();
        assert!(a[0].members.iter().all(|v| b[0].members.contains(v)));
    }

    #[test]
    fn directed_on_d1() {
        let g = d1();
        let o = TruncatedDijkstraOracle::new(g.clone(), 8).unwrap();
        let sp = shortest_subpath_directed(&g, (0, 3), &[0, 1, 2, 3], &o).unwrap();
        assert_eq!(sp.vertices, vec![0, 1, 2, 3]);
        assert_eq!(sp.length, 4);
        assert!(sp.oracle_calls <= 2 * 4 + 1);
    }

    #[test]
    fn directed_trivial_segments() {
        let g = d1();
        let o = TruncatedDijkstraOracle::new(g.clone(), 8).unwrap();
        let same = shortest_subpath_directed(&g, (2, 2), &[2], &o).unwrap();
        assert_eq!(same.vertices, vec![2]);
        assert_eq!(same.length, 0);
        let one = shortest_subpath_directed(&g, (0, 1), &[0, 1], &o).unwrap();
        assert_eq!(one.vertices, vec![0, 1]);
    }

    #[test]
    fn directed_surfaces_missing_vertices() {
        let g = d1();
        let o = TruncatedDijkstraOracle::new(g.clone(), 8).unwrap();
        // Vertex 2 lies on every shortest 0→3 path; leaving it out must fail loudly.
        let err = shortest_subpath_directed(&g, (0, 3), &[0, 1, 3], &o).unwrap_err();
        assert!(matches!(err, ReconstructError::Failure { from: 0, to: 3, .. }));
    }

    #[test]
    fn undirected_path() {
        let g = undirected(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let o = TruncatedDijkstraOracle::new(g.clone(), 8).unwrap();
        let r = shortest_subpath_undirected(&g, (0, 2), &o).unwrap();
        assert_eq!(r.path.vertices, vec![0, 1, 2]);
        assert_eq!(r.path.length, 2);
    }

    #[test]
    fn undirected_star() {
        // Center 0, leaves 1..=5.
        let edges: Vec<_> = (1..=5).map(|l| (0, l, 1.0)).collect();
        let g = undirected(6, &edges);
        let o = TruncatedDijkstraOracle::new(g.clone(), 8).unwrap();
        let r = shortest_subpath_undirected(&g, (2, 4), &o).unwrap();
        assert_eq!(r.path.vertices, vec![2, 0, 4]);
        // Leaves 1, 2, 3 are seen before 4; 5 is never reached.
        assert_eq!(r.seen, 1 + 4);
        assert!(r.max_touches <= 4);
    }

    #[test]
    fn undirected_single_edge() {
        let g = undirected(2, &[(0, 1, 5.0)]);
        let o = TruncatedDijkstraOracle::new(g.clone(), 8).unwrap();
        let r = shortest_subpath_undirected(&g, (1, 0), &o).unwrap();
        assert_eq!(r.path.vertices, vec![1, 0]);
        assert_eq!(r.path.length, 5);
        assert_eq!(r.neighbor_iterations, 1);
    }

    #[test]
    fn weight_classes() {
        assert_eq!(weight_class(1), 0);
        assert_eq!(weight_class(2), 1);
        assert_eq!(weight_class(3), 1);
        assert_eq!(weight_class(8), 3);
    }
}
