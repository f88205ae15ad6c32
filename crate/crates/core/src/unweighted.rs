//! Deterministic path reporting on unweighted undirected graphs.
//!
//! A `(1+ε, 4)`-emulator `H` is rebuilt from scratch after each update.
//! Dijkstra on `H` plus replacement of non-`G` edges by exact short paths
//! gives an additive-4 tree; short distances are handled exactly, either by
//! a descending-distance scan (single pair) or by the vertex-copy
//! predecessor search (whole tree).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use thiserror::Error;

use crate::graph::{Directedness, DynamicGraph, GraphError};

/// Distance of a vertex a search did not reach.
pub const UNREACHED: usize = usize::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum UnweightedError {
    #[error("unweighted routines need an undirected graph")]
    Directed,
    #[error("edge ({0}, {1}) has length {2}, expected 1")]
    NotUnit(usize, usize, f64),
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("block count must lie in 1..={n}, got {p}")]
    BadBlockCount { p: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_unweighted(g: &DynamicGraph) -> Result<(), UnweightedError> {
    if g.directedness() != Directedness::Undirected {
        return Err(UnweightedError::Directed);
    }
    if let Some((u, v, w)) = g.edges().find(|&(_, _, w)| w != 1.0) {
        return Err(UnweightedError::NotUnit(u, v, w));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<(), UnweightedError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(UnweightedError::BadEpsilon(epsilon))
    }
}

/// BFS distances from `s`, stopping after `depth` layers when given.
pub fn bfs(g: &DynamicGraph, s: usize, depth: Option<usize>) -> Vec<usize> {
    let mut dist = vec![UNREACHED; g.vertex_count()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        if depth.is_some_and(|d| dist[u] >= d) {
            continue;
        }
        for &(v, _) in g.out_neighbors(u) {
            if dist[v] == UNREACHED {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn bfs_lists(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![UNREACHED; adj.len()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == UNREACHED {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Walks from `t` back to the BFS root of `dist`, each step scanning the
/// next lower distance layer for a `G`-neighbor of the current vertex.
/// Returns the path root..t, or `None` when `t` is unreached.
pub fn descend(g: &DynamicGraph, dist: &[usize], t: usize) -> Option<Vec<usize>> {
    let d = dist[t];
    if d == UNREACHED {
        return None;
    }
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); d];
    for (v, &dv) in dist.iter().enumerate() {
        if dv < d {
            layers[dv].push(v);
        }
    }
    let mut path = vec![t];
    let mut current = t;
    for level in (0..d).rev() {
        current = *layers[level].iter().find(|&&w| g.has_edge(w, current))?;
        path.push(current);
    }
    path.reverse();
    Some(path)
}

/// `√(n ln n)`, the high-degree cut-off of the cover set.
pub fn cover_threshold(n: usize) -> f64 {
    let n = n as f64;
    (n * n.ln()).sqrt()
}

/// `√n`, the degree cut-off of emulator rule (a).
pub fn sparse_threshold(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// Greedy dominating set for the vertices of degree above `√(n ln n)`.
pub fn build_cover_set(g: &DynamicGraph) -> Vec<usize> {
    build_cover_set_with(g, cover_threshold(g.vertex_count()))
}

/// Greedy dominating set for the vertices of degree above `threshold`:
/// repeatedly takes the vertex with the most undominated high-degree
/// neighbors, smallest id first on ties.
pub fn build_cover_set_with(g: &DynamicGraph, threshold: f64) -> Vec<usize> {
    let n = g.vertex_count();
    let mut pending: Vec<bool> = (0..n).map(|v| g.out_degree(v) as f64 > threshold).collect();
    let mut left = pending.iter().filter(|&&p| p).count();
    let mut cover = Vec::new();
    while left > 0 {
        let (best, gain) = (0..n)
            .map(|u| {
                let gain = g.out_neighbors(u).iter().filter(|&&(v, _)| pending[v]).count();
                (u, gain)
            })
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        debug_assert!(gain > 0);
        for &(v, _) in g.out_neighbors(best) {
            if pending[v] {
                pending[v] = false;
                left -= 1;
            }
        }
        cover.push(best);
    }
    cover.sort_unstable();
    cover
}

#[derive(Debug, Clone, PartialEq)]
pub struct Emulator {
    epsilon: f64,
    radius: usize,
    cover: Vec<usize>,
    cover_index: Vec<Option<usize>>,
    edges: BTreeMap<(usize, usize), usize>,
    adj: Vec<Vec<(usize, usize)>>,
    dist_s: Vec<Vec<usize>>,
}

impl Emulator {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `⌈4/ε⌉ + 2`.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn cover(&self) -> &[usize] {
        &self.cover
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Emulator edges `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    /// Radius-bounded BFS row of a cover vertex.
    pub fn cover_row(&self, s: usize) -> Option<&[usize]> {
        self.cover_index[s].map(|i| self.dist_s[i].as_slice())
    }

    /// Dijkstra on `H` from `s`; parents break ties toward smaller ids.
    pub fn shortest_paths(&self, s: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let n = self.adj.len();
        let mut dist = vec![UNREACHED; n];
        let mut parent = vec![None; n];
        let mut heap = BinaryHeap::from([Reverse((0usize, s))]);
        dist[s] = 0;
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] || (nd == dist[v] && parent[v].is_some_and(|p| u < p)) {
                    if nd < dist[v] {
                        heap.push(Reverse((nd, v)));
                    }
                    dist[v] = nd;
                    parent[v] = Some(u);
                }
            }
        }
        (dist, parent)
    }
}

/// Builds the emulator over the cover set `cover`.
///
/// Edges are (a) every `G` edge with an endpoint of degree at most `√n`,
/// (a′) one `G` edge from each vertex of degree above `√n` to its smallest
/// neighbor in `cover`, and (b) `{u, v} ⊆ cover` with weight
/// `dist_G(u, v)` whenever that is at most `⌈4/ε⌉ + 2`.
pub fn build_emulator(g: &DynamicGraph, cover: &[usize], epsilon: f64) -> Result<Emulator, UnweightedError> {
    check_unweighted(g)?;
    check_epsilon(epsilon)?;
    let n = g.vertex_count();
    let radius = (4.0 / epsilon).ceil() as usize + 2;
    let sparse = sparse_threshold(n);
    let mut cover_index = vec![None; n];
    let mut cover: Vec<usize> = cover.to_vec();
    cover.sort_unstable();
    cover.dedup();
    for (i, &c) in cover.iter().enumerate() {
        cover_index[c] = Some(i);
    }

    let mut edges = BTreeMap::new();
    for (u, v, _) in g.edges() {
        if (g.out_degree(u).min(g.out_degree(v)) as f64) <= sparse {
            edges.insert((u, v), 1);
        }
    }
    for v in 0..n {
        if g.out_degree(v) as f64 > sparse && cover_index[v].is_none() {
            if let Some(&(c, _)) = g
                .out_neighbors(v)
                .iter()
                .filter(|(c, _)| cover_index[*c].is_some())
                .min_by_key(|(c, _)| *c)
            {
                edges.insert((v.min(c), v.max(c)), 1);
            }
        }
    }
    let dist_s: Vec<Vec<usize>> = cover.iter().map(|&c| bfs(g, c, Some(radius))).collect();
    for (i, &u) in cover.iter().enumerate() {
        for &v in &cover[i + 1..] {
            let d = dist_s[i][v];
            if d <= radius {
                edges.insert((u, v), d);
            }
        }
    }

    let mut adj = vec![Vec::new(); n];
    for (&(u, v), &w) in &edges {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(Emulator {
        epsilon,
        radius,
        cover,
        cover_index,
        edges,
        adj,
        dist_s,
    })
}

/// Cover set and emulator for `g`. The cover dominates every vertex of
/// degree above `√n`, which also dominates those above `√(n ln n)`.
pub fn emulator_for(g: &DynamicGraph, epsilon: f64) -> Result<Emulator, UnweightedError> {
    check_unweighted(g)?;
    let cover = build_cover_set_with(g, sparse_threshold(g.vertex_count()));
    build_emulator(g, &cover, epsilon)
}

/// A rooted spanning tree of the reachable part of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    /// Tree depth, [`UNREACHED`] outside the tree.
    pub depth: Vec<usize>,
}

impl SpTree {
    /// BFS tree over the undirected edge multiset `edges`.
    pub fn from_edges(n: usize, root: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let mut depth = vec![UNREACHED; n];
        let mut parent = vec![None; n];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if depth[v] == UNREACHED {
                    depth[v] = depth[u] + 1;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        Self { root, parent, depth }
    }

    /// Tree path root..v.
    pub fn path_to(&self, v: usize) -> Option<Vec<usize>> {
        if self.depth[v] == UNREACHED {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    /// Whether every tree edge is an edge of `g`.
    pub fn is_subgraph_of(&self, g: &DynamicGraph) -> bool {
        self.parent
            .iter()
            .enumerate()
            .all(|(v, p)| p.map_or(true, |p| g.has_edge(p, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveTree {
    pub tree: SpTree,
    /// Emulator edges of the Dijkstra tree that are not `G` edges.
    pub replaced: usize,
}

/// Tree with `dist_T(s, v) ≤ (1+ε)·dist_G(s, v) + 4`.
pub fn sssp_additive4(g: &DynamicGraph, em: &Emulator, s: usize) -> AdditiveTree {
    let n = g.vertex_count();
    let (_, parent) = em.shortest_paths(s);
    let mut edges = Vec::new();
    let mut replaced = 0;
    for v in 0..n {
        let Some(u) = parent[v] else { continue };
        if g.has_edge(u, v) {
            edges.push((u, v));
            continue;
        }
        replaced += 1;
        let row = em
            .cover_row(u)
            .expect("non-G emulator edges join cover vertices");
        let path = descend(g, row, v).expect("emulator edge weight is a G distance");
        edges.extend(path.windows(2).map(|w| (w[0], w[1])));
    }
    AdditiveTree {
        tree: SpTree::from_edges(n, s, &edges),
        replaced,
    }
}

/// An `s → t` path of length at most `(1+2ε)·dist_G(s, t)`, exact when
/// `dist_G(s, t) < 4/ε`. `None` when `t` is unreachable.
pub fn st_path_unweighted(
    g: &DynamicGraph,
    s: usize,
    t: usize,
    epsilon: f64,
) -> Result<Option<Vec<usize>>, UnweightedError> {
    check_unweighted(g)?;
    check_epsilon(epsilon)?;
    if s == t {
        return Ok(Some(vec![s]));
    }
    if let Some(path) = short_exact_path(g, s, t, epsilon) {
        return Ok(Some(path));
    }
    let em = emulator_for(g, epsilon)?;
    Ok(st_path_with(g, &em, s, t))
}

fn short_exact_path(g: &DynamicGraph, s: usize, t: usize, epsilon: f64) -> Option<Vec<usize>> {
    let limit = 4.0 / epsilon;
    let dist = bfs(g, s, Some(limit.ceil() as usize));
    if dist[t] != UNREACHED && (dist[t] as f64) < limit {
        descend(g, &dist, t)
    } else {
        None
    }
}

/// Same as [`st_path_unweighted`] over a prebuilt emulator, at its `ε`.
pub fn st_path_with(g: &DynamicGraph, em: &Emulator, s: usize, t: usize) -> Option<Vec<usize>> {
    if s == t {
        return Some(vec![s]);
    }
    if let Some(path) = short_exact_path(g, s, t, em.epsilon()) {
        return Some(path);
    }
    sssp_additive4(g, em, s).tree.path_to(t)
}

/// Copy graph `G_ℓ` on `3n` vertices: `v` is `v`, `v′` is `n + v` and
/// `v″` is `2n + v`. For each `j` in block `ℓ` it adds `{v_i, v_j′}` and
/// `{v_j′, v_k″}` for all neighbors `v_i`, `v_k` of `v_j`.
pub fn copy_graph(g: &DynamicGraph, p: usize, block: usize) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut adj = vec![Vec::new(); 3 * n];
    for (u, v, _) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    for j in block_range(n, p, block) {
        for &(i, _) in g.out_neighbors(j) {
            adj[i].push(n + j);
            adj[n + j].push(i);
            adj[n + j].push(2 * n + i);
            adj[2 * n + i].push(n + j);
        }
    }
    adj
}

/// Half-open block `[ℓn/p, (ℓ+1)n/p)`.
pub fn block_range(n: usize, p: usize, block: usize) -> std::ops::Range<usize> {
    block * n / p..(block + 1) * n / p
}

/// Default block count `⌈√n⌉`.
pub fn default_blocks(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, n)
}

/// Exact BFS tree truncated at depth `depth`, built by predecessor search
/// over `p` copy graphs.
pub fn truncated_tree_edges(g: &DynamicGraph, s: usize, depth: usize, p: usize) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    let dist = bfs(g, s, None);
    let copies: Vec<Vec<usize>> = (0..p).map(|l| bfs_lists(&copy_graph(g, p, l), s)).collect();
    let mut edges = Vec::new();
    for t in 0..n {
        let d = dist[t];
        if t == s || d == UNREACHED || d > depth {
            continue;
        }
        if d == 1 {
            edges.push((s, t));
            continue;
        }
        let Some(l) = (0..p).find(|&l| copies[l][2 * n + t] == d) else {
            continue;
        };
        if let Some(j) = block_range(n, p, l).find(|&j| dist[j] == d - 1 && g.has_edge(j, t)) {
            edges.push((j, t));
        }
    }
    edges
}

/// Tree with `dist_T(s, v) ≤ (1+ε)·dist_G(s, v)` for every `v`.
pub fn sssp_tree_unweighted(
    g: &DynamicGraph,
    s: usize,
    epsilon: f64,
    p: usize,
) -> Result<SpTree, UnweightedError> {
    check_epsilon(epsilon)?;
    let em = emulator_for(g, epsilon / 2.0)?;
    sssp_tree_with(g, &em, s, p)
}

/// Same as [`sssp_tree_unweighted`] over an emulator built at `ε/2`; the
/// guarantee is `1 + 2·em.epsilon()`.
pub fn sssp_tree_with(g: &DynamicGraph, em: &Emulator, s: usize, p: usize) -> Result<SpTree, UnweightedError> {
    let n = g.vertex_count();
    if p == 0 || p > n {
        return Err(UnweightedError::BadBlockCount { p, n });
    }
    let depth = (4.0 / em.epsilon()).ceil() as usize;
    let mut edges = truncated_tree_edges(g, s, depth, p);
    let far = sssp_additive4(g, em, s).tree;
    edges.extend(far.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (p, v))));
    Ok(SpTree::from_edges(n, s, &edges))
}

/// Dynamic wrapper: the emulator is rebuilt after each update at `ε/2`, so
/// both path and tree queries are `(1+ε)`-approximate.
#[derive(Debug, Clone)]
pub struct UnweightedEngine {
    graph: DynamicGraph,
    epsilon: f64,
    blocks: usize,
    emulator: Emulator,
}

impl UnweightedEngine {
    pub fn new(graph: DynamicGraph, epsilon: f64) -> Result<Self, UnweightedError> {
        check_epsilon(epsilon)?;
        let emulator = emulator_for(&graph, epsilon / 2.0)?;
        let blocks = default_blocks(graph.vertex_count());
        Ok(Self {
            graph,
            epsilon,
            blocks,
            emulator,
        })
    }

    /// Inserts (`c = 1`) or deletes (`c = ∞`) the edge `{u, v}`.
    pub fn update(&mut self, u: usize, v: usize, c: f64) -> Result<(), UnweightedError> {
        if c != 1.0 && c != f64::INFINITY {
            return Err(UnweightedError::NotUnit(u, v, c));
        }
        self.graph.set_edge(u, v, c)?;
        self.emulator = emulator_for(&self.graph, self.epsilon / 2.0)?;
        Ok(())
    }

    pub fn query_path(&self, s: usize, t: usize) -> Result<Option<Vec<usize>>, UnweightedError> {
        self.graph.check_vertex(s)?;
        self.graph.check_vertex(t)?;
        Ok(st_path_with(&self.graph, &self.emulator, s, t))
    }

    pub fn query_tree(&self, s: usize) -> Result<SpTree, UnweightedError> {
        self.graph.check_vertex(s)?;
        sssp_tree_with(&self.graph, &self.emulator, s, self.blocks)
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn emulator(&self) -> &Emulator {
        &self.emulator
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}
