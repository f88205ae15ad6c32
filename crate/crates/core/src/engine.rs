//! The dynamic path-reporting engine.
//!
//! An update pushes the new edge length into every rounded copy and every
//! oracle, redraws the hub sample, rebuilds `H` and (for directed graphs)
//! refreshes the cached 2-approximate `V_H × V` and `V × V_H` rows. A query
//! attaches the terminals to a private copy of `H`, runs Dijkstra on it,
//! and rebuilds every hub edge as an exact shortest path in its
//! well-approximating copy.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Directedness, DynamicGraph, GraphError};
use crate::oracle::{DistanceOracle, OracleError, OracleKind};
use crate::overlay::{sample_hitting_set, HubPath, Overlay};
use crate::reconstruct::{
    build_plausible_sets, shortest_subpath_directed, shortest_subpath_undirected, LayeredRows,
    PlausibleSet, ReconstructError, RowCache,
};
use crate::rounding::{RoundedFamily, RoundingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Exact paths on integer-weighted digraphs.
    ExactDir,
    /// `(1+ε)`-approximate paths on real-weighted digraphs.
    ApproxDir,
    /// `(1+ε)`-approximate paths on real-weighted undirected graphs.
    ApproxUndir,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::ExactDir => "exact-dir",
            Variant::ApproxDir => "approx-dir",
            Variant::ApproxUndir => "approx-undir",
        }
    }

    pub fn is_directed(self) -> bool {
        !matches!(self, Variant::ApproxUndir)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact-dir" => Ok(Variant::ExactDir),
            "approx-dir" => Ok(Variant::ApproxDir),
            "approx-undir" => Ok(Variant::ApproxUndir),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

/// Oracle implementation per role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleChoice {
    /// Exact oracle used by segment reconstruction.
    pub exact: OracleKind,
    /// 2-approximate oracle behind the plausible-set rows.
    pub two_approx: OracleKind,
    /// `(1+ε)`-approximate oracle behind the weights of `H`.
    pub approx: OracleKind,
}

impl Default for OracleChoice {
    fn default() -> Self {
        Self {
            exact: OracleKind::Dijkstra,
            two_approx: OracleKind::Dijkstra,
            approx: OracleKind::Dijkstra,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub variant: Variant,
    pub epsilon: f64,
    pub hop_exponent: f64,
    pub hitting_constant: f64,
    pub seed: u64,
    pub resample_per_update: bool,
    pub oracles: OracleChoice,
}

impl EngineConfig {
    /// Defaults: `ε = 0` for exact-dir and `0.25` otherwise, `a = 0.5`,
    /// `c_hs = 2`, seed 0, resampling on, Dijkstra oracles everywhere.
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            epsilon: if variant == Variant::ExactDir { 0.0 } else { 0.25 },
            hop_exponent: 0.5,
            hitting_constant: 2.0,
            seed: 0,
            resample_per_update: true,
            oracles: OracleChoice::default(),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_oracles(mut self, oracles: OracleChoice) -> Self {
        self.oracles = oracles;
        self
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("reconstruction failure in copy {copy}: {source}")]
    Reconstruct {
        copy: usize,
        #[source]
        source: ReconstructError,
    },
    #[error("reconstructed walk uses a non-edge of G: {0:?}")]
    InvalidWalk(Vec<usize>),
}

/// Per-segment record of a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub from: usize,
    pub to: usize,
    /// Index of the well-approximating copy.
    pub copy: usize,
    pub h_length: f64,
    pub category: i32,
    /// `|P_i|` (directed) or `|Q|` (undirected).
    pub plausible: usize,
    pub oracle_calls: usize,
    /// Length of the rebuilt segment inside its copy.
    pub copy_length: u64,
    /// `(B_x/A) · copy_length`.
    pub lifted_length: f64,
    pub neighbor_iterations: usize,
    pub max_touches: u32,
}

/// A reported path with provenance and counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub source: usize,
    pub target: usize,
    /// Empty when `t` is unreachable from `s`.
    pub vertices: Vec<usize>,
    /// Sum of `G` edge lengths along `vertices`; `∞` when disconnected.
    pub length: f64,
    pub hubs: Vec<usize>,
    pub hub_length: f64,
    pub segments: Vec<SegmentRecord>,
    /// `Σ |P_i|`.
    pub total_plausible: usize,
    pub oracle_calls: usize,
    pub query_cells: usize,
    /// Largest ordinal distance between two same-category segments that
    /// share a plausible vertex (directed variants).
    pub max_category_gap: usize,
}

impl PathResult {
    fn trivial(s: usize) -> Self {
        Self {
            source: s,
            target: s,
            vertices: vec![s],
            length: 0.0,
            hubs: vec![s],
            hub_length: 0.0,
            segments: Vec::new(),
            total_plausible: 0,
            oracle_calls: 0,
            query_cells: 0,
            max_category_gap: 0,
        }
    }

    fn disconnected(s: usize, t: usize, query_cells: usize) -> Self {
        Self {
            source: s,
            target: t,
            vertices: Vec::new(),
            length: f64::INFINITY,
            hubs: Vec::new(),
            hub_length: f64::INFINITY,
            segments: Vec::new(),
            total_plausible: 0,
            oracle_calls: 0,
            query_cells,
            max_category_gap: 0,
        }
    }

    pub fn is_connected(&self) -> bool {
        !self.vertices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub oracle_updates: usize,
    pub query_all_cells: usize,
    pub hub_count: usize,
}

pub struct Engine {
    cfg: EngineConfig,
    graph: DynamicGraph,
    family: RoundedFamily,
    bound: u64,
    exact: Vec<Box<dyn DistanceOracle>>,
    two_approx: Vec<Box<dyn DistanceOracle>>,
    approx: Vec<Box<dyn DistanceOracle>>,
    overlay: Overlay,
    rows: RowCache,
    rng: ChaCha8Rng,
    updates: u64,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("cfg", &self.cfg)
            .field("n", &self.graph.vertex_count())
            .field("copies", &self.family.copies().len())
            .field("bound", &self.bound)
            .field("updates", &self.updates)
            .finish()
    }
}

impl Engine {
    pub fn preprocess(graph: DynamicGraph, cfg: EngineConfig) -> Result<Self, EngineError> {
        let wants = if cfg.variant.is_directed() {
            Directedness::Directed
        } else {
            Directedness::Undirected
        };
        if graph.directedness() != wants {
            return Err(EngineError::Config(format!(
                "{} needs a {wants} graph, got a {} one",
                cfg.variant,
                graph.directedness()
            )));
        }
        match cfg.variant {
            Variant::ExactDir if cfg.epsilon != 0.0 => {
                return Err(EngineError::Config(format!(
                    "exact-dir runs with epsilon = 0, got {}",
                    cfg.epsilon
                )))
            }
            Variant::ApproxDir | Variant::ApproxUndir if !(cfg.epsilon > 0.0) => {
                return Err(EngineError::Config(format!(
                    "{} needs epsilon > 0, got {}",
                    cfg.variant, cfg.epsilon
                )))
            }
            _ => {}
        }
        if !(cfg.hitting_constant > 0.0) {
            return Err(EngineError::Config("hitting-set constant must be positive".into()));
        }
        let family = RoundedFamily::build(&graph, cfg.epsilon, cfg.hop_exponent)?;
        let bound = if family.is_exact() {
            family.scale_a()
        } else {
            2 * family.scale_a()
        };
        let build = |kind: OracleKind| -> Result<Vec<Box<dyn DistanceOracle>>, OracleError> {
            family
                .copies()
                .iter()
                .map(|c| kind.build(c.graph.clone(), bound, cfg.epsilon))
                .collect()
        };
        let exact = build(cfg.oracles.exact)?;
        let approx = build(cfg.oracles.approx)?;
        let two_approx = if cfg.variant.is_directed() {
            build(cfg.oracles.two_approx)?
        } else {
            Vec::new()
        };
        for (role, oracles, limit) in [
            ("exact", &exact, 1.0),
            ("2-approximate", &two_approx, 2.0),
            ("(1+ε)-approximate", &approx, 1.0 + cfg.epsilon),
        ] {
            if let Some(o) = oracles.iter().find(|o| o.accuracy().factor() > limit) {
                return Err(EngineError::Config(format!(
                    "the {role} role needs factor at most {limit}, oracle has {}",
                    o.accuracy().factor()
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = graph.vertex_count();
        let hubs = sample_hitting_set(n, cfg.hop_exponent, cfg.hitting_constant, &mut rng);
        let (overlay, _) = Overlay::build(n, hubs, &family, &approx, cfg.seed);
        let mut engine = Self {
            cfg,
            graph,
            family,
            bound,
            exact,
            two_approx,
            approx,
            overlay,
            rows: RowCache::default(),
            rng,
            updates: 0,
        };
        engine.refresh_rows();
        Ok(engine)
    }

    fn refresh_rows(&mut self) -> usize {
        if !self.cfg.variant.is_directed() {
            return 0;
        }
        let all: Vec<usize> = (0..self.graph.vertex_count()).collect();
        let hubs = self.overlay.vertices().to_vec();
        let mut rows = RowCache::new(self.two_approx.len());
        let mut cells = 0;
        for (x, oracle) in self.two_approx.iter().enumerate() {
            let from = oracle.query_all(&hubs, &all);
            let to = oracle.query_all(&all, &hubs);
            cells += from.cell_count() + to.cell_count();
            for (i, &h) in hubs.iter().enumerate() {
                rows.insert_from(x, h, from.row(i).to_vec());
                rows.insert_to(x, h, to.column(i));
            }
        }
        self.rows = rows;
        cells
    }

    /// Sets the length of `(u, v)` to `c` (`f64::INFINITY` deletes).
    pub fn update(&mut self, u: usize, v: usize, c: f64) -> Result<UpdateStats, EngineError> {
        self.graph.set_edge(u, v, c)?;
        let per_copy = self.family.propagate_update(u, v, c)?;
        let mut stats = UpdateStats::default();
        for (x, cx) in per_copy {
            for role in [&mut self.two_approx, &mut self.approx, &mut self.exact] {
                if let Some(oracle) = role.get_mut(x) {
                    oracle.update(u, v, cx);
                    stats.oracle_updates += 1;
                }
            }
        }
        let n = self.graph.vertex_count();
        let hubs = if self.cfg.resample_per_update {
            sample_hitting_set(n, self.cfg.hop_exponent, self.cfg.hitting_constant, &mut self.rng)
        } else {
            self.overlay.hubs().to_vec()
        };
        self.updates += 1;
        let (overlay, cells) = Overlay::build(n, hubs, &self.family, &self.approx, self.cfg.seed);
        self.overlay = overlay;
        stats.query_all_cells = cells + self.refresh_rows();
        stats.hub_count = self.overlay.hubs().len();
        Ok(stats)
    }

    /// Reports an `s → t` path.
    pub fn query(&self, s: usize, t: usize) -> Result<PathResult, EngineError> {
        self.graph.check_vertex(s)?;
        self.graph.check_vertex(t)?;
        if s == t {
            return Ok(PathResult::trivial(s));
        }
        let (h, mut cells) = self.overlay.attach_terminals(&[s, t], &self.family, &self.approx);
        let Some(hub_path) = h.hub_sequence(s, t) else {
            return Ok(PathResult::disconnected(s, t, cells));
        };

        let mut segments = Vec::with_capacity(hub_path.segment_count());
        let mut pieces: Vec<Vec<usize>> = Vec::with_capacity(hub_path.segment_count());
        let mut oracle_calls = 0;
        let mut max_category_gap = 0;

        if self.cfg.variant.is_directed() {
            let (query_rows, row_cells) = self.terminal_rows(s, t);
            cells += row_cells;
            let layered = LayeredRows {
                query: &query_rows,
                update: &self.rows,
            };
            let (sets, calls) = build_plausible_sets(&hub_path, &layered, &self.exact)
                .map_err(|e| EngineError::Reconstruct { copy: 0, source: e })?;
            oracle_calls += calls;
            max_category_gap = category_gap(&hub_path, &sets);
            for (i, set) in sets.iter().enumerate() {
                let x = set.copy;
                let gx = &self.family.copy(x).graph;
                let sub = shortest_subpath_directed(gx, set.segment, &set.members, self.exact[x].as_ref())
                    .map_err(|e| EngineError::Reconstruct { copy: x, source: e })?;
                oracle_calls += sub.oracle_calls;
                segments.push(self.record(&hub_path, i, set.len(), sub.oracle_calls, sub.length, 0, 0));
                pieces.push(sub.vertices);
            }
        } else {
            for i in 0..hub_path.segment_count() {
                let x = hub_path.copies[i];
                let gx = &self.family.copy(x).graph;
                let sub = shortest_subpath_undirected(gx, hub_path.segment(i), self.exact[x].as_ref())
                    .map_err(|e| EngineError::Reconstruct { copy: x, source: e })?;
                oracle_calls += sub.path.oracle_calls;
                segments.push(self.record(
                    &hub_path,
                    i,
                    sub.seen,
                    sub.path.oracle_calls,
                    sub.path.length,
                    sub.neighbor_iterations,
                    sub.max_touches,
                ));
                pieces.push(sub.path.vertices);
            }
        }

        let mut vertices = vec![s];
        for piece in pieces {
            vertices.extend_from_slice(&piece[1..]);
        }
        let length = self
            .graph
            .path_length(&vertices)
            .ok_or_else(|| EngineError::InvalidWalk(vertices.clone()))?;
        Ok(PathResult {
            source: s,
            target: t,
            vertices,
            length,
            hubs: hub_path.hubs.clone(),
            hub_length: hub_path.total,
            total_plausible: segments.iter().map(|r| r.plausible).sum(),
            segments,
            oracle_calls,
            query_cells: cells,
            max_category_gap,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        hub_path: &HubPath,
        i: usize,
        plausible: usize,
        oracle_calls: usize,
        copy_length: u64,
        neighbor_iterations: usize,
        max_touches: u32,
    ) -> SegmentRecord {
        let (from, to) = hub_path.segment(i);
        let copy = hub_path.copies[i];
        SegmentRecord {
            from,
            to,
            copy,
            h_length: hub_path.edge_lengths[i],
            category: hub_path.categories[i],
            plausible,
            oracle_calls,
            copy_length,
            lifted_length: self.family.lift_distance(copy, copy_length),
            neighbor_iterations,
            max_touches,
        }
    }

    /// 2-approximate rows `({s}, V)` and `(V, {t})` in every copy.
    fn terminal_rows(&self, s: usize, t: usize) -> (RowCache, usize) {
        let all: Vec<usize> = (0..self.graph.vertex_count()).collect();
        let mut rows = RowCache::new(self.two_approx.len());
        let mut cells = 0;
        for (x, oracle) in self.two_approx.iter().enumerate() {
            let from = oracle.query_all(&[s], &all);
            let to = oracle.query_all(&all, &[t]);
            cells += from.cell_count() + to.cell_count();
            rows.insert_from(x, s, from.row(0).to_vec());
            rows.insert_to(x, t, to.column(0));
        }
        (rows, cells)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn family(&self) -> &RoundedFamily {
        &self.family
    }

    pub fn overlay(&self) -> &Overlay {
        &self.overlay
    }

    /// Cutoff `D` shared by every oracle of this engine.
    pub fn oracle_bound(&self) -> u64 {
        self.bound
    }

    /// Cached update-time rows (directed variants).
    pub fn cached_rows(&self) -> &RowCache {
        &self.rows
    }

    pub fn update_count(&self) -> u64 {
        self.updates
    }
}

/// For every weight category and vertex, the ordinal spread between the
/// first and last segment of that category whose plausible set holds it.
fn category_gap(hub_path: &HubPath, sets: &[PlausibleSet]) -> usize {
    let mut ordinal_in_category: HashMap<i32, usize> = HashMap::new();
    let mut spread: HashMap<(i32, usize), (usize, usize)> = HashMap::new();
    for (i, set) in sets.iter().enumerate() {
        let alpha = hub_path.categories[i];
        let counter = ordinal_in_category.entry(alpha).or_insert(0);
        let ordinal = *counter;
        *counter += 1;
        for &v in &set.members {
            spread
                .entry((alpha, v))
                .and_modify(|(_, last)| *last = ordinal)
                .or_insert((ordinal, ordinal));
        }
    }
    spread.values().map(|&(a, b)| b - a).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightDomain;

    fn d1() -> DynamicGraph {
        let mut g = DynamicGraph::new(4, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        for (u, v, w) in [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 4.0), (1, 3, 4.0)] {
            g.set_edge(u, v, w).unwrap();
        }
        g
    }

    #[test]
    fn exact_on_d1() {
        let engine = Engine::preprocess(d1(), EngineConfig::new(Variant::ExactDir)).unwrap();
        let r = engine.query(0, 3).unwrap();
        assert_eq!(r.length, 4.0);
        assert_eq!(r.vertices, vec![0, 1, 2, 3]);
        assert_eq!(engine.query(2, 2).unwrap().vertices, vec![2]);
        assert_eq!(engine.query(2, 2).unwrap().length, 0.0);
    }

    #[test]
    fn exact_after_delete() {
        let mut engine = Engine::preprocess(d1(), EngineConfig::new(Variant::ExactDir)).unwrap();
        engine.update(1, 2, f64::INFINITY).unwrap();
        let r = engine.query(0, 3).unwrap();
        assert_eq!(r.length, 5.0);
        assert!(r.vertices == vec![0, 1, 3] || r.vertices == vec![0, 2, 3]);
    }

    #[test]
    fn empty_graph_is_disconnected() {
        let g = DynamicGraph::new(2, Directedness::Directed, WeightDomain::Integer, 3.0).unwrap();
        let engine = Engine::preprocess(g, EngineConfig::new(Variant::ExactDir)).unwrap();
        let r = engine.query(0, 1).unwrap();
        assert!(!r.is_connected());
        assert!(r.length.is_infinite());
    }

    #[test]
    fn approx_dir_copy_count() {
        let mut g = DynamicGraph::new(6, Directedness::Directed, WeightDomain::Real, 10.0).unwrap();
        g.set_edge(0, 1, 2.5).unwrap();
        let engine = Engine::preprocess(g, EngineConfig::new(Variant::ApproxDir)).unwrap();
        // ⌈log₂(60)⌉ + 1
        assert_eq!(engine.family().copies().len(), 7);
    }

    #[test]
    fn config_guards() {
        assert!(matches!(
            Engine::preprocess(d1(), EngineConfig::new(Variant::ApproxUndir)),
            Err(EngineError::Config(_))
        ));
        assert!(matches!(
            Engine::preprocess(d1(), EngineConfig::new(Variant::ExactDir).with_epsilon(0.5)),
            Err(EngineError::Config(_))
        ));
        assert!(matches!(
            Engine::preprocess(d1(), EngineConfig::new(Variant::ApproxDir).with_epsilon(0.0)),
            Err(EngineError::Config(_))
        ));
    }

    #[test]
    fn oracle_roles_are_checked() {
        let loose = OracleChoice {
            exact: OracleKind::Pow2,
            ..OracleChoice::default()
        };
        assert!(matches!(
            Engine::preprocess(d1(), EngineConfig::new(Variant::ExactDir).with_oracles(loose)),
            Err(EngineError::Config(_))
        ));
        let fine = OracleChoice {
            exact: OracleKind::MinPlus,
            two_approx: OracleKind::Pow2,
            approx: OracleKind::Slack,
        };
        let engine = Engine::preprocess(d1(), EngineConfig::new(Variant::ExactDir).with_oracles(fine)).unwrap();
        assert_eq!(engine.query(0, 3).unwrap().length, 4.0);
    }

    #[test]
    fn update_rejects_out_of_domain() {
        let mut g = DynamicGraph::new(3, Directedness::Undirected, WeightDomain::Real, 4.0).unwrap();
        g.set_edge(0, 1, 1.0).unwrap();
        let mut engine = Engine::preprocess(g, EngineConfig::new(Variant::ApproxUndir)).unwrap();
        assert!(matches!(engine.update(0, 2, 5.0), Err(EngineError::Graph(_))));
        assert_eq!(engine.graph().edge_count(), 1);
    }

    #[test]
    fn identical_weight_update_keeps_state() {
        let mut engine = Engine::preprocess(d1(), EngineConfig::new(Variant::ExactDir)).unwrap();
        let before_graph = engine.graph().clone();
        let before_family = engine.family().clone();
        engine.update(0, 1, 1.0).unwrap();
        assert_eq!(engine.graph(), &before_graph);
        assert_eq!(engine.family(), &before_family);
    }

    #[test]
    fn approx_undir_small() {
        let mut g = DynamicGraph::new(5, Directedness::Undirected, WeightDomain::Real, 16.0).unwrap();
        for (u, v, w) in [(0, 1, 1.5), (1, 2, 3.25), (2, 3, 1.0), (3, 4, 7.5), (0, 4, 16.0)] {
            g.set_edge(u, v, w).unwrap();
        }
        let engine = Engine::preprocess(g, EngineConfig::new(Variant::ApproxUndir)).unwrap();
        let r = engine.query(0, 4).unwrap();
        assert_eq!(engine.graph().path_length(&r.vertices), Some(r.length));
        assert!(r.length >= 13.25);
        assert!(r.length <= 1.25f64.powi(3) * 13.25);
    }
}
