//! Trace-driven and adversarial runs with per-query verification.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::gen::random_weight;
use super::report::{ConfigEcho, RowKind, RunReport, RunRow};
use super::trace::{TraceCommand, TraceLine};
use crate::engine::{Engine, EngineConfig, EngineError, OracleChoice, Variant};
use crate::graph::{dijkstra, DynamicGraph};
use crate::overlay::segmentation_witness;
use crate::unweighted::{bfs, UnweightedEngine, UnweightedError, UNREACHED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunVariant {
    ExactDir,
    ApproxDir,
    ApproxUndir,
    Unweighted,
}

impl RunVariant {
    pub fn name(self) -> &'static str {
        match self {
            RunVariant::ExactDir => "exact-dir",
            RunVariant::ApproxDir => "approx-dir",
            RunVariant::ApproxUndir => "approx-undir",
            RunVariant::Unweighted => "unweighted",
        }
    }

    fn weighted(self) -> Option<Variant> {
        match self {
            RunVariant::ExactDir => Some(Variant::ExactDir),
            RunVariant::ApproxDir => Some(Variant::ApproxDir),
            RunVariant::ApproxUndir => Some(Variant::ApproxUndir),
            RunVariant::Unweighted => None,
        }
    }
}

impl fmt::Display for RunVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RunVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unweighted" => Ok(RunVariant::Unweighted),
            other => other.parse::<Variant>().map(|v| match v {
                Variant::ExactDir => RunVariant::ExactDir,
                Variant::ApproxDir => RunVariant::ApproxDir,
                Variant::ApproxUndir => RunVariant::ApproxUndir,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: RunVariant,
    /// `None` picks 0 for exact-dir and 0.25 otherwise.
    pub epsilon: Option<f64>,
    pub hop_exponent: f64,
    pub hitting_constant: f64,
    pub seed: u64,
    pub resample: bool,
    pub oracles: OracleChoice,
}

impl RunConfig {
    pub fn new(variant: RunVariant) -> Self {
        Self {
            variant,
            epsilon: None,
            hop_exponent: 0.5,
            hitting_constant: 2.0,
            seed: 0,
            resample: true,
            oracles: OracleChoice::default(),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
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

    pub fn epsilon(&self) -> f64 {
        self.epsilon
            .unwrap_or(if self.variant == RunVariant::ExactDir { 0.0 } else { 0.25 })
    }

    fn engine_config(&self, variant: Variant) -> EngineConfig {
        EngineConfig {
            variant,
            epsilon: self.epsilon(),
            hop_exponent: self.hop_exponent,
            hitting_constant: self.hitting_constant,
            seed: self.seed,
            resample_per_update: self.resample,
            oracles: self.oracles,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Unweighted(#[from] UnweightedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Oblivious: random deletions and insertions.
    Random,
    /// Deletes the middle edge of the last reported path.
    PathMedianDelete,
    /// Raises the first or last edge of the last reported path to `W`.
    PathEndpointReweight,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::PathMedianDelete => "path-median-delete",
            Strategy::PathEndpointReweight => "path-endpoint-reweight",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Strategy::Random),
            "path-median-delete" => Ok(Strategy::PathMedianDelete),
            "path-endpoint-reweight" => Ok(Strategy::PathEndpointReweight),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

enum Backend {
    Weighted(Box<Engine>),
    Unweighted(UnweightedEngine),
}

/// One engine plus the bookkeeping needed to verify its answers.
struct Runner {
    cfg: RunConfig,
    backend: Backend,
    rows: Vec<RunRow>,
}

impl Runner {
    fn new(graph: DynamicGraph, cfg: &RunConfig) -> Result<Self, RunError> {
        let backend = match cfg.variant.weighted() {
            Some(v) => Backend::Weighted(Box::new(Engine::preprocess(graph, cfg.engine_config(v))?)),
            None => Backend::Unweighted(UnweightedEngine::new(graph, cfg.epsilon())?),
        };
        Ok(Self {
            cfg: cfg.clone(),
            backend,
            rows: Vec::new(),
        })
    }

    fn graph(&self) -> &DynamicGraph {
        match &self.backend {
            Backend::Weighted(e) => e.graph(),
            Backend::Unweighted(e) => e.graph(),
        }
    }

    fn echo(&self, mode: &str) -> ConfigEcho {
        let g = self.graph();
        let o = self.cfg.oracles;
        ConfigEcho {
            mode: mode.to_string(),
            variant: self.cfg.variant.name().to_string(),
            epsilon: self.cfg.epsilon(),
            hop_exponent: self.cfg.hop_exponent,
            hitting_constant: self.cfg.hitting_constant,
            seed: self.cfg.seed,
            resample: self.cfg.resample,
            oracles: format!("{}/{}/{}", o.exact, o.two_approx, o.approx),
            n: g.vertex_count(),
            m: g.edge_count(),
            directed: g.is_directed(),
            max_weight: g.max_weight(),
            scale_a: match &self.backend {
                Backend::Weighted(e) => e.family().scale_a(),
                Backend::Unweighted(_) => 0,
            },
            strategy: None,
            rounds: None,
            source: None,
            target: None,
        }
    }

    /// Executes one command, records its row, and returns the reported
    /// path for path queries.
    fn execute(&mut self, line: usize, command: TraceCommand) -> Option<Vec<usize>> {
        let index = self.rows.len();
        let (row, path) = match command {
            TraceCommand::Update { u, v, w } => (self.update(index, line, command, u, v, w), None),
            TraceCommand::Delete { u, v } => (self.update(index, line, command, u, v, f64::INFINITY), None),
            TraceCommand::PathQuery { s, t } => self.path_query(index, line, command, s, t),
            TraceCommand::TreeQuery { s } => (self.tree_query(index, line, command, s), None),
        };
        self.rows.push(row);
        path
    }

    fn update(&mut self, index: usize, line: usize, command: TraceCommand, u: usize, v: usize, w: f64) -> RunRow {
        let mut row = RunRow::new(index, line, RowKind::Update, command.to_string());
        match &mut self.backend {
            Backend::Weighted(e) => match e.update(u, v, w) {
                Ok(stats) => row.hubs = Some(stats.hub_count),
                Err(err) => row.error = Some(err.to_string()),
            },
            Backend::Unweighted(e) => {
                if let Err(err) = e.update(u, v, w) {
                    row.error = Some(err.to_string());
                }
            }
        }
        row
    }

    fn path_query(
        &self,
        index: usize,
        line: usize,
        command: TraceCommand,
        s: usize,
        t: usize,
    ) -> (RunRow, Option<Vec<usize>>) {
        let mut row = RunRow::new(index, line, RowKind::Path, command.to_string());
        let g = self.graph();
        let eps = self.cfg.epsilon();
        let (vertices, reported) = match &self.backend {
            Backend::Weighted(e) => match e.query(s, t) {
                Ok(r) => {
                    row.segments = Some(r.segments.len());
                    row.plausible = Some(r.total_plausible);
                    row.oracle_calls = Some(r.oracle_calls);
                    if e.config().variant.is_directed() {
                        row.category_gap = Some(r.max_category_gap);
                    } else {
                        row.max_touches = r.segments.iter().map(|x| x.max_touches).max();
                        row.neighbor_iterations = r.segments.iter().map(|x| x.neighbor_iterations).max();
                    }
                    row.hubs = Some(e.overlay().hubs().len());
                    (r.vertices, r.length)
                }
                Err(err) => {
                    row.error = Some(err.to_string());
                    return (row, None);
                }
            },
            Backend::Unweighted(e) => match e.query_path(s, t) {
                Ok(Some(p)) => {
                    let len = g.path_length(&p).unwrap_or(f64::NAN);
                    (p, len)
                }
                Ok(None) => (Vec::new(), f64::INFINITY),
                Err(err) => {
                    row.error = Some(err.to_string());
                    return (row, None);
                }
            },
        };

        let truth = dijkstra(g, s, Some(t)).distance(t);
        row.reported = Some(reported);
        row.verified = Some(truth);
        row.valid = Some(if vertices.is_empty() {
            reported.is_infinite() && truth.is_infinite()
        } else {
            vertices.first() == Some(&s)
                && vertices.last() == Some(&t)
                && g.path_length(&vertices) == Some(reported)
        });
        row.exact = Some(reported == truth);
        if !vertices.is_empty() {
            row.hops = Some(vertices.len() - 1);
        }
        row.ratio = if truth.is_infinite() {
            None
        } else if truth == 0.0 {
            Some(1.0)
        } else {
            Some(reported / truth)
        };
        let factor = match self.cfg.variant {
            RunVariant::ExactDir => None,
            RunVariant::ApproxDir | RunVariant::ApproxUndir => Some((1.0 + eps).powi(3)),
            RunVariant::Unweighted => Some(1.0 + eps),
        };
        row.within_bound = factor.map(|f| {
            if truth.is_infinite() {
                reported.is_infinite()
            } else {
                reported >= truth && reported <= f * truth
            }
        });
        if let Backend::Weighted(e) = &self.backend {
            if self.cfg.variant == RunVariant::ExactDir && row.exact == Some(false) {
                let mut hub_set = vec![false; g.vertex_count()];
                for &h in e.overlay().hubs() {
                    hub_set[h] = true;
                }
                hub_set[s] = true;
                hub_set[t] = true;
                row.witness = Some(segmentation_witness(g, s, t, &hub_set, e.family().hop_bound()));
            }
        }
        (row, Some(vertices))
    }

    fn tree_query(&self, index: usize, line: usize, command: TraceCommand, s: usize) -> RunRow {
        let mut row = RunRow::new(index, line, RowKind::Tree, command.to_string());
        let Backend::Unweighted(e) = &self.backend else {
            row.error = Some("tree queries require unweighted variant".into());
            return row;
        };
        let tree = match e.query_tree(s) {
            Ok(t) => t,
            Err(err) => {
                row.error = Some(err.to_string());
                return row;
            }
        };
        let g = self.graph();
        let dist = bfs(g, s, None);
        let spans = (0..g.vertex_count()).all(|v| (tree.depth[v] == UNREACHED) == (dist[v] == UNREACHED));
        row.valid = Some(tree.root == s && tree.is_subgraph_of(g) && spans);
        row.exact = Some(tree.depth == dist);
        let worst = (0..g.vertex_count())
            .filter(|&v| dist[v] != UNREACHED && dist[v] > 0 && tree.depth[v] != UNREACHED)
            .map(|v| tree.depth[v] as f64 / dist[v] as f64)
            .fold(1.0, f64::max);
        row.ratio = Some(worst);
        row.within_bound = Some(worst <= 1.0 + self.cfg.epsilon());
        row
    }
}

/// Runs `trace` against a fresh engine for `graph`. Engine errors become
/// per-row errors; only preprocessing failures abort the run.
pub fn run_trace(graph: DynamicGraph, trace: &[TraceLine], cfg: &RunConfig) -> Result<RunReport, RunError> {
    let mut runner = Runner::new(graph, cfg)?;
    let echo = runner.echo("run");
    for tl in trace {
        runner.execute(tl.line, tl.command);
    }
    Ok(RunReport::new(echo, runner.rows))
}

/// The pair `(s, t)`, `s ≠ t`, with the largest finite distance; smallest
/// ids on ties. Falls back to `(0, min(1, n-1))` when no pair is connected.
pub fn diameter_pair(g: &DynamicGraph) -> (usize, usize) {
    let n = g.vertex_count();
    let mut best: Option<(f64, usize, usize)> = None;
    for s in 0..n {
        let sp = dijkstra(g, s, None);
        for t in 0..n {
            let d = sp.distance(t);
            if t != s && d.is_finite() && best.map_or(true, |(bd, _, _)| d > bd) {
                best = Some((d, s, t));
            }
        }
    }
    best.map_or((0, 1.min(n - 1)), |(_, s, t)| (s, t))
}

fn random_insert(g: &DynamicGraph, unit: bool, rng: &mut ChaCha8Rng) -> TraceCommand {
    let n = g.vertex_count();
    let u = rng.gen_range(0..n);
    let v = (u + rng.gen_range(1..n)) % n;
    let w = if unit { 1.0 } else { random_weight(g.domain(), g.max_weight(), rng) };
    TraceCommand::Update { u, v, w }
}

fn choose_update(
    strategy: Strategy,
    round: usize,
    g: &DynamicGraph,
    last: &[usize],
    unit: bool,
    rng: &mut ChaCha8Rng,
) -> TraceCommand {
    let k = last.len().saturating_sub(1);
    match strategy {
        Strategy::Random => {
            let m = g.edge_count();
            if m > 0 && rng.gen_bool(0.5) {
                let (u, v, _) = g.edges().nth(rng.gen_range(0..m)).expect("index below edge count");
                TraceCommand::Delete { u, v }
            } else {
                random_insert(g, unit, rng)
            }
        }
        Strategy::PathMedianDelete if k > 0 => {
            let i = (k - 1) / 2;
            TraceCommand::Delete { u: last[i], v: last[i + 1] }
        }
        Strategy::PathEndpointReweight if k > 0 => {
            let i = if round % 2 == 0 { 0 } else { k - 1 };
            let (u, v) = (last[i], last[i + 1]);
            if unit {
                return TraceCommand::Delete { u, v };
            }
            let current = g.length(u, v).unwrap_or(f64::INFINITY);
            let w = if current < g.max_weight() {
                g.max_weight()
            } else {
                random_weight(g.domain(), g.max_weight(), rng)
            };
            TraceCommand::Update { u, v, w }
        }
        _ => random_insert(g, unit, rng),
    }
}

/// Alternates `query(s, t)` with an update chosen by `strategy` from the
/// last answer, `rounds` times, with `(s, t)` the initial diameter pair.
/// Produces `rounds + 1` verified queries.
pub fn adversary_run(
    graph: DynamicGraph,
    cfg: &RunConfig,
    rounds: usize,
    strategy: Strategy,
) -> Result<RunReport, RunError> {
    let (s, t) = diameter_pair(&graph);
    let mut runner = Runner::new(graph, cfg)?;
    let mut echo = runner.echo("adversary");
    echo.strategy = Some(strategy.name().to_string());
    echo.rounds = Some(rounds);
    echo.source = Some(s);
    echo.target = Some(t);
    let unit = cfg.variant == RunVariant::Unweighted;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let query = TraceCommand::PathQuery { s, t };
    let mut last = runner.execute(0, query).unwrap_or_default();
    for round in 0..rounds {
        if runner.graph().vertex_count() < 2 {
            break;
        }
        let update = choose_update(strategy, round, runner.graph(), &last, unit, &mut rng);
        runner.execute(0, update);
        last = runner.execute(0, query).unwrap_or_default();
    }
    Ok(RunReport::new(echo, runner.rows))
}
