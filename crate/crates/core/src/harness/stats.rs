//! Count-bound ledger over a run report.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::report::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub name: String,
    pub relation: Relation,
    pub bound: f64,
    pub observed: f64,
    pub passed: bool,
}

impl LedgerRow {
    fn new(name: &str, relation: Relation, bound: f64, observed: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => observed <= bound,
            Relation::AtLeast => observed >= bound,
        };
        Self {
            name: name.to_string(),
            relation,
            bound,
            observed,
            passed,
        }
    }
}

impl fmt::Display for LedgerRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        write!(
            f,
            "ledger name={} observed={} {rel} bound={} pass={}",
            self.name, self.observed, self.bound, self.passed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub rows: Vec<LedgerRow>,
}

impl Ledger {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

impl fmt::Display for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

/// `64 · n · log₂(2nW)`.
pub fn plausible_budget(n: usize, max_weight: f64) -> f64 {
    64.0 * n as f64 * (2.0 * n as f64 * max_weight).log2()
}

/// Largest ordinal spread allowed between same-category segments sharing
/// a plausible vertex.
pub const CATEGORY_GAP_LIMIT: usize = 16;

/// Touches per (vertex, weight class) in one undirected subpath call.
pub const TOUCH_LIMIT: u32 = 4;

/// Checks a report against the measured-constant count bounds. Rows are
/// only listed when the run produced the relevant counter.
pub fn stats_check(report: &RunReport) -> Ledger {
    let cfg = &report.config;
    let s = &report.summary;
    let mut rows = vec![
        LedgerRow::new("errors", Relation::AtMost, 0.0, s.errors as f64),
        LedgerRow::new("invalid-answers", Relation::AtMost, 0.0, s.invalid as f64),
    ];
    let answered = || report.rows.iter().filter(|r| r.is_query() && r.error.is_none());

    if cfg.variant == "exact-dir" {
        rows.push(LedgerRow::new("exactness-rate", Relation::AtLeast, 0.99, s.exactness_rate));
        rows.push(LedgerRow::new(
            "unexplained-misses",
            Relation::AtMost,
            0.0,
            s.unexplained_misses as f64,
        ));
    } else {
        rows.push(LedgerRow::new("length-bound-violations", Relation::AtMost, 0.0, s.out_of_bound as f64));
    }

    if let Some(p) = answered().filter_map(|r| r.plausible).max().filter(|_| cfg.directed) {
        rows.push(LedgerRow::new(
            "plausible-total",
            Relation::AtMost,
            plausible_budget(cfg.n, cfg.max_weight),
            p as f64,
        ));
    }
    if cfg.epsilon == 0.0 {
        if let Some(gap) = answered().filter_map(|r| r.category_gap).max() {
            rows.push(LedgerRow::new("category-gap", Relation::AtMost, CATEGORY_GAP_LIMIT as f64, gap as f64));
        }
    }
    if let Some(t) = answered().filter_map(|r| r.max_touches).max() {
        rows.push(LedgerRow::new("class-touches", Relation::AtMost, TOUCH_LIMIT as f64, t as f64));
    }
    if let Some(it) = answered().filter_map(|r| r.neighbor_iterations).max() {
        let classes = ((cfg.scale_a + 1) as f64).log2().ceil();
        rows.push(LedgerRow::new(
            "neighbor-iterations",
            Relation::AtMost,
            4.0 * cfg.n as f64 * classes,
            it as f64,
        ));
    }
    Ledger { rows }
}
