//! Run reports: a config echo, one row per command and a summary.
//!
//! Each record is one line, either `key=value` pairs (values are JSON
//! literals, `record` first and the rest in key order) or one JSON object.
//! Both forms carry identical fields and parse back through
//! [`parse_report`]. Infinite lengths are written as the string `"inf"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use thiserror::Error;

mod length {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_infinite() => s.serialize_str("inf"),
            Some(x) => s.serialize_f64(*x),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!("bad length `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    /// `run` or `adversary`.
    pub mode: String,
    pub variant: String,
    pub epsilon: f64,
    pub hop_exponent: f64,
    pub hitting_constant: f64,
    pub seed: u64,
    pub resample: bool,
    pub oracles: String,
    pub n: usize,
    pub m: usize,
    pub directed: bool,
    pub max_weight: f64,
    /// The integer scale `A` (0 for the unweighted engine).
    pub scale_a: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Update,
    Path,
    Tree,
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub index: usize,
    /// Trace line, 0 for generated commands.
    pub line: usize,
    pub kind: RowKind,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "length")]
    pub reported: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "length")]
    pub verified: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    /// `reported / verified`; for trees the worst vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Whether the variant's length guarantee holds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within_bound: Option<bool>,
    /// Exact-dir misses only: whether some shortest path splits into
    /// hop-bounded segments between the sampled hubs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hops: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plausible: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_calls: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_gap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_touches: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbor_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hubs: Option<usize>,
}

impl RunRow {
    pub fn new(index: usize, line: usize, kind: RowKind, command: String) -> Self {
        Self {
            index,
            line,
            kind,
            command,
            error: None,
            reported: None,
            verified: None,
            valid: None,
            exact: None,
            ratio: None,
            within_bound: None,
            witness: None,
            hops: None,
            segments: None,
            plausible: None,
            oracle_calls: None,
            category_gap: None,
            max_touches: None,
            neighbor_iterations: None,
            hubs: None,
        }
    }

    pub fn is_query(&self) -> bool {
        self.kind != RowKind::Update
    }

    /// A row fails on an engine error, an invalid answer, a broken length
    /// guarantee, or an exact-dir miss that the hub sample does not explain.
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.valid != Some(false)
            && self.within_bound != Some(false)
            && !(self.exact == Some(false) && self.witness == Some(true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub commands: usize,
    pub queries: usize,
    pub updates: usize,
    pub errors: usize,
    pub invalid: usize,
    pub out_of_bound: usize,
    pub misses: usize,
    pub unexplained_misses: usize,
    pub exactness_rate: f64,
    pub max_ratio: f64,
    pub max_plausible: usize,
    pub mean_plausible: f64,
    pub max_oracle_calls: usize,
    pub passed: bool,
}

impl Summary {
    pub fn from_rows(rows: &[RunRow]) -> Self {
        let queries: Vec<&RunRow> = rows.iter().filter(|r| r.is_query()).collect();
        let answered: Vec<&RunRow> = queries.iter().copied().filter(|r| r.error.is_none()).collect();
        let exact = answered.iter().filter(|r| r.exact == Some(true)).count();
        let misses = answered.iter().filter(|r| r.exact == Some(false)).count();
        let graded = exact + misses;
        let plausible: Vec<usize> = answered.iter().filter_map(|r| r.plausible).collect();
        Self {
            commands: rows.len(),
            queries: queries.len(),
            updates: rows.len() - queries.len(),
            errors: rows.iter().filter(|r| r.error.is_some()).count(),
            invalid: rows.iter().filter(|r| r.valid == Some(false)).count(),
            out_of_bound: rows.iter().filter(|r| r.within_bound == Some(false)).count(),
            misses,
            unexplained_misses: answered
                .iter()
                .filter(|r| r.exact == Some(false) && r.witness == Some(true))
                .count(),
            exactness_rate: if graded == 0 { 1.0 } else { exact as f64 / graded as f64 },
            max_ratio: answered.iter().filter_map(|r| r.ratio).fold(1.0, f64::max),
            max_plausible: plausible.iter().copied().max().unwrap_or(0),
            mean_plausible: if plausible.is_empty() {
                0.0
            } else {
                plausible.iter().sum::<usize>() as f64 / plausible.len() as f64
            },
            max_oracle_calls: answered.iter().filter_map(|r| r.oracle_calls).max().unwrap_or(0),
            passed: rows.iter().all(RunRow::passed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum Record {
    Config(ConfigEcho),
    Row(RunRow),
    Summary(Summary),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub rows: Vec<RunRow>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(config: ConfigEcho, rows: Vec<RunRow>) -> Self {
        let summary = Summary::from_rows(&rows);
        Self { config, rows, summary }
    }

    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn records(&self) -> Vec<Record> {
        let mut out = Vec::with_capacity(self.rows.len() + 2);
        out.push(Record::Config(self.config.clone()));
        out.extend(self.rows.iter().cloned().map(Record::Row));
        out.push(Record::Summary(self.summary.clone()));
        out
    }

    pub fn to_kv(&self) -> String {
        self.records().iter().map(|r| format!("{}\n", kv_line(r))).collect()
    }

    pub fn to_json_lines(&self) -> String {
        self.records()
            .iter()
            .map(|r| format!("{}\n", serde_json::to_string(r).expect("records serialize")))
            .collect()
    }
}

fn kv_line(record: &Record) -> String {
    let Value::Object(map) = serde_json::to_value(record).expect("records serialize") else {
        unreachable!("records are objects")
    };
    let mut parts = Vec::with_capacity(map.len());
    if let Some(tag) = map.get("record").and_then(Value::as_str) {
        parts.push(format!("record={tag}"));
    }
    for (k, v) in map.iter().filter(|(k, _)| k.as_str() != "record") {
        parts.push(format!("{k}={v}"));
    }
    parts.join(" ")
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("report has no config record")]
    MissingConfig,
    #[error("report has more than one config record")]
    DuplicateConfig,
}

fn parse_kv(text: &str, line: usize) -> Result<Value, ReportError> {
    let err = |message: String| ReportError::Syntax { line, message };
    let mut map = Map::new();
    let mut rest = text.trim_start();
    while !rest.is_empty() {
        let eq = rest.find('=').ok_or_else(|| err(format!("expected key=value near `{rest}`")))?;
        let key = &rest[..eq];
        let body = &rest[eq + 1..];
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(err(format!("bad key `{key}`")));
        }
        let value: Value = if key == "record" {
            let end = body.find(char::is_whitespace).unwrap_or(body.len());
            rest = &body[end..];
            Value::String(body[..end].to_string())
        } else {
            let mut stream = serde_json::Deserializer::from_str(body).into_iter::<Value>();
            let value = stream
                .next()
                .ok_or_else(|| err(format!("missing value for `{key}`")))?
                .map_err(|e| err(format!("value of `{key}`: {e}")))?;
            rest = &body[stream.byte_offset()..];
            value
        };
        map.insert(key.to_string(), value);
        rest = rest.trim_start();
    }
    Ok(Value::Object(map))
}

/// Reads a report in either line format; the summary is recomputed from
/// the rows, so a hand-edited summary line cannot mask a failure.
pub fn parse_report(text: &str) -> Result<RunReport, ReportError> {
    let mut config = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        let value = if body.starts_with('{') {
            serde_json::from_str(body).map_err(|e| ReportError::Syntax {
                line,
                message: e.to_string(),
            })?
        } else {
            parse_kv(body, line)?
        };
        let record: Record = serde_json::from_value(value).map_err(|e| ReportError::Syntax {
            line,
            message: e.to_string(),
        })?;
        match record {
            Record::Config(c) => {
                if config.replace(c).is_some() {
                    return Err(ReportError::DuplicateConfig);
                }
            }
            Record::Row(r) => rows.push(r),
            Record::Summary(_) => {}
        }
    }
    let config = config.ok_or(ReportError::MissingConfig)?;
    Ok(RunReport::new(config, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let config = ConfigEcho {
            mode: "run".into(),
            variant: "exact-dir".into(),
            epsilon: 0.0,
            hop_exponent: 0.5,
            hitting_constant: 2.0,
            seed: 7,
            resample: true,
            oracles: "dijkstra/dijkstra/dijkstra".into(),
            n: 4,
            m: 5,
            directed: true,
            max_weight: 4.0,
            scale_a: 8,
            strategy: None,
            rounds: None,
            source: None,
            target: None,
        };
        let mut q = RunRow::new(0, 1, RowKind::Path, "QP 0 3".into());
        q.reported = Some(4.0);
        q.verified = Some(4.0);
        q.valid = Some(true);
        q.exact = Some(true);
        q.ratio = Some(1.0);
        q.plausible = Some(4);
        let mut gone = RunRow::new(1, 2, RowKind::Path, "QP 3 0".into());
        gone.reported = Some(f64::INFINITY);
        gone.verified = Some(f64::INFINITY);
        gone.valid = Some(true);
        gone.exact = Some(true);
        let mut bad = RunRow::new(2, 3, RowKind::Tree, "QT 0".into());
        bad.error = Some("tree queries require unweighted variant".into());
        RunReport::new(config, vec![q, gone, bad])
    }

    #[test]
    fn kv_round_trip() {
        let r = sample();
        let text = r.to_kv();
        assert!(text.lines().next().unwrap().starts_with("record=config "));
        assert!(text.contains("command=\"QP 0 3\""));
        assert!(text.contains("reported=\"inf\""));
        assert_eq!(parse_report(&text).unwrap(), r);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = r.to_json_lines();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(parse_report(&text).unwrap(), r);
    }

    #[test]
    fn summary_counts() {
        let s = sample().summary;
        assert_eq!(s.queries, 3);
        assert_eq!(s.errors, 1);
        assert_eq!(s.exactness_rate, 1.0);
        assert_eq!(s.max_plausible, 4);
        assert!(!s.passed);
    }

    #[test]
    fn explained_misses_pass() {
        let mut row = RunRow::new(0, 0, RowKind::Path, "QP 0 1".into());
        row.valid = Some(true);
        row.exact = Some(false);
        row.witness = Some(false);
        assert!(row.passed());
        row.witness = Some(true);
        assert!(!row.passed());
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_report("record=row index="), Err(ReportError::Syntax { line: 1, .. })));
        assert!(matches!(parse_report(""), Err(ReportError::MissingConfig)));
    }
}
