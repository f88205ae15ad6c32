//! Update/query traces: one command per line.
//!
//! ```text
//! U u v w    set the length of (u, v) to w
//! D u v      delete (u, v)
//! QP s t     report an s → t path
//! QT s       report a shortest-path tree rooted at s (unweighted only)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TraceCommand {
    Update { u: usize, v: usize, w: f64 },
    Delete { u: usize, v: usize },
    PathQuery { s: usize, t: usize },
    TreeQuery { s: usize },
}

impl TraceCommand {
    pub fn is_query(&self) -> bool {
        matches!(self, TraceCommand::PathQuery { .. } | TraceCommand::TreeQuery { .. })
    }
}

impl fmt::Display for TraceCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TraceCommand::Update { u, v, w } => write!(f, "U {u} {v} {w}"),
            TraceCommand::Delete { u, v } => write!(f, "D {u} {v}"),
            TraceCommand::PathQuery { s, t } => write!(f, "QP {s} {t}"),
            TraceCommand::TreeQuery { s } => write!(f, "QT {s}"),
        }
    }
}

/// A command with the 1-based line it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceLine {
    pub line: usize,
    pub command: TraceCommand,
}

fn vertex(token: &str, line: usize) -> Result<usize, ParseError> {
    token
        .parse()
        .map_err(|_| ParseError::new(line, format!("bad vertex `{token}`")))
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parts: Vec<&str> = body.split_whitespace().collect();
        let arity = |k: usize| {
            if parts.len() == k + 1 {
                Ok(())
            } else {
                Err(ParseError::new(
                    line,
                    format!("`{}` takes {k} arguments, got {}", parts[0], parts.len() - 1),
                ))
            }
        };
        let command = match parts[0] {
            "U" => {
                arity(3)?;
                let w: f64 = parts[3]
                    .parse()
                    .map_err(|_| ParseError::new(line, format!("bad weight `{}`", parts[3])))?;
                if !w.is_finite() {
                    return Err(ParseError::new(line, "use `D u v` to delete an edge"));
                }
                TraceCommand::Update {
                    u: vertex(parts[1], line)?,
                    v: vertex(parts[2], line)?,
                    w,
                }
            }
            "D" => {
                arity(2)?;
                TraceCommand::Delete {
                    u: vertex(parts[1], line)?,
                    v: vertex(parts[2], line)?,
                }
            }
            "QP" => {
                arity(2)?;
                TraceCommand::PathQuery {
                    s: vertex(parts[1], line)?,
                    t: vertex(parts[2], line)?,
                }
            }
            "QT" => {
                arity(1)?;
                TraceCommand::TreeQuery {
                    s: vertex(parts[1], line)?,
                }
            }
            other => return Err(ParseError::new(line, format!("unknown command `{other}`"))),
        };
        out.push(TraceLine { line, command });
    }
    Ok(out)
}

pub fn write_trace(commands: &[TraceCommand]) -> String {
    commands.iter().map(|c| format!("{c}\n")).collect()
}
