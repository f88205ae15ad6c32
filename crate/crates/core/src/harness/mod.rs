//! Trace runner, adaptive adversary, ground-truth verification and
//! count-bound statistics.

pub mod gen;
pub mod report;
pub mod run;
pub mod stats;
pub mod trace;

pub use report::{parse_report, ConfigEcho, Record, RowKind, RunReport, RunRow, Summary};
pub use run::{adversary_run, diameter_pair, run_trace, RunConfig, RunError, RunVariant, Strategy};
pub use stats::{stats_check, Ledger, LedgerRow};
pub use trace::{parse_trace, TraceCommand, TraceLine};
