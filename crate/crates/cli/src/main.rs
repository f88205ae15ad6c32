use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dsp_core::graph::parse_graph;
use dsp_core::harness::{
    adversary_run, parse_report, parse_trace, run_trace, stats_check, RunConfig, RunReport, RunVariant, Strategy,
};
use dsp_core::{OracleChoice, OracleKind};

#[derive(Parser)]
#[command(name = "dsp", version, about = "Dynamic shortest-path runner and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace against an engine and verify every answer.
    Run {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Alternate queries with updates chosen from the previous answer.
    Adversary {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 100)]
        rounds: usize,
        #[arg(long, default_value = "path-median-delete")]
        strategy: Strategy,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Check a saved report against the count bounds.
    Stats {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value = "exact-dir")]
    variant: RunVariant,
    /// Defaults to 0 for exact-dir and 0.25 otherwise.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "hop-exp", default_value_t = 0.5)]
    hop_exp: f64,
    #[arg(long, default_value_t = 2.0)]
    chs: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the hub sample fixed across updates.
    #[arg(long)]
    no_resample: bool,
    #[arg(long, default_value = "dijkstra")]
    exact_oracle: OracleKind,
    #[arg(long, default_value = "dijkstra")]
    two_approx_oracle: OracleKind,
    #[arg(long, default_value = "dijkstra")]
    approx_oracle: OracleKind,
    /// One JSON object per line instead of key=value records.
    #[arg(long)]
    json: bool,
}

impl EngineArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            variant: self.variant,
            epsilon: self.epsilon,
            hop_exponent: self.hop_exp,
            hitting_constant: self.chs,
            seed: self.seed,
            resample: !self.no_resample,
            oracles: OracleChoice {
                exact: self.exact_oracle,
                two_approx: self.two_approx_oracle,
                approx: self.approx_oracle,
            },
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_graph(path: &PathBuf) -> Result<dsp_core::DynamicGraph> {
    parse_graph(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn emit(report: &RunReport, json: bool) -> bool {
    if json {
        print!("{}", report.to_json_lines());
    } else {
        print!("{}", report.to_kv());
    }
    let ledger = stats_check(report);
    for row in ledger.rows.iter().filter(|r| !r.passed) {
        eprintln!("{row}");
    }
    report.passed() && ledger.passed()
}

fn execute(cli: Cli) -> Result<bool> {
    let started = Instant::now();
    let passed = match cli.command {
        Command::Run { graph, trace, engine } => {
            let g = load_graph(&graph)?;
            let t = parse_trace(&read(&trace)?).with_context(|| format!("parsing {}", trace.display()))?;
            let report = run_trace(g, &t, &engine.config())?;
            emit(&report, engine.json)
        }
        Command::Adversary {
            graph,
            rounds,
            strategy,
            engine,
        } => {
            let g = load_graph(&graph)?;
            let report = adversary_run(g, &engine.config(), rounds, strategy)?;
            emit(&report, engine.json)
        }
        Command::Stats { report } => {
            let r = parse_report(&read(&report)?).with_context(|| format!("parsing {}", report.display()))?;
            let ledger = stats_check(&r);
            print!("{ledger}");
            println!(
                "summary queries={} exactness_rate={} max_ratio={} max_plausible={} passed={}",
                r.summary.queries,
                r.summary.exactness_rate,
                r.summary.max_ratio,
                r.summary.max_plausible,
                r.passed() && ledger.passed()
            );
            r.passed() && ledger.passed()
        }
    };
    eprintln!("elapsed_ms={}", started.elapsed().as_millis());
    Ok(passed)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
