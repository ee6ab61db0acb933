//! Scenario-driven front end: reads one JSON scenario, runs the requested
//! studies and writes CSV reports whose header block carries the effective
//! weight constants.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or solver
//! error, 2 on a usage or configuration error.

pub mod commands;
pub mod constants;
pub mod output;
pub mod scenario;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{run_command, write_summary, Command, Context, SummaryRow};
pub use constants::{LambdaSearch, WeightSetup};
pub use output::{num, parse_rows, Table};
pub use scenario::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("output: {0}")]
    Output(String),
    #[error("{0}")]
    Module(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Module(_) => 1,
            CliError::Usage(_) | CliError::Config(_) | CliError::Output(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "singular-heat",
    version,
    about = "Carleman weights, Hardy constants and null control for the heat equation with a boundary inverse-square potential"
)]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// Scenario JSON; the tangent-disk preset when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the scenario's `output`, default `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; the number of logical cores when omitted.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Require the strict audit margin and treat flags and inconclusive runs as failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Search the lambda grid and audit every pointwise inequality.
    AuditWeights,
    /// Hardy constants, shift estimates, inequality audits and the supersolution check.
    Hardy,
    /// Blow-up dichotomy under refinement and energy monotonicity of adjoint runs.
    Simulate,
    /// Penalized HUM null control over the epsilon sweep.
    Control,
    /// Observability constants and control costs scanned in mu and T.
    Observability,
    /// Every command above, with one combined summary.
    Report,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::AuditWeights => Command::AuditWeights,
            Sub::Hardy => Command::Hardy,
            Sub::Simulate => Command::Simulate,
            Sub::Control => Command::Control,
            Sub::Observability => Command::Observability,
            Sub::Report => Command::Report,
        }
    }
}

/// Outcome of a completed run.
#[derive(Debug)]
pub struct RunReport {
    pub out: PathBuf,
    pub rows: Vec<SummaryRow>,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Runs one command on a loaded scenario. Module errors still produce a summary.
pub fn execute(scenario: Scenario, command: Command, out: PathBuf, strict: bool) -> Result<RunReport, CliError> {
    let ctx = Context::new(scenario, out.clone(), strict)?;
    let rows = match run_command(&ctx, command) {
        Ok(rows) => rows,
        Err(CliError::Module(m)) => {
            write_summary(
                &ctx,
                command,
                &[SummaryRow { command: command.as_str(), check: "module_error".into(), value: m.clone(), pass: false }],
            )?;
            return Err(CliError::Module(m));
        }
        Err(e) => return Err(e),
    };
    write_summary(&ctx, command, &rows)?;
    Ok(RunReport { out, rows })
}

fn run_args(args: Args) -> Result<RunReport, CliError> {
    let mut scenario = match &args.config {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default().resolve()?,
    };
    if let Some(s) = args.seed {
        scenario.seed = Some(s);
    }
    let out = args.out.clone().or_else(|| scenario.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let command = Command::from(args.command);
    pool.install(|| execute(scenario, command, out, args.strict))
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_args(args) {
        Ok(report) => {
            for r in report.rows.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {} {}: {}", r.command, r.check, r.value);
            }
            println!("wrote {}", report.out.display());
            if report.pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
