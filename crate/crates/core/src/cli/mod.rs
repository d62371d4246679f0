//! Command-line front end: `plan`, `simulate`, `sweep`, `bound`, `verify`.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 infeasible parameters,
//! 3 divisibility violation, 4 verification failure.

mod commands;
mod config;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::math::{parse_rational, Rational};

pub use config::{rational_value, Config, SEED_ENV};
pub use verify::{run_suites, Suite, SuiteResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_DIVISIBILITY: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) | Error::InfeasibleParams(_) | Error::UnsupportedS(_) | Error::UndefinedLoad { .. } => {
            EXIT_INFEASIBLE
        }
        Error::Divisibility(_) | Error::AssignmentNotSymmetric(_) => EXIT_DIVISIBILITY,
        Error::DecodeFailure(_)
        | Error::MissingValue { .. }
        | Error::PayloadMismatch { .. }
        | Error::ReplicaDisagreement { .. }
        | Error::SingularMatrix => EXIT_VERIFY,
        _ => EXIT_PARSE,
    }
}

#[derive(Parser, Debug)]
#[command(name = "hybrid-cdc", version, about = "Plan, simulate and bound hybrid coded distributed computing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum-time allocation, or the plain CDC/ACDC candidates with --pure.
    Plan(PlanArgs),
    /// Run the scheme bit-exactly and compare against the closed form.
    Simulate(SimulateArgs),
    /// Vary one parameter and emit CSV of CDC, ACDC and hybrid times.
    Sweep(SweepArgs),
    /// Converse bounds for a scheme placement or a placement file.
    Bound(BoundArgs),
    /// Run the built-in consistency suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// JSON config file (`-` for stdin).
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Pure {
    Cdc,
    Acdc,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Restrict to one plain scheme and list all its feasible points.
    #[arg(long, value_enum)]
    pure: Option<Pure>,
    /// Only allocations the simulator can execute.
    #[arg(long)]
    simulatable: bool,
    #[arg(long)]
    json: bool,
}

/// Overrides for the allocation; unset fields come from the best
/// simulatable plan.
#[derive(Args, Debug, Default, Clone)]
struct AllocArgs {
    #[arg(long, value_parser = rational_arg)]
    alpha: Option<Rational>,
    #[arg(long)]
    r1: Option<usize>,
    #[arg(long)]
    r2: Option<usize>,
    #[arg(long)]
    ks: Option<usize>,
    #[arg(long)]
    kh: Option<usize>,
}

impl AllocArgs {
    fn any(&self) -> bool {
        self.alpha.is_some() || self.r1.is_some() || self.r2.is_some() || self.ks.is_some() || self.kh.is_some()
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    alloc: AllocArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the shuffle transcript as JSON lines.
    #[arg(long, value_name = "PATH")]
    export_transcript: Option<PathBuf>,
    /// Include hex payloads in the exported transcript.
    #[arg(long, requires = "export_transcript")]
    hex: bool,
    #[arg(long)]
    json: bool,
    /// Corrupt the transcript before decoding (`flip:IDX` or `drop:IDX`).
    #[arg(long, hide = true, value_parser = fault_arg)]
    inject_fault: Option<crate::simulator::Fault>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// One of K, M, N, Q, s, c_m, c_s, c_r.
    #[arg(long)]
    vary: crate::planner::SweepParam,
    #[arg(long, value_parser = rational_arg)]
    from: Rational,
    #[arg(long, value_parser = rational_arg)]
    to: Rational,
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    step: Rational,
    /// Restrict every row to simulatable allocations.
    #[arg(long)]
    simulatable: bool,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    alloc: AllocArgs,
    /// Placement and reduce sets from a JSON file instead of the scheme.
    #[arg(long, value_name = "PATH", conflicts_with = "simulate")]
    placement: Option<PathBuf>,
    /// Also run the scheme and report the gap to the bounds.
    #[arg(long)]
    simulate: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Optional config; suites use built-in instances otherwise.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long)]
    seed: Option<u64>,
    /// Deliberately perturb one closed form so the suites must fail.
    #[arg(long, hide = true)]
    perturb: bool,
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn fault_arg(s: &str) -> std::result::Result<crate::simulator::Fault, String> {
    use crate::simulator::Fault;
    let (kind, idx) = s.split_once(':').ok_or("expected flip:IDX or drop:IDX")?;
    let record: usize = idx.parse().map_err(|_| format!("bad record index {idx:?}"))?;
    match kind {
        "flip" => Ok(Fault::FlipBit { record }),
        "drop" => Ok(Fault::DropRecord { record }),
        _ => Err(format!("unknown fault kind {kind:?}")),
    }
}

/// Runs the CLI on `args` (including the program name), writing normal output
/// to `out` and diagnostics to `err`; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Plan(a) => commands::plan(a, out),
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Sweep(a) => commands::sweep(a, out),
        Command::Bound(a) => commands::bound(a, out),
        Command::Verify(a) => commands::verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
