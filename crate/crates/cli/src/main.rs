use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use enfix_cli::bench::cmd_bench;
use enfix_cli::commands::{cmd_check, cmd_estimate, cmd_solve, OutputOptions};
use enfix_cli::problem::Overrides;
use enfix_cli::{exit, CliError};

/// Fixed points of enriched contractions by averaged iteration.
#[derive(Parser)]
#[command(name = "enfix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print a JSON report.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the iteration trace as CSV.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Estimate (b, θ) for the problem's operator by sampling.
    Estimate {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the full b-grid as CSV.
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Test a declared certificate against sampled pairs.
    Check {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every *.toml problem in a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        flags: Flags,
        /// Directory for per-problem reports and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled pairs for estimation and checks.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    b_max: Option<f64>,
    #[arg(long)]
    b_step: Option<f64>,
    /// Run with this λ instead of 1/(b+1); disables the error bounds.
    #[arg(long)]
    lambda_override: Option<f64>,
}

impl From<Flags> for Overrides {
    fn from(f: Flags) -> Self {
        Overrides {
            tol: f.tol,
            max_iter: f.max_iter,
            seed: f.seed,
            pairs: f.pairs,
            b_max: f.b_max,
            b_step: f.b_step,
            lambda_override: f.lambda_override,
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Solve { problem, flags, out: o, trace_out, timing } => {
            let opts = OutputOptions { out: o, trace_out, timing, ..Default::default() };
            cmd_solve(&problem, &flags.into(), &opts, &mut out)
        }
        Command::Estimate { problem, flags, out: o, grid_out } => {
            let opts = OutputOptions { out: o, grid_out, ..Default::default() };
            cmd_estimate(&problem, &flags.into(), &opts, &mut out)
        }
        Command::Check { problem, flags, out: o } => {
            let opts = OutputOptions { out: o, ..Default::default() };
            cmd_check(&problem, &flags.into(), &opts, &mut out)
        }
        Command::Bench { dir, flags, out: o } => cmd_bench(&dir, &flags.into(), o.as_deref(), &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
