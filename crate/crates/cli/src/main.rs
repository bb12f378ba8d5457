//! `bregman-ep` command-line front end.
//!
//! Exit codes: 0 success, 1 validation or check failure, 2 unreadable input,
//! 3 iteration cap reached, 4 a solver stage failed.

use std::path::PathBuf;
use std::process::ExitCode;

use bregman_ep::properties::DEFAULT_SEED;
use bregman_ep::Vector;
use clap::{Parser, Subcommand};

mod commands;
mod config;

#[derive(Parser)]
#[command(name = "bregman-ep", version, about = "Bregman projection solver for equilibrium and fixed-point problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the schedule conditions and the sampled problem assumptions.
    Validate { config: PathBuf },
    /// Run the algorithm and write the iterate trace as CSV.
    Run {
        config: PathBuf,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Anchor point, e.g. `0.7` or `1,2`.
        #[arg(long, value_parser = config::parse_point)]
        anchor: Option<Vector>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// JSON record of the config, trace, solution, status and wall time.
        #[arg(long)]
        artifact_out: Option<PathBuf>,
    },
    /// Iterate the worked example and check the prox ratios 23/64 and 1841/4096.
    ReproduceExample {
        /// Constant step size in place of 1/32; accepts `a/b`.
        #[arg(long, value_parser = parse_fraction)]
        lambda: Option<f64>,
        /// Use S = identity instead of S(x) = x/3.
        #[arg(long)]
        identity_s: bool,
    },
    /// Run every randomized invariant suite.
    CheckProperties {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn parse_fraction(text: &str) -> Result<f64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    match text.split_once('/') {
        Some((num, den)) => Ok(parse(num)? / parse(den)?),
        None => parse(text),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config } => commands::validate(&config),
        Command::Run {
            config,
            max_iters,
            tol,
            anchor,
            trace_out,
            artifact_out,
        } => commands::run(
            &config,
            commands::RunFlags {
                max_iters,
                tol,
                anchor,
                trace_out: trace_out.as_deref(),
                artifact_out: artifact_out.as_deref(),
            },
        ),
        Command::ReproduceExample { lambda, identity_s } => {
            commands::reproduce_example(commands::ReproduceFlags { lambda, identity_s })
        }
        Command::CheckProperties { seed } => commands::check_properties(seed),
    };
    ExitCode::from(code)
}
