//! `davies`: build instances, evaluate gap bounds and exact oracles, run sweeps and evolutions.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O failure (reading input, writing output) |
//! | 2 | usage error (bad flags, unparsable values, bad environment) |
//! | 3 | malformed instance document |
//! | 4 | instance validation failure (degenerate spectrum, non-Hermitian coupling, bad parameters) |
//! | 5 | numerical failure (non-primitive generator, no valid bound, disconnected graph) |
//! | 6 | dimension above the dense limit |
//! | 7 | invalid initial state or invalid arguments |

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "davies", version, about = "Davies generator gap bounds and exact oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the instance document of a model family member.
    Example(ExampleArgs),
    /// Evaluate all gap bounds, with exact oracles unless `--no-oracle`.
    Bounds(BoundsArgs),
    /// Gap of the full generator and of each block.
    Exact(ExactArgs),
    /// Dump the Bohr index, blocks, transition graphs and spanning trees.
    Blocks(BlocksArgs),
    /// Evaluate a model family over a grid of sizes and inverse temperatures.
    Sweep(SweepArgs),
    /// Evolve an initial state and compare its distance to equilibrium with the bound.
    Evolve(EvolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitialState {
    /// Projector onto the least populated level.
    Worst,
    /// The Gibbs state itself.
    Sigma,
    /// Projector onto the most populated level.
    Ground,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// System size: `N` for counterexample and particle_line, `D` for oscillator and d_level.
    #[arg(long, default_value_t = 8)]
    size: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Inverse temperature in units of the level spacing.
    #[arg(long = "K", alias = "k", default_value_t = 1.0)]
    k: f64,
    /// Energy offset of the particle_line spectrum.
    #[arg(long, default_value_t = 0.0)]
    g: f64,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Model family: counterexample, oscillator, particle_line or d_level.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    example: Option<String>,
    /// JSON instance document.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    size: Option<usize>,
    #[arg(long, conflicts_with = "input")]
    gamma: Option<f64>,
    /// Inverse temperature in units of the level spacing (model families only).
    #[arg(long = "K", alias = "k", conflicts_with_all = ["input", "beta"])]
    k: Option<f64>,
    #[arg(long, conflicts_with = "input")]
    g: Option<f64>,
    /// Inverse temperature; overrides the document value or sets `K` of a model family.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    /// counterexample, oscillator, particle_line or d_level.
    name: String,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Mixing-time accuracy.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Skip the exact eigensolver oracles.
    #[arg(long)]
    no_oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct BlocksArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Model family: counterexample, oscillator, particle_line or d_level.
    #[arg(long)]
    example: String,
    /// Sizes: comma-separated values or inclusive ranges `lo:hi[:step]`, e.g. `4:200` or `4,8,16`.
    #[arg(long)]
    size: String,
    /// Inverse temperatures (`K`), comma-separated.
    #[arg(long, alias = "K")]
    beta: String,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    g: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Skip the exact oracle columns.
    #[arg(long)]
    no_oracle: bool,
    /// Skip the bound columns.
    #[arg(long)]
    no_bounds: bool,
    /// Use the full-generator gap for `lambda_exact` when the dimension allows it.
    #[arg(long)]
    dense_oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = InitialState::Worst)]
    rho0: InitialState,
    /// Output times, comma-separated; sorted ascending in the output.
    #[arg(long, default_value = "0,0.5,1,2,5,10,20,50")]
    times: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Example(a) => commands::example(&a),
        Command::Bounds(a) => commands::bounds(&a),
        Command::Exact(a) => commands::exact(&a),
        Command::Blocks(a) => commands::blocks(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Evolve(a) => commands::evolve(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("davies: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
