//! `asga`: run the GA and ASGA optimizers, benchmark suites, eigenvalue dumps
//! and gain reports from the command line.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on configuration errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "asga", version, about = "Genetic optimization in active subspaces")]
struct Cli {
    /// Flat TOML file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files [default: out].
    #[arg(long, global = true, env = "ASGA_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads [default: available parallelism].
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one optimization and write its per-generation record.
    Optimize(OptimizeArgs),
    /// Run an experiment plan and write run, curve and gain tables.
    Bench(BenchArgs),
    /// Dump the gradient covariance spectrum with bootstrap brackets.
    Eigs(EigsArgs),
    /// Rebuild gain tables from the run files of a bench directory.
    Report(ReportArgs),
}

/// Hyperparameters shared by `optimize` and `bench`.
#[derive(Debug, Clone, Args)]
struct EvolutionArgs {
    /// Active dimension M, or "auto" for the largest spectral gap.
    #[arg(long)]
    active_dim: Option<String>,
    /// Back-mapped points per reduced individual (B).
    #[arg(long)]
    backward: Option<usize>,
    /// Hit-and-run moves discarded per inactive dimension when back-mapping.
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    mate_probability: Option<f64>,
    #[arg(long)]
    mutation_probability: Option<f64>,
    #[arg(long)]
    blx_alpha: Option<f64>,
    #[arg(long)]
    mutation_sigma2: Option<f64>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// Benchmark name, or "rbf" to optimize a surrogate fitted to --dataset.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// "ga" or "asga".
    #[arg(long)]
    method: Option<String>,
    /// Initial population size N0.
    #[arg(long)]
    n0: Option<usize>,
    /// Offspring per generation N.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV of samples (input columns, then the output column) for rbf mode.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Value returned outside the surrogate's box in rbf mode.
    #[arg(long)]
    penalty: Option<f64>,
    /// gaussian, multiquadric or thin-plate.
    #[arg(long)]
    kernel: Option<String>,
    /// Kernel shape parameter.
    #[arg(long)]
    shape: Option<f64>,
    #[command(flatten)]
    evolution: EvolutionArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// "desk" (minutes) or "full" (hours).
    #[arg(long)]
    plan: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the plan's runs per cell.
    #[arg(long)]
    runs: Option<usize>,
    #[command(flatten)]
    evolution: EvolutionArgs,
}

#[derive(Debug, Args)]
struct EigsArgs {
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Uniform samples used to build the subspace.
    #[arg(long)]
    samples: Option<usize>,
    /// Bootstrap replicates.
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Bench output directory [default: the output directory].
    #[arg(long)]
    input: Option<PathBuf>,
}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<ConfigError>()
            || matches!(
                cause.downcast_ref::<asga_core::Error>(),
                Some(asga_core::Error::Config { .. } | asga_core::Error::UnknownObjective(_))
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_config_error(&err) { 2 } else { 1 })
        }
    }
}
