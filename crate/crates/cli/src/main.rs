//! `nullfiber`: evaluate networks, inspect pulled-back metrics and trace
//! null curves from the command line.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nullfiber", version, about = "Fibers and null curves of smooth feed-forward networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the network output and every intermediate layer output at X.
    Eval {
        /// Network JSON file.
        spec: PathBuf,
        /// Comma-separated point.
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
    /// Kernel basis of the pulled-back metric at X on space --layer.
    Kernel {
        /// Network JSON file.
        spec: PathBuf,
        /// Comma-separated point.
        #[arg(allow_hyphen_values = true)]
        x: String,
        /// Space index: 0 is the input space, n the output space.
        #[arg(long, default_value_t = 0)]
        layer: usize,
        /// Relative singular-value threshold in (0, 1).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Trace the fiber through P and write one CSV row per vertex.
    Trace {
        /// Network JSON file.
        spec: PathBuf,
        /// Comma-separated start point.
        #[arg(allow_hyphen_values = true)]
        p: String,
        #[command(flatten)]
        trace: commands::TraceArgs,
        /// File with one start point per line; writes <out stem>.<k>.<ext> per seed.
        #[arg(long)]
        seeds: Option<PathBuf>,
    },
    /// Trace first-layer weights and biases that keep the output at X fixed.
    WeightTrace {
        /// Network JSON file.
        spec: PathBuf,
        /// Comma-separated point.
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        trace: commands::TraceArgs,
    },
    /// Decide whether X and Y lie in the same equivalence class.
    Certify {
        /// Network JSON file.
        spec: PathBuf,
        /// Comma-separated point.
        #[arg(allow_hyphen_values = true)]
        x: String,
        /// Comma-separated second point.
        #[arg(allow_hyphen_values = true)]
        y: String,
        /// Maximum number of search steps.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        /// Output gap below which X and Y count as one fiber.
        #[arg(long = "out-tol", default_value_t = 1e-9)]
        out_tol: f64,
        /// Step size of the search traces.
        #[arg(long, default_value_t = 0.05)]
        h: f64,
    },
    /// Validate a spec and report the rank of every weight matrix.
    Check {
        /// Network JSON file.
        spec: PathBuf,
        /// Relative singular-value threshold for the rank test.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval { spec, x } => commands::eval(&spec, &x),
        Command::Kernel { spec, x, layer, tol } => commands::kernel(&spec, &x, layer, tol),
        Command::Trace { spec, p, trace, seeds } => commands::trace(&spec, &p, &trace, seeds.as_deref()),
        Command::WeightTrace { spec, x, trace } => commands::weight_trace(&spec, &x, &trace),
        Command::Certify {
            spec,
            x,
            y,
            budget,
            out_tol,
            h,
        } => commands::certify(&spec, &x, &y, budget, out_tol, h),
        Command::Check { spec, tol } => commands::check(&spec, tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
