//! dulac: normal forms of contracting germ cocycles and Lyapunov exponents
//! of projective endomorphisms, driven by a single TOML experiment file.
//!
//! `dulac <subcommand> --config <file> --out <dir>`. The flags carry no
//! numbers; everything quantitative lives in the config so a run is
//! reproducible from the file alone. Outputs are CSV (data), JSON (summaries
//! and the manifest) and a plain text jet format (maps). On failure a
//! machine-readable error record goes to stderr and, when possible, to
//! error.json under --out.

mod config;
mod emit;
mod error;
mod model;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::run::Sub;

#[derive(Parser)]
#[command(name = "dulac", version, about = "Normal form and Lyapunov exponent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Classify monomial degrees against a contraction spectrum.
    Resonance(RunArgs),
    /// Reduce a germ cocycle to its resonant normal form.
    Normalize(RunArgs),
    /// Iterate the renormalization operator to its limit transform.
    Renorm(RunArgs),
    /// Block-diagonalize a periodic linear cocycle.
    Reduce(RunArgs),
    /// Lyapunov estimates from repulsive periodic points over a period range.
    Cycles(RunArgs),
    /// Birkhoff-average reference value of the exterior Lyapunov sum.
    Birkhoff(RunArgs),
    /// Contraction-side checks along one repelling cycle.
    VerifyNt(RunArgs),
    /// Fraction of repulsive points already at the limit average.
    Density(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, args) = match &cli.command {
        Command::Resonance(a) => (Sub::Resonance, a),
        Command::Normalize(a) => (Sub::Normalize, a),
        Command::Renorm(a) => (Sub::Renorm, a),
        Command::Reduce(a) => (Sub::Reduce, a),
        Command::Cycles(a) => (Sub::Cycles, a),
        Command::Birkhoff(a) => (Sub::Birkhoff, a),
        Command::VerifyNt(a) => (Sub::VerifyNt, a),
        Command::Density(a) => (Sub::Density, a),
    };
    match run::run(sub, &args.config, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({
                "error": {
                    "class": e.class(),
                    "kind": e.kind(),
                    "message": e.to_string(),
                }
            });
            let text = serde_json::to_string_pretty(&record).expect("serializing error record");
            eprintln!("{text}");
            // Best effort; the record already went to stderr.
            if std::fs::create_dir_all(&args.out).is_ok() {
                let _ = std::fs::write(args.out.join("error.json"), format!("{text}\n"));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
