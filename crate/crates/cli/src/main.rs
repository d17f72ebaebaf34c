//! `spectral-gate`: certification, bound suites, oracles and continuum runs
//! with reproducible JSON/CSV artifacts.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "spectral-gate", version, about)]
pub struct Cli {
    /// JSON file with {"eq_tol", "gamma_margin", "osc_zero_tol"}.
    #[arg(long, global = true)]
    pub tolerances: Option<PathBuf>,
    /// Write a run manifest (inputs, outputs, hashes, timing) here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Free,
    Alternating,
    Extremal,
    Wvn,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Certified,
    Violated,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a potential.
    Gen {
        kind: GenKind,
        /// Number of sites (for extremal: the site of the sharp value).
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.75)]
        alpha: f64,
        #[arg(long, default_value_t = spectral_gate::corpus::CORPUS_SEED)]
        seed: u64,
        /// Position in the seeded random stream.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute Verblunsky coefficients and certify the absence of bound states.
    Certify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Horizon (defaults to the number of sites in the input).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Expect::Certified)]
        expect: Expect,
        /// Full result including γ.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Edge solution u (E = 2) or w (E = −2).
    Evolve {
        #[arg(long, allow_hyphen_values = true, default_value = "+2")]
        edge: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrete Prüfer evolution at E = 2 cos k.
    Prufer {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verblunsky-coefficient and potential bound suites.
    Bounds {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Eigenvalues of the N×N truncation by Sturm bisection.
    Eig {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        outside_only: bool,
    },
    /// Continuum Γ fields, bounds, decomposition and Prüfer run.
    Continuum {
        /// `free`, `damped_sine`, `sparse_oscillation`, a CSV path or an expression in x.
        #[arg(long, allow_hyphen_values = true)]
        potential: String,
        #[arg(long, default_value_t = 10.0)]
        xmax: f64,
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Field CSV `x,gamma_e,gamma_o,u,v`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Prüfer CSV `x,logR,theta`.
        #[arg(long)]
        prufer_out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the full verification over a corpus configuration.
    VerifyAll {
        /// Corpus configuration (JSON); the built-in corpus when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Drop per-n traces from the report.
        #[arg(long)]
        no_traces: bool,
    },
    /// Re-hash the files recorded in a run manifest.
    CheckManifest { path: PathBuf },
}

/// What a command produced: pass/fail, files read and written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub pass: bool,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let tol = match commands::load_tolerances(cli.tolerances.as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = match commands::run(&cli.command, &tol) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(path) = &cli.manifest {
        let mut inputs = outcome.inputs.clone();
        inputs.extend(cli.tolerances.iter().cloned());
        let m = RunManifest::build(
            std::env::args().collect(),
            &inputs,
            &outcome.outputs,
            tol,
            start.elapsed(),
            outcome.pass,
        )
        .and_then(|m| m.write(path));
        if let Err(e) = m {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
