//! `q4embed`: builds the embedded-eigenvalue constructions, emits their
//! documents and re-verifies emitted documents.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "q4embed",
    version,
    about = "Fourth-order operators with an embedded eigenvalue"
)]
pub struct Cli {
    /// Output directory for emitted files.
    #[arg(long, global = true, env = "Q4EMBED_OUT_DIR", default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Odd δ/δ′ example with eigenvalue 1.
    Singular(GridArgs),
    /// Even δ/δ′ example with eigenvalue 1.
    EvenVariant(GridArgs),
    /// Even piecewise-constant potential with eigenvalue k0⁴.
    Piecewise(PiecewiseArgs),
    /// Square of the Schrödinger operator with V = −2 sech²x.
    Hsquare(SpectralArgs),
    /// Re-run every check on an emitted JSON document.
    Verify(VerifyArgs),
    /// z₁(B) and z₃(B) across the continuation bracket.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long = "grid-step", default_value_t = q4embed::construction::DEFAULT_GRID_STEP)]
    pub grid_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PiecewiseArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub k0: f64,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long = "A", default_value_t = 1.0, allow_negative_numbers = true)]
    pub barrier: f64,
    #[arg(long = "X", default_value_t = 25.0, allow_negative_numbers = true)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1500)]
    pub n: usize,
    #[arg(long = "grid-step", default_value_t = q4embed::construction::DEFAULT_GRID_STEP)]
    pub grid_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    #[arg(long = "X", default_value_t = 20.0, allow_negative_numbers = true)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Emitted JSON document (piecewise spec, singular example or hsquare run).
    pub document: PathBuf,
    /// Grid half-width for the spectral check of a piecewise spec.
    #[arg(long = "X", allow_negative_numbers = true)]
    pub half_width: Option<f64>,
    /// Interior points for the spectral check of a piecewise spec.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub k0: f64,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long = "A", default_value_t = 1.0, allow_negative_numbers = true)]
    pub barrier: f64,
    /// Start jet `u,u',u'',u'''` at 0 instead of the construction's jet at b.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub jet: Option<Vec<f64>>,
    #[arg(long, default_value_t = 64)]
    pub points: usize,
}

/// A failed run: exit code plus a one-line reason.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn validation(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind,
            message: message.into(),
        }
    }

    pub fn numerical(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: 3,
            kind,
            message: message.into(),
        }
    }
}

impl From<q4embed::Error> for Failure {
    fn from(e: q4embed::Error) -> Self {
        use q4embed::Error::*;
        let kind = match &e {
            Precondition(_) => "precondition",
            Domain(_) => "domain",
            InvalidPotential(_) => "invalid_potential",
            Saturation { .. } => "saturation",
            Propagation { .. } => "propagation",
            ZeroNotFound { .. } => "zero_not_found",
            Ordering(_) => "ordering",
            Bracket(_) => "bracket",
            Undecided { .. } => "undecided",
            DegenerateZero(_) => "degenerate_zero",
            Inconsistent(_) => "inconsistent",
            NoConvergence { .. } => "no_convergence",
        };
        let validation = matches!(e, Precondition(_) | Domain(_) | InvalidPotential(_));
        let message = e.to_string();
        if validation {
            Failure::validation(kind, message)
        } else {
            Failure::numerical(kind, message)
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::validation("io", e.to_string())
    }
}

fn main() -> ExitCode {
    let outcome = match Cli::try_parse() {
        Ok(cli) => commands::run(&cli),
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            Err(Failure::validation("usage", first))
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let line = f.message.replace('\n', " ");
            eprintln!("error code={} kind={} reason={line}", f.code, f.kind);
            ExitCode::from(f.code)
        }
    }
}
