#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use nqp_core::cli::{
    cmd_export_field, cmd_normalize, cmd_pipeline, cmd_shadow, cmd_simulate, cmd_spectrum, cmd_verify, CliError,
    CommandOutcome, RunConfig,
};

/// Normal forms for damped/rotational vector fields and the two-layer spin-orbit model.
#[derive(Parser)]
#[command(name = "nqp", version)]
struct Cli {
    /// Run configuration (`key = value` lines); defaults to the reference setup.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Horizon cap for the shadowing experiment.
    #[arg(long, global = true)]
    cap_horizon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and eigenvectors of the linearized block, with window checks.
    Spectrum,
    /// Iterated normal form; writes the ledger.
    Normalize,
    /// The four-step normalization of the two-layer model.
    Pipeline,
    /// Shadowing experiment against the damped reference.
    Shadow,
    /// Seeded property suite: cauchy, bracket, lie-tail, homological, conjugation, pencil, ultraviolet.
    Verify { suite: String },
    /// Integrate the full nonlinear system.
    Simulate,
    /// Write perturbations and model fields in the series text format.
    ExportField,
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = cli.cap_horizon {
        if !(t > 0.0) {
            return Err(CliError::Setting(format!("--cap-horizon must be positive, got {t}")));
        }
        cfg.cap_horizon = t;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<CommandOutcome, CliError> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Normalize => cmd_normalize(&cfg),
        Command::Pipeline => cmd_pipeline(&cfg),
        Command::Shadow => cmd_shadow(&cfg),
        Command::Verify { suite } => cmd_verify(&cfg, suite),
        Command::Simulate => cmd_simulate(&cfg),
        Command::ExportField => cmd_export_field(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.summary);
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {:#}", anyhow::Error::from(e));
            ExitCode::from(code as u8)
        }
    }
}
