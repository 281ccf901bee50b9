use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Outcome};
use crate::error::{CliError, Result};
use crate::experiment::{Experiment, RunSettings};

#[derive(Debug, Parser)]
#[command(
    name = "gtw",
    version,
    about = "Generalized travelling waves of quasilinear hyperbolic systems"
)]
pub struct Args {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override one tolerance, e.g. `--tol-override residual=1e-6`. Repeatable.
    #[arg(long = "tol-override", value_name = "K=V", global = true)]
    pub tol_override: Vec<String>,
    /// Fixed-step integration everywhere, for bit-reproducible reruns.
    #[arg(long, global = true)]
    pub fixed_step: bool,
    /// Number of characteristics seeded by the characteristic solvers.
    #[arg(long, value_name = "N", global = true)]
    pub seed_count: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenstructure at the states of `[decompose]`, as CSV.
    Decompose,
    /// Construct and verify the generalized travelling wave of `[frame]`.
    Gtw,
    /// Residuals of stored fields, and their difference when two are given.
    Verify {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// Finite-volume run of `[simulate]`.
    Simulate,
    /// Simple wave of `[simple_wave]`.
    SimpleWave,
    /// Characteristic solution of `[case_i]`.
    CaseI,
    /// Characteristic solution of `[case_ii]`.
    CaseIi,
    /// Refinement study of `[convergence]`.
    Convergence,
}

impl Args {
    fn settings(&self) -> RunSettings {
        RunSettings {
            out: self.out.clone(),
            tol_overrides: self.tol_override.clone(),
            fixed_step: self.fixed_step,
            seed_count: self.seed_count,
        }
    }

    fn experiment(&self) -> Result<Option<Experiment>> {
        self.config
            .as_ref()
            .map(|p| Experiment::from_path(p, self.settings()))
            .transpose()
    }
}

/// Run one command. Files are written before any failed check is reported.
pub fn run(args: &Args) -> Result<Outcome> {
    let exp = args.experiment()?;
    if let Command::Verify { files } = &args.command {
        let out_dir = args.out.clone().or_else(|| exp.as_ref().map(|e| e.out_dir()));
        return commands::verify(exp.as_ref(), files, out_dir.as_deref());
    }
    let exp = exp.ok_or_else(|| CliError::config("--config is required"))?;
    match args.command {
        Command::Decompose => commands::decompose(&exp),
        Command::Gtw => commands::gtw(&exp),
        Command::Simulate => commands::simulate(&exp),
        Command::SimpleWave => commands::simple_wave(&exp),
        Command::CaseI => commands::case_i(&exp),
        Command::CaseIi => commands::case_ii(&exp),
        Command::Convergence => commands::convergence(&exp),
        Command::Verify { .. } => unreachable!(),
    }
}
