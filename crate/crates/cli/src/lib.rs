//! Command-line driver: configuration, reports and reproducibility plumbing.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use choquard_core::CoreError;

use crate::config::{Overrides, RunConfig};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Error = 1,
    Regime = 2,
    NotConverged = 3,
    VerificationFailed = 4,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Maps an error escaping a command onto an exit status.
    pub fn from_error(err: &anyhow::Error) -> Self {
        match err.chain().find_map(|e| e.downcast_ref::<CoreError>()) {
            Some(CoreError::Regime(_)) => Status::Regime,
            Some(CoreError::NotConverged { .. }) => Status::NotConverged,
            _ => Status::Error,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "choquard-lab", version, about = "Normalized ground states of Choquard equations with a local perturbation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "CHOQUARD_LAB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Sharp constants with provenance and error estimates.
    Constants,
    /// Minimize the energy on the Pohožaev manifold.
    Solve,
    /// Sweep the local coefficient across the mass-critical threshold.
    Sweep,
    /// Run the invariant and oracle suites.
    Verify,
    /// Bubble fiber maxima against the critical level.
    Gapcheck,
}

pub fn run(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = file.resolve(&Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
    })?;
    match cli.command {
        Command::Constants => commands::constants(&config),
        Command::Solve => commands::solve(&config),
        Command::Sweep => commands::sweep(&config),
        Command::Verify => commands::verify(&config),
        Command::Gapcheck => commands::gapcheck(&config),
    }
}
