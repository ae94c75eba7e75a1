//! Experiment runner for the adiabatically assisted VQE.
//!
//! Subcommands `vqe`, `aavqe`, `gen-ec` and `spectrum` read a TOML config
//! (see `recipes/`), apply command line overrides, and write CSV traces and
//! JSON summaries into the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::GenEcArgs;
use crate::config::{ConfigFile, ExperimentConfig, Overrides};
use crate::error::{exit, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "aavqe", version, about = "Adiabatically assisted VQE experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plain VQE on the problem Hamiltonian, one run per seed.
    Vqe(RunArgs),
    /// AAVQE from the driver to the problem Hamiltonian, one run per seed.
    Aavqe(RunArgs),
    /// Generate unique-solution EXACT COVER instances.
    GenEc(GenArgs),
    /// Gap and transition-amplitude profile along the interpolation.
    Spectrum(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seeds: "0..20", "0..=19", "3" or "1,4,9".
    #[arg(long)]
    pub seeds: Option<String>,
    /// Shots per measurement group, or "exact".
    #[arg(long)]
    pub shots: Option<String>,
    /// Interpolation step.
    #[arg(long = "delta-s")]
    pub delta_s: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Config with a [gen_ec] section.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "n-vars")]
    pub n_vars: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Seed of the first instance; instance i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "max-attempts")]
    pub max_attempts: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = Overrides {
            seeds: self.seeds.as_deref().map(config::parse_seeds).transpose()?,
            shots: self.shots.as_deref().map(config::parse_shots).transpose()?,
            delta_s: self.delta_s,
            out: self.out.clone(),
            workers: self.workers,
        };
        ExperimentConfig::resolve(&file, &flags)
    }
}

impl GenArgs {
    pub fn resolve(&self) -> Result<GenEcArgs> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let section = file.gen_ec.clone().unwrap_or_default();
        Ok(GenEcArgs {
            n_vars: self
                .n_vars
                .or(section.n_vars)
                .ok_or_else(|| CliError::invalid("gen-ec needs --n-vars"))?,
            count: self.count.or(section.count).unwrap_or(1),
            seed: self.seed.or(section.seed).unwrap_or(1),
            max_attempts: self.max_attempts.or(section.max_attempts).unwrap_or(config::DEFAULT_MAX_ATTEMPTS),
            out: self.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("instances")),
        })
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Vqe(a) => commands::cmd_vqe(&a.experiment()?).map(drop),
        Command::Aavqe(a) => commands::cmd_aavqe(&a.experiment()?).map(drop),
        Command::Spectrum(a) => commands::cmd_spectrum(&a.experiment()?).map(drop),
        Command::GenEc(a) => commands::cmd_gen_ec(&a.resolve()?).map(drop),
    }
}

/// Parses `args`, runs, reports errors on stderr, and returns the exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::VALIDATION } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
