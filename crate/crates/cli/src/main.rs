//! `ellipsorb` command-line driver.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures, 1 for anything else (for example an unwritable output
//! directory).

mod config;
mod design;
mod output;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use ellipsorb::error::Error;

use config::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "ellipsorb", version, about = "Plasmonic ellipse absorber simulation and design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the per-wavelength loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the randomized steps; overrides any seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct Io {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Absorptance spectra of particle configurations.
    Sweep(Io),
    /// Reduced-basis versus Nyström error tables.
    Validate(Io),
    /// Single-particle absorptance dataset for the initializer.
    Dataset(Io),
    /// Initial design from a dataset and a target spectrum.
    Init(Io),
    /// Projected gradient descent from an initial design.
    Optimize(Io),
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config::config_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Sweep(io) => sweep::run(&io.config, &io.out, seed),
        Command::Validate(io) => validate::run(&io.config, &io.out, seed),
        Command::Dataset(io) => design::dataset(&io.config, &io.out, seed),
        Command::Init(io) => design::init(&io.config, &io.out, seed),
        Command::Optimize(io) => design::optimize(&io.config, &io.out, seed),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidParameter { .. } | Error::Mismatch { .. }) => 2,
        Some(Error::Singular { .. } | Error::NonFinite { .. }) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn errors_map_to_exit_codes() {
        let singular: Result<()> = Err(Error::Singular { lambda: 300.0, cond: 1e20 }.into());
        assert_eq!(exit_code(&singular.context("solving").unwrap_err()), 3);
        let nan = anyhow::Error::from(Error::NonFinite { context: "h".into() });
        assert_eq!(exit_code(&nan), 3);
        let bad = anyhow::Error::from(Error::InvalidParameter {
            name: "a",
            reason: "negative".into(),
        });
        assert_eq!(exit_code(&bad), 2);
        assert_eq!(exit_code(&config::config_error("x")), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("disk full")), 1);
    }
}
