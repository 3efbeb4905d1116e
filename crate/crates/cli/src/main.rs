mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Agent-based limit order book simulator for liquidity-risk analysis.
#[derive(Debug, Parser)]
#[command(name = "liqsim", version)]
pub struct Cli {
    /// TOML run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rebuild the book from tick files and extract order records.
    Ingest,
    /// Estimate every model input from tick files and write a bundle.
    Calibrate,
    /// Run the market, optionally with one strategy as a paired experiment.
    Simulate,
    /// Average market-impact curves of the configured strategies.
    Impact,
    /// Liquidity-risk surface over horizons and sizes.
    Surface,
    /// Mean-variance frontier of the configured strategies.
    Frontier,
    /// Print configuration help.
    Config {
        /// Print a commented example with every default.
        #[arg(long)]
        example: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let domain = e.chain().any(|c| c.downcast_ref::<liqsim::Error>().is_some_and(liqsim::Error::is_domain));
            ExitCode::from(if domain { 1 } else { 2 })
        }
    }
}
