use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pachner_walk::cli::{self, Beta, Overrides, RunConfig};

/// Quantum walk on a triangulated surface rewritten by 1-to-3 and 3-to-1 moves.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its outputs.
    Run(Common),
    /// Run one simulation per alpha (beta = 3 alpha) and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated alphas in (0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// A number or "3*alpha".
    #[arg(long, value_parser = parse_beta)]
    beta: Option<Beta>,
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    Beta::parse(s).map_err(|e| e.to_string())
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let config = base.with_overrides(&Overrides {
            steps: self.steps,
            alpha: self.alpha,
            beta: self.beta,
            out_dir: self.out.clone(),
        });
        config.validate()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let config = common.config()?;
            let outcome = cli::run(&config).with_context(|| format!("run failed; partial output in {}", config.out_dir.display()))?;
            eprintln!(
                "{} steps, {} moves, final norm {:.15}, outputs in {}",
                config.steps,
                outcome.moves,
                outcome.records.last().map_or(f64::NAN, |r| r.norm),
                config.out_dir.display()
            );
        }
        Command::Sweep { common, alphas } => {
            let config = common.config()?;
            let rows = cli::sweep(&alphas, &config).context("sweep failed")?;
            for r in rows {
                eprintln!("alpha {:e}: b = {:e}, tmax = {}{}", r.alpha, r.fit.b, r.fit.tmax, if r.fit.degenerate { " (degenerate)" } else { "" });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
