mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl From<gauge_levy::Error> for CliError {
    fn from(e: gauge_levy::Error) -> Self {
        use gauge_levy::Error::*;
        match e {
            Domain(_) | Contract(_) => CliError::Usage(e.to_string()),
            Numeric(_) | Classification(_) => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gauge-levy", version, about = "Modified Lévy Laplacians of parallel transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML). Not needed for `selftest`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for report.json and tables/.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Replace the seed from the config.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Check anti-self-duality and the Yang–Mills equation on a grid.
    VerifyInstanton,
    /// Modified Lévy Laplacian of transport over the curve family.
    Levy,
    /// Classify the self-dual holonomy and check the rotation curve.
    Holonomy,
    /// Yang–Mills action and topological charge.
    Charge,
    /// Convergence of the endpoint limit along shrinking reparameterizations.
    Lemma2,
    /// Structural invariant suite.
    Selftest,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let outcome = if let Command::Selftest = cli.command {
        commands::selftest(cli.seed_override.unwrap_or(0))?
    } else {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| CliError::Usage("--config is required for this command".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(s) = cli.seed_override {
            cfg.seed = s;
        }
        match cli.command {
            Command::VerifyInstanton => commands::verify_instanton(&cfg)?,
            Command::Levy => commands::levy(&cfg)?,
            Command::Holonomy => commands::holonomy(&cfg)?,
            Command::Charge => commands::charge(&cfg)?,
            Command::Lemma2 => commands::lemma2(&cfg)?,
            Command::Selftest => unreachable!("handled above"),
        }
    };
    let path = outcome.write(&cli.out_dir)?;
    println!(
        "{}: {} ({})",
        outcome.report.command,
        if outcome.report.pass { "PASS" } else { "FAIL" },
        path.display()
    );
    Ok(outcome.report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Numeric(_) => 3,
            })
        }
    }
}
