mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use noma_core::pair::Objective;

use crate::config::FileConfig;

/// Rate control and power allocation for two-user downlink NOMA in Poisson
/// cellular networks.
#[derive(Debug, Parser)]
#[command(name = "noma-lab", version)]
struct Cli {
    /// TOML configuration; a manifest.toml from an earlier run also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed for every stochastic section.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo runs for the sweep and cdf sections.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Allocate rates and powers to one user pair.
    Allocate(AllocateArgs),
    /// Tabulate the SIR threshold distribution.
    Cdf,
    /// Run the Monte-Carlo rate sweep.
    Sweep,
    /// Check the delivered outage against its target.
    Audit,
    /// Regenerate figure data.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
struct AllocateArgs {
    #[arg(long)]
    phi_a: Option<f64>,
    #[arg(long)]
    phi_b: Option<f64>,
    /// SIC residual factor in [0, 1].
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long)]
    total_power: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    EqualRate,
    MaxSumRate,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::EqualRate => Objective::EqualRate,
            ObjectiveArg::MaxSumRate => Objective::MaxSumRate,
        }
    }
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Figure ids such as 2b or 7a, comma separated, or "all".
    #[arg(long, value_delimiter = ',')]
    figure: Vec<String>,
}

pub struct RunContext {
    pub out: PathBuf,
    pub out_given: bool,
    pub quiet: bool,
}

fn run(cli: Cli) -> Result<()> {
    configure_workers()?;
    let mut cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    cfg.manifest = None;
    cfg.apply_overrides(cli.seed, cli.runs);
    let ctx = RunContext {
        out: cli.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        out_given: cli.out.is_some(),
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Allocate(args) => {
            let a = &mut cfg.allocate;
            a.phi_a = args.phi_a.or(a.phi_a);
            a.phi_b = args.phi_b.or(a.phi_b);
            a.mu = args.mu.or(a.mu);
            if let Some(o) = args.objective {
                a.objective = o.into();
            }
            if let Some(p) = args.total_power {
                a.total_power = p;
            }
            commands::allocate(&mut cfg, &ctx)
        }
        Command::Cdf => commands::cdf(&mut cfg, &ctx),
        Command::Sweep => commands::sweep(&mut cfg, &ctx),
        Command::Audit => commands::audit(&mut cfg, &ctx),
        Command::Figure(args) => {
            if !args.figure.is_empty() {
                cfg.figure.ids = args.figure;
            }
            commands::figure(&mut cfg, &ctx)
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(value) = std::env::var("NOMA_WORKERS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .with_context(|| format!("NOMA_WORKERS must be a positive integer, got {value:?}"))?;
    anyhow::ensure!(
        n > 0,
        "NOMA_WORKERS must be a positive integer, got {value:?}"
    );
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring worker pool")
}

/// Numerical failures exit with 2, everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numeric = err
        .chain()
        .filter_map(|e| e.downcast_ref::<noma_core::Error>())
        .any(noma_core::Error::is_numeric);
    if numeric {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
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

    #[test]
    fn numeric_failures_exit_with_two() {
        let err = anyhow::Error::new(noma_core::Error::NoConvergence {
            iterations: 3,
            lo: 0.0,
            hi: 1.0,
            residual: 1.0,
        })
        .context("allocating");
        assert_eq!(exit_code(&err), 2);
        let err = anyhow::Error::new(noma_core::Error::InvalidParameter {
            name: "mu",
            reason: "out of range".into(),
        });
        assert_eq!(exit_code(&err), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 1);
    }
}
