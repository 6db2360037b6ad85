//! `hetnet-dc`: figure datasets and self-checks for decoupled dual
//! connectivity in two-tier networks.

mod config;
mod dataset;
mod figures;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, Sweep};
use figures::Figure;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Model(#[from] hetnet_dc::Error),
}

impl CliError {
    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Check(m) => m.clone(),
            CliError::Model(e) => e.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use hetnet_dc::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Model(E::Param(_) | E::Config(_)) => 2,
            CliError::Check(_) | CliError::Model(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hetnet-dc", version, about = "Association probabilities, distance laws and uplink capacity under decoupled dual connectivity")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count (at least 10000).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `name=start:stop:steps` with name one of lambda_s_ratio, p_s_dbm, alpha.
    #[arg(long, global = true)]
    sweep: Option<String>,
    #[arg(long, global = true)]
    lambda_s_ratio: Option<f64>,
    #[arg(long = "ps-dbm", global = true)]
    ps_dbm: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Skip the Monte Carlo columns.
    #[arg(long, global = true)]
    no_monte_carlo: bool,
    /// Any configuration key, applied after every other option. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Association probabilities.
    Probabilities {
        #[arg(long, value_enum, default_value_t = ProbFigure::Fig2)]
        figure: ProbFigure,
    },
    /// Conditional serving distance densities.
    Distances,
    /// Link spectral efficiency and capacity comparisons.
    Capacity {
        #[arg(long, value_enum, default_value_t = CapFigure::Fig5a)]
        figure: CapFigure,
    },
    /// Run every self-check and write validate.csv.
    Validate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProbFigure {
    Fig2,
    Fig3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CapFigure {
    Fig5a,
    Fig5b,
    Fig6,
    Fig7,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &cli.sweep {
        cfg.sweep = Some(Sweep::parse(v)?);
    }
    if let Some(v) = cli.lambda_s_ratio {
        cfg.set("lambda_s_ratio", &v.to_string())?;
    }
    if let Some(v) = cli.ps_dbm {
        cfg.set("p_s_dbm", &v.to_string())?;
    }
    if let Some(v) = cli.alpha {
        cfg.set("alpha", &v.to_string())?;
    }
    if cli.no_monte_carlo {
        cfg.monte_carlo = false;
    }
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_figure(cfg: &ExperimentConfig, fig: Figure) -> Result<(), CliError> {
    let t = fig.build(cfg)?;
    let path = cfg.out.join(format!("{}.csv", fig.name()));
    t.write(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = configure(cli)?;
    match &cli.command {
        Command::Probabilities { figure } => write_figure(
            &cfg,
            match figure {
                ProbFigure::Fig2 => Figure::Fig2,
                ProbFigure::Fig3 => Figure::Fig3,
            },
        ),
        Command::Distances => write_figure(&cfg, Figure::Fig4),
        Command::Capacity { figure } => write_figure(
            &cfg,
            match figure {
                CapFigure::Fig5a => Figure::Fig5a,
                CapFigure::Fig5b => Figure::Fig5b,
                CapFigure::Fig6 => Figure::Fig6,
                CapFigure::Fig7 => Figure::Fig7,
            },
        ),
        Command::Validate => {
            let checks = validate::run(&cfg)?;
            for (i, c) in checks.iter().enumerate() {
                println!(
                    "{:>3} {} {}: {:.4e} (tolerance {:.4e})",
                    i + 1,
                    if c.pass() { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            let path = cfg.out.join("validate.csv");
            validate::table(&cfg, &checks).write(&path)?;
            println!("{}", path.display());
            let failed = checks.iter().filter(|c| !c.pass()).count();
            if failed > 0 {
                return Err(CliError::Check(format!("{failed} of {} checks failed", checks.len())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hetnet-dc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
