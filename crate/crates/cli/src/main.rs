use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sns_cli::{run, CliError, Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "sns",
    version,
    about = "SNS twin-field QKD key rates with discrete phase modulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Flat TOML config; missing keys take the standard defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file (stdout if absent).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Fiber length(s) in km, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 0..)]
    distance: Option<Vec<f64>>,

    /// Number of discrete phases.
    #[arg(long, global = true, value_name = "N")]
    phases: Option<u32>,

    #[arg(long, global = true, value_parser = ["3int", "4int"])]
    mode: Option<String>,

    /// Include detector efficiency in the repeaterless bound.
    #[arg(long, global = true)]
    plob_include_detector: bool,

    #[arg(long, global = true)]
    mu_x: Option<f64>,
    #[arg(long, global = true)]
    mu_y: Option<f64>,
    #[arg(long, global = true)]
    mu_z: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Key rate at fixed source settings.
    Rate,
    /// Optimized key rate for every (N, mode, L) combination, as CSV.
    Scan,
    /// Optimized key rate at a single point.
    Optimize,
    /// Check the decoy bounds against the photon-number oracle.
    Verify,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        distances: cli.distance.clone(),
        phases: cli.phases,
        mode: cli.mode.clone(),
        out: cli.out.clone(),
        plob_include_detector: cli.plob_include_detector,
        mu_x: cli.mu_x,
        mu_y: cli.mu_y,
        mu_z: cli.mu_z,
        epsilon: cli.epsilon,
    });
    let cmd = match cli.command {
        Sub::Rate => Command::Rate,
        Sub::Scan => Command::Scan,
        Sub::Optimize => Command::Optimize,
        Sub::Verify => Command::Verify,
    };
    run(
        cmd,
        &cfg,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
