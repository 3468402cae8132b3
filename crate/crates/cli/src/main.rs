use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use diskflow_cli::commands;
use diskflow_cli::config::{Config, ConfigError};

#[derive(Parser)]
#[command(
    name = "diskflow",
    about = "Experiments on holomorphic semigroups of the unit disk: invariant checks, figure data, convergence, flows, and valence counting"
)]
struct Cli {
    /// Experiment configuration file (key = value lines under [sections])
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV/SVG artifacts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Size of the worker pool for grid sweeps (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for target sampling in `valence`
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full registered invariant suite
    Check,
    /// Emit circle-image curve data (and optionally SVG) per configured map
    Figure,
    /// Convergence table of an approximant family against its target
    Approx,
    /// Integrate one flow line and export it as t,re,im
    Flow,
    /// Export the k-valence map of the eigenvalue plane
    Spectrum,
    /// Measure the valence of a configured map by argument counting
    Valence,
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<Config> {
    let path = path
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("this command needs --config <path>"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    Ok(Config::parse(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("failed to size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }

    let result: anyhow::Result<()> = match cli.command {
        Command::Check => return ExitCode::from(commands::cmd_check() as u8),
        Command::Figure => load_config(&cli.config)
            .and_then(|config| commands::cmd_figure(&config, &cli.out).map(|_| ())),
        Command::Approx => load_config(&cli.config)
            .and_then(|config| commands::cmd_approx(&config, &cli.out).map(|_| ())),
        Command::Flow => load_config(&cli.config)
            .and_then(|config| commands::cmd_flow(&config, &cli.out).map(|_| ())),
        Command::Spectrum => load_config(&cli.config)
            .and_then(|config| commands::cmd_spectrum(&config, &cli.out).map(|_| ())),
        Command::Valence => load_config(&cli.config)
            .and_then(|config| commands::cmd_valence(&config, &cli.out, cli.seed).map(|_| ())),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
