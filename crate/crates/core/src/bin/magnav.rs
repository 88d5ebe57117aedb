//! `magnav`: generate maps, run closed-loop simulations and weight sweeps.
//!
//! Exit codes: 0 on success, 1 on a usage or configuration error, 2 when a
//! run fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magnav::sim::{load_config, run_sim_on, sweep_ratios, write_trace, MapSpec, SimConfig};
use magnav::GridMap;

#[derive(Debug, Parser)]
#[command(
    name = "magnav",
    version,
    about = "Magnetic-anomaly navigation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a grid map from a Gaussian-source spec file.
    Genmap {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run one closed-loop simulation and write its trace as CSV.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the configured simulation over weight ratios and seeds.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        /// Comma-separated w_obs / w_goal ratios.
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<f64>,
        /// Number of seeds, counting up from the config's seed.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
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
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("magnav: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("magnav: {msg}");
            ExitCode::from(2)
        }
    }
}

fn config_err(e: magnav::Error) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: magnav::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load(path: &PathBuf) -> Result<(SimConfig, GridMap), Failure> {
    let cfg = load_config(path).map_err(config_err)?;
    let map = cfg.map.load().map_err(config_err)?;
    Ok((cfg, map))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Genmap { spec, output } => {
            let map = MapSpec::load(&spec)
                .and_then(|s| s.build())
                .map_err(config_err)?;
            map.save(&output).map_err(runtime_err)?;
            let (nx, ny) = map.dims();
            eprintln!("wrote {nx}x{ny} map to {}", output.display());
        }
        Command::Simulate { config, output } => {
            let (cfg, map) = load(&config)?;
            let records = run_sim_on(&map, &cfg).map_err(runtime_err)?;
            write_trace(&records, &output).map_err(runtime_err)?;
            eprintln!("wrote {} steps to {}", records.len(), output.display());
        }
        Command::Sweep {
            config,
            ratios,
            seeds,
            output,
        } => {
            let (cfg, map) = load(&config)?;
            if seeds == 0 {
                return Err(Failure::Config("--seeds must be at least 1".into()));
            }
            let seed_list: Vec<u64> = (0..seeds).map(|k| cfg.seed.wrapping_add(k)).collect();
            let summary = sweep_ratios(&cfg, &map, &ratios, &seed_list).map_err(config_err)?;
            summary.save(&output).map_err(runtime_err)?;
            for row in &summary.rows {
                eprintln!(
                    "ratio {:<5} {} mean {:.6} std {:.6} ok {} failed {}",
                    row.ratio,
                    summary.metric.name(),
                    row.mean,
                    row.std,
                    row.n_ok,
                    row.n_failed
                );
            }
            if summary.cells.iter().all(|c| c.outcome.is_err()) {
                return Err(Failure::Runtime("every run in the sweep failed".into()));
            }
        }
    }
    Ok(())
}
