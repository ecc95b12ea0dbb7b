use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dfs_scout::commands;
use dfs_scout::config::{ExperimentConfig, Overrides};
use dfs_scout::{HarnessError, EXIT_PROTOCOL_FAILURE};
use dfs_scout_core::tomography::Shots;

#[derive(Parser)]
#[command(
    name = "dfs-scout",
    version,
    about = "Locate decoherence-free subspaces from reversed tomography trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides `seeds.master`.
    #[arg(long)]
    seed: Option<u64>,
    /// Shots per setting, or `inf` for exact probabilities.
    #[arg(long)]
    shots: Option<Shots>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Find a 1D DFS, and pair every trial of a `trials`-trial ensemble.
    Identify(Common),
    /// DFS fidelity against swap probability, with confidence bands.
    SweepSwap(Common),
    /// Average purity of the identified 3D subspace against the full space.
    PuritySweep(Common),
    /// Failure rate against shots per setting.
    FailureScaling(Common),
    /// Group eigenvectors into all invariant subspaces.
    Discover(Common),
}

fn init_threads() -> Result<(), HarnessError> {
    let Ok(raw) = std::env::var("DFS_SCOUT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        HarnessError::Config(format!(
            "DFS_SCOUT_THREADS = {raw:?} is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(Vec<PathBuf>, bool), HarnessError> {
    init_threads()?;
    let (cmd, common) = match &cli.command {
        Command::Identify(c) => ("identify", c),
        Command::SweepSwap(c) => ("sweep-swap", c),
        Command::PuritySweep(c) => ("purity-sweep", c),
        Command::FailureScaling(c) => ("failure-scaling", c),
        Command::Discover(c) => ("discover", c),
    };
    let overrides = Overrides {
        seed: common.seed,
        shots: common.shots,
        out: common.out.clone(),
    };
    let cfg = ExperimentConfig::load(&common.config, &overrides)?;
    Ok(match cmd {
        "identify" => {
            let o = commands::identify(&cfg)?;
            (o.files, o.protocol_failed)
        }
        "sweep-swap" => {
            let o = commands::sweep_swap(&cfg)?;
            (o.files, o.protocol_failed)
        }
        "purity-sweep" => {
            let o = commands::purity_sweep(&cfg)?;
            (o.files, o.protocol_failed)
        }
        "failure-scaling" => {
            let o = commands::failure_scaling(&cfg)?;
            (o.files, o.protocol_failed)
        }
        _ => {
            let o = commands::discover(&cfg)?;
            (o.files, o.protocol_failed)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((files, failed)) => {
            for f in files {
                println!("{}", f.display());
            }
            if failed {
                eprintln!("dfs-scout: protocol did not produce a result");
                ExitCode::from(EXIT_PROTOCOL_FAILURE as u8)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("dfs-scout: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
