use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use warpd_cli::{cmd_bench_config, cmd_solve_config, demo_config, load_config, threads_from_env, CliError, Overrides};

#[derive(Parser)]
#[command(name = "warpd", version, about = "Restarted primal-dual experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configured solve and write trace.csv, summary.json and recon.pgm.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Iterations and time to tolerance for several algorithms, averaged over repeats.
    Bench {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a canned experiment: trivial, sparse, sparse-gaussian, matrix-completion, pauli, tv, mixed.
    Demo {
        family: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Instance seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Inner iterations between trace rows (0 = one row per restart).
    #[arg(long)]
    trace_stride: Option<usize>,
    /// Wall-clock cap in seconds.
    #[arg(long)]
    max_seconds: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trace_stride: self.trace_stride,
            max_seconds: self.max_seconds,
            out: self.out.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Solve { config, flags } => {
            let dir = cmd_solve_config(load_config(&config)?, &flags.overrides())?;
            println!("wrote {}", dir.display());
        }
        Cmd::Bench { config, flags } => {
            let threads = threads_from_env()?;
            print!("{}", cmd_bench_config(load_config(&config)?, &flags.overrides(), threads)?);
        }
        Cmd::Demo { family, flags } => {
            let dir = cmd_solve_config(demo_config(&family)?, &flags.overrides())?;
            println!("wrote {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("warpd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
