//! `balred`: runs model-reduction experiments described by TOML files and
//! writes the results as CSV.

mod config;
mod error;
mod output;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{Overrides, Task};
use error::CliError;
use output::RunInfo;

#[derive(Parser, Debug)]
#[command(name = "balred", version, about = "Balanced-truncation experiment runner")]
struct Cli {
    /// Run single-threaded so that repeated runs are bitwise reproducible.
    #[arg(long, global = true)]
    deterministic: bool,

    /// Directory for the artifacts (overrides `output_dir` in the file).
    #[arg(long, global = true, value_name = "PATH")]
    output_dir: Option<PathBuf>,

    /// Random seed (overrides `seed` in the file).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the task named in the configuration file.
    Run { config: PathBuf },
    /// Sweep ATIA tolerances and compare against dense balanced truncation.
    Compare { config: PathBuf },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if cli.deterministic {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure thread pool: {e}")))?;
    }
    let (path, task) = match cli.command {
        Command::Run { config } => (config, None),
        Command::Compare { config } => (config, Some(Task::Compare)),
    };
    let overrides = Overrides { task, seed: cli.seed, output_dir: cli.output_dir };
    let cfg = config::load(&path, &overrides)?;
    let start = Instant::now();
    let artifacts = tasks::execute(&cfg)?;
    let info = RunInfo {
        deterministic: cli.deterministic,
        threads: rayon::current_num_threads(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_all(&cfg, &artifacts, &info)?;
    Ok(artifacts.converged)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: iteration did not converge; artifacts were written");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
