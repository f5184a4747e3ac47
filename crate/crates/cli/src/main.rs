use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use transtab_cli::{check, init, load, reduce, run_batch, CliError};

/// Transient-stability simulation of multi-machine power systems.
#[derive(Parser)]
#[command(name = "transtab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print Y_t, Y_r, T_2 and the internal-bus matrix Y for every stage.
    Reduce { file: PathBuf },
    /// Print the initial state and the equilibrium residual.
    Init { file: PathBuf },
    /// Simulate and write the trajectory as CSV.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Trajectory path (single scenario only).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenarios simulated concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Validate a scenario file without running it.
    Check { file: PathBuf },
}

fn single(file: &Path, f: fn(&transtab_cli::Loaded) -> Result<String, CliError>) -> Result<String, CliError> {
    f(&load(file)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Reduce { file } => vec![single(file, reduce)],
        Command::Init { file } => vec![single(file, init)],
        Command::Check { file } => vec![single(file, |l| Ok(check(l)))],
        Command::Run { files, out, jobs } => run_batch(files, out.as_deref(), *jobs),
    };
    let mut stdout = std::io::stdout().lock();
    let mut code = 0;
    for result in outcome {
        match result {
            Ok(text) => {
                let _ = write!(stdout, "{text}");
            }
            Err(e) => {
                if let CliError::Divergence { summary, .. } = &e {
                    let _ = write!(stdout, "{summary}");
                }
                let _ = stdout.flush();
                eprintln!("error: {e}");
                code = code.max(e.exit_code());
            }
        }
    }
    ExitCode::from(code as u8)
}
