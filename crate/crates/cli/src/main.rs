//! `rte`: command-line driver for the transport solver.

mod manifest;
mod modes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rte", version, about = "Explicit upwind solver for the radiative transport equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a configuration and print its stability report.
    Check(RunArgs),
    /// Time-march to the final time, writing snapshots.
    Run(RunArgs),
    /// Iterate to the steady state with time-independent data.
    Steady(RunArgs),
    /// Manufactured-solution refinement studies on the configured medium and kernel.
    Convergence(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `output.directory` from the configuration, then `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run even when the stability conditions fail.
    #[arg(long)]
    pub force: bool,
    /// Worker threads for the solver; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (mode, args) = match &cli.command {
        Command::Check(a) => (modes::Mode::Check, a),
        Command::Run(a) => (modes::Mode::Run, a),
        Command::Steady(a) => (modes::Mode::Steady, a),
        Command::Convergence(a) => (modes::Mode::Convergence, a),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(modes::execute(mode, args) as u8)
}
