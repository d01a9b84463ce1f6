use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cvqkd_cli::{execute, load, write_outputs, CliError, Command};

#[derive(Parser)]
#[command(name = "cvqkd", version, about = "Temporal-mode CVQKD receiver studies")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Key rate against distance, with and without dispersion.
    Simulate(Args),
    /// Monte Carlo shot-noise calibration against the analytic value.
    Calibrate(Args),
    /// Rank the scenario's DSP kernels by mode-matching efficiency.
    CompareKernels(Args),
    /// Sweep the variable named in the scenario's sweep block.
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the CSV and report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the Monte Carlo seed in the scenario.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(command: Command, args: &Args) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    let scenario = load(&args.config)?;
    let output = execute(command, &scenario, args.seed)?;
    let (csv, report) = write_outputs(&scenario, &args.out, &output)?;
    print!("{}", output.report);
    println!("wrote {} and {}", csv.display(), report.display());
    match output.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Calibrate(a) => (Command::Calibrate, a),
        Sub::CompareKernels(a) => (Command::CompareKernels, a),
        Sub::Sweep(a) => (Command::Sweep, a),
    };
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match &e {
                CliError::Physics(inner) => inner.name(),
                CliError::Parse(_) => "ParseError",
                CliError::Validation(_) => "ValidationError",
                CliError::Calibration(_) => "CalibrationError",
                CliError::Io { .. } => "IoError",
            };
            eprintln!("error [{kind}]: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
