use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use resilience::{cmd_assess, cmd_simulate, cmd_size, cmd_stats, thread_cap, CliError, RunConfig};

/// Outage resilience of behind-the-meter DER systems.
///
/// Every subcommand reads a `key = value` config file; any key can be
/// overridden with `--key value` after the file name.
#[derive(Parser)]
#[command(name = "resil", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate outages from every step of the year: r.csv, summary.json
    Simulate(RunArgs),
    /// Survival probability curves from r.csv: curve.csv, by_hour.csv, by_month.csv
    Stats(RunArgs),
    /// Cheapest design surviving the outage window: design.json
    Size(RunArgs),
    /// size, then simulate, then stats
    Assess(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// `--key value` overrides
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "OVERRIDES"
    )]
    overrides: Vec<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_cap(std::env::var("RESIL_THREADS").ok().as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let (args, cmd): (_, fn(&RunConfig) -> _) = match &cli.command {
        Command::Simulate(a) => (a, cmd_simulate),
        Command::Stats(a) => (a, cmd_stats),
        Command::Size(a) => (a, cmd_size),
        Command::Assess(a) => (a, cmd_assess),
    };
    let cfg = RunConfig::load(&args.config, &args.overrides)?;
    for path in cmd(&cfg)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
