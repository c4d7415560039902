use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use em_shield_cli::{parse_config_with, run, AlgorithmName, CliError, Command, Format, Overrides};

/// IRS-aided radar stealth, spoofing and covert link simulation.
#[derive(Debug, Parser)]
#[command(name = "em-shield", version)]
struct Args {
    /// Command to run; overrides `run.command` in the config.
    command: Option<Command>,
    /// Scenario file (TOML). Without one the default scenario is used.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmName>,
    /// Suppress the summary line.
    #[arg(short, long)]
    quiet: bool,
}

fn execute(args: Args) -> Result<String, CliError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let overrides = Overrides {
        command: args.command,
        algorithm: args.algorithm,
        output: args.out,
        format: args.format,
        seed: args.seed,
    };
    let spec = parse_config_with(&text, &overrides)?;
    Ok(run(&spec)?.summary)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let quiet = args.quiet;
    match execute(args) {
        Ok(summary) => {
            if !quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("em-shield: {}: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
