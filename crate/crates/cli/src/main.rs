use std::path::PathBuf;
use std::process::ExitCode;

use asynch_cli::{run, Command, Format, RunManifest};
use clap::Parser;

/// Asynchronism-exponent bounds and asynchronous-channel simulation.
#[derive(Debug, Parser)]
#[command(name = "asynch", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    trials: Option<usize>,
    /// Symbol budget (A times trials); also raises the level cap to match.
    #[arg(long, value_name = "SYMBOLS")]
    budget: Option<u64>,
    /// Also report capacity and exponents in bits.
    #[arg(long)]
    bits: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let manifest = RunManifest {
        command: args.command,
        config_path: args.config,
        output_path: args.out,
        seed: args.seed,
        format: args.format,
        trials: args.trials,
        budget: args.budget,
        bits: args.bits,
    };
    match run(&manifest) {
        Ok(outcome) => {
            if manifest.output_path.is_none() {
                print!("{}", outcome.text);
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::FAILURE
        }
    }
}
