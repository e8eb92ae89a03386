use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use vcselrc::{run, CliError, Command, Format, RunConfig};

/// Simulator and calibration toolkit for a VCSEL-array photonic reservoir.
#[derive(Debug, Parser)]
#[command(name = "vcselrc", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run config; omitted blocks and keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    run(cli.command, &config, cli.format)?.commit(&cli.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let err = CliError::Validation(first.trim_start_matches("error: ").to_owned());
            eprintln!("{}", err.to_json());
            eprint!("{rendered}");
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
