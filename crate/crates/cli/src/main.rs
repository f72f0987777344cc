use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ordscore_cli::run::apply_scores_file;
use ordscore_cli::{run, CliError, Mode, RunConfig};

/// Fit models with ordered factors scored by g-and-h quantiles or monotone splines.
#[derive(Debug, Parser)]
#[command(name = "ordscore", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Compare)]
    mode: Mode,
    /// Output directory, overriding the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed recorded in the report, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Refit with the scores in a scores.json from an earlier run.
    #[arg(long)]
    scores_from: Option<PathBuf>,
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(dir) = args.output {
        config.output_dir = dir;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(path) = &args.scores_from {
        apply_scores_file(&mut config, path, args.mode)?;
    }
    run(&config, args.mode)?;
    eprintln!("wrote outputs to {}", config.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
