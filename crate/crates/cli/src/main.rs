use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use entropy_lab_cli::config::Origin;
use entropy_lab_cli::{run, Command, ConfigError, ExperimentConfig, RawConfig, RunError};

/// Sharma-Mittal entropy power experiments.
///
/// Exit codes: 0 ok, 2 config error, 3 check failure, 4 numerical abort.
#[derive(Parser, Debug)]
#[command(name = "entropy-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override one config key; repeatable, later wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed for randomized initial data (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = match &cli.config {
        Some(path) => RawConfig::parse_file(path)?,
        None => RawConfig::default(),
    };
    for s in &cli.set {
        raw.apply_override(s)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string(), Origin::Flag)?;
    }
    if let Some(out) = &cli.out {
        raw.set("out", &out.to_string_lossy(), Origin::Flag)?;
    }
    ExperimentConfig::resolve(&raw)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).map_err(RunError::from).and_then(|cfg| run(cli.command, &cfg));
    match result {
        Ok(manifest) => ExitCode::from(manifest.exit_code() as u8),
        Err(e) => {
            eprintln!("entropy-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
