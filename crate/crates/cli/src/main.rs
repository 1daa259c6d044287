use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qdarwin_cli::config::validate_config_with;
use qdarwin_cli::{run_scenario, ConfigError, Format, RunError, Scenario};

/// Regenerates the decoherence and quantum Darwinism experiments.
#[derive(Debug, Parser)]
#[command(name = "qdarwin", version)]
struct Args {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario to run; overrides the config file's.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for fragment orderings.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

fn load(args: &Args) -> Result<qdarwin_cli::ExperimentConfig, RunError> {
    let raw = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None if args.scenario.is_some() => String::new(),
        None => {
            return Err(ConfigError::Range {
                field: "scenario".into(),
                message: format!("pass --config or --scenario (one of {})", Scenario::catalog().join(", ")),
            }
            .into())
        }
    };
    let mut cfg = validate_config_with(&raw, args.scenario.as_deref())?;
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(f) = &args.format {
        cfg.format = f.parse::<Format>()?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = load(&args).and_then(|cfg| run_scenario(&cfg));
    match result {
        Ok(outcome) => {
            let m = &outcome.manifest;
            for d in &m.outputs {
                println!("{}  {}", d.sha256, m.out_dir.join(&d.file).display());
            }
            if outcome.converged() {
                ExitCode::SUCCESS
            } else {
                for c in m.convergence.iter().filter(|c| !c.converged) {
                    eprintln!("warning: `{}` did not converge within {} steps", c.label, c.iterations);
                }
                ExitCode::from(EXIT_NONCONVERGED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                RunError::Config(_) => EXIT_CONFIG,
                RunError::Internal(_) => EXIT_INTERNAL,
                RunError::Io(_) => EXIT_IO,
            })
        }
    }
}
