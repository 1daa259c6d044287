//! Experiment harness for the `qdarwin` simulator: named scenarios that
//! regenerate each figure and table as CSV or JSON, plus a run manifest
//! with digests of everything written.

pub mod config;
pub mod output;
pub mod scenarios;

use std::time::Instant;

pub use config::{validate_config, ConfigError, ExperimentConfig, Format, Scenario};
pub use output::{RunManifest, MANIFEST_FILE};
pub use scenarios::{ScenarioData, Table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A library call failed on a config that passed validation.
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

macro_rules! internal_from {
    ($($t:ty),*) => {
        $(impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Internal(e.to_string())
            }
        })*
    };
}

internal_from!(
    qdarwin::attractor::AttractorError,
    qdarwin::channel::ChannelError,
    qdarwin::darwinism::DarwinismError,
    qdarwin::gates::GateError,
    qdarwin::registers::RegisterError,
    qdarwin::zurek::ZurekError
);

/// A finished run. Outputs are on disk even when `converged` is false.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub data: ScenarioData,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.manifest.converged
    }
}

/// Computes the scenario, writes its data files and `manifest.json` into
/// `cfg.out_dir`.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    cfg.check()?;
    let start = Instant::now();
    let data = scenarios::run(cfg)?;
    let outputs = output::write_data(cfg, &data)?;
    let manifest = RunManifest {
        config: cfg.clone(),
        out_dir: cfg.out_dir.clone(),
        version: output::VERSION.to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        converged: data.converged(),
        convergence: data.convergence.clone(),
        outputs,
    };
    output::write_manifest(&manifest)?;
    Ok(RunOutcome { manifest, data })
}
