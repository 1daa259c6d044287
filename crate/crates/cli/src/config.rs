//! Experiment configuration: TOML text in, a fully defaulted and
//! range-checked [`ExperimentConfig`] out.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use qdarwin::gates::{GateSpec, OperatorOrder};
use qdarwin::registers::{InitialFamily, InitialParams, RegisterLayout};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`: {message}")]
    Range { field: String, message: String },
    #[error("unknown scenario `{name}`; available: {}", catalog.join(", "))]
    UnknownScenario { name: String, catalog: Vec<String> },
}

fn range(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fig1Zurek,
    Fig3DissipativePips,
    Fig4AlphaSweep,
    Fig5OrderDiff,
    Fig6Kqubit,
    Table1,
    AttractorReport,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Fig1Zurek,
        Scenario::Fig3DissipativePips,
        Scenario::Fig4AlphaSweep,
        Scenario::Fig5OrderDiff,
        Scenario::Fig6Kqubit,
        Scenario::Table1,
        Scenario::AttractorReport,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Fig1Zurek => "fig1_zurek",
            Scenario::Fig3DissipativePips => "fig3_dissipative_pips",
            Scenario::Fig4AlphaSweep => "fig4_alpha_sweep",
            Scenario::Fig5OrderDiff => "fig5_order_diff",
            Scenario::Fig6Kqubit => "fig6_kqubit",
            Scenario::Table1 => "table1",
            Scenario::AttractorReport => "attractor_report",
        }
    }

    pub fn catalog() -> Vec<String> {
        Self::ALL.iter().map(|s| s.as_str().to_string()).collect()
    }

    /// Environment size used when the config does not set `n`.
    fn default_n(&self) -> usize {
        match self {
            Scenario::Fig1Zurek => 8,
            Scenario::Fig3DissipativePips | Scenario::Fig4AlphaSweep | Scenario::Fig5OrderDiff | Scenario::Fig6Kqubit => 6,
            Scenario::Table1 => 10,
            Scenario::AttractorReport => 2,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownScenario {
                name: s.to_string(),
                catalog: Self::catalog(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(range("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

/// The file as written; every field except `scenario` may be omitted.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    k: Option<usize>,
    n: Option<usize>,
    phi: Option<f64>,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    gamma: Option<f64>,
    order: Option<String>,
    initial: Option<String>,
    amplitudes: Option<Vec<[f64; 2]>>,
    weights: Option<Vec<f64>>,
    steps: Option<usize>,
    max_steps: Option<usize>,
    epsilon: Option<f64>,
    orderings: Option<usize>,
    seed: Option<u64>,
    n_values: Option<Vec<usize>>,
    iterate_max_n: Option<usize>,
    k_values: Option<Vec<usize>>,
    alpha_points: Option<usize>,
    checkpoints: Option<Vec<usize>>,
    out_dir: Option<PathBuf>,
    format: Option<String>,
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub k: usize,
    pub n: usize,
    pub phi: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma: f64,
    pub order: OperatorOrder,
    pub initial: InitialFamily,
    /// System amplitudes as `[re, im]` pairs; empty means uniform.
    pub amplitudes: Vec<[f64; 2]>,
    /// Edge weights `p_e` in edge order; empty means uniform.
    pub weights: Vec<f64>,
    /// Fixed iteration count; when absent, iterate to `epsilon`.
    pub steps: Option<usize>,
    pub max_steps: usize,
    pub epsilon: f64,
    /// Number of fragment orderings; 1 means right-to-left.
    pub orderings: usize,
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub iterate_max_n: usize,
    pub k_values: Vec<usize>,
    pub alpha_points: usize,
    pub checkpoints: Vec<usize>,
    /// Not echoed into data files, so runs that differ only in where they
    /// write stay byte-identical.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub format: Format,
}

impl ExperimentConfig {
    /// Defaults for a scenario, as if the file held only its name.
    pub fn defaults(scenario: Scenario) -> Self {
        Self {
            scenario,
            k: 1,
            n: scenario.default_n(),
            phi: PI / 2.0,
            alpha1: PI / 2.0,
            alpha2: PI / 2.0,
            gamma: 0.0,
            order: OperatorOrder::Tot,
            initial: InitialFamily::ZurekGround,
            amplitudes: Vec::new(),
            weights: Vec::new(),
            steps: None,
            max_steps: 1000,
            epsilon: 1e-9,
            orderings: 1,
            seed: 0,
            n_values: (2..=10).collect(),
            iterate_max_n: 8,
            k_values: vec![2, 3],
            alpha_points: 25,
            checkpoints: vec![25, 50, 100, 200, 400],
            out_dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }

    pub fn gate(&self) -> GateSpec {
        GateSpec {
            phi: self.phi,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            gamma: self.gamma,
            order: self.order,
        }
    }

    pub fn initial_params(&self) -> InitialParams {
        if self.amplitudes.is_empty() {
            InitialParams::uniform()
        } else {
            InitialParams::amplitudes(self.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        }
    }

    /// Re-checks every range; run after command-line overrides.
    pub fn check(&self) -> Result<(), ConfigError> {
        self.gate().validate().map_err(|e| range("gate", e.to_string()))?;
        if self.scenario != Scenario::Table1 {
            RegisterLayout::new(self.k, self.n).map_err(|e| range("n", e.to_string()))?;
        }
        if self.scenario == Scenario::Table1 {
            for &n in &self.n_values {
                RegisterLayout::new(1, n).map_err(|e| range("n_values", e.to_string()))?;
            }
        }
        if self.scenario == Scenario::Fig6Kqubit {
            for &k in &self.k_values {
                RegisterLayout::new(k, self.n).map_err(|e| range("k_values", e.to_string()))?;
            }
        }
        if !self.amplitudes.is_empty() {
            if self.amplitudes.len() != 1 << self.k {
                return Err(range(
                    "amplitudes",
                    format!("{} entries for k = {} (need {})", self.amplitudes.len(), self.k, 1 << self.k),
                ));
            }
            let norm: f64 = self.amplitudes.iter().map(|[re, im]| re * re + im * im).sum();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(range("amplitudes", format!("squared norm {norm} differs from 1")));
            }
        }
        if matches!(self.scenario, Scenario::Fig3DissipativePips) && self.k != 1 {
            return Err(range("k", "fig3_dissipative_pips needs a single system qubit"));
        }
        if !self.weights.is_empty() {
            if matches!(self.scenario, Scenario::Table1 | Scenario::Fig6Kqubit) {
                return Err(range("weights", format!("{} varies the register, so weights cannot apply", self.scenario)));
            }
            let edges = self.k * self.n;
            if self.weights.len() != edges {
                return Err(range("weights", format!("{} weights for {edges} edges", self.weights.len())));
            }
            if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(range("weights", "every weight must be positive and finite"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(range("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if self.max_steps == 0 {
            return Err(range("max_steps", "must be at least 1"));
        }
        if self.steps == Some(0) {
            return Err(range("steps", "must be at least 1"));
        }
        if self.orderings == 0 {
            return Err(range("orderings", "must be at least 1"));
        }
        if self.alpha_points == 0 {
            return Err(range("alpha_points", "must be at least 1"));
        }
        if self.checkpoints.is_empty() || self.checkpoints.windows(2).any(|w| w[1] <= w[0]) || self.checkpoints[0] == 0 {
            return Err(range("checkpoints", "must be a non-empty, strictly increasing list of positive counts"));
        }
        if self.n_values.is_empty() {
            return Err(range("n_values", "must not be empty"));
        }
        Ok(())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses, fills defaults, and range-checks a configuration file.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig, ConfigError> {
    validate_config_with(raw, None)
}

/// As [`validate_config`], with `scenario` taking precedence over the
/// file's own. Defaults follow the effective scenario.
pub fn validate_config_with(raw: &str, scenario: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
    let mut parsed: RawConfig = toml::from_str(raw).map_err(|e| ConfigError::Parse {
        line: e.span().map_or(0, |s| line_of(raw, s.start)),
        message: e.message().to_string(),
    })?;
    if let Some(s) = scenario {
        parsed.scenario = Some(s.to_string());
    }
    let name = parsed.scenario.as_deref().ok_or_else(|| ConfigError::Parse {
        line: 0,
        message: "missing field `scenario`".into(),
    })?;
    let mut cfg = ExperimentConfig::defaults(name.parse()?);
    let RawConfig {
        scenario: _,
        k,
        n,
        phi,
        alpha1,
        alpha2,
        gamma,
        order,
        initial,
        amplitudes,
        weights,
        steps,
        max_steps,
        epsilon,
        orderings,
        seed,
        n_values,
        iterate_max_n,
        k_values,
        alpha_points,
        checkpoints,
        out_dir,
        format,
    } = parsed;
    macro_rules! fill {
        ($($field:ident),*) => { $( if let Some(v) = $field { cfg.$field = v; } )* };
    }
    fill!(k, n, phi, alpha1, alpha2, gamma, amplitudes, weights, max_steps, epsilon, orderings, seed);
    fill!(n_values, iterate_max_n, k_values, alpha_points, checkpoints, out_dir);
    cfg.steps = steps.or(cfg.steps);
    if let Some(o) = order {
        cfg.order = o.parse().map_err(|_| range("order", format!("expected tot or reversed, got `{o}`")))?;
    }
    if let Some(i) = initial {
        cfg.initial = i.parse().map_err(|_| {
            let names: Vec<&str> = InitialFamily::ALL.iter().map(InitialFamily::as_str).collect();
            range("initial", format!("unknown family `{i}`; expected one of {}", names.join(", ")))
        })?;
    }
    if let Some(f) = format {
        cfg.format = f.parse()?;
    }
    cfg.check()?;
    Ok(cfg)
}
