//! The scenario catalog. Each scenario turns a validated config into a set
//! of numeric tables plus a convergence log; writing them out is
//! [`crate::output`]'s job.

use std::f64::consts::PI;

use num_complex::Complex64;
use qdarwin::attractor::{closed_form_stationary, solve_attractor_space, StationaryFamily, StationaryParams, DEFAULT_ATTRACTOR_TOL};
use qdarwin::channel::{iterate, uniform_digraph, InteractionDigraph, RandomUnitaryChannel, Schedule};
use qdarwin::darwinism::{classical_entropy, mutual_information, pip, Ordering, OrderingSet, PipCurve};
use qdarwin::gates::{GateSpec, OperatorOrder};
use qdarwin::registers::{initial_state, partial_trace, DensityMatrix, InitialFamily, RegisterLayout};
use qdarwin::zurek::{zurek_evolve, ZurekCase};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Scenario};
use crate::RunError;

/// Column names shared by every partial information plot.
pub const PIP_COLUMNS: [&str; 6] = ["f", "L", "H_S", "H_E", "H_SE", "MI_over_Hclass"];
pub const SWEEP_COLUMNS: [&str; 3] = ["alpha", "MI_max_over_Hclass", "H_S"];
pub const TABLE1_COLUMNS: [&str; 3] = ["n", "MI_closed_form", "MI_iterated"];

const CHECKPOINT_STRIDE: usize = 10;
/// Iteration count for the α sweep when the config does not fix one.
const SWEEP_STEPS: usize = 100;

/// A rectangular numeric table. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn push_full(&mut self, row: &[f64]) {
        self.push(row.iter().copied().map(Some).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// How one evolution ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub label: String,
    pub iterations: usize,
    /// True for fixed-step runs and for runs that met `epsilon`.
    pub converged: bool,
    /// Trace distance between the last two checkpoints, if any were taken.
    pub last_distance: Option<f64>,
    pub fixed_steps: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioData {
    pub tables: Vec<Table>,
    pub convergence: Vec<ConvergenceEntry>,
}

impl ScenarioData {
    pub fn converged(&self) -> bool {
        self.convergence.iter().all(|c| c.converged)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    match cfg.scenario {
        Scenario::Fig1Zurek => fig1_zurek(cfg),
        Scenario::Fig3DissipativePips => fig3_dissipative_pips(cfg),
        Scenario::Fig4AlphaSweep => fig4_alpha_sweep(cfg),
        Scenario::Fig5OrderDiff => fig5_order_diff(cfg),
        Scenario::Fig6Kqubit => fig6_kqubit(cfg),
        Scenario::Table1 => table1(cfg),
        Scenario::AttractorReport => attractor_report(cfg),
    }
}

fn layout(k: usize, n: usize) -> Result<RegisterLayout, RunError> {
    Ok(RegisterLayout::new(k, n)?)
}

fn digraph(cfg: &ExperimentConfig, layout: RegisterLayout) -> Result<InteractionDigraph, RunError> {
    if cfg.weights.is_empty() {
        Ok(uniform_digraph(layout))
    } else {
        Ok(InteractionDigraph::with_weights(layout, &cfg.weights)?)
    }
}

fn orderings(cfg: &ExperimentConfig) -> OrderingSet {
    if cfg.orderings == 1 {
        OrderingSet::Single(Ordering::RightToLeft)
    } else {
        OrderingSet::Seeded {
            count: cfg.orderings,
            seed: cfg.seed,
        }
    }
}

/// Pointer entropy of the initial system state; iterated curves are
/// normalized by this rather than by the evolved `ρ_S`.
fn initial_h_class(rho0: &DensityMatrix) -> Result<f64, RunError> {
    let rho_s = partial_trace(rho0, &rho0.env_positions())?;
    Ok(classical_entropy(&rho_s, &[])?)
}

/// Runs `steps` when fixed, otherwise iterates until successive checkpoints
/// agree to `epsilon` or `max_steps` is spent.
fn evolve(
    cfg: &ExperimentConfig,
    label: String,
    rho0: &DensityMatrix,
    spec: &GateSpec,
    graph: &InteractionDigraph,
    fixed: Option<usize>,
) -> Result<(DensityMatrix, ConvergenceEntry), RunError> {
    if let Some(steps) = fixed.or(cfg.steps) {
        let rho = RandomUnitaryChannel::new(spec, graph)?.evolve(rho0, steps)?;
        let entry = ConvergenceEntry {
            label,
            iterations: steps,
            converged: true,
            last_distance: None,
            fixed_steps: true,
        };
        return Ok((rho, entry));
    }
    let schedule = Schedule {
        max_steps: cfg.max_steps,
        checkpoint_stride: CHECKPOINT_STRIDE,
        epsilon: cfg.epsilon,
    };
    let report = iterate(rho0, spec, graph, schedule)?;
    let entry = ConvergenceEntry {
        label,
        iterations: report.iterations,
        converged: report.converged,
        last_distance: report.checkpoints.last().map(|c| c.distance),
        fixed_steps: false,
    };
    Ok((report.final_state, entry))
}

fn pip_table(name: String, curve: &PipCurve) -> Table {
    let mut t = Table::new(name, &PIP_COLUMNS);
    for p in &curve.points {
        t.push(vec![
            Some(p.f),
            Some(p.l as f64),
            Some(p.h_s),
            Some(p.h_ef),
            Some(p.h_sef),
            p.ratio(),
        ]);
    }
    t
}

fn fig1_zurek(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    let l = layout(cfg.k, cfg.n)?;
    let cnot = GateSpec::cnot().with_order(cfg.order);
    let set = orderings(cfg);
    let mut data = ScenarioData::default();

    let ds = 1usize << cfg.k;
    let amps = cfg
        .initial_params()
        .amplitudes
        .unwrap_or_else(|| vec![Complex64::new((ds as f64).sqrt().recip(), 0.0); ds]);
    let case = ZurekCase::new(cnot, cfg.k, cfg.n, amps)?;
    let single = zurek_evolve(&case)?.to_density();
    let h_class = initial_h_class(&case.input().to_density())?;
    data.tables.push(pip_table("fig1_zurek_single_pass".into(), &pip(&single, &set, Some(h_class))?));

    let rho0 = initial_state(cfg.initial, l, &cfg.initial_params())?;
    let h_class = initial_h_class(&rho0)?;
    let (rho, entry) = evolve(cfg, "iterated_cnot".into(), &rho0, &cnot, &digraph(cfg, l)?, None)?;
    data.convergence.push(entry);
    data.tables.push(pip_table("fig1_zurek_iterated".into(), &pip(&rho, &set, Some(h_class))?));
    Ok(data)
}

/// Fixed asymmetric dissipation used for the fifth curve of the dissipative plot.
fn asymmetric(order: OperatorOrder) -> Result<GateSpec, RunError> {
    Ok(GateSpec::cnot_with(2.0 * PI / 3.0, PI / 3.0, 0.0, order)?)
}

fn fig3_dissipative_pips(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    let l = layout(cfg.k, cfg.n)?;
    let graph = digraph(cfg, l)?;
    let set = orderings(cfg);
    let spec = cfg.gate();
    let curves = [
        ("ground", InitialFamily::ZurekGround, spec),
        ("ghz_mixture", InitialFamily::GhzMixture, spec),
        ("env_maximally_mixed", InitialFamily::EnvMaximallyMixed, spec),
        ("entangled_sx", InitialFamily::EntangledSx, spec),
        ("asymmetric", InitialFamily::ZurekGround, asymmetric(cfg.order)?),
    ];
    let results = curves
        .par_iter()
        .map(|(name, family, spec)| {
            let rho0 = initial_state(*family, l, &cfg.initial_params())?;
            let h_class = initial_h_class(&rho0)?;
            let (rho, entry) = evolve(cfg, name.to_string(), &rho0, spec, &graph, None)?;
            let table = pip_table(format!("fig3_dissipative_pips_{name}"), &pip(&rho, &set, Some(h_class))?);
            Ok((table, entry))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let (tables, convergence) = results.into_iter().unzip();
    Ok(ScenarioData { tables, convergence })
}

fn fig4_alpha_sweep(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    let l = layout(cfg.k, cfg.n)?;
    let graph = digraph(cfg, l)?;
    let set = orderings(cfg);
    let rho0 = initial_state(cfg.initial, l, &cfg.initial_params())?;
    let h_class = initial_h_class(&rho0)?;
    let steps = cfg.steps.unwrap_or(SWEEP_STEPS);
    let points = cfg.alpha_points;
    let results = (1..=points)
        .into_par_iter()
        .map(|i| {
            let alpha = PI / 2.0 * i as f64 / points as f64;
            let spec = GateSpec::symmetric(alpha, cfg.order)?;
            let (rho, entry) = evolve(cfg, format!("alpha_{i}"), &rho0, &spec, &graph, Some(steps))?;
            let curve = pip(&rho, &set, Some(h_class))?;
            let mi_max = curve.points.iter().map(|p| p.mi).fold(f64::NEG_INFINITY, f64::max);
            let h_s = curve.points[0].h_s;
            Ok(([alpha, mi_max / h_class, h_s], entry))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let mut table = Table::new("fig4_alpha_sweep", &SWEEP_COLUMNS);
    let mut convergence = Vec::with_capacity(points);
    for (row, entry) in results {
        table.push_full(&row);
        convergence.push(entry);
    }
    Ok(ScenarioData {
        tables: vec![table],
        convergence,
    })
}

fn fig5_order_diff(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    let l = layout(cfg.k, cfg.n)?;
    let graph = digraph(cfg, l)?;
    let set = orderings(cfg);
    let rho0 = initial_state(cfg.initial, l, &cfg.initial_params())?;
    let h_class = initial_h_class(&rho0)?;
    let base = cfg.gate();
    let tot = RandomUnitaryChannel::new(&base.with_order(OperatorOrder::Tot), &graph)?;
    let rev = RandomUnitaryChannel::new(&base.with_order(OperatorOrder::Reversed), &graph)?;

    let mut by_f = Table::new("fig5_order_diff", &["N", "f", "L", "MI_diff_over_Hclass"]);
    let mut summary = Table::new("fig5_order_diff_max", &["N", "max_MI_diff_over_Hclass"]);
    let (mut a, mut b) = (rho0.clone(), rho0);
    let mut done = 0;
    for &steps in &cfg.checkpoints {
        a = tot.evolve(&a, steps - done)?;
        b = rev.evolve(&b, steps - done)?;
        done = steps;
        let (pa, pb) = (pip(&a, &set, Some(h_class))?, pip(&b, &set, Some(h_class))?);
        let mut worst = 0.0f64;
        for (x, y) in pa.points.iter().zip(&pb.points) {
            let d = (x.mi - y.mi).abs() / h_class;
            worst = worst.max(d);
            by_f.push_full(&[steps as f64, x.f, x.l as f64, d]);
        }
        summary.push_full(&[steps as f64, worst]);
    }
    let convergence = ["tot", "reversed"]
        .iter()
        .map(|o| ConvergenceEntry {
            label: o.to_string(),
            iterations: done,
            converged: true,
            last_distance: None,
            fixed_steps: true,
        })
        .collect();
    Ok(ScenarioData {
        tables: vec![by_f, summary],
        convergence,
    })
}

fn fig6_kqubit(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    let set = orderings(cfg);
    let spec = cfg.gate();
    let results = cfg
        .k_values
        .par_iter()
        .map(|&k| {
            let l = layout(k, cfg.n)?;
            let rho0 = initial_state(InitialFamily::KUniformPure, l, &cfg.initial_params())?;
            let h_class = initial_h_class(&rho0)?;
            let (rho, entry) = evolve(cfg, format!("k_{k}"), &rho0, &spec, &uniform_digraph(l), None)?;
            let table = pip_table(format!("fig6_kqubit_k{k}"), &pip(&rho, &set, Some(h_class))?);
            Ok((table, entry))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let (tables, convergence) = results.into_iter().unzip();
    Ok(ScenarioData { tables, convergence })
}

fn table1(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    let spec = cfg.gate();
    let a_sq = cfg.amplitudes.first().map_or(0.5, |[re, im]| re * re + im * im);
    let results = cfg
        .n_values
        .par_iter()
        .map(|&n| {
            let stationary = closed_form_stationary(
                StationaryFamily::SymmetricFromGround,
                StationaryParams::qubit(n, a_sq),
            )?;
            let l = layout(1, n)?;
            let rho0 = initial_state(InitialFamily::ZurekGround, l, &cfg.initial_params())?;
            let h_class = initial_h_class(&rho0)?;
            let closed = mutual_information(&stationary.state, n, &Ordering::RightToLeft, Some(h_class))?.mi / h_class;
            if n > cfg.iterate_max_n {
                return Ok(([Some(n as f64), Some(closed), None], None));
            }
            let (rho, entry) = evolve(cfg, format!("n_{n}"), &rho0, &spec, &uniform_digraph(l), None)?;
            let iterated = mutual_information(&rho, n, &Ordering::RightToLeft, Some(h_class))?.mi / h_class;
            Ok(([Some(n as f64), Some(closed), Some(iterated)], Some(entry)))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let mut table = Table::new("table1", &TABLE1_COLUMNS);
    let mut convergence = Vec::new();
    for (row, entry) in results {
        table.push(row.to_vec());
        convergence.extend(entry);
    }
    Ok(ScenarioData {
        tables: vec![table],
        convergence,
    })
}

fn attractor_report(cfg: &ExperimentConfig) -> Result<ScenarioData, RunError> {
    let l = layout(cfg.k, cfg.n)?;
    let space = solve_attractor_space(&cfg.gate(), &digraph(cfg, l)?, DEFAULT_ATTRACTOR_TOL)?;
    let mut sectors = Table::new(
        "attractor_sectors",
        &["lambda_re", "lambda_im", "dimension", "max_residual"],
    );
    let mut bases = Table::new(
        "attractor_bases",
        &["lambda_re", "lambda_im", "element", "row", "col", "re", "im"],
    );
    for s in space.sectors() {
        let (lr, li) = (s.lambda.re, s.lambda.im);
        sectors.push_full(&[lr, li, s.dimension() as f64, s.max_residual]);
        for (e, x) in s.basis.iter().enumerate() {
            for r in 0..x.rows() {
                for c in 0..x.cols() {
                    let z = x[(r, c)];
                    bases.push_full(&[lr, li, e as f64, r as f64, c as f64, z.re, z.im]);
                }
            }
        }
    }
    Ok(ScenarioData {
        tables: vec![sectors, bases],
        convergence: Vec::new(),
    })
}
