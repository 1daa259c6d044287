//! The random unitary channel `ρ ↦ Σ_e p_e U_e ρ U_e†` over a system→environment
//! interaction digraph, and its deterministic iteration.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::gates::{total_unitary, GateError, GateSpec};
use crate::numerics::{ComplexMatrix, ZERO};
use crate::registers::{bit_of, conjugate_into, gate4_from_matrix, trace_distance, DensityMatrix, Gate4, RegisterError, RegisterLayout};

/// Above this dimension the per-edge conjugations run one at a time to keep
/// memory at two scratch buffers.
const PAR_EDGE_MAX_DIM: usize = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid interaction digraph: {0}")]
    InvalidDigraph(String),
    #[error("state layout does not match the digraph layout")]
    LayoutMismatch,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Register(#[from] RegisterError),
}

/// Edge set `M` of system→environment pairs with selection probabilities.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InteractionDigraph {
    layout: RegisterLayout,
    /// `(system index, environment index)`, both zero-based.
    edges: Vec<(usize, usize)>,
    probabilities: Vec<f64>,
}

impl InteractionDigraph {
    /// Every probability must lie in `(0, 1)` and the total must be 1 within
    /// 1e-12. A lone edge carries probability 1.
    pub fn new(layout: RegisterLayout, edges: Vec<(usize, usize)>, probabilities: Vec<f64>) -> Result<Self, ChannelError> {
        let bad = |msg: String| Err(ChannelError::InvalidDigraph(msg));
        if edges.is_empty() {
            return bad("edge set is empty".into());
        }
        if edges.len() != probabilities.len() {
            return bad(format!("{} edges but {} probabilities", edges.len(), probabilities.len()));
        }
        for (idx, &(i, j)) in edges.iter().enumerate() {
            if i >= layout.k() || j >= layout.n() {
                return bad(format!("edge ({i}, {j}) outside k={}, n={}", layout.k(), layout.n()));
            }
            if edges[..idx].contains(&(i, j)) {
                return bad(format!("edge ({i}, {j}) listed twice"));
            }
        }
        let single = edges.len() == 1;
        for &p in &probabilities {
            let ok = p.is_finite() && p > 0.0 && (p < 1.0 || (single && p == 1.0));
            if !ok {
                return bad(format!("probability {p} outside (0, 1)"));
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("probabilities sum to {total}"));
        }
        Ok(Self {
            layout,
            edges,
            probabilities,
        })
    }

    /// All `k·n` edges, with probabilities proportional to `weights`.
    pub fn with_weights(layout: RegisterLayout, weights: &[f64]) -> Result<Self, ChannelError> {
        let edges = complete_edges(layout);
        if weights.len() != edges.len() {
            return Err(ChannelError::InvalidDigraph(format!(
                "{} weights for {} edges",
                weights.len(),
                edges.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        Self::new(layout, edges, weights.iter().map(|w| w / total).collect())
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Register positions `(system qubit, environment qubit)` of each edge.
    pub fn qubit_pairs(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(i, j)| (self.layout.system(i), self.layout.env(j)))
            .collect()
    }
}

fn complete_edges(layout: RegisterLayout) -> Vec<(usize, usize)> {
    (0..layout.k())
        .flat_map(|i| (0..layout.n()).map(move |j| (i, j)))
        .collect()
}

/// Complete bipartite S→E digraph with `p_e = 1/(k·n)`.
pub fn uniform_digraph(layout: RegisterLayout) -> InteractionDigraph {
    let edges = complete_edges(layout);
    let m = edges.len();
    let probabilities = if m == 1 { vec![1.0] } else { vec![1.0 / m as f64; m] };
    InteractionDigraph {
        layout,
        edges,
        probabilities,
    }
}

/// A gate and digraph bound together for repeated application.
#[derive(Debug, Clone)]
pub struct RandomUnitaryChannel {
    layout: RegisterLayout,
    gate: Gate4,
    masks: Vec<(usize, usize)>,
    probabilities: Vec<f64>,
}

impl RandomUnitaryChannel {
    pub fn new(spec: &GateSpec, digraph: &InteractionDigraph) -> Result<Self, ChannelError> {
        let u = total_unitary(spec)?;
        Ok(Self::from_unitary(&u, digraph))
    }

    pub(crate) fn from_unitary(u: &ComplexMatrix, digraph: &InteractionDigraph) -> Self {
        let nq = digraph.layout.num_qubits();
        let masks = digraph
            .qubit_pairs()
            .into_iter()
            .map(|(s, e)| (1 << bit_of(s, nq), 1 << bit_of(e, nq)))
            .collect();
        Self {
            layout: digraph.layout,
            gate: gate4_from_matrix(u),
            masks,
            probabilities: digraph.probabilities.clone(),
        }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    fn apply_raw(&self, src: &[Complex64]) -> Vec<Complex64> {
        let dim = self.layout.dim();
        let mut out = vec![ZERO; dim * dim];
        let accumulate = |out: &mut [Complex64], p: f64, x: &[Complex64]| {
            for (o, &v) in out.iter_mut().zip(x) {
                *o += v * p;
            }
        };
        if dim <= PAR_EDGE_MAX_DIM && self.masks.len() > 1 {
            let parts: Vec<Vec<Complex64>> = self
                .masks
                .par_iter()
                .map(|&(mi, mj)| {
                    let mut buf = vec![ZERO; dim * dim];
                    conjugate_into(src, &mut buf, dim, &self.gate, mi, mj);
                    buf
                })
                .collect();
            for (part, &p) in parts.iter().zip(&self.probabilities) {
                accumulate(&mut out, p, part);
            }
        } else {
            let mut buf = vec![ZERO; dim * dim];
            for (&(mi, mj), &p) in self.masks.iter().zip(&self.probabilities) {
                conjugate_into(src, &mut buf, dim, &self.gate, mi, mj);
                accumulate(&mut out, p, &buf);
            }
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        if rho.layout() != Some(self.layout) {
            return Err(ChannelError::LayoutMismatch);
        }
        let dim = rho.dim();
        let out = self.apply_raw(rho.matrix().as_slice());
        Ok(DensityMatrix::from_parts_unchecked(
            rho.labels().to_vec(),
            ComplexMatrix::from_vec_unchecked(dim, dim, out),
        ))
    }

    /// `N` applications with no convergence bookkeeping.
    pub fn evolve(&self, rho: &DensityMatrix, steps: usize) -> Result<DensityMatrix, ChannelError> {
        let mut cur = rho.clone();
        if cur.layout() != Some(self.layout) {
            return Err(ChannelError::LayoutMismatch);
        }
        for _ in 0..steps {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }
}

/// One application of the averaged map.
pub fn step(rho: &DensityMatrix, spec: &GateSpec, digraph: &InteractionDigraph) -> Result<DensityMatrix, ChannelError> {
    RandomUnitaryChannel::new(spec, digraph)?.apply(rho)
}

/// `N` applications of the averaged map.
pub fn evolve(rho: &DensityMatrix, spec: &GateSpec, digraph: &InteractionDigraph, steps: usize) -> Result<DensityMatrix, ChannelError> {
    RandomUnitaryChannel::new(spec, digraph)?.evolve(rho, steps)
}

/// Iteration budget and convergence test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Schedule {
    pub max_steps: usize,
    pub checkpoint_stride: usize,
    pub epsilon: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            max_steps: 1000,
            checkpoint_stride: 10,
            epsilon: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Checkpoint {
    pub step: usize,
    /// Trace distance to the previous checkpoint.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    pub final_state: DensityMatrix,
    pub iterations: usize,
    pub checkpoints: Vec<Checkpoint>,
    pub converged: bool,
}

impl IterationReport {
    /// True when checkpoint distances never grow by more than `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.checkpoints
            .windows(2)
            .all(|w| w[1].distance <= w[0].distance + slack)
    }
}

/// Applies the channel until successive checkpoints are closer than
/// `schedule.epsilon` in trace distance, or the step budget runs out.
/// Running out is reported through `converged = false`, not as an error.
pub fn iterate(
    rho0: &DensityMatrix,
    spec: &GateSpec,
    digraph: &InteractionDigraph,
    schedule: Schedule,
) -> Result<IterationReport, ChannelError> {
    if schedule.epsilon.is_nan() || schedule.epsilon <= 0.0 {
        return Err(ChannelError::InvalidSchedule(format!("epsilon {} must be positive", schedule.epsilon)));
    }
    if schedule.checkpoint_stride == 0 {
        return Err(ChannelError::InvalidSchedule("checkpoint stride must be at least 1".into()));
    }
    let channel = RandomUnitaryChannel::new(spec, digraph)?;
    if rho0.layout() != Some(channel.layout) {
        return Err(ChannelError::LayoutMismatch);
    }
    let mut cur = rho0.clone();
    let mut anchor = rho0.clone();
    let mut checkpoints = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < schedule.max_steps {
        cur = channel.apply(&cur)?;
        iterations += 1;
        if iterations % schedule.checkpoint_stride == 0 {
            let distance = trace_distance(&cur, &anchor)?;
            checkpoints.push(Checkpoint {
                step: iterations,
                distance,
            });
            if distance < schedule.epsilon {
                converged = true;
                break;
            }
            anchor = cur.clone();
        }
    }
    Ok(IterationReport {
        final_state: cur,
        iterations,
        checkpoints,
        converged,
    })
}
