//! Attractor spaces of the random unitary channel: operators `X` with
//! `U_e X U_e† = λ X` for every edge and `|λ| = 1`, found as the joint
//! nullspace of the stacked per-edge constraints.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::InteractionDigraph;
use crate::gates::{gate_spectrum, phase_key, total_unitary, GateError, GateSpec};
use crate::numerics::{ComplexMatrix, NumericsError, PivotedQr, StackedRowCompressor, DEFAULT_RANK_TOL, ONE, ZERO};
use crate::registers::{bit_of, DensityMatrix, RegisterError, RegisterLayout};

/// Largest `k + n` for which the `D² × D²` constraint blocks are built.
pub const MAX_SOLVER_QUBITS: usize = 6;
const LAMBDA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttractorError {
    #[error("k + n = {qubits} exceeds the solver limit of {max}")]
    TooLarge { qubits: usize, max: usize },
    #[error("eigenvalue {0} is not of unit modulus")]
    BadLambda(Complex64),
    #[error("attractor space was solved for a different register")]
    NotSolved,
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Register(#[from] RegisterError),
}

/// All products `λ_a·conj(λ_b)` of the gate spectrum, deduplicated, with
/// `λ = 1` first and the rest by ascending phase.
pub fn candidate_eigenvalues(spec: &GateSpec) -> Result<Vec<Complex64>, AttractorError> {
    let spectrum = gate_spectrum(&total_unitary(spec)?)?;
    let mut out: Vec<Complex64> = Vec::new();
    for a in &spectrum {
        for b in &spectrum {
            let l = a * b.conj();
            let l = l / l.norm();
            if out.iter().all(|c| (c - l).norm() > LAMBDA_TOL) {
                out.push(l);
            }
        }
    }
    let key = |z: &Complex64| {
        if (z - ONE).norm() <= LAMBDA_TOL {
            f64::NEG_INFINITY
        } else {
            phase_key(*z)
        }
    };
    out.sort_by(|a, b| key(a).total_cmp(&key(b)));
    Ok(out)
}

/// Orthonormal basis for one eigenvalue.
#[derive(Debug, Clone)]
pub struct AttractorSector {
    pub lambda: Complex64,
    pub basis: Vec<ComplexMatrix>,
    /// Largest `‖U_e X U_e† − λX‖_F` over edges and basis members; zero for
    /// closed forms that were not checked against a channel.
    pub max_residual: f64,
}

impl AttractorSector {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Attractor sectors of one channel, keyed by eigenvalue.
#[derive(Debug, Clone)]
pub struct AttractorSpace {
    layout: RegisterLayout,
    sectors: Vec<AttractorSector>,
}

impl AttractorSpace {
    pub fn new(layout: RegisterLayout, sectors: Vec<AttractorSector>) -> Self {
        Self { layout, sectors }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn sectors(&self) -> &[AttractorSector] {
        &self.sectors
    }

    pub fn sector(&self, lambda: Complex64) -> Option<&AttractorSector> {
        self.sectors.iter().find(|s| (s.lambda - lambda).norm() <= LAMBDA_TOL)
    }

    /// `d^λ`; zero for eigenvalues without a sector.
    pub fn dimension(&self, lambda: Complex64) -> usize {
        self.sector(lambda).map_or(0, AttractorSector::dimension)
    }

    pub fn total_dimension(&self) -> usize {
        self.sectors.iter().map(AttractorSector::dimension).sum()
    }
}

/// `U` acting as `g` on register qubits `(i, j)`, as a dense `D × D` matrix.
pub(crate) fn embed_two_qubit(g: &ComplexMatrix, i: usize, j: usize, nq: usize) -> ComplexMatrix {
    let dim = 1usize << nq;
    let (mi, mj) = (1usize << bit_of(i, nq), 1usize << bit_of(j, nq));
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let b = usize::from(col & mi != 0) * 2 + usize::from(col & mj != 0);
        let rest = col & !(mi | mj);
        for a in 0..4 {
            let v = g[(a, b)];
            if v == ZERO {
                continue;
            }
            let row = rest | if a & 2 != 0 { mi } else { 0 } | if a & 1 != 0 { mj } else { 0 };
            out[(row, col)] = v;
        }
    }
    out
}

/// Row-major vectorized constraint `(U ⊗ conj U − λ I) vec X` for one edge.
fn constraint_block(u: &ComplexMatrix, lambda: Complex64) -> ComplexMatrix {
    let dim = u.rows();
    let mut block = u.kron(&u.adjoint().transpose());
    for i in 0..dim * dim {
        block[(i, i)] -= lambda;
    }
    block
}

fn max_residual(units: &[ComplexMatrix], basis: &[ComplexMatrix], lambda: Complex64) -> f64 {
    let mut worst = 0.0_f64;
    for u in units {
        let ud = u.adjoint();
        for x in basis {
            let lhs = u.matmul(x).and_then(|m| m.matmul(&ud)).expect("square shapes agree");
            let r = lhs.sub(&x.scale(lambda)).expect("same shape").frobenius_norm();
            worst = worst.max(r);
        }
    }
    worst
}

/// Completes `seeds` (already inside the span of the orthonormal columns
/// `null`) to an orthonormal basis of that span, picking the remaining
/// directions by largest residual.
fn seeded_basis(null: &[Vec<Complex64>], seeds: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let dim = null.len();
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, &y)| x.conj() * y).sum() };
    let norm = |a: &[Complex64]| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    // Work in nullspace coordinates.
    let mut chosen: Vec<Vec<Complex64>> = Vec::new();
    let orthonormalize = |mut v: Vec<Complex64>, chosen: &Vec<Vec<Complex64>>| -> (Vec<Complex64>, f64) {
        for _ in 0..2 {
            for q in chosen {
                let p = inner(q, &v);
                for (x, &qi) in v.iter_mut().zip(q) {
                    *x -= p * qi;
                }
            }
        }
        let r = norm(&v);
        (v, r)
    };
    for s in seeds {
        let coords: Vec<Complex64> = null.iter().map(|q| inner(q, s)).collect();
        let (v, r) = orthonormalize(coords, &chosen);
        if r > 1e-8 {
            chosen.push(v.into_iter().map(|z| z / r).collect());
        }
    }
    while chosen.len() < dim {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for e in 0..dim {
            let mut unit = vec![ZERO; dim];
            unit[e] = ONE;
            let (v, r) = orthonormalize(unit, &chosen);
            if best.as_ref().is_none_or(|(br, _)| r > *br + 1e-14) {
                best = Some((r, v));
            }
        }
        let (r, v) = best.expect("dimension is positive");
        chosen.push(v.into_iter().map(|z| z / r).collect());
    }

    chosen
        .iter()
        .map(|c| {
            let len = null.first().map_or(0, Vec::len);
            let mut x = vec![ZERO; len];
            for (coef, q) in c.iter().zip(null) {
                for (xi, &qi) in x.iter_mut().zip(q) {
                    *xi += coef * qi;
                }
            }
            x
        })
        .collect()
}

/// Solves the attractor equation for a single `λ`.
///
/// The per-edge `D² × D²` constraint blocks are streamed into a triangular
/// factor, whose column-pivoted QR gives the rank `r` and `d^λ = D² − r`.
pub fn solve_attractors(
    spec: &GateSpec,
    digraph: &InteractionDigraph,
    lambda: Complex64,
    tol: f64,
) -> Result<AttractorSector, AttractorError> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() || (lambda.norm() - 1.0).abs() > LAMBDA_TOL {
        return Err(AttractorError::BadLambda(lambda));
    }
    let layout = digraph.layout();
    let nq = layout.num_qubits();
    if nq > MAX_SOLVER_QUBITS {
        return Err(AttractorError::TooLarge {
            qubits: nq,
            max: MAX_SOLVER_QUBITS,
        });
    }
    let g = total_unitary(spec)?;
    let dim = layout.dim();
    let units: Vec<ComplexMatrix> = digraph
        .qubit_pairs()
        .into_iter()
        .map(|(s, e)| embed_two_qubit(&g, s, e, nq))
        .collect();

    let mut compressor = StackedRowCompressor::new(dim * dim);
    for u in &units {
        compressor.push_block(&constraint_block(u, lambda))?;
    }
    let qr = PivotedQr::factor(&compressor.triangular())?;
    let null = qr.nullspace(tol)?;

    let p0 = {
        let mut v = vec![ZERO; dim * dim];
        v[0] = ONE;
        v
    };
    let ident = ComplexMatrix::identity(dim).into_vec();
    let in_span = |s: &[Complex64]| {
        let norm: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut resid = s.to_vec();
        for q in &null {
            let p: Complex64 = q.iter().zip(s).map(|(x, &y)| x.conj() * y).sum();
            for (r, &qi) in resid.iter_mut().zip(q) {
                *r -= p * qi;
            }
        }
        resid.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() <= 1e-8 * norm
    };
    let seeds: Vec<Vec<Complex64>> = [p0, ident].into_iter().filter(|s| in_span(s)).collect();

    let basis: Vec<ComplexMatrix> = seeded_basis(&null, &seeds)
        .into_iter()
        .map(|v| ComplexMatrix::from_vec(dim, dim, v))
        .collect::<Result<_, _>>()?;
    let max_residual = max_residual(&units, &basis, lambda);
    Ok(AttractorSector {
        lambda,
        basis,
        max_residual,
    })
}

/// Solves every candidate eigenvalue; sectors of dimension zero are kept so
/// callers can report them.
pub fn solve_attractor_space(spec: &GateSpec, digraph: &InteractionDigraph, tol: f64) -> Result<AttractorSpace, AttractorError> {
    let candidates = candidate_eigenvalues(spec)?;
    let sectors = candidates
        .par_iter()
        .map(|&l| solve_attractors(spec, digraph, l, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AttractorSpace::new(digraph.layout(), sectors))
}

/// Default relative rank tolerance for attractor solves.
pub const DEFAULT_ATTRACTOR_TOL: f64 = DEFAULT_RANK_TOL;

/// Largest HS distance from a member of either orthonormal family to the
/// span of the other. Zero when the spans coincide.
pub fn span_distance(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    let one_way = |from: &[ComplexMatrix], onto: &[ComplexMatrix]| -> f64 {
        from.iter()
            .map(|x| {
                let mut r = x.clone();
                for q in onto {
                    let p = q.hs_inner(x).expect("same shape");
                    r.axpy(-p, q).expect("same shape");
                }
                r.frobenius_norm()
            })
            .fold(0.0, f64::max)
    };
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    one_way(a, b).max(one_way(b, a))
}

/// `N` in `λ^N`, or the long-time limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Steps(u64),
    Limit,
}

/// Output of the attractor reconstruction.
#[derive(Debug, Clone)]
pub struct AsymptoticState {
    pub state: DensityMatrix,
    /// Contributions of sectors with `λ ≠ 1`, which keep rotating in the
    /// limit. Empty for finite horizons.
    pub oscillatory: Vec<(Complex64, ComplexMatrix)>,
}

/// `Σ_{λ,i} λ^N Tr(ρ X†_{λ,i}) X_{λ,i}`. With [`Horizon::Limit`] only the
/// `λ = 1` sector forms the state and the rest is reported separately.
pub fn asymptotic_state(rho_in: &DensityMatrix, space: &AttractorSpace, horizon: Horizon) -> Result<AsymptoticState, AttractorError> {
    if rho_in.layout() != Some(space.layout) {
        return Err(AttractorError::NotSolved);
    }
    let dim = rho_in.dim();
    let mut state = ComplexMatrix::zeros(dim, dim);
    let mut oscillatory = Vec::new();
    for sector in &space.sectors {
        let is_one = (sector.lambda - ONE).norm() <= LAMBDA_TOL;
        let mut part = ComplexMatrix::zeros(dim, dim);
        for x in &sector.basis {
            let coef = x.hs_inner(rho_in.matrix())?;
            part.axpy(coef, x)?;
        }
        match horizon {
            Horizon::Steps(n) => {
                let factor = if is_one { ONE } else { sector.lambda.powu(n as u32) };
                state.axpy(factor, &part)?;
            }
            Horizon::Limit if is_one => state.axpy(ONE, &part)?,
            Horizon::Limit => {
                if part.max_abs() > 1e-12 {
                    oscillatory.push((sector.lambda, part));
                }
            }
        }
    }
    Ok(AsymptoticState {
        state: DensityMatrix::from_parts_unchecked(rho_in.labels().to_vec(), state.hermitian_part()),
        oscillatory,
    })
}

/// Analytic attractor families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormAttractor {
    /// `{|0…0⟩⟨0…0|, (I − |0…0⟩⟨0…0|)/√(D−1)}` at `λ = 1`.
    SymmetricDiss,
    /// `{D^{−1/2} I}` at `λ = 1`.
    AsymmetricDiss,
    /// Empty sectors at `λ = ±i`.
    DephasingZero,
}

impl ClosedFormAttractor {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClosedFormAttractor::SymmetricDiss => "symmetric_diss",
            ClosedFormAttractor::AsymmetricDiss => "asymmetric_diss",
            ClosedFormAttractor::DephasingZero => "dephasing_zero",
        }
    }
}

impl FromStr for ClosedFormAttractor {
    type Err = AttractorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Self::SymmetricDiss, Self::AsymmetricDiss, Self::DephasingZero]
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| AttractorError::UnknownFamily(s.to_string()))
    }
}

fn ground_projector(dim: usize) -> ComplexMatrix {
    let mut diag = vec![0.0; dim];
    diag[0] = 1.0;
    ComplexMatrix::from_real_diagonal(&diag)
}

fn complement_projector(dim: usize) -> ComplexMatrix {
    let mut diag = vec![1.0; dim];
    diag[0] = 0.0;
    ComplexMatrix::from_real_diagonal(&diag)
}

pub fn closed_form_attractor(family: ClosedFormAttractor, k: usize, n: usize) -> Result<AttractorSpace, AttractorError> {
    let layout = RegisterLayout::new(k, n)?;
    let dim = layout.dim();
    let sectors = match family {
        ClosedFormAttractor::SymmetricDiss => vec![AttractorSector {
            lambda: ONE,
            basis: vec![
                ground_projector(dim),
                complement_projector(dim).scale_real(1.0 / ((dim - 1) as f64).sqrt()),
            ],
            max_residual: 0.0,
        }],
        ClosedFormAttractor::AsymmetricDiss => vec![AttractorSector {
            lambda: ONE,
            basis: vec![ComplexMatrix::identity(dim).scale_real(1.0 / (dim as f64).sqrt())],
            max_residual: 0.0,
        }],
        ClosedFormAttractor::DephasingZero => [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]
            .into_iter()
            .map(|lambda| AttractorSector {
                lambda,
                basis: Vec::new(),
                max_residual: 0.0,
            })
            .collect(),
    };
    Ok(AttractorSpace::new(layout, sectors))
}

/// Analytic stationary states of the iterated channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryFamily {
    /// Symmetric dissipation from a `|0…0⟩` environment:
    /// `c I + (|a|² − c)|0⟩⟨0|` with `c = |b|²/(D − 1)`.
    SymmetricFromGround,
    /// Symmetric dissipation from a `|1…1⟩` environment: `(I − |0⟩⟨0|)/(D − 1)`.
    SymmetricFromExcited,
    /// Symmetric dissipation from the GHZ-mixture environment:
    /// `(|a|²/2)|0⟩⟨0| + (1 − |a|²/2)(I − |0⟩⟨0|)/(D − 1)`.
    SymmetricFromGhzMixture,
    /// Symmetric dissipation from a maximally mixed environment:
    /// `2⁻ⁿ|a|² |0⟩⟨0| + (1 − 2⁻ⁿ|a|²)(I − |0⟩⟨0|)/(D − 1)`.
    SymmetricFromMaximallyMixed,
    /// `k`-qubit symmetric dissipation: `p₀|0⟩⟨0| + (1 − p₀)(I − |0⟩⟨0|)/(D − 1)`.
    SymmetricMultiQubit,
    /// Asymmetric dissipation: `I / D`.
    CompletelyMixed,
}

impl StationaryFamily {
    pub const ALL: [StationaryFamily; 6] = [
        StationaryFamily::SymmetricFromGround,
        StationaryFamily::SymmetricFromExcited,
        StationaryFamily::SymmetricFromGhzMixture,
        StationaryFamily::SymmetricFromMaximallyMixed,
        StationaryFamily::SymmetricMultiQubit,
        StationaryFamily::CompletelyMixed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StationaryFamily::SymmetricFromGround => "symmetric_from_ground",
            StationaryFamily::SymmetricFromExcited => "symmetric_from_excited",
            StationaryFamily::SymmetricFromGhzMixture => "symmetric_from_ghz_mixture",
            StationaryFamily::SymmetricFromMaximallyMixed => "symmetric_from_maximally_mixed",
            StationaryFamily::SymmetricMultiQubit => "symmetric_multi_qubit",
            StationaryFamily::CompletelyMixed => "completely_mixed",
        }
    }
}

impl fmt::Display for StationaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StationaryFamily {
    type Err = AttractorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| AttractorError::UnknownFamily(s.to_string()))
    }
}

/// Parameters of a stationary family. `a_sq` is `|a|²` for single-qubit
/// systems; `p0 = ⟨0_k|ρ_S|0_k⟩` for the multi-qubit family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StationaryParams {
    pub k: usize,
    pub n: usize,
    pub a_sq: f64,
    pub p0: f64,
}

impl StationaryParams {
    pub fn qubit(n: usize, a_sq: f64) -> Self {
        Self { k: 1, n, a_sq, p0: a_sq }
    }

    pub fn multi_qubit(k: usize, n: usize, p0: f64) -> Self {
        Self { k, n, a_sq: p0, p0 }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryState {
    pub family: StationaryFamily,
    pub params: StationaryParams,
    pub state: DensityMatrix,
}

/// Diagonal `w₀|0⟩⟨0| + w_rest(I − |0⟩⟨0|)`.
fn ground_plus_rest(layout: RegisterLayout, w0: f64, w_rest: f64) -> Result<DensityMatrix, RegisterError> {
    let dim = layout.dim();
    let mut diag = vec![w_rest; dim];
    diag[0] = w0;
    DensityMatrix::from_layout(layout, ComplexMatrix::from_real_diagonal(&diag))
}

pub fn closed_form_stationary(family: StationaryFamily, params: StationaryParams) -> Result<StationaryState, AttractorError> {
    let StationaryParams { k, n, a_sq, p0 } = params;
    let single_qubit = !matches!(family, StationaryFamily::SymmetricMultiQubit | StationaryFamily::CompletelyMixed);
    if single_qubit && k != 1 {
        return Err(AttractorError::BadParams(format!("{family} needs k = 1, got {k}")));
    }
    for (name, v) in [("|a|^2", a_sq), ("p0", p0)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(AttractorError::BadParams(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let layout = RegisterLayout::new(k, n).map_err(|e| AttractorError::BadParams(e.to_string()))?;
    let rest = (layout.dim() - 1) as f64;
    let b_sq = 1.0 - a_sq;
    let state = match family {
        StationaryFamily::SymmetricFromGround => {
            let c = b_sq / rest;
            ground_plus_rest(layout, a_sq, c)?
        }
        StationaryFamily::SymmetricFromExcited => ground_plus_rest(layout, 0.0, 1.0 / rest)?,
        StationaryFamily::SymmetricFromGhzMixture => {
            let w0 = a_sq / 2.0;
            ground_plus_rest(layout, w0, (1.0 - w0) / rest)?
        }
        StationaryFamily::SymmetricFromMaximallyMixed => {
            let w0 = a_sq * 2f64.powi(-(n as i32));
            ground_plus_rest(layout, w0, (1.0 - w0) / rest)?
        }
        StationaryFamily::SymmetricMultiQubit => ground_plus_rest(layout, p0, (1.0 - p0) / rest)?,
        StationaryFamily::CompletelyMixed => DensityMatrix::maximally_mixed(layout.labels()),
    };
    Ok(StationaryState { family, params, state })
}
