//! Single-pass qubit model: every environment qubit meets the system once,
//! in the order `E1, …, En`, plus the analytic output states of the named
//! cases.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::gates::{total_unitary, GateError, GateSpec, OperatorOrder};
use crate::numerics::{ComplexMatrix, ZERO};
use crate::registers::{
    apply_two_qubit, bit_of, gate4_from_matrix, DensityMatrix, Gate4, PureState, RegisterError, RegisterLayout,
};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZurekError {
    #[error("bad amplitudes: {0}")]
    BadAmplitudes(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Register(#[from] RegisterError),
}

/// A gate, an environment size, and pure system amplitudes over `2^k`
/// basis states. The environment starts in `|0…0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZurekCase {
    pub gate: GateSpec,
    pub k: usize,
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

fn check_norm(amplitudes: &[Complex64]) -> Result<(), ZurekError> {
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
        return Err(ZurekError::BadAmplitudes(format!("squared norm {norm} differs from 1")));
    }
    Ok(())
}

impl ZurekCase {
    pub fn new(gate: GateSpec, k: usize, n: usize, amplitudes: Vec<Complex64>) -> Result<Self, ZurekError> {
        gate.validate()?;
        RegisterLayout::new(k, n)?;
        if amplitudes.len() != 1 << k {
            return Err(ZurekError::BadAmplitudes(format!(
                "{} amplitudes for {k} system qubits",
                amplitudes.len()
            )));
        }
        check_norm(&amplitudes)?;
        Ok(Self { gate, k, n, amplitudes })
    }

    /// Single system qubit `a|0⟩ + b|1⟩`.
    pub fn qubit(gate: GateSpec, n: usize, a: Complex64, b: Complex64) -> Result<Self, ZurekError> {
        Self::new(gate, 1, n, vec![a, b])
    }

    pub fn layout(&self) -> RegisterLayout {
        RegisterLayout::new(self.k, self.n).expect("validated on construction")
    }

    /// `|ψ_S⟩ ⊗ |0…0⟩`.
    pub fn input(&self) -> PureState {
        let layout = self.layout();
        let mut amp = vec![ZERO; layout.dim()];
        for (s, &z) in self.amplitudes.iter().enumerate() {
            amp[s << self.n] = z;
        }
        PureState::from_parts_unchecked(layout.labels(), amp)
    }
}

/// `|ψ⟩ ← U|ψ⟩` with `g` on register qubits `(i, j)`.
fn apply_pure(amp: &mut [Complex64], g: &Gate4, i: usize, j: usize, nq: usize) {
    let (mi, mj) = (1usize << bit_of(i, nq), 1usize << bit_of(j, nq));
    let both = mi | mj;
    for base in (0..amp.len()).filter(|b| b & both == 0) {
        let idx = [base, base | mj, base | mi, base | both];
        let x = idx.map(|p| amp[p]);
        for (row, &p) in g.iter().zip(&idx) {
            amp[p] = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3];
        }
    }
}

/// Register pairs in interaction order: for each `E_j`, every system qubit.
fn interaction_pairs(k: usize, n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |j| (0..k).map(move |i| (i, k + j)))
}

/// Exact output state of one pass over the environment.
pub fn zurek_evolve(case: &ZurekCase) -> Result<PureState, ZurekError> {
    let g = gate4_from_matrix(&total_unitary(&case.gate)?);
    let nq = case.k + case.n;
    let input = case.input();
    let mut amp = input.amplitudes().to_vec();
    for (i, j) in interaction_pairs(case.k, case.n) {
        apply_pure(&mut amp, &g, i, j, nq);
    }
    Ok(PureState::from_parts_unchecked(input.labels().to_vec(), amp))
}

/// One pass applied to an arbitrary (possibly mixed) full-register state.
pub fn zurek_evolve_density(gate: &GateSpec, rho: &DensityMatrix) -> Result<DensityMatrix, ZurekError> {
    let layout = rho
        .layout()
        .ok_or_else(|| ZurekError::BadParams("state is not a full system-environment register".into()))?;
    let u = total_unitary(gate)?;
    let mut out = rho.clone();
    for (i, j) in interaction_pairs(layout.k(), layout.n()) {
        out = apply_two_qubit(&out, &u, i, j)?;
    }
    Ok(out)
}

/// Named analytic output states of the single-pass model with a single
/// system qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZurekTag {
    /// Plain CNOT: `a|0⟩|0_n⟩ + b|1⟩|1_n⟩`.
    CnotBranching,
    /// Symmetric dissipation `α = π/2`, dissipation first: `a|0⟩|0_n⟩ + ib|0⟩|10_{n−1}⟩`.
    SymmetricDissTot,
    /// Symmetric dissipation `α = π/2`, CNOT first: the branching state.
    SymmetricDissReversed,
    /// `α₁ = 2π/3`, `α₂ = π/3`, dissipation first, `n = 2`.
    AsymmetricTot,
    /// `α₁ = 2π/3`, `α₂ = π/3`, CNOT first, `n = 2`.
    AsymmetricReversed,
    /// Dephasing `γ = π`: `(−i)ⁿ(a|0⟩|0_n⟩ + (−1)ⁿ b|1⟩|1_n⟩)`.
    DephasingTot,
    /// Dephasing `γ = π`, CNOT first: `(−i)ⁿ(a|0⟩|0_n⟩ + b|1⟩|1_n⟩)`.
    DephasingReversed,
    /// `α = π/2`, `γ = π`: `(−i)ⁿ(a|0⟩|0_n⟩ − ib|0⟩|10_{n−1}⟩)`.
    DissDephasingTot,
    /// `α = π/2`, `γ = π`, CNOT first: `(−i)ⁿ(a|0⟩|0_n⟩ + b|1⟩|1_n⟩)`.
    DissDephasingReversed,
    /// General `α₁, α₂` at `γ = 0`, dissipation first, `n = 2`.
    AsymmetricGeneralTot,
    /// General `α₁, α₂` at `γ = 0`, CNOT first, `n = 2`.
    AsymmetricGeneralReversed,
}

impl ZurekTag {
    pub const ALL: [ZurekTag; 11] = [
        ZurekTag::CnotBranching,
        ZurekTag::SymmetricDissTot,
        ZurekTag::SymmetricDissReversed,
        ZurekTag::AsymmetricTot,
        ZurekTag::AsymmetricReversed,
        ZurekTag::DephasingTot,
        ZurekTag::DephasingReversed,
        ZurekTag::DissDephasingTot,
        ZurekTag::DissDephasingReversed,
        ZurekTag::AsymmetricGeneralTot,
        ZurekTag::AsymmetricGeneralReversed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ZurekTag::CnotBranching => "cnot_branching",
            ZurekTag::SymmetricDissTot => "symmetric_diss_tot",
            ZurekTag::SymmetricDissReversed => "symmetric_diss_reversed",
            ZurekTag::AsymmetricTot => "asymmetric_tot",
            ZurekTag::AsymmetricReversed => "asymmetric_reversed",
            ZurekTag::DephasingTot => "dephasing_tot",
            ZurekTag::DephasingReversed => "dephasing_reversed",
            ZurekTag::DissDephasingTot => "diss_dephasing_tot",
            ZurekTag::DissDephasingReversed => "diss_dephasing_reversed",
            ZurekTag::AsymmetricGeneralTot => "asymmetric_general_tot",
            ZurekTag::AsymmetricGeneralReversed => "asymmetric_general_reversed",
        }
    }

    /// Tags whose closed form exists only for two environment qubits.
    pub fn requires_two_env_qubits(&self) -> bool {
        matches!(
            self,
            ZurekTag::AsymmetricTot
                | ZurekTag::AsymmetricReversed
                | ZurekTag::AsymmetricGeneralTot
                | ZurekTag::AsymmetricGeneralReversed
        )
    }

    /// The gate that produces this state under [`zurek_evolve`]. Only the
    /// general tags read `alpha1`/`alpha2` from the parameters.
    pub fn gate(&self, params: &ClosedFormParams) -> Result<GateSpec, ZurekError> {
        use OperatorOrder::{Reversed, Tot};
        let spec = match self {
            ZurekTag::CnotBranching => GateSpec::cnot(),
            ZurekTag::SymmetricDissTot => GateSpec::symmetric(PI / 2.0, Tot)?,
            ZurekTag::SymmetricDissReversed => GateSpec::symmetric(PI / 2.0, Reversed)?,
            ZurekTag::AsymmetricTot => GateSpec::cnot_with(2.0 * PI / 3.0, PI / 3.0, 0.0, Tot)?,
            ZurekTag::AsymmetricReversed => GateSpec::cnot_with(2.0 * PI / 3.0, PI / 3.0, 0.0, Reversed)?,
            ZurekTag::DephasingTot => GateSpec::cnot_with(0.0, 0.0, PI, Tot)?,
            ZurekTag::DephasingReversed => GateSpec::cnot_with(0.0, 0.0, PI, Reversed)?,
            ZurekTag::DissDephasingTot => GateSpec::cnot_with(PI / 2.0, PI / 2.0, PI, Tot)?,
            ZurekTag::DissDephasingReversed => GateSpec::cnot_with(PI / 2.0, PI / 2.0, PI, Reversed)?,
            ZurekTag::AsymmetricGeneralTot => GateSpec::cnot_with(params.alpha1, params.alpha2, 0.0, Tot)?,
            ZurekTag::AsymmetricGeneralReversed => GateSpec::cnot_with(params.alpha1, params.alpha2, 0.0, Reversed)?,
        };
        Ok(spec)
    }

    /// The matching [`ZurekCase`] for a closed-form parameter set.
    pub fn case(&self, params: &ClosedFormParams) -> Result<ZurekCase, ZurekError> {
        ZurekCase::qubit(self.gate(params)?, params.n, params.a, params.b)
    }
}

impl fmt::Display for ZurekTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ZurekTag {
    type Err = ZurekError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ZurekError::UnknownCase(s.to_string()))
    }
}

/// Inputs of the analytic states. `alpha1`/`alpha2` matter only for the
/// general asymmetric tags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormParams {
    pub n: usize,
    pub a: Complex64,
    pub b: Complex64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl ClosedFormParams {
    pub fn new(n: usize, a: Complex64, b: Complex64) -> Self {
        Self {
            n,
            a,
            b,
            alpha1: 0.0,
            alpha2: 0.0,
        }
    }

    pub fn with_alphas(mut self, alpha1: f64, alpha2: f64) -> Self {
        self.alpha1 = alpha1;
        self.alpha2 = alpha2;
        self
    }
}

/// Amplitude vector builder over `|s⟩|e₁…e_n⟩`.
struct Branches {
    n: usize,
    amp: Vec<Complex64>,
}

impl Branches {
    fn new(n: usize) -> Self {
        Self {
            n,
            amp: vec![ZERO; 1 << (n + 1)],
        }
    }

    /// Adds `z` to `|s⟩|env⟩`, where `env` lists the set environment qubits.
    fn add(&mut self, s: usize, env: &[usize], z: Complex64) -> &mut Self {
        let mut idx = s << self.n;
        for &j in env {
            idx |= 1 << (self.n - 1 - j);
        }
        self.amp[idx] += z;
        self
    }

    fn scaled(mut self, z: Complex64) -> Self {
        for x in &mut self.amp {
            *x *= z;
        }
        self
    }
}

/// The analytic output state of a tagged case, built term by term.
pub fn zurek_closed_form(tag: ZurekTag, params: &ClosedFormParams) -> Result<PureState, ZurekError> {
    let ClosedFormParams { n, a, b, alpha1, alpha2 } = *params;
    check_norm(&[a, b])?;
    if n == 0 {
        return Err(ZurekError::BadParams("n must be at least 1".into()));
    }
    if tag.requires_two_env_qubits() && n != 2 {
        return Err(ZurekError::BadParams(format!("{tag} is defined for n = 2 only, got {n}")));
    }
    let layout = RegisterLayout::new(1, n)?;
    let i = Complex64::i();
    let all: Vec<usize> = (0..n).collect();
    let c = |x: f64| Complex64::new(x, 0.0);
    let s3 = 3f64.sqrt();
    let mi_n = (-i).powu(n as u32);

    let mut st = Branches::new(n);
    let st = match tag {
        ZurekTag::CnotBranching | ZurekTag::SymmetricDissReversed => {
            st.add(0, &[], a).add(1, &all, b);
            st
        }
        ZurekTag::SymmetricDissTot => {
            st.add(0, &[], a).add(0, &[0], i * b);
            st
        }
        ZurekTag::AsymmetricTot => {
            st.add(0, &[1], -a / 2.0)
                .add(0, &[], a * 0.75)
                .add(1, &[], i * a * (s3 / 4.0))
                .add(0, &[0], i * b * (s3 / 2.0))
                .add(1, &[0], -b / 2.0);
            st
        }
        ZurekTag::AsymmetricReversed => {
            let q = c(s3 / 4.0) * i;
            st.add(0, &[], a * 0.75 + q * b)
                .add(0, &[0], -a * 0.25 + q * b)
                .add(1, &[1], -b * 0.25 + q * a)
                .add(1, &[0, 1], b * 0.75 + q * a);
            st
        }
        ZurekTag::DephasingTot => {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            st.add(0, &[], a).add(1, &all, b * sign);
            st.scaled(mi_n)
        }
        ZurekTag::DephasingReversed | ZurekTag::DissDephasingReversed => {
            st.add(0, &[], a).add(1, &all, b);
            st.scaled(mi_n)
        }
        ZurekTag::DissDephasingTot => {
            st.add(0, &[], a).add(0, &[0], -i * b);
            st.scaled(mi_n)
        }
        ZurekTag::AsymmetricGeneralTot => {
            let (cm, sm) = (((alpha1 - alpha2) / 2.0).cos(), ((alpha1 - alpha2) / 2.0).sin());
            let (cp, sp) = (((alpha1 + alpha2) / 2.0).cos(), ((alpha1 + alpha2) / 2.0).sin());
            st.add(0, &[], a * cm * cm)
                .add(1, &[], i * a * cm * sm)
                .add(0, &[0], i * b * cm * sp)
                .add(1, &[0], -b * sp * sm)
                .add(0, &[1], -a * sp * sm)
                .add(1, &[1], i * a * sm * cp)
                .add(0, &[0, 1], i * b * sp * cp)
                .add(1, &[0, 1], b * cp * cp);
            st
        }
        ZurekTag::AsymmetricGeneralReversed => {
            let (cm, sm) = (((alpha1 - alpha2) / 2.0).cos(), ((alpha1 - alpha2) / 2.0).sin());
            st.add(0, &[], a * cm * cm + i * b * cm * sm)
                .add(0, &[0], i * b * cm * sm - a * sm * sm)
                .add(1, &[1], -b * sm * sm + i * a * sm * cm)
                .add(1, &[0, 1], i * a * sm * cm + b * cm * cm);
            st
        }
    };
    Ok(PureState::from_parts_unchecked(layout.labels(), st.amp))
}

/// The two eigenvalues of `ρ_S` from the analytic formulas for the
/// asymmetric cases with `n = 2`, larger branch first for the dissipation-
/// first order and in the same pairing for the reversed one.
pub fn zurek_system_spectrum(tag: ZurekTag, a: Complex64, b: Complex64) -> Result<[f64; 2], ZurekError> {
    check_norm(&[a, b])?;
    let (pa, pb) = (a.norm_sqr(), b.norm_sqr());
    match tag {
        ZurekTag::AsymmetricTot => {
            let root = ((3.0 * pa + 4.0 * pb).powi(2) + 4.0 * pa).sqrt() / 8.0;
            Ok([0.5 + root, 0.5 - root])
        }
        ZurekTag::AsymmetricReversed => {
            let cross = Complex64::new(0.0, 2.0 * 3f64.sqrt() / 16.0) * (a.conj() * b - a * b.conj());
            Ok([
                10.0 / 16.0 * pa + 6.0 / 16.0 * pb + cross.re,
                10.0 / 16.0 * pb + 6.0 / 16.0 * pa - cross.re,
            ])
        }
        other => Err(ZurekError::UnknownCase(format!("no closed-form system spectrum for {other}"))),
    }
}

/// `ρ_S` of a pure register state, computed straight from the amplitudes.
pub fn reduced_system(state: &PureState, k: usize) -> ComplexMatrix {
    let ds = 1usize << k;
    let de = state.amplitudes().len() / ds;
    let amp = state.amplitudes();
    ComplexMatrix::from_fn(ds, ds, |r, c| {
        (0..de).map(|e| amp[r * de + e] * amp[c * de + e].conj()).sum()
    })
}
