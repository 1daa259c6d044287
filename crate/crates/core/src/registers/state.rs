use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{
    bit_of, QubitLabel, RegisterError, RegisterLayout, AMPLITUDE_TOL, DEFAULT_MAX_QUBITS, PSD_TOL,
    STATE_HERMITIAN_TOL, STATE_TRACE_TOL,
};
use crate::numerics::{hermitian_eigenvalues, ComplexMatrix, ONE, ZERO};

fn check_qubit_count(labels: &[QubitLabel], dim: usize) -> Result<(), RegisterError> {
    let nq = labels.len();
    if nq == 0 {
        return Err(RegisterError::NotAState("register has no qubits".into()));
    }
    if nq > DEFAULT_MAX_QUBITS {
        return Err(RegisterError::SizeOverflow {
            qubits: nq,
            max: DEFAULT_MAX_QUBITS,
        });
    }
    if dim != 1 << nq {
        return Err(RegisterError::NotAState(format!("dimension {dim} does not match {nq} qubits")));
    }
    Ok(())
}

/// Unit-norm amplitude vector over a labeled register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    labels: Vec<QubitLabel>,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(labels: Vec<QubitLabel>, amplitudes: Vec<Complex64>) -> Result<Self, RegisterError> {
        check_qubit_count(&labels, amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > AMPLITUDE_TOL {
            return Err(RegisterError::BadAmplitudes(format!("norm {norm} differs from 1")));
        }
        Ok(Self { labels, amplitudes })
    }

    pub fn from_layout(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Result<Self, RegisterError> {
        Self::new(layout.labels(), amplitudes)
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<QubitLabel>, amplitudes: Vec<Complex64>) -> Self {
        Self { labels, amplitudes }
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            labels: self.labels.clone(),
            data: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64, RegisterError> {
        if self.labels != other.labels {
            return Err(RegisterError::LayoutMismatch);
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, &b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }
}

/// Hermitian, unit-trace, positive semidefinite operator over a labeled register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<QubitLabel>,
    data: ComplexMatrix,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian and unit trace within 1e-10, smallest
    /// eigenvalue at least −1e-8.
    pub fn new(labels: Vec<QubitLabel>, data: ComplexMatrix) -> Result<Self, RegisterError> {
        let rho = Self { labels, data };
        rho.validate()?;
        Ok(rho)
    }

    pub fn from_layout(layout: RegisterLayout, data: ComplexMatrix) -> Result<Self, RegisterError> {
        Self::new(layout.labels(), data)
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<QubitLabel>, data: ComplexMatrix) -> Self {
        Self { labels, data }
    }

    pub fn maximally_mixed(labels: Vec<QubitLabel>) -> Self {
        let dim = 1 << labels.len();
        Self {
            labels,
            data: ComplexMatrix::from_real_diagonal(&vec![1.0 / dim as f64; dim]),
        }
    }

    /// `|index⟩⟨index|` in the computational basis.
    pub fn basis_projector(labels: Vec<QubitLabel>, index: usize) -> Self {
        let dim = 1 << labels.len();
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Self {
            labels,
            data: ComplexMatrix::from_real_diagonal(&diag),
        }
    }

    pub fn validate(&self) -> Result<(), RegisterError> {
        let dim = self.data.rows();
        if !self.data.is_square() {
            return Err(RegisterError::NotAState("matrix is not square".into()));
        }
        check_qubit_count(&self.labels, dim)?;
        if !self.data.is_finite() {
            return Err(RegisterError::NotAState("non-finite entries".into()));
        }
        let herm = self.data.hermiticity_defect();
        if herm > STATE_HERMITIAN_TOL {
            return Err(RegisterError::NotAState(format!("hermiticity defect {herm:.3e}")));
        }
        let tr = self.data.trace();
        if (tr - ONE).norm() > STATE_TRACE_TOL {
            return Err(RegisterError::NotAState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(RegisterError::NotAState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> Result<f64, RegisterError> {
        let eig = hermitian_eigenvalues(&self.data.hermitian_part())?;
        Ok(eig.first().copied().unwrap_or(0.0))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, RegisterError> {
        Ok(hermitian_eigenvalues(&self.data.hermitian_part())?)
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.data
    }

    /// The full system–environment layout, when the labels are exactly
    /// `S0..S(k−1), E0..E(n−1)` in that order.
    pub fn layout(&self) -> Option<RegisterLayout> {
        let k = self.labels.iter().filter(|l| matches!(l, QubitLabel::System(_))).count();
        let n = self.labels.len() - k;
        let layout = RegisterLayout::new(k, n).ok()?;
        (layout.labels() == self.labels).then_some(layout)
    }

    pub fn position_of(&self, label: QubitLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn system_positions(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(p, l)| matches!(l, QubitLabel::System(_)).then_some(p))
            .collect()
    }

    pub fn env_positions(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(p, l)| matches!(l, QubitLabel::Env(_)).then_some(p))
            .collect()
    }

    pub fn purity(&self) -> f64 {
        self.data.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }
}

/// Kronecker product; the qubits of `a` take the more significant bits.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix, RegisterError> {
    let qubits = a.num_qubits() + b.num_qubits();
    if qubits > DEFAULT_MAX_QUBITS {
        return Err(RegisterError::SizeOverflow {
            qubits,
            max: DEFAULT_MAX_QUBITS,
        });
    }
    let mut labels = a.labels.clone();
    labels.extend_from_slice(&b.labels);
    Ok(DensityMatrix {
        labels,
        data: a.data.kron(&b.data),
    })
}

/// Traces out the qubits at register positions `discard`; survivors keep their
/// relative order.
pub fn partial_trace(rho: &DensityMatrix, discard: &[usize]) -> Result<DensityMatrix, RegisterError> {
    let nq = rho.num_qubits();
    let mut seen = vec![false; nq];
    for &q in discard {
        if q >= nq {
            return Err(RegisterError::IndexOutOfRange { index: q, qubits: nq });
        }
        if seen[q] {
            return Err(RegisterError::DuplicateIndex(q));
        }
        seen[q] = true;
    }
    if discard.len() == nq {
        return Err(RegisterError::NotAState("cannot trace out every qubit".into()));
    }
    if discard.is_empty() {
        return Ok(rho.clone());
    }
    let keep: Vec<usize> = (0..nq).filter(|&q| !seen[q]).collect();
    let traced: Vec<usize> = (0..nq).filter(|&q| seen[q]).collect();

    // Full basis offsets contributed by each value of the kept / traced bits.
    let offsets = |qs: &[usize]| -> Vec<usize> {
        let m = qs.len();
        (0..1usize << m)
            .map(|v| {
                qs.iter()
                    .enumerate()
                    .filter(|&(p, _)| (v >> (m - 1 - p)) & 1 == 1)
                    .map(|(_, &q)| 1usize << bit_of(q, nq))
                    .sum()
            })
            .collect()
    };
    let keep_off = offsets(&keep);
    let trace_off = offsets(&traced);
    let dk = keep_off.len();
    let dim = rho.dim();
    let src = rho.data.as_slice();

    let mut out = vec![ZERO; dk * dk];
    for r in 0..dk {
        for c in r..dk {
            let mut acc = ZERO;
            for &t in &trace_off {
                acc += src[(keep_off[r] | t) * dim + (keep_off[c] | t)];
            }
            out[r * dk + c] = acc;
            out[c * dk + r] = acc.conj();
        }
        out[r * dk + r].im = 0.0;
    }
    let labels = keep.iter().map(|&q| rho.labels[q]).collect();
    Ok(DensityMatrix {
        labels,
        data: ComplexMatrix::from_vec_unchecked(dk, dk, out),
    })
}

/// `½‖ρ − σ‖₁` from the eigenvalues of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, RegisterError> {
    if rho.labels != sigma.labels {
        return Err(RegisterError::LayoutMismatch);
    }
    let diff = rho.data.sub(&sigma.data)?.hermitian_part();
    let eig = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * eig.iter().map(|l| l.abs()).sum::<f64>())
}

/// Named initial states of the system–environment register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialFamily {
    /// Pure system, environment `|0…0⟩`.
    ZurekGround,
    /// Pure system, environment `|1…1⟩`.
    EnvExcited,
    /// Pure system, environment `½(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)`.
    GhzMixture,
    /// Pure system, environment `2⁻ⁿ I`.
    EnvMaximallyMixed,
    /// `a|0⟩|s₁⟩^{⊗n} + b|1⟩|s₂⟩^{⊗n}` with `|s_m⟩ = (|0⟩ ± |1⟩)/√2`.
    EntangledSx,
    /// Uniform superposition over all `2^k` system states, environment `|0…0⟩`.
    KUniformPure,
}

impl InitialFamily {
    pub const ALL: [InitialFamily; 6] = [
        InitialFamily::ZurekGround,
        InitialFamily::EnvExcited,
        InitialFamily::GhzMixture,
        InitialFamily::EnvMaximallyMixed,
        InitialFamily::EntangledSx,
        InitialFamily::KUniformPure,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InitialFamily::ZurekGround => "zurek_ground",
            InitialFamily::EnvExcited => "env_excited",
            InitialFamily::GhzMixture => "ghz_mixture",
            InitialFamily::EnvMaximallyMixed => "env_maximally_mixed",
            InitialFamily::EntangledSx => "entangled_sx",
            InitialFamily::KUniformPure => "k_uniform_pure",
        }
    }
}

impl fmt::Display for InitialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialFamily {
    type Err = RegisterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| RegisterError::UnknownFamily(s.to_string()))
    }
}

/// System amplitudes for an initial state. `None` means the uniform
/// superposition `2^{−k/2} Σ|i⟩`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InitialParams {
    pub amplitudes: Option<Vec<Complex64>>,
}

impl InitialParams {
    pub fn qubit(a: Complex64, b: Complex64) -> Self {
        Self {
            amplitudes: Some(vec![a, b]),
        }
    }

    pub fn amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes: Some(amplitudes),
        }
    }

    pub fn uniform() -> Self {
        Self::default()
    }

    fn system_vector(&self, k: usize) -> Result<Vec<Complex64>, RegisterError> {
        let ds = 1usize << k;
        let Some(amps) = &self.amplitudes else {
            return Ok(vec![Complex64::new((ds as f64).powf(-0.5), 0.0); ds]);
        };
        if amps.len() != ds {
            return Err(RegisterError::BadAmplitudes(format!(
                "expected {ds} system amplitudes, got {}",
                amps.len()
            )));
        }
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > AMPLITUDE_TOL {
            return Err(RegisterError::BadAmplitudes(format!("squared norm {norm_sq} differs from 1")));
        }
        Ok(amps.clone())
    }
}

fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

fn env_basis_vector(n: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; 1 << n];
    v[index] = ONE;
    v
}

fn sx_product(n: usize, sign: f64) -> Vec<Complex64> {
    let amp = 2f64.powf(-(n as f64) / 2.0);
    (0..1usize << n)
        .map(|x| {
            let ones = x.count_ones();
            let s = if sign < 0.0 && ones % 2 == 1 { -1.0 } else { 1.0 };
            Complex64::new(s * amp, 0.0)
        })
        .collect()
}

/// Builds one of the named initial system–environment states.
pub fn initial_state(
    family: InitialFamily,
    layout: RegisterLayout,
    params: &InitialParams,
) -> Result<DensityMatrix, RegisterError> {
    let (k, n) = (layout.k(), layout.n());
    let system = match family {
        InitialFamily::KUniformPure => InitialParams::uniform().system_vector(k)?,
        _ => params.system_vector(k)?,
    };
    let labels = layout.labels();
    let all_ones = (1usize << n) - 1;
    let pure = |env: Vec<Complex64>| PureState::from_parts_unchecked(labels.clone(), kron_vec(&system, &env)).to_density();

    let rho = match family {
        InitialFamily::ZurekGround | InitialFamily::KUniformPure => pure(env_basis_vector(n, 0)),
        InitialFamily::EnvExcited => pure(env_basis_vector(n, all_ones)),
        InitialFamily::GhzMixture => {
            let sys = PureState::from_parts_unchecked(labels[..k].to_vec(), system.clone()).to_density();
            let mut diag = vec![0.0; 1 << n];
            diag[0] = 0.5;
            diag[all_ones] = 0.5;
            let env = DensityMatrix::from_parts_unchecked(labels[k..].to_vec(), ComplexMatrix::from_real_diagonal(&diag));
            tensor(&sys, &env)?
        }
        InitialFamily::EnvMaximallyMixed => {
            let sys = PureState::from_parts_unchecked(labels[..k].to_vec(), system.clone()).to_density();
            tensor(&sys, &DensityMatrix::maximally_mixed(labels[k..].to_vec()))?
        }
        InitialFamily::EntangledSx => {
            if k != 1 {
                return Err(RegisterError::BadAmplitudes(
                    "entangled_sx is defined for a single system qubit".into(),
                ));
            }
            let s1 = sx_product(n, 1.0);
            let s2 = sx_product(n, -1.0);
            let mut amps = Vec::with_capacity(2 << n);
            amps.extend(s1.iter().map(|&x| system[0] * x));
            amps.extend(s2.iter().map(|&x| system[1] * x));
            PureState::from_parts_unchecked(labels.clone(), amps).to_density()
        }
    };
    Ok(rho)
}
