//! Two-qubit gate families: controlled-U, the dissipative–dephasing
//! exponential, and their composites in either operator order.
//!
//! All 4×4 matrices use the basis `|c t⟩ → 2c + t`, with the control
//! (system) qubit as the high bit.

use std::f64::consts::{FRAC_1_PI, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::numerics::{hermitian_eigs, ComplexMatrix, NumericsError, ONE};

const RANGE_SLACK: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GateError {
    #[error("parameter {name} = {value} outside {allowed}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("unknown operator order `{0}` (expected `tot` or `reversed`)")]
    UnknownOrder(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which factor acts first on the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorOrder {
    /// `U^(φ) · U^Diss`: dissipation first, then the controlled-U.
    #[default]
    Tot,
    /// `U^Diss · U^(φ)`: controlled-U first, then dissipation.
    Reversed,
}

impl OperatorOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorOrder::Tot => "tot",
            OperatorOrder::Reversed => "reversed",
        }
    }
}

impl fmt::Display for OperatorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorOrder {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tot" | "total" => Ok(OperatorOrder::Tot),
            "reversed" | "rev" => Ok(OperatorOrder::Reversed),
            _ => Err(GateError::UnknownOrder(s.to_string())),
        }
    }
}

/// Parameters of one two-qubit interaction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GateSpec {
    pub phi: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma: f64,
    pub order: OperatorOrder,
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, allowed: &'static str) -> Result<(), GateError> {
    if value.is_finite() && value >= lo - RANGE_SLACK && value <= hi + RANGE_SLACK {
        Ok(())
    } else {
        Err(GateError::ParamOutOfRange { name, value, allowed })
    }
}

fn check_diss(alpha1: f64, alpha2: f64, gamma: f64) -> Result<(), GateError> {
    check_range("alpha1", alpha1, f64::NEG_INFINITY, f64::INFINITY, "finite values")?;
    check_range("alpha2", alpha2, f64::NEG_INFINITY, f64::INFINITY, "finite values")?;
    check_range("alpha1 + alpha2", alpha1 + alpha2, 0.0, PI, "[0, pi]")?;
    check_range("gamma", gamma, 0.0, PI, "[0, pi]")
}

impl GateSpec {
    pub fn new(phi: f64, alpha1: f64, alpha2: f64, gamma: f64, order: OperatorOrder) -> Result<Self, GateError> {
        let spec = Self {
            phi,
            alpha1,
            alpha2,
            gamma,
            order,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GateError> {
        check_range("phi", self.phi, 0.0, PI, "[0, pi]")?;
        check_diss(self.alpha1, self.alpha2, self.gamma)
    }

    /// Pure decoherence: CNOT with no dissipation or dephasing.
    pub fn cnot() -> Self {
        Self {
            phi: PI / 2.0,
            alpha1: 0.0,
            alpha2: 0.0,
            gamma: 0.0,
            order: OperatorOrder::Tot,
        }
    }

    /// CNOT combined with symmetric dissipation `α₁ = α₂ = alpha`.
    pub fn symmetric(alpha: f64, order: OperatorOrder) -> Result<Self, GateError> {
        Self::new(PI / 2.0, alpha, alpha, 0.0, order)
    }

    /// CNOT combined with general dissipation and dephasing.
    pub fn cnot_with(alpha1: f64, alpha2: f64, gamma: f64, order: OperatorOrder) -> Result<Self, GateError> {
        Self::new(PI / 2.0, alpha1, alpha2, gamma, order)
    }

    pub fn with_order(mut self, order: OperatorOrder) -> Self {
        self.order = order;
        self
    }
}

/// `(sin θ, cos θ)` with results within rounding of `0` or `±1` snapped to
/// the exact value, so quarter-turn angles give exact CNOT and swap entries.
fn snapped_sin_cos(theta: f64) -> (f64, f64) {
    let snap = |x: f64| {
        if x.abs() < 1e-15 {
            0.0
        } else if (x.abs() - 1.0).abs() < 1e-15 {
            x.signum()
        } else {
            x
        }
    };
    let (s, c) = theta.sin_cos();
    (snap(s), snap(c))
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ (σ_z cos φ + σ_x sin φ)`.
pub fn controlled_u(phi: f64) -> Result<ComplexMatrix, GateError> {
    check_range("phi", phi, 0.0, PI, "[0, pi]")?;
    let (s, c) = snapped_sin_cos(phi);
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 2)] = Complex64::new(c, 0.0);
    m[(2, 3)] = Complex64::new(s, 0.0);
    m[(3, 2)] = Complex64::new(s, 0.0);
    m[(3, 3)] = Complex64::new(-c, 0.0);
    Ok(m)
}

/// `exp[(i/2)(α₁ σ_x⊗σ_x + α₂ σ_y⊗σ_y − γ σ_z⊗σ_z)]`, assembled exactly from
/// the Bell-basis eigenvalues of the commuting Hamiltonian terms.
pub fn diss_unitary(alpha1: f64, alpha2: f64, gamma: f64) -> Result<ComplexMatrix, GateError> {
    check_diss(alpha1, alpha2, gamma)?;
    Ok(diss_unitary_unchecked(alpha1, alpha2, gamma))
}

pub(crate) fn diss_unitary_unchecked(alpha1: f64, alpha2: f64, gamma: f64) -> ComplexMatrix {
    let phase = |h: f64| {
        let (s, c) = snapped_sin_cos(h / 2.0);
        Complex64::new(c, s)
    };
    let phi_plus = phase(alpha1 - alpha2 - gamma);
    let phi_minus = phase(-alpha1 + alpha2 - gamma);
    let psi_plus = phase(alpha1 + alpha2 + gamma);
    let psi_minus = phase(-alpha1 - alpha2 + gamma);

    let mut m = ComplexMatrix::zeros(4, 4);
    // {|00⟩, |11⟩} block from Φ±.
    let (d, o) = ((phi_plus + phi_minus) * 0.5, (phi_plus - phi_minus) * 0.5);
    m[(0, 0)] = d;
    m[(3, 3)] = d;
    m[(0, 3)] = o;
    m[(3, 0)] = o;
    // {|01⟩, |10⟩} block from Ψ±.
    let (d, o) = ((psi_plus + psi_minus) * 0.5, (psi_plus - psi_minus) * 0.5);
    m[(1, 1)] = d;
    m[(2, 2)] = d;
    m[(1, 2)] = o;
    m[(2, 1)] = o;
    m
}

/// The composite interaction in the order chosen by `spec.order`.
pub fn total_unitary(spec: &GateSpec) -> Result<ComplexMatrix, GateError> {
    spec.validate()?;
    let cu = controlled_u(spec.phi)?;
    let diss = diss_unitary(spec.alpha1, spec.alpha2, spec.gamma)?;
    let product = match spec.order {
        OperatorOrder::Tot => cu.matmul(&diss)?,
        OperatorOrder::Reversed => diss.matmul(&cu)?,
    };
    Ok(product)
}

/// Principal argument with `−π` folded onto `+π`, so `−1` sorts last.
pub fn phase_key(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI + 1e-12 {
        PI
    } else {
        a
    }
}

/// Eigenvalues of a unitary matrix sorted by ascending phase.
///
/// The Hermitian and anti-Hermitian parts of a normal matrix commute, so a
/// generic real combination of them shares the eigenvectors of `g`.
pub fn gate_spectrum(g: &ComplexMatrix) -> Result<Vec<Complex64>, GateError> {
    if !g.is_square() {
        return Err(NumericsError::NotSquare {
            rows: g.rows(),
            cols: g.cols(),
        }
        .into());
    }
    let defect = g.unitarity_defect();
    if defect.is_nan() || defect > UNITARY_TOL {
        return Err(GateError::NotUnitary { defect });
    }
    let n = g.rows();
    let gd = g.adjoint();
    let re_part = g.add(&gd)?.scale_real(0.5);
    let im_part = g.sub(&gd)?.scale(Complex64::new(0.0, -0.5));

    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for mix in [FRAC_1_PI, 3f64.sqrt(), -0.577_215_664_901_532_9] {
        let h = re_part.add(&im_part.scale_real(mix))?.hermitian_part();
        let eig = hermitian_eigs(&h)?;
        let mut worst = 0.0_f64;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let v = eig.eigenvector(i);
            let gv = g.mul_vec(&v)?;
            let lambda: Complex64 = v.iter().zip(&gv).map(|(a, &b)| a.conj() * b).sum();
            let resid = gv
                .iter()
                .zip(&v)
                .map(|(&x, &y)| (x - lambda * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(resid);
            values.push(lambda / lambda.norm());
        }
        if worst < 1e-11 {
            best = Some((worst, values));
            break;
        }
        if best.as_ref().is_none_or(|(w, _)| worst < *w) {
            best = Some((worst, values));
        }
    }
    let (_, mut values) = best.expect("at least one mixing attempt");
    values.sort_by(|a, b| phase_key(*a).total_cmp(&phase_key(*b)));
    Ok(values)
}

/// Identity as a 4×4 gate, handy for tests and degenerate specs.
pub fn identity_gate() -> ComplexMatrix {
    ComplexMatrix::identity(4)
}
