//! Entropies, mutual information between the system and environment
//! fragments, partial information plots, and redundancy.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::numerics::hermitian_eigenvalues;
use crate::registers::{partial_trace, DensityMatrix, QubitLabel, RegisterError};

/// Eigenvalues in `[−CLAMP_TOL, 0)` are treated as zero.
pub const CLAMP_TOL: f64 = 1e-8;
/// Default plateau tolerance, relative to `H_class`.
pub const DEFAULT_PLATEAU_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DarwinismError {
    #[error("not a density matrix: {0}")]
    NotAState(String),
    #[error("pointer basis is not an orthonormal basis of the system: {0}")]
    BadBasis(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("state has no environment qubits")]
    NoEnvironment,
    #[error(transparent)]
    Register(#[from] RegisterError),
}

/// Shannon entropy in bits; zero probabilities contribute nothing.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `−Σ λ log₂ λ` over the eigenvalues of `ρ`, without renormalization.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64, DarwinismError> {
    let eig = hermitian_eigenvalues(rho.matrix()).map_err(|e| DarwinismError::NotAState(e.to_string()))?;
    let mut clamped = 0.0;
    let mut probs = Vec::with_capacity(eig.len());
    for l in eig {
        if l < -CLAMP_TOL {
            return Err(DarwinismError::NotAState(format!("eigenvalue {l:.3e} is negative")));
        }
        if l < 0.0 {
            clamped -= l;
            probs.push(0.0);
        } else {
            probs.push(l);
        }
    }
    if clamped >= CLAMP_TOL {
        return Err(DarwinismError::NotAState(format!("clamped weight {clamped:.3e} too large")));
    }
    Ok(shannon_entropy(&probs))
}

/// Shannon entropy of `p_i = ⟨π_i|ρ_S|π_i⟩`. An empty basis means the
/// computational basis.
pub fn classical_entropy(rho_s: &DensityMatrix, pointer_basis: &[Vec<Complex64>]) -> Result<f64, DarwinismError> {
    let dim = rho_s.dim();
    if pointer_basis.is_empty() {
        let probs: Vec<f64> = rho_s.matrix().diagonal().iter().map(|z| z.re.max(0.0)).collect();
        return Ok(shannon_entropy(&probs));
    }
    if pointer_basis.len() != dim {
        return Err(DarwinismError::BadBasis(format!("{} vectors for dimension {dim}", pointer_basis.len())));
    }
    for (i, u) in pointer_basis.iter().enumerate() {
        if u.len() != dim {
            return Err(DarwinismError::BadBasis(format!("vector {i} has length {}", u.len())));
        }
        for (j, v) in pointer_basis.iter().enumerate().skip(i) {
            let ip: Complex64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (ip - want).norm() > 1e-10 {
                return Err(DarwinismError::BadBasis(format!("⟨π{i}|π{j}⟩ = {ip}")));
            }
        }
    }
    let probs = pointer_basis
        .iter()
        .map(|u| {
            let w = rho_s.matrix().mul_vec(u).expect("dimension checked");
            u.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<Complex64>().re.max(0.0)
        })
        .collect::<Vec<_>>();
    Ok(shannon_entropy(&probs))
}

/// Order in which environment qubits join the fragment `E_L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// `E_L = {E1, …, E_L}`: qubits are traced out from the right.
    RightToLeft,
    /// `E_L` holds the first `L` environment indices of the permutation.
    Permutation(Vec<usize>),
}

impl Ordering {
    fn fragment(&self, n: usize, l: usize) -> Result<Vec<usize>, DarwinismError> {
        match self {
            Ordering::RightToLeft => Ok((0..l).collect()),
            Ordering::Permutation(p) => {
                let mut seen = vec![false; n];
                if p.len() != n {
                    return Err(DarwinismError::IndexOutOfRange { index: p.len(), limit: n });
                }
                for &j in p {
                    if j >= n || seen[j] {
                        return Err(DarwinismError::IndexOutOfRange { index: j, limit: n });
                    }
                    seen[j] = true;
                }
                Ok(p[..l].to_vec())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Ordering::RightToLeft => "right-to-left".to_string(),
            Ordering::Permutation(p) => {
                let parts: Vec<String> = p.iter().map(|j| format!("E{}", j + 1)).collect();
                parts.join(",")
            }
        }
    }
}

/// One point of a partial information plot. Entropies are in bits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EntropyReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub f: f64,
    #[serde(rename = "H_S")]
    pub h_s: f64,
    #[serde(rename = "H_E")]
    pub h_ef: f64,
    #[serde(rename = "H_SE")]
    pub h_sef: f64,
    #[serde(rename = "H_class")]
    pub h_class: f64,
    #[serde(rename = "MI")]
    pub mi: f64,
}

impl EntropyReport {
    /// `MI / H_class`, or `None` when `H_class` vanishes.
    pub fn ratio(&self) -> Option<f64> {
        (self.h_class > 1e-14).then(|| self.mi / self.h_class)
    }
}

struct Prepared<'a> {
    rho: &'a DensityMatrix,
    n: usize,
    h_s: f64,
    h_class: f64,
}

impl<'a> Prepared<'a> {
    fn new(rho: &'a DensityMatrix, h_class: Option<f64>) -> Result<Self, DarwinismError> {
        let env = rho.env_positions();
        if env.is_empty() {
            return Err(DarwinismError::NoEnvironment);
        }
        let rho_s = partial_trace(rho, &env)?;
        let h_s = von_neumann_entropy(&rho_s)?;
        let h_class = match h_class {
            Some(h) => h,
            None => classical_entropy(&rho_s, &[])?,
        };
        Ok(Self {
            rho,
            n: env.len(),
            h_s,
            h_class,
        })
    }

    fn report(&self, l: usize, ordering: &Ordering) -> Result<EntropyReport, DarwinismError> {
        if l == 0 || l > self.n {
            return Err(DarwinismError::IndexOutOfRange { index: l, limit: self.n });
        }
        let env_labels: Vec<QubitLabel> = self
            .rho
            .env_positions()
            .iter()
            .map(|&p| self.rho.labels()[p])
            .collect();
        let fragment = ordering.fragment(self.n, l)?;
        let keep: Vec<QubitLabel> = fragment.iter().map(|&j| env_labels[j]).collect();
        let discard: Vec<usize> = env_labels
            .iter()
            .filter(|lab| !keep.contains(lab))
            .map(|&lab| self.rho.position_of(lab).expect("label from this state"))
            .collect();
        let rho_se = partial_trace(self.rho, &discard)?;
        let rho_e = partial_trace(&rho_se, &rho_se.system_positions())?;
        let h_sef = von_neumann_entropy(&rho_se)?;
        let h_ef = von_neumann_entropy(&rho_e)?;
        Ok(EntropyReport {
            l,
            f: l as f64 / self.n as f64,
            h_s: self.h_s,
            h_ef,
            h_sef,
            h_class: self.h_class,
            mi: self.h_s + h_ef - h_sef,
        })
    }
}

/// `H(S:E_L) = H(S) + H(E_L) − H(S,E_L)` for one fragment size.
/// `h_class` overrides the pointer entropy of the current `ρ_S`.
pub fn mutual_information(
    rho: &DensityMatrix,
    l: usize,
    ordering: &Ordering,
    h_class: Option<f64>,
) -> Result<EntropyReport, DarwinismError> {
    Prepared::new(rho, h_class)?.report(l, ordering)
}

/// Which fragment orderings a plot is built from.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingSet {
    Single(Ordering),
    /// `count` permutations drawn from a ChaCha8 stream seeded with `seed`.
    Seeded { count: usize, seed: u64 },
}

impl OrderingSet {
    pub fn orderings(&self, n: usize) -> Vec<Ordering> {
        match self {
            OrderingSet::Single(o) => vec![o.clone()],
            OrderingSet::Seeded { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        let mut p: Vec<usize> = (0..n).collect();
                        p.shuffle(&mut rng);
                        Ordering::Permutation(p)
                    })
                    .collect()
            }
        }
    }
}

/// Partial information plot over `f = L/n`, `L = 1..n`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PipCurve {
    pub n: usize,
    pub k: usize,
    pub ordering: String,
    /// Averaged over orderings when more than one was used.
    pub points: Vec<EntropyReport>,
    /// Per point, `max − min` of MI across orderings; zeros for one ordering.
    pub spread: Vec<f64>,
}

impl PipCurve {
    pub fn max_deviation(&self) -> f64 {
        self.spread.iter().copied().fold(0.0, f64::max)
    }

    pub fn h_class(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.h_class)
    }

    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.points.iter().map(EntropyReport::ratio).collect()
    }

    /// The `L = n` point.
    pub fn terminal(&self) -> Option<&EntropyReport> {
        self.points.last()
    }
}

/// Builds the plot for every `L`, in parallel over fragment sizes.
pub fn pip(rho: &DensityMatrix, orderings: &OrderingSet, h_class: Option<f64>) -> Result<PipCurve, DarwinismError> {
    let prepared = Prepared::new(rho, h_class)?;
    let n = prepared.n;
    let k = rho.system_positions().len();
    let list = orderings.orderings(n);
    if list.is_empty() {
        return Err(DarwinismError::IndexOutOfRange { index: 0, limit: 0 });
    }
    let per_l: Vec<(EntropyReport, f64)> = (1..=n)
        .into_par_iter()
        .map(|l| {
            let reports = list
                .iter()
                .map(|o| prepared.report(l, o))
                .collect::<Result<Vec<_>, _>>()?;
            let m = reports.len() as f64;
            let mean = |g: fn(&EntropyReport) -> f64| reports.iter().map(g).sum::<f64>() / m;
            let (lo, hi) = reports
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.mi), hi.max(r.mi)));
            let avg = if reports.len() == 1 {
                reports[0]
            } else {
                EntropyReport {
                    h_ef: mean(|r| r.h_ef),
                    h_sef: mean(|r| r.h_sef),
                    mi: mean(|r| r.mi),
                    ..reports[0]
                }
            };
            Ok((avg, hi - lo))
        })
        .collect::<Result<_, DarwinismError>>()?;
    let ordering = match orderings {
        OrderingSet::Single(o) => o.describe(),
        OrderingSet::Seeded { count, seed } => format!("{count} seeded orderings (seed {seed})"),
    };
    let (points, spread) = per_l.into_iter().unzip();
    Ok(PipCurve {
        n,
        k,
        ordering,
        points,
        spread,
    })
}

/// Redundancy read off a plot. `delta` is the information deficit, fixed at 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RedundancyResult {
    pub f_star: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub delta: f64,
}

/// `f*` is the smallest `f` with `MI ≥ (1 − tol)·H_class`; `R = 1/f*`.
pub fn redundancy(curve: &PipCurve, tol: f64) -> RedundancyResult {
    let f_star = curve
        .points
        .iter()
        .find(|p| p.h_class > 1e-14 && p.mi >= (1.0 - tol) * p.h_class)
        .map(|p| p.f);
    RedundancyResult {
        f_star,
        r: f_star.map(|f| 1.0 / f),
        delta: 0.0,
    }
}

/// Outcome of the plateau test, with the fragment sizes that fail it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DarwinismVerdict {
    pub holds: bool,
    pub system_matches_class: bool,
    pub violating: Vec<usize>,
}

/// True when `MI ≥ (1 − tol)·H_class` for every `k ≤ L ≤ n − 1` and
/// `|H(S) − H_class| ≤ tol·H_class`.
pub fn darwinism_criterion(curve: &PipCurve, k: usize, tol: f64) -> DarwinismVerdict {
    let h_class = curve.h_class();
    let violating: Vec<usize> = curve
        .points
        .iter()
        .filter(|p| p.l >= k.max(1) && p.l < curve.n)
        .filter(|p| h_class <= 1e-14 || p.mi < (1.0 - tol) * h_class)
        .map(|p| p.l)
        .collect();
    let h_s = curve.points.first().map_or(0.0, |p| p.h_s);
    let system_matches_class = h_class > 1e-14 && (h_s - h_class).abs() <= tol * h_class;
    DarwinismVerdict {
        holds: violating.is_empty() && system_matches_class,
        system_matches_class,
        violating,
    }
}
