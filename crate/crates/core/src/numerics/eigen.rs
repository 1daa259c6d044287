//! Hermitian eigensolver: Householder reduction to real symmetric tridiagonal
//! form followed by implicit QL iterations.
//!
//! Every reduction runs in a fixed order, so repeated calls on the same input
//! give bit-identical output regardless of thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use super::NumericsError;

/// Entrywise symmetry tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_QL_SWEEPS: usize = 64;
const PAR_THRESHOLD: usize = 192;

/// Eigenvalues ascending; eigenvectors stored as the columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(n, n, |r, c| v[(r, c)] * self.eigenvalues[c]);
        scaled.matmul(&v.adjoint()).expect("square shapes agree")
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<(), NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL || !defect.is_finite() {
        return Err(NumericsError::NotHermitian { defect });
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigs(m: &ComplexMatrix) -> Result<HermitianEigen, NumericsError> {
    check_hermitian(m)?;
    let n = m.rows();
    if m.is_diagonal() {
        let diag: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
        let order = ascending_order(&diag);
        let eigenvalues = order.iter().map(|&i| diag[i]).collect();
        let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| if order[c] == r { ONE } else { ZERO });
        return Ok(HermitianEigen {
            eigenvalues,
            eigenvectors,
        });
    }

    let tri = Tridiagonal::reduce(m, true);
    let mut d = tri.diag.clone();
    let mut e = tri.real_off.clone();
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    implicit_ql(&mut d, &mut e, Some(&mut z))?;

    // V = Q · Phase · W
    let mut v = ComplexMatrix::from_fn(n, n, |r, c| tri.phases[r] * z[r * n + c]);
    tri.apply_reflectors(&mut v);

    let order = ascending_order(&d);
    let eigenvalues = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, NumericsError> {
    check_hermitian(m)?;
    let mut d;
    if m.is_diagonal() {
        d = m.diagonal().iter().map(|z| z.re).collect::<Vec<_>>();
    } else {
        let tri = Tridiagonal::reduce(m, false);
        d = tri.diag;
        let mut e = tri.real_off;
        implicit_ql(&mut d, &mut e, None)?;
    }
    let order = ascending_order(&d);
    Ok(order.iter().map(|&i| d[i]).collect())
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

struct Tridiagonal {
    n: usize,
    diag: Vec<f64>,
    /// `real_off[i]` couples `i` and `i + 1`; the last entry is zero.
    real_off: Vec<f64>,
    /// Unit phases turning the complex tridiagonal into a real one.
    phases: Vec<Complex64>,
    /// Householder vectors; reflector `k` acts on indices `k+1..n`.
    reflectors: Vec<Option<Vec<Complex64>>>,
}

impl Tridiagonal {
    fn reduce(m: &ComplexMatrix, keep_reflectors: bool) -> Self {
        let n = m.rows();
        let mut a = m.hermitian_part();
        let mut reflectors = Vec::new();

        for k in 0..n.saturating_sub(2) {
            let len = n - k - 1;
            let mut v: Vec<Complex64> = (k + 1..n).map(|r| a[(r, k)]).collect();
            let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let tail_norm = v[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
            if xnorm == 0.0 || tail_norm == 0.0 {
                if keep_reflectors {
                    reflectors.push(None);
                }
                continue;
            }
            let x0 = v[0];
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
            let alpha = -phase * xnorm;
            v[0] -= alpha;
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in v.iter_mut() {
                *z /= vnorm;
            }

            // Trailing block B <- H B H with H = I - 2 v v†.
            let off = k + 1;
            let cols = n;
            let data = a.as_mut_slice();
            let p: Vec<Complex64> = if len >= PAR_THRESHOLD {
                (0..len)
                    .into_par_iter()
                    .map(|i| {
                        let row = &data[(off + i) * cols + off..(off + i) * cols + n];
                        row.iter().zip(&v).map(|(&b, &vj)| b * vj).sum()
                    })
                    .collect()
            } else {
                (0..len)
                    .map(|i| {
                        let row = &data[(off + i) * cols + off..(off + i) * cols + n];
                        row.iter().zip(&v).map(|(&b, &vj)| b * vj).sum()
                    })
                    .collect()
            };
            let kappa: f64 = v.iter().zip(&p).map(|(vi, &pi)| (vi.conj() * pi).re).sum();
            let q: Vec<Complex64> = p.iter().zip(&v).map(|(&pi, &vi)| pi - vi * kappa).collect();

            let update_row = |i: usize, row: &mut [Complex64]| {
                let vi2 = v[i] * 2.0;
                let qi2 = q[i] * 2.0;
                for j in 0..len {
                    row[j] -= vi2 * q[j].conj() + qi2 * v[j].conj();
                }
            };
            let block_rows = &mut data[off * cols..];
            if len >= PAR_THRESHOLD {
                block_rows
                    .par_chunks_mut(cols)
                    .enumerate()
                    .for_each(|(i, row)| update_row(i, &mut row[off..n]));
            } else {
                for (i, row) in block_rows.chunks_mut(cols).enumerate() {
                    update_row(i, &mut row[off..n]);
                }
            }

            a[(k + 1, k)] = alpha;
            a[(k, k + 1)] = alpha.conj();
            for r in k + 2..n {
                a[(r, k)] = ZERO;
                a[(k, r)] = ZERO;
            }
            if keep_reflectors {
                reflectors.push(Some(v));
            }
        }

        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        let mut real_off = vec![0.0; n];
        let mut phases = vec![ONE; n];
        for i in 0..n.saturating_sub(1) {
            let e = a[(i + 1, i)];
            let mag = e.norm();
            real_off[i] = mag;
            phases[i + 1] = if mag > 0.0 { phases[i] * (e / mag) } else { phases[i] };
        }
        Self {
            n,
            diag,
            real_off,
            phases,
            reflectors,
        }
    }

    /// Left-multiplies `z` by `Q = H_0 H_1 ⋯`.
    fn apply_reflectors(&self, z: &mut ComplexMatrix) {
        let n = self.n;
        let cols = z.cols();
        for (k, refl) in self.reflectors.iter().enumerate().rev() {
            let Some(v) = refl else { continue };
            let off = k + 1;
            // w_c = Σ_i conj(v_i) z[off+i, c]
            let mut w = vec![ZERO; cols];
            for (i, vi) in v.iter().enumerate() {
                let vc = vi.conj();
                for (c, wc) in w.iter_mut().enumerate() {
                    *wc += vc * z[(off + i, c)];
                }
            }
            let data = z.as_mut_slice();
            let rows = &mut data[off * cols..n * cols];
            let update = |i: usize, row: &mut [Complex64]| {
                let vi2 = v[i] * 2.0;
                for (x, &wc) in row.iter_mut().zip(&w) {
                    *x -= vi2 * wc;
                }
            };
            if n - off >= PAR_THRESHOLD {
                rows.par_chunks_mut(cols).enumerate().for_each(|(i, row)| update(i, row));
            } else {
                for (i, row) in rows.chunks_mut(cols).enumerate() {
                    update(i, row);
                }
            }
        }
    }
}

/// Implicit QL with Wilkinson-style shifts on a real symmetric tridiagonal
/// matrix. `e[i]` couples `i` and `i + 1`. When `z` is given (row-major
/// `n×n`), rotations are accumulated into its columns.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<f64>>) -> Result<(), NumericsError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // Couplings below eps·‖T‖ are dropped even when the neighbouring
    // diagonal entries vanish; the relative test alone never fires there.
    let norm = d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(NumericsError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let zi1 = z[k * n + i + 1];
                        let zi = z[k * n + i];
                        z[k * n + i + 1] = s * zi + c * zi1;
                        z[k * n + i] = c * zi - s * zi1;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
