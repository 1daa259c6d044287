//! Householder QR with column pivoting, numerical rank, nullspace extraction,
//! and a row-streaming triangular compressor for tall stacked systems.

use num_complex::Complex64;
use rayon::prelude::*;

use super::gram_schmidt::orthonormalize_vectors;
use super::matrix::{ComplexMatrix, ONE, ZERO};
use super::NumericsError;

/// Relative pivot threshold used when callers do not supply one.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const PAR_COLUMNS: usize = 64;

fn check_tol(tol: f64) -> Result<(), NumericsError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(NumericsError::InvalidTolerance(tol))
    }
}

/// Householder reflector mapping `x` onto `alpha·e₀`. Returns `(v, alpha)` with
/// `‖v‖ = 1`, or `None` when `x` already has that shape.
fn householder(x: &[Complex64]) -> Option<(Vec<Complex64>, Complex64)> {
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let norm = (x[0].norm_sqr() + tail).sqrt();
    let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
    let alpha = -phase * norm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= vnorm;
    }
    Some((v, alpha))
}

fn reflect(v: &[Complex64], col: &mut [Complex64]) {
    let w: Complex64 = v.iter().zip(col.iter()).map(|(vi, &c)| vi.conj() * c).sum();
    let w2 = w * 2.0;
    for (c, &vi) in col.iter_mut().zip(v) {
        *c -= vi * w2;
    }
}

/// `A P = Q R` with `R` upper trapezoidal and pivot magnitudes non-increasing.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    /// Column-major copy of `R`; column `j` holds `min(rows, cols)` entries.
    r_cols: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn factor(a: &ComplexMatrix) -> Result<Self, NumericsError> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(NumericsError::EmptyMatrix);
        }
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|c| a.column(c)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let steps = m.min(n);

        for k in 0..steps {
            // Exact remaining norms; cheap next to the reflector application.
            let mut best = k;
            let mut best_norm = -1.0;
            for (j, col) in cols.iter().enumerate().skip(k) {
                let s: f64 = col[k..].iter().map(|z| z.norm_sqr()).sum();
                if s > best_norm {
                    best_norm = s;
                    best = j;
                }
            }
            cols.swap(k, best);
            perm.swap(k, best);
            if best_norm == 0.0 {
                break;
            }
            let Some((v, alpha)) = householder(&cols[k][k..]) else {
                continue;
            };
            cols[k][k] = alpha;
            for z in cols[k][k + 1..].iter_mut() {
                *z = ZERO;
            }
            let rest = &mut cols[k + 1..];
            if rest.len() >= PAR_COLUMNS {
                rest.par_iter_mut().for_each(|c| reflect(&v, &mut c[k..]));
            } else {
                for c in rest.iter_mut() {
                    reflect(&v, &mut c[k..]);
                }
            }
        }
        for c in cols.iter_mut() {
            c.truncate(steps);
        }
        Ok(Self {
            rows: m,
            cols: n,
            r_cols: cols,
            perm,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column permutation: column `j` of `A P` is column `perm[j]` of `A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn r(&self) -> ComplexMatrix {
        let steps = self.rows.min(self.cols);
        ComplexMatrix::from_fn(steps, self.cols, |r, c| self.r_cols[c][r])
    }

    pub fn diagonal_magnitudes(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.r_cols[i][i].norm()).collect()
    }

    /// Number of pivots above `tol` times the leading pivot.
    pub fn rank(&self, tol: f64) -> Result<usize, NumericsError> {
        check_tol(tol)?;
        let diag = self.diagonal_magnitudes();
        let lead = diag.first().copied().unwrap_or(0.0);
        if lead == 0.0 {
            return Ok(0);
        }
        Ok(diag.iter().take_while(|&&d| d > tol * lead).count())
    }

    /// Orthonormal basis of the nullspace, built from `P [−R₁₁⁻¹R₁₂; I]`.
    pub fn nullspace(&self, tol: f64) -> Result<Vec<Vec<Complex64>>, NumericsError> {
        let r = self.rank(tol)?;
        let n = self.cols;
        let mut raw = Vec::with_capacity(n - r);
        for free in r..n {
            let mut y = vec![ZERO; n];
            y[free] = ONE;
            for i in (0..r).rev() {
                let mut s = self.r_cols[free][i];
                for (j, &yj) in y.iter().enumerate().take(r).skip(i + 1) {
                    s += self.r_cols[j][i] * yj;
                }
                y[i] = -s / self.r_cols[i][i];
            }
            let mut x = vec![ZERO; n];
            for (j, &p) in self.perm.iter().enumerate() {
                x[p] = y[j];
            }
            raw.push(x);
        }
        Ok(orthonormalize_vectors(raw, 1e-12))
    }
}

/// Numerical rank of `m`: pivots of the column-pivoted triangular factor
/// larger than `tol` times the leading pivot.
pub fn rank_via_qr(m: &ComplexMatrix, tol: f64) -> Result<usize, NumericsError> {
    check_tol(tol)?;
    PivotedQr::factor(m)?.rank(tol)
}

/// Orthonormal nullspace basis of `m` at relative pivot tolerance `tol`.
pub fn nullspace(m: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<Complex64>>, NumericsError> {
    check_tol(tol)?;
    PivotedQr::factor(m)?.nullspace(tol)
}

/// Streams row blocks of a tall matrix `[B₀; B₁; …]` into a square upper
/// triangular `R` with `R†R = Σ Bᵢ†Bᵢ`. The stacked matrix is never stored,
/// and the final `R` has the same nullspace and singular values.
#[derive(Debug, Clone)]
pub struct StackedRowCompressor {
    cols: usize,
    /// Row-major `cols × cols` triangle.
    r: Vec<Complex64>,
    rows_seen: usize,
}

impl StackedRowCompressor {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            r: vec![ZERO; cols * cols],
            rows_seen: 0,
        }
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn push_block(&mut self, block: &ComplexMatrix) -> Result<(), NumericsError> {
        let n = self.cols;
        if block.cols() != n {
            return Err(NumericsError::ShapeMismatch {
                expected: (block.rows(), n),
                found: block.shape(),
            });
        }
        let b = block.rows();
        if b == 0 {
            return Ok(());
        }
        // Column-major copy of the new rows.
        let mut bcols: Vec<Vec<Complex64>> = (0..n).map(|c| block.column(c)).collect();

        for k in 0..n {
            let tail: f64 = bcols[k].iter().map(|z| z.norm_sqr()).sum();
            if tail == 0.0 {
                continue;
            }
            let rkk = self.r[k * n + k];
            let norm = (rkk.norm_sqr() + tail).sqrt();
            let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { ONE };
            let alpha = -phase * norm;
            let mut v0 = rkk - alpha;
            let mut vb = std::mem::take(&mut bcols[k]);
            let vnorm = (v0.norm_sqr() + vb.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
            v0 /= vnorm;
            for z in vb.iter_mut() {
                *z /= vnorm;
            }
            self.r[k * n + k] = alpha;

            let r_row = &mut self.r[k * n + k + 1..(k + 1) * n];
            let apply = |(rk, col): (&mut Complex64, &mut Vec<Complex64>)| {
                let w: Complex64 =
                    v0.conj() * *rk + vb.iter().zip(col.iter()).map(|(vi, &c)| vi.conj() * c).sum::<Complex64>();
                let w2 = w * 2.0;
                *rk -= v0 * w2;
                for (c, &vi) in col.iter_mut().zip(&vb) {
                    *c -= vi * w2;
                }
            };
            let rest = &mut bcols[k + 1..];
            if rest.len() >= PAR_COLUMNS {
                r_row.par_iter_mut().zip(rest.par_iter_mut()).for_each(apply);
            } else {
                r_row.iter_mut().zip(rest.iter_mut()).for_each(apply);
            }
            bcols[k] = vec![ZERO; b];
        }
        self.rows_seen += b;
        Ok(())
    }

    pub fn triangular(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec_unchecked(self.cols, self.cols, self.r.clone())
    }
}
