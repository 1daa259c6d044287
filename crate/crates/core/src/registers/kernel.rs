use num_complex::Complex64;

use super::{bit_of, DensityMatrix, RegisterError};
use crate::numerics::ComplexMatrix;

/// Dense 4×4 gate in the `|q_i q_j⟩` basis, row-major.
pub(crate) type Gate4 = [[Complex64; 4]; 4];

pub(crate) fn gate4_from_matrix(g: &ComplexMatrix) -> Gate4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = g[(r, c)];
        }
    }
    out
}

/// `dst = U src U†` where `U` acts as `g` on the qubits with basis-index masks
/// `mi` (high gate bit) and `mj` (low gate bit).
pub(crate) fn conjugate_into(src: &[Complex64], dst: &mut [Complex64], dim: usize, g: &Gate4, mi: usize, mj: usize) {
    dst.copy_from_slice(src);
    let both = mi | mj;

    // Left multiplication mixes groups of four rows.
    for base in (0..dim).filter(|b| b & both == 0) {
        let rows = [base, base | mj, base | mi, base | both];
        for c in 0..dim {
            let x = [
                dst[rows[0] * dim + c],
                dst[rows[1] * dim + c],
                dst[rows[2] * dim + c],
                dst[rows[3] * dim + c],
            ];
            for (a, &r) in rows.iter().enumerate() {
                let ga = &g[a];
                dst[r * dim + c] = ga[0] * x[0] + ga[1] * x[1] + ga[2] * x[2] + ga[3] * x[3];
            }
        }
    }

    // Right multiplication by U† mixes groups of four columns within a row.
    let gc: Gate4 = std::array::from_fn(|a| std::array::from_fn(|b| g[a][b].conj()));
    for row in dst.chunks_mut(dim) {
        for base in (0..dim).filter(|b| b & both == 0) {
            let cols = [base, base | mj, base | mi, base | both];
            let x = [row[cols[0]], row[cols[1]], row[cols[2]], row[cols[3]]];
            for (a, &c) in cols.iter().enumerate() {
                let ga = &gc[a];
                row[c] = x[0] * ga[0] + x[1] * ga[1] + x[2] * ga[2] + x[3] * ga[3];
            }
        }
    }
}

/// `U ρ U†` with `g` embedded on register qubits `(i, j)`; `i` is the high
/// (control) index of the 4×4 gate. Runs in `O(d²)` without forming `U`.
pub fn apply_two_qubit(rho: &DensityMatrix, g: &ComplexMatrix, i: usize, j: usize) -> Result<DensityMatrix, RegisterError> {
    let nq = rho.num_qubits();
    for q in [i, j] {
        if q >= nq {
            return Err(RegisterError::IndexOutOfRange { index: q, qubits: nq });
        }
    }
    if i == j {
        return Err(RegisterError::SameQubit(i));
    }
    if g.shape() != (4, 4) {
        return Err(RegisterError::Numerics(crate::numerics::NumericsError::ShapeMismatch {
            expected: (4, 4),
            found: g.shape(),
        }));
    }
    let defect = g.unitarity_defect();
    if defect > 1e-10 {
        return Err(RegisterError::NotUnitary { defect });
    }
    let dim = rho.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    conjugate_into(
        rho.matrix().as_slice(),
        &mut out,
        dim,
        &gate4_from_matrix(g),
        1 << bit_of(i, nq),
        1 << bit_of(j, nq),
    );
    Ok(DensityMatrix::from_parts_unchecked(
        rho.labels().to_vec(),
        ComplexMatrix::from_vec_unchecked(dim, dim, out),
    ))
}
