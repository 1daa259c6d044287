use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::NumericsError;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, &y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt with one reorthogonalization pass. A vector whose
/// residual falls to `tol` times its original norm (or below) is dropped.
pub(crate) fn orthonormalize_vectors(input: Vec<Vec<Complex64>>, tol: f64) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(input.len());
    for mut v in input {
        let original = norm(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let proj = inner(q, &v);
                for (x, &qi) in v.iter_mut().zip(q) {
                    *x -= proj * qi;
                }
            }
        }
        let residual = norm(&v);
        if residual <= tol * original {
            continue;
        }
        for x in v.iter_mut() {
            *x /= residual;
        }
        out.push(v);
    }
    out
}

/// Orthonormalizes matrices under `⟨X, Y⟩ = Tr(X†Y)`, keeping input order and
/// dropping members that are linearly dependent on earlier ones.
pub fn gram_schmidt_hs(basis: &[ComplexMatrix], tol: f64) -> Result<Vec<ComplexMatrix>, NumericsError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(NumericsError::InvalidTolerance(tol));
    }
    let Some(first) = basis.first() else {
        return Ok(Vec::new());
    };
    let shape = first.shape();
    if let Some(bad) = basis.iter().find(|m| m.shape() != shape) {
        return Err(NumericsError::ShapeMismatch {
            expected: shape,
            found: bad.shape(),
        });
    }
    let vectors = basis.iter().map(|m| m.as_slice().to_vec()).collect();
    Ok(orthonormalize_vectors(vectors, tol)
        .into_iter()
        .map(|v| ComplexMatrix::from_vec_unchecked(shape.0, shape.1, v))
        .collect())
}
