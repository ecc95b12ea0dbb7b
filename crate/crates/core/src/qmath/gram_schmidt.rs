use num_complex::Complex64;

use super::{CVector, Ket, Subspace};
use crate::{Error, Result};

/// Removes from `v` its components along an orthonormal list of vectors,
/// with one re-orthogonalisation pass (modified Gram-Schmidt, twice).
fn project_out(v: &CVector, basis: &[Ket]) -> CVector {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis {
            let coeff = b.amplitudes().dotc(&r);
            r.axpy(-coeff, b.amplitudes(), Complex64::new(1.0, 0.0));
        }
    }
    r
}

/// `v − Σ ⟨b_i|v⟩ b_i` and its Euclidean norm.
pub fn gram_schmidt_residual(v: &CVector, basis: &Subspace) -> Result<(CVector, f64)> {
    if v.len() != basis.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.ambient_dim(),
            found: v.len(),
        });
    }
    let r = project_out(v, basis.basis());
    let n = r.norm();
    Ok((r, n))
}

/// Orthonormalises `vectors` in order, skipping any whose residual norm is at
/// most `null_threshold`.
pub fn orthonormalize(vectors: &[CVector], null_threshold: f64) -> Result<Vec<Ket>> {
    let mut basis: Vec<Ket> = Vec::new();
    for v in vectors {
        if let Some(first) = basis.first() {
            if first.dim() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: v.len(),
                });
            }
        }
        let r = project_out(v, &basis);
        if r.norm() > null_threshold {
            basis.push(Ket::new(r)?);
        }
    }
    Ok(basis)
}
