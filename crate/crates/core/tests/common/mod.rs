#![allow(dead_code)]

use dfs_scout_core::channels::KrausChannel;
use dfs_scout_core::qmath::{haar_state, haar_unitary, CMatrix, Complex64, DensityMatrix};

/// Column-stacking superoperator: `vec(KρK†) = (K̄ ⊗ K) vec(ρ)`.
pub fn liouville(ch: &KrausChannel) -> CMatrix {
    let d = ch.dim();
    let mut l = CMatrix::zeros(d * d, d * d);
    for k in ch.ops() {
        l += k.map(|z| z.conj()).kronecker(k);
    }
    l
}

pub fn vec_of(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &nalgebra::DVector<Complex64>, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// `ε†(X)` from the superoperator's adjoint, independent of the Kraus-level code.
pub fn adjoint_via_liouville(ch: &KrausChannel, x: &CMatrix) -> CMatrix {
    let l = liouville(ch);
    unvec(&(l.adjoint() * vec_of(x)), ch.dim())
}

pub fn apply_via_liouville(ch: &KrausChannel, x: &CMatrix) -> CMatrix {
    unvec(&(liouville(ch) * vec_of(x)), ch.dim())
}

/// A random CPTP map with `k` Kraus operators, cut from a Haar isometry.
pub fn random_channel(d: usize, k: usize, seed: u64) -> KrausChannel {
    let u = haar_unitary(d * k, seed).unwrap();
    let ops = (0..k)
        .map(|i| u.view((i * d, 0), (d, d)).into_owned())
        .collect();
    KrausChannel::new(ops, "random").unwrap()
}

/// A full-rank random density matrix: partial trace of a Haar state.
pub fn random_density(d: usize, seed: u64) -> DensityMatrix {
    let psi = haar_state(d * d, seed).unwrap();
    let a = CMatrix::from_column_slice(d, d, psi.amplitudes().as_slice());
    DensityMatrix::new(&a * a.adjoint()).unwrap()
}
