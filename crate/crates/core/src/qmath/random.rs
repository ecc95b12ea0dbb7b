//! Haar-random states and unitaries.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, CVector, Complex64, Ket};
use crate::rng::{rng_from_seed, DfsRng};
use crate::{Error, Result};

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Normalised vector of i.i.d. complex Gaussians, uniform on the pure states.
pub fn haar_state_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Ket> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    loop {
        let v = CVector::from_fn(d, |_, _| complex_gaussian(rng));
        match Ket::new(v) {
            Err(Error::ZeroNorm) => continue,
            other => return other,
        }
    }
}

pub fn haar_state(d: usize, seed: u64) -> Result<Ket> {
    haar_state_with(d, &mut rng_from_seed(seed))
}

/// QR of a complex Ginibre matrix with the phases of `R`'s diagonal moved
/// into `Q`, which makes `Q` Haar distributed.
pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

pub fn haar_unitary(d: usize, seed: u64) -> Result<CMatrix> {
    haar_unitary_with(d, &mut rng_from_seed(seed))
}

/// Tensor product of independent Haar qubit states.
pub fn random_product_state_with<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Ket> {
    if n_qubits == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut k = haar_state_with(2, rng)?;
    for _ in 1..n_qubits {
        k = k.tensor(&haar_state_with(2, rng)?);
    }
    Ok(k)
}

/// A random separable two-qubit state `|a⟩⊗|b⟩`.
pub fn random_separable_pair(seed: u64) -> Ket {
    let mut rng: DfsRng = rng_from_seed(seed);
    random_product_state_with(2, &mut rng).expect("two qubits")
}
