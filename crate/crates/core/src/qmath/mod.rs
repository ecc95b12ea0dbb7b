//! Complex dense linear algebra and quantum primitives for small dimensions
//! (d ≤ 16). Everything is stored as dense `nalgebra` matrices; at these
//! sizes O(d³) work is negligible.

mod density;
mod eigen;
mod gram_schmidt;
mod ket;
mod random;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub use density::{project_to_density, purity, DensityMatrix};
pub use eigen::{eigh, EigenPair, EigenSystem};
pub use gram_schmidt::{gram_schmidt_residual, orthonormalize};
pub use ket::{fidelity, state_average, Ket, Subspace};
pub use random::{
    haar_state, haar_state_with, haar_unitary, haar_unitary_with, random_product_state_with,
    random_separable_pair,
};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance used for Hermiticity, trace and normalisation checks.
pub const STRICT_TOL: f64 = 1e-10;
/// Tolerance for eigenvalue floors and orthogonality checks.
pub const LOOSE_TOL: f64 = 1e-8;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest deviation of `m` from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest deviation of `u†u` from the identity.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let d = u.nrows();
    if u.ncols() != d {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(d, d))
}

/// Kronecker product of two matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Whether `d` is a power of two, returning the qubit count if so.
pub fn qubit_count(d: usize) -> Option<usize> {
    if d >= 2 && d.is_power_of_two() {
        Some(d.trailing_zeros() as usize)
    } else {
        None
    }
}
