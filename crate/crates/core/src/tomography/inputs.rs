use nalgebra::DMatrix;

use crate::qmath::{c, qubit_count, CMatrix, Complex64, Ket};
use crate::{Error, Result};

/// `{|0⟩, |1⟩, (|0⟩+|1⟩)/√2, (|0⟩+i|1⟩)/√2}`.
pub fn single_qubit_states() -> [Ket; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        Ket::basis(2, 0).expect("d=2"),
        Ket::basis(2, 1).expect("d=2"),
        Ket::from_slice(&[c(h, 0.0), c(h, 0.0)]).expect("nonzero"),
        Ket::from_slice(&[c(h, 0.0), c(0.0, h)]).expect("nonzero"),
    ]
}

/// The `4ⁿ` tensor products of [`single_qubit_states`], first qubit most
/// significant, together with the precomputed linear-inversion map.
#[derive(Debug, Clone)]
pub struct InputStateSet {
    n_qubits: usize,
    states: Vec<Ket>,
    /// Orthonormal Hermitian operator basis (identity first, then the
    /// generalised Gell-Mann matrices).
    operator_basis: Vec<CMatrix>,
    /// `inverse · p` gives the coordinates of `σ` in `operator_basis`.
    inverse_design: DMatrix<f64>,
    gram_condition: f64,
}

impl InputStateSet {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::ZeroDimension);
        }
        let single = single_qubit_states();
        let mut states: Vec<Ket> = single.to_vec();
        for _ in 1..n_qubits {
            states = states
                .iter()
                .flat_map(|a| single.iter().map(move |b| a.tensor(b)))
                .collect();
        }
        let d = 1usize << n_qubits;
        let operator_basis = gell_mann_basis(d);

        let m = states.len();
        let design = DMatrix::from_fn(m, m, |k, j| {
            let v = states[k].amplitudes();
            v.dotc(&(&operator_basis[j] * v)).re
        });
        let inverse_design = design.try_inverse().ok_or(Error::SingularDesign)?;

        let gram = DMatrix::from_fn(m, m, |k, l| states[k].inner(&states[l]).norm_sqr());
        let eig = gram.symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if min <= 0.0 {
            return Err(Error::SingularDesign);
        }
        Ok(InputStateSet {
            n_qubits,
            states,
            operator_basis,
            inverse_design,
            gram_condition: max / min,
        })
    }

    /// The set matching dimension `d`, which must be a power of two.
    pub fn for_dim(d: usize) -> Result<Self> {
        let n = qubit_count(d)
            .ok_or_else(|| Error::InvalidSpec(format!("dimension {d} is not a power of two")))?;
        InputStateSet::new(n)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn states(&self) -> &[Ket] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Condition number of the projector Gram matrix `tr(τ_k τ_l)`.
    pub fn gram_condition(&self) -> f64 {
        self.gram_condition
    }

    pub(crate) fn operator_basis(&self) -> &[CMatrix] {
        &self.operator_basis
    }

    pub(crate) fn inverse_design(&self) -> &DMatrix<f64> {
        &self.inverse_design
    }
}

/// `I/√d` followed by the symmetric, antisymmetric and diagonal generalised
/// Gell-Mann matrices, each normalised to `tr(B²) = 1`.
fn gell_mann_basis(d: usize) -> Vec<CMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    basis.push(CMatrix::identity(d, d).scale(1.0 / (d as f64).sqrt()));
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(h, 0.0);
            m[(k, j)] = c(h, 0.0);
            basis.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(0.0, -h);
            m[(k, j)] = c(0.0, h);
            basis.push(m);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = Complex64::new(norm, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        basis.push(m);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{fidelity, trace_product};

    #[test]
    fn single_qubit_set() {
        let set = InputStateSet::new(1).unwrap();
        assert_eq!(set.len(), 4);
        let expect = single_qubit_states();
        for (a, b) in set.states().iter().zip(expect.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn two_qubit_ordering() {
        let set = InputStateSet::new(2).unwrap();
        assert_eq!(set.len(), 16);
        assert_eq!(set.states()[0], Ket::basis(4, 0).unwrap());
        let pi = &single_qubit_states()[3];
        let last = pi.tensor(pi);
        assert!((fidelity(&set.states()[15], &last).unwrap() - 1.0).abs() < 1e-15);
        assert!(set.gram_condition().is_finite());
    }

    #[test]
    fn operator_basis_is_orthonormal() {
        for d in [2, 3, 4] {
            let b = gell_mann_basis(d);
            assert_eq!(b.len(), d * d);
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let ip = trace_product(x, y);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip.re - expect).abs() < 1e-14 && ip.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(InputStateSet::for_dim(3).is_err());
        assert!(InputStateSet::new(0).is_err());
    }
}
