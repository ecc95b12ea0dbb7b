//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Jacobi is slow for large matrices but here d ≤ 16, and it delivers
//! eigenvectors that are orthonormal to machine precision even for clustered
//! eigenvalues, which the protocol relies on when eigenvalues nearly tie.

use serde::{Deserialize, Serialize};

use super::{hermitian_part, CMatrix, Complex64, Ket};

/// Eigenvalues closer than this are treated as tied when ordering.
const TIE_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Ket,
}

/// Eigenpairs sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub pairs: Vec<EigenPair>,
}

impl EigenSystem {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    /// `Σ λ_i |v_i⟩⟨v_i|`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.pairs.first().map_or(0, |p| p.vector.dim());
        self.pairs.iter().fold(CMatrix::zeros(d, d), |acc, p| {
            acc + p.vector.projector().scale(p.value)
        })
    }

    /// Pairs whose eigenvalue exceeds `floor`.
    pub fn above(&self, floor: f64) -> impl Iterator<Item = &EigenPair> {
        self.pairs.iter().filter(move |p| p.value > floor)
    }
}

/// Eigendecomposition of a Hermitian matrix. Only the Hermitian part of the
/// input is used.
pub fn eigh(m: &CMatrix) -> EigenSystem {
    let d = m.nrows();
    let mut a = hermitian_part(m);
    let mut v = CMatrix::identity(d, d);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-16 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q, scale);
            }
        }
    }

    let mut pairs: Vec<EigenPair> = (0..d)
        .map(|i| EigenPair {
            value: a[(i, i)].re,
            vector: Ket::new(v.column(i).into_owned()).expect("Jacobi columns are unit vectors"),
        })
        .collect();
    order_pairs(&mut pairs);
    EigenSystem { pairs }
}

/// Zeroes `a[(p, q)]` with a unitary rotation in the (p, q) plane,
/// `a ← J† a J`, accumulating `v ← v J`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, scale: f64) {
    let gamma = a[(p, q)];
    let g = gamma.norm();
    if g <= 1e-300 || g <= 1e-18 * scale {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = gamma / g;
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    let theta = (beta - alpha) / (2.0 * g);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    // J restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let jqp = -phase.conj() * sn;
    let jqq = phase.conj() * cs;
    let d = a.nrows();
    for k in 0..d {
        let x = a[(k, p)];
        let y = a[(k, q)];
        a[(k, p)] = x * cs + y * jqp;
        a[(k, q)] = x * sn + y * jqq;
    }
    for k in 0..d {
        let x = a[(p, k)];
        let y = a[(q, k)];
        a[(p, k)] = x * cs + y * jqp.conj();
        a[(q, k)] = x * sn + y * jqq.conj();
    }
    for k in 0..d {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * cs + y * jqp;
        v[(k, q)] = x * sn + y * jqq;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Descending eigenvalue; within a cluster of tied eigenvalues, descending
/// lexicographic order of the canonical-phase components.
fn order_pairs(pairs: &mut [EigenPair]) {
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[start].value - pairs[end].value <= TIE_TOL {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|x, y| lexicographic(&y.vector, &x.vector));
        }
        start = end;
    }
}

fn lexicographic(a: &Ket, b: &Ket) -> std::cmp::Ordering {
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes().iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}
