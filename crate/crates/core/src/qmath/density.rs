use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{
    eigh, hermitian_part, hermiticity_error, trace, CMatrix, Complex64, EigenSystem, Ket,
    LOOSE_TOL, STRICT_TOL,
};
use crate::{Error, Result};

/// Negative eigenvalues down to `-(LOOSE_TOL + REPAIR_MARGIN)` are clipped
/// silently; anything more negative is an error.
const REPAIR_MARGIN: f64 = 1e-6;

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates `m`. Matrices that miss the eigenvalue floor by less than
    /// `1e-6` are repaired by clipping and renormalising.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::ZeroDimension);
        }
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let herm = hermiticity_error(&m);
        if herm > STRICT_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let m = hermitian_part(&m);
        let tr = trace(&m).re;
        if (tr - 1.0).abs() > STRICT_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let eig = eigh(&m);
        let min = eig.pairs.last().map_or(0.0, |p| p.value);
        if min >= -LOOSE_TOL {
            return Ok(DensityMatrix { m });
        }
        if min >= -(LOOSE_TOL + REPAIR_MARGIN) {
            return Ok(Self::from_spectrum(&eig, |l| l.max(0.0)));
        }
        Err(Error::NotPositive(min))
    }

    pub fn pure(k: &Ket) -> Self {
        DensityMatrix { m: k.projector() }
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(DensityMatrix {
            m: CMatrix::identity(d, d).scale(1.0 / d as f64),
        })
    }

    /// Rebuilds from a spectrum after mapping eigenvalues, then renormalises.
    fn from_spectrum(eig: &EigenSystem, f: impl Fn(f64) -> f64) -> Self {
        let d = eig.pairs.len();
        let mut m = CMatrix::zeros(d, d);
        let mut total = 0.0;
        for p in &eig.pairs {
            let l = f(p.value);
            if l > 0.0 {
                m += p.vector.projector().scale(l);
                total += l;
            }
        }
        DensityMatrix {
            m: hermitian_part(&m.unscale(total)),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigh(&self) -> EigenSystem {
        eigh(&self.m)
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// `tr(ρ O)` for a Hermitian observable.
    pub fn expectation(&self, o: &CMatrix) -> f64 {
        super::trace_product(&self.m, o).re
    }

    /// `⟨k|ρ|k⟩`.
    pub fn population(&self, k: &Ket) -> f64 {
        k.amplitudes().dotc(&(&self.m * k.amplitudes())).re
    }
}

/// `tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.m.iter().map(Complex64::norm_sqr).sum()
}

/// Euclidean (Frobenius) projection of a Hermitian matrix onto the set of
/// density matrices: eigenvalues are projected onto the probability simplex.
pub fn project_to_density(h: &CMatrix) -> DensityMatrix {
    let eig = eigh(h);
    let shift = simplex_shift(&eig.values());
    DensityMatrix::from_spectrum(&eig, |l| (l - shift).max(0.0))
}

/// The threshold `θ` such that `max(x_i − θ, 0)` sums to one.
fn simplex_shift(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = sorted[0] - 1.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    shift
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.m[(i, j)].re, self.m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(serde::de::Error::custom("density matrix must be square"));
            }
            for (j, z) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(z[0], z[1]);
            }
        }
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
