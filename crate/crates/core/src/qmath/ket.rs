use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{eigh, gram_schmidt_residual, orthonormalize, CMatrix, CVector, Complex64, LOOSE_TOL};
use crate::{Error, Result};

/// Components with modulus below this are skipped when fixing the global phase.
const PHASE_ANCHOR_TOL: f64 = 1e-8;

/// A normalised pure state with a canonical global phase: the first
/// component with modulus above `1e-8` is real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: CVector,
}

impl Ket {
    /// Normalises `amps` and fixes its global phase.
    pub fn new(amps: CVector) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let mut amps = amps.unscale(norm);
        if let Some(anchor) = amps.iter().find(|z| z.norm() > PHASE_ANCHOR_TOL) {
            let phase = anchor.conj() / anchor.norm();
            amps *= phase;
        }
        Ok(Ket { amps })
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Ket::new(CVector::from_column_slice(amps))
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Ket::new(CVector::from_iterator(
            amps.len(),
            amps.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(d: usize, index: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if index >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: index + 1,
            });
        }
        let mut amps = CVector::zeros(d);
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Ket { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket {
            amps: self.amps.kronecker(&other.amps),
        }
    }

    /// Applies a matrix and renormalises.
    pub fn transformed(&self, m: &CMatrix) -> Result<Ket> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.ncols(),
                found: self.dim(),
            });
        }
        Ket::new(m * &self.amps)
    }

    /// Moduli and phases relative to the canonical-phase component.
    pub fn amplitudes_and_phases(&self) -> (Vec<f64>, Vec<f64>) {
        let mods = self.amps.iter().map(|z| z.norm()).collect();
        let phases = self
            .amps
            .iter()
            .map(|z| {
                if z.norm() > PHASE_ANCHOR_TOL {
                    z.arg()
                } else {
                    0.0
                }
            })
            .collect();
        (mods, phases)
    }
}

impl Serialize for Ket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amps.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let amps: Vec<Complex64> = pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Ket::from_slice(&amps).map_err(serde::de::Error::custom)
    }
}

/// Squared overlap `|⟨a|b⟩|²`.
pub fn fidelity(a: &Ket, b: &Ket) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.inner(b).norm_sqr().min(1.0))
}

/// The principal eigenvector of `(|v1⟩⟨v1| + |v2⟩⟨v2|)/2`.
///
/// Orthogonal inputs have a degenerate top eigenvalue and are rejected.
pub fn state_average(v1: &Ket, v2: &Ket) -> Result<Ket> {
    if v1.dim() != v2.dim() {
        return Err(Error::DimensionMismatch {
            expected: v1.dim(),
            found: v2.dim(),
        });
    }
    let mix = (v1.projector() + v2.projector()).scale(0.5);
    let eig = eigh(&mix);
    let gap = eig.pairs[0].value - eig.pairs.get(1).map_or(0.0, |p| p.value);
    if gap < LOOSE_TOL {
        return Err(Error::Degenerate { gap });
    }
    Ok(eig.pairs[0].vector.clone())
}

/// An orthonormal basis of a subspace of `C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Ket>", into = "Vec<Ket>")]
pub struct Subspace {
    basis: Vec<Ket>,
}

impl TryFrom<Vec<Ket>> for Subspace {
    type Error = Error;

    fn try_from(basis: Vec<Ket>) -> Result<Self> {
        Subspace::new(basis)
    }
}

impl From<Subspace> for Vec<Ket> {
    fn from(s: Subspace) -> Self {
        s.basis
    }
}

impl Subspace {
    /// Wraps an already orthonormal basis.
    pub fn new(basis: Vec<Ket>) -> Result<Self> {
        let Some(first) = basis.first() else {
            return Err(Error::EmptySubspace);
        };
        let d = first.dim();
        if basis.len() > d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: basis.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            if a.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.dim(),
                });
            }
            for b in &basis[i + 1..] {
                worst = worst.max(a.inner(b).norm());
            }
        }
        if worst >= LOOSE_TOL {
            return Err(Error::NotOrthonormal(worst));
        }
        Ok(Subspace { basis })
    }

    /// Orthonormalises `vectors` in order, dropping any whose residual norm
    /// falls below `null_threshold`.
    pub fn span(vectors: &[CVector], null_threshold: f64) -> Result<Self> {
        Subspace::new(orthonormalize(vectors, null_threshold)?)
    }

    /// The whole space `C^d`.
    pub fn full(d: usize) -> Result<Self> {
        Subspace::new((0..d).map(|i| Ket::basis(d, i)).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn basis(&self) -> &[Ket] {
        &self.basis
    }

    /// `P = Σ |b_i⟩⟨b_i|`.
    pub fn projector(&self) -> CMatrix {
        let d = self.ambient_dim();
        self.basis
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, b| acc + b.projector())
    }

    /// `‖P v‖²`.
    pub fn projection_norm_sqr(&self, v: &CVector) -> f64 {
        self.basis
            .iter()
            .map(|b| b.amplitudes().dotc(v).norm_sqr())
            .sum()
    }

    /// Appends a vector after Gram-Schmidt against the current basis.
    /// Returns the residual norm and whether the basis grew.
    pub fn extend(&mut self, v: &CVector, null_threshold: f64) -> Result<(f64, bool)> {
        let (residual, norm) = gram_schmidt_residual(v, self)?;
        if norm > null_threshold && self.dim() < self.ambient_dim() {
            self.basis.push(Ket::new(residual)?);
            Ok((norm, true))
        } else {
            Ok((norm, false))
        }
    }

    /// Orthogonal complement in `C^d`; `None` when the subspace is everything.
    pub fn complement(&self) -> Result<Option<Subspace>> {
        let d = self.ambient_dim();
        if self.dim() == d {
            return Ok(None);
        }
        let mut all = self.clone();
        let mut extra = Vec::new();
        // Pick standard basis vectors in order of largest residual so the
        // result is well conditioned.
        while all.dim() < d {
            let mut best: Option<(f64, CVector)> = None;
            for i in 0..d {
                let (r, n) = gram_schmidt_residual(Ket::basis(d, i)?.amplitudes(), &all)?;
                if best.as_ref().is_none_or(|(bn, _)| n > *bn + 1e-12) {
                    best = Some((n, r));
                }
            }
            let (_, r) = best.expect("d > 0");
            let k = Ket::new(r)?;
            all.basis.push(k.clone());
            extra.push(k);
        }
        Ok(Some(Subspace::new(extra)?))
    }

    /// Mean squared cosine of the principal angles, `tr(P_a P_b) / max(k_a, k_b)`.
    /// Equal to 1 iff the subspaces coincide.
    pub fn fidelity(&self, other: &Subspace) -> Result<f64> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            });
        }
        let overlap: f64 = self
            .basis
            .iter()
            .flat_map(|a| other.basis.iter().map(move |b| a.inner(b).norm_sqr()))
            .sum();
        Ok((overlap / self.dim().max(other.dim()) as f64).min(1.0))
    }

    /// Maximum deviation of the projector from idempotency.
    pub fn idempotency_error(&self) -> f64 {
        let p = self.projector();
        super::max_abs_diff(&(&p * &p), &p)
    }

    /// Whether `v` lies in the span within `tol` (residual norm).
    pub fn contains(&self, v: &Ket, tol: f64) -> bool {
        (1.0 - self.projection_norm_sqr(v.amplitudes()))
            .max(0.0)
            .sqrt()
            <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{c, STRICT_TOL};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn canonical_phase_is_applied() {
        let k = Ket::from_slice(&[c(0.0, 0.0), c(0.0, 2.0), c(1.0, 1.0)]).unwrap();
        assert!((k.amplitudes().norm() - 1.0).abs() < STRICT_TOL);
        assert_eq!(k.amplitudes()[1].im, 0.0);
        assert!(k.amplitudes()[1].re > 0.0);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(matches!(Ket::from_real(&[0.0, 0.0]), Err(Error::ZeroNorm)));
    }

    #[test]
    fn fidelity_examples() {
        let v = Ket::from_slice(&[c(0.3, 0.1), c(-0.2, 0.7)]).unwrap();
        assert!((fidelity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        let k01 = Ket::basis(4, 1).unwrap();
        let k10 = Ket::basis(4, 2).unwrap();
        assert_eq!(fidelity(&k01, &k10).unwrap(), 0.0);
        let zero = Ket::basis(2, 0).unwrap();
        let plus = Ket::from_real(&[1.0, 1.0]).unwrap();
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&zero, &k01).is_err());
    }

    #[test]
    fn state_average_examples() {
        let v = Ket::from_slice(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let avg = state_average(&v, &v).unwrap();
        assert!((fidelity(&avg, &v).unwrap() - 1.0).abs() < 1e-12);

        let zero = Ket::basis(2, 0).unwrap();
        let one = Ket::basis(2, 1).unwrap();
        assert!(matches!(
            state_average(&zero, &one),
            Err(Error::Degenerate { .. })
        ));

        // [[0.75, 0.25], [0.25, 0.25]] has principal eigenvector at 22.5°.
        let plus = Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let avg = state_average(&zero, &plus).unwrap();
        let angle = std::f64::consts::PI / 8.0;
        assert!((avg.amplitudes()[0].re - angle.cos()).abs() < 1e-12);
        assert!((avg.amplitudes()[1].re - angle.sin()).abs() < 1e-12);
    }

    #[test]
    fn subspace_complement_and_fidelity() {
        let s = Subspace::new(vec![Ket::basis(4, 0).unwrap(), Ket::basis(4, 3).unwrap()]).unwrap();
        let comp = s.complement().unwrap().unwrap();
        assert_eq!(comp.dim(), 2);
        assert!(comp.fidelity(&s).unwrap() < 1e-12);
        assert!((s.fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!(s.idempotency_error() < 1e-12);
        assert!(Subspace::full(4).unwrap().complement().unwrap().is_none());
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let a = Ket::basis(2, 0).unwrap();
        let b = Ket::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            Subspace::new(vec![a, b]),
            Err(Error::NotOrthonormal(_))
        ));
        assert!(matches!(Subspace::new(vec![]), Err(Error::EmptySubspace)));
    }

    #[test]
    fn ket_json_round_trip() {
        let k = Ket::from_slice(&[c(0.5, 0.0), c(0.5, -0.5), c(0.0, 0.5)]).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        let back: Ket = serde_json::from_str(&s).unwrap();
        assert!((fidelity(&k, &back).unwrap() - 1.0).abs() < 1e-15);
    }
}
