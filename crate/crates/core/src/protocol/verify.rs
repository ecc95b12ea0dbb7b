use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::qmath::{
    eigh, haar_state_with, max_abs_diff, qubit_count, random_product_state_with, CMatrix, CVector,
    Complex64, DensityMatrix, Ket, Subspace,
};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::tomography::{
    linear_estimate, mle_fit, simulate_counts, InputStateSet, Reconstruction, Shots, TrialSettings,
};
use crate::{Error, Result};

/// Input ensemble for purity verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PuritySampling {
    /// Gaussian coefficients on the subspace basis, normalised.
    Haar,
    /// Random product states projected into the subspace and renormalised.
    Separable,
}

fn draw_state<R: Rng + ?Sized>(
    sub: &Subspace,
    sampling: PuritySampling,
    rng: &mut R,
) -> Result<Ket> {
    let d = sub.ambient_dim();
    loop {
        let v: CVector = match sampling {
            PuritySampling::Haar => {
                let c = haar_state_with(sub.dim(), rng)?;
                sub.basis()
                    .iter()
                    .zip(c.amplitudes().iter())
                    .fold(CVector::zeros(d), |acc, (b, &a)| acc + b.amplitudes() * a)
            }
            PuritySampling::Separable => {
                let n = qubit_count(d).ok_or_else(|| {
                    Error::InvalidSpec(format!("separable sampling needs d = 2ⁿ, got {d}"))
                })?;
                let s = random_product_state_with(n, rng)?;
                sub.projector() * s.amplitudes()
            }
        };
        match Ket::new(v) {
            Err(Error::ZeroNorm) => continue,
            other => return other,
        }
    }
}

/// Purity of `ρ`, measured through `d²` projective settings with `N` shots
/// each when the shots are finite.
fn measured_purity(
    rho: &DensityMatrix,
    set: &InputStateSet,
    settings: &TrialSettings,
    seed: u64,
) -> Result<f64> {
    let n = match settings.shots {
        Shots::Infinite => return Ok(rho.purity()),
        Shots::Finite(n) => n,
    };
    let probs: Vec<f64> = set
        .states()
        .iter()
        .map(|t| rho.population(t).clamp(0.0, 1.0))
        .collect();
    let counts = simulate_counts(&probs, n, seed)?;
    let est = match settings.method {
        Reconstruction::Linear => {
            let freqs: Vec<f64> = counts.iter().map(|&k| k as f64 / n as f64).collect();
            linear_estimate(&freqs, set)?.density
        }
        Reconstruction::Mle => match mle_fit(&counts, n, set, &settings.mle) {
            Ok(fit) => fit.density,
            Err(Error::NoConvergence { best, .. }) => *best,
            Err(e) => return Err(e),
        },
    };
    Ok(est.purity())
}

/// Output purities for `samples` random inputs drawn from `sub`.
pub fn sample_purities(
    ch: &KrausChannel,
    sub: &Subspace,
    samples: usize,
    settings: &TrialSettings,
    sampling: PuritySampling,
    seed: u64,
) -> Result<Vec<f64>> {
    if sub.ambient_dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: sub.ambient_dim(),
        });
    }
    if samples == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let set = match settings.shots {
        Shots::Infinite => None,
        Shots::Finite(_) => Some(InputStateSet::for_dim(ch.dim())?),
    };
    (0..samples as u64)
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, stream::SAMPLES, i));
            let psi = draw_state(sub, sampling, &mut rng)?;
            let out = ch.apply(&DensityMatrix::pure(&psi))?;
            match &set {
                None => Ok(out.purity()),
                Some(set) => {
                    measured_purity(&out, set, settings, derive_seed(seed, stream::COUNTS, i))
                }
            }
        })
        .collect()
}

/// Mean output purity over random inputs from `sub`.
pub fn verify_average_purity(
    ch: &KrausChannel,
    sub: &Subspace,
    samples: usize,
    settings: &TrialSettings,
    sampling: PuritySampling,
    seed: u64,
) -> Result<f64> {
    let p = sample_purities(ch, sub, samples, settings, sampling, seed)?;
    Ok(p.iter().sum::<f64>() / p.len() as f64)
}

/// Whether the channel acts on `sub` as a single isometry, to within `tol`
/// in every output matrix element.
///
/// Each `ε(|bᵢ⟩⟨bᵢ|)` must be pure with image `|wᵢ⟩`; phases of the `wᵢ`
/// are fixed from `ε(|b₀⟩⟨bⱼ|)`, then every `ε(|bᵢ⟩⟨bⱼ|)` must equal
/// `|wᵢ⟩⟨wⱼ|` and every probe `(|bᵢ⟩+|bⱼ⟩)/√2` must stay pure.
pub fn verify_unitarity(ch: &KrausChannel, sub: &Subspace, tol: f64) -> bool {
    check_unitarity(ch, sub, tol).unwrap_or(false)
}

fn check_unitarity(ch: &KrausChannel, sub: &Subspace, tol: f64) -> Result<bool> {
    if sub.ambient_dim() != ch.dim() {
        return Ok(false);
    }
    let b = sub.basis();
    let k = b.len();
    let outer = |x: &CVector, y: &CVector| -> CMatrix { x * y.adjoint() };

    let mut w: Vec<CVector> = Vec::with_capacity(k);
    for bi in b {
        let out = ch.apply_operator(&bi.projector())?;
        let top = eigh(&out).pairs.into_iter().next().expect("d ≥ 1");
        if (top.value - 1.0).abs() > tol {
            return Ok(false);
        }
        w.push(top.vector.into_amplitudes());
    }
    for j in 1..k {
        let cross = ch.apply_operator(&outer(b[0].amplitudes(), b[j].amplitudes()))?;
        let c = w[0].dotc(&(&cross * &w[j]));
        if c.norm() < 1.0 - tol {
            return Ok(false);
        }
        w[j] *= c.conj() / Complex64::new(c.norm(), 0.0);
    }
    for i in 0..k {
        for j in 0..k {
            let out = ch.apply_operator(&outer(b[i].amplitudes(), b[j].amplitudes()))?;
            if max_abs_diff(&out, &outer(&w[i], &w[j])) > tol {
                return Ok(false);
            }
            if i < j {
                let probe = Ket::new(b[i].amplitudes() + b[j].amplitudes())?;
                let out = ch.apply(&DensityMatrix::pure(&probe))?;
                if out.purity() < 1.0 - tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
