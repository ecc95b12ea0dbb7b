use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{linear_estimate, mle_fit, InputStateSet, MleOptions, SettingsLedger, Shots};
use crate::channels::KrausChannel;
use crate::qmath::{DensityMatrix, EigenSystem, Ket};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reconstruction {
    Linear,
    Mle,
}

impl std::fmt::Display for Reconstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Reconstruction::Linear => "linear",
            Reconstruction::Mle => "mle",
        })
    }
}

/// How each reversed trial is measured and reconstructed.
#[derive(Debug, Clone, Copy)]
pub struct TrialSettings {
    pub shots: Shots,
    pub method: Reconstruction,
    pub mle: MleOptions,
}

impl TrialSettings {
    pub fn new(shots: Shots, method: Reconstruction) -> Self {
        TrialSettings {
            shots,
            method,
            mle: MleOptions::default(),
        }
    }

    /// Noiseless probabilities with exact linear inversion.
    pub fn noiseless() -> Self {
        TrialSettings::new(Shots::Infinite, Reconstruction::Linear)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrialDiagnostics {
    /// `λ₁/λ₂` of the reconstruction; `None` when `λ₂ ≤ 0`.
    pub eigenvalue_ratio: Option<f64>,
    pub trace_before_normalization: f64,
    pub min_eigenvalue_before_repair: f64,
    pub mle_iterations: Option<usize>,
    pub warnings: Vec<String>,
}

/// One reversed trial: a fixed output projector, `d²` measured settings and
/// the reconstructed adjoint image with its eigensystem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographyTrial {
    pub projector: Ket,
    /// Measured counts; `None` in noiseless mode.
    pub counts: Option<Vec<u64>>,
    pub shots_per_setting: Shots,
    pub method: Reconstruction,
    pub reconstructed: DensityMatrix,
    pub eigensystem: EigenSystem,
    pub diagnostics: TrialDiagnostics,
}

impl TomographyTrial {
    pub fn settings(&self) -> usize {
        self.reconstructed.dim().pow(2)
    }
}

/// `p_k = ⟨φ|ε(τ_k)|φ⟩` for each input state.
pub fn forward_probabilities(
    ch: &KrausChannel,
    projector: &Ket,
    set: &InputStateSet,
) -> Result<Vec<f64>> {
    let d = ch.dim();
    if projector.dim() != d || set.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if projector.dim() != d {
                projector.dim()
            } else {
                set.dim()
            },
        });
    }
    set.states()
        .iter()
        .map(|tau| {
            let out = ch.apply_operator(&tau.projector())?;
            let v = projector.amplitudes();
            Ok(v.dotc(&(out * v)).re.clamp(0.0, 1.0))
        })
        .collect()
}

/// Independent `Binomial(N, p_k)` draws.
pub fn simulate_counts(probabilities: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    probabilities
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
            let dist = Binomial::new(shots, p).map_err(|_| Error::InvalidProbability(p))?;
            Ok(dist.sample(&mut rng))
        })
        .collect()
}

/// Probabilities → counts → reconstruction → eigensystem.
pub fn run_reversed_trial(
    ch: &KrausChannel,
    projector: &Ket,
    set: &InputStateSet,
    settings: &TrialSettings,
    seed: u64,
    ledger: &SettingsLedger,
) -> Result<TomographyTrial> {
    let probs = forward_probabilities(ch, projector, set)?;
    let mut diagnostics = TrialDiagnostics::default();
    if !ch.is_unital() {
        diagnostics.warnings.push(
            "channel is not unital; reconstruction is the trace-normalised adjoint image".into(),
        );
    }

    let (counts, reconstructed) = match settings.shots {
        Shots::Infinite => {
            ledger.record(probs.len());
            if settings.method == Reconstruction::Mle {
                diagnostics
                    .warnings
                    .push("noiseless mode uses exact linear inversion".into());
            }
            let est = linear_estimate(&probs, set)?;
            diagnostics.trace_before_normalization = est.trace_before_normalization;
            diagnostics.min_eigenvalue_before_repair = est.min_eigenvalue_before_repair;
            (None, est.density)
        }
        Shots::Finite(n) => {
            let counts = simulate_counts(&probs, n, seed)?;
            ledger.record(counts.len());
            let density = match settings.method {
                Reconstruction::Linear => {
                    let freqs: Vec<f64> = counts.iter().map(|&k| k as f64 / n as f64).collect();
                    let est = linear_estimate(&freqs, set)?;
                    diagnostics.trace_before_normalization = est.trace_before_normalization;
                    diagnostics.min_eigenvalue_before_repair = est.min_eigenvalue_before_repair;
                    est.density
                }
                Reconstruction::Mle => match mle_fit(&counts, n, set, &settings.mle) {
                    Ok(fit) => {
                        diagnostics.trace_before_normalization =
                            fit.start.trace_before_normalization;
                        diagnostics.min_eigenvalue_before_repair =
                            fit.start.min_eigenvalue_before_repair;
                        diagnostics.mle_iterations = Some(fit.iterations);
                        fit.density
                    }
                    Err(Error::NoConvergence {
                        iterations, best, ..
                    }) => {
                        diagnostics.mle_iterations = Some(iterations);
                        diagnostics
                            .warnings
                            .push("maximum-likelihood fit hit the iteration cap".into());
                        *best
                    }
                    Err(e) => return Err(e),
                },
            };
            (Some(counts), density)
        }
    };

    let eigensystem = reconstructed.eigh();
    diagnostics.eigenvalue_ratio = match eigensystem.pairs.as_slice() {
        [a, b, ..] if b.value > 0.0 => Some(a.value / b.value),
        _ => None,
    };
    Ok(TomographyTrial {
        projector: projector.clone(),
        counts,
        shots_per_setting: settings.shots,
        method: settings.method,
        reconstructed,
        eigensystem,
        diagnostics,
    })
}
