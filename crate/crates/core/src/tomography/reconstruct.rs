use nalgebra::DVector;

use super::InputStateSet;
use crate::qmath::{eigh, project_to_density, trace, CMatrix, Complex64, DensityMatrix};
use crate::{Error, Result};

/// Probabilities are clamped to `[c, 1 − c]` inside the likelihood.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

fn check_len(n: usize, set: &InputStateSet) -> Result<()> {
    if n != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: n,
        });
    }
    Ok(())
}

/// The unique Hermitian `σ` with `tr(σ τ_k) = p_k` for every input state.
pub fn linear_invert(probabilities: &[f64], set: &InputStateSet) -> Result<CMatrix> {
    check_len(probabilities.len(), set)?;
    let p = DVector::from_column_slice(probabilities);
    let coords = set.inverse_design() * p;
    let d = set.dim();
    let sigma = set
        .operator_basis()
        .iter()
        .zip(coords.iter())
        .fold(CMatrix::zeros(d, d), |acc, (b, &x)| acc + b.scale(x));
    Ok(sigma)
}

/// Linear inversion followed by trace normalisation and projection onto the
/// density matrices.
#[derive(Debug, Clone)]
pub struct LinearEstimate {
    pub density: DensityMatrix,
    pub trace_before_normalization: f64,
    pub min_eigenvalue_before_repair: f64,
}

pub fn linear_estimate(probabilities: &[f64], set: &InputStateSet) -> Result<LinearEstimate> {
    let sigma = linear_invert(probabilities, set)?;
    let tr = trace(&sigma).re;
    let normalized = if tr > 1e-12 { sigma.unscale(tr) } else { sigma };
    let min = eigh(&normalized).pairs.last().map_or(0.0, |p| p.value);
    Ok(LinearEstimate {
        density: project_to_density(&normalized),
        trace_before_normalization: tr,
        min_eigenvalue_before_repair: min,
    })
}

/// Binomial log-likelihood `Σ n_k log p_k + (N − n_k) log(1 − p_k)`,
/// `p_k = tr(σ τ_k)`.
pub fn log_likelihood(
    sigma: &DensityMatrix,
    counts: &[u64],
    shots: u64,
    set: &InputStateSet,
) -> Result<f64> {
    check_len(counts.len(), set)?;
    Ok(Likelihood::new(counts, shots, set).value(sigma.matrix()))
}

#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    /// Stop once an accepted step gains less than this in log-likelihood.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            tol: 1e-9,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleFit {
    pub density: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub start: LinearEstimate,
}

struct Likelihood<'a> {
    counts: &'a [u64],
    shots: f64,
    states: Vec<&'a nalgebra::DVector<Complex64>>,
}

impl<'a> Likelihood<'a> {
    fn new(counts: &'a [u64], shots: u64, set: &'a InputStateSet) -> Self {
        Likelihood {
            counts,
            shots: shots as f64,
            states: set.states().iter().map(|k| k.amplitudes()).collect(),
        }
    }

    fn probabilities(&self, sigma: &CMatrix) -> Vec<f64> {
        self.states
            .iter()
            .map(|v| {
                v.dotc(&(sigma * *v))
                    .re
                    .clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
            })
            .collect()
    }

    fn value(&self, sigma: &CMatrix) -> f64 {
        self.probabilities(sigma)
            .iter()
            .zip(self.counts)
            .map(|(&p, &n)| {
                let n = n as f64;
                n * p.ln() + (self.shots - n) * (1.0 - p).ln()
            })
            .sum()
    }

    /// `∇L = Σ_k [n_k/p_k − (N − n_k)/(1 − p_k)] τ_k`.
    fn gradient(&self, sigma: &CMatrix) -> CMatrix {
        let d = sigma.nrows();
        let probs = self.probabilities(sigma);
        let mut g = CMatrix::zeros(d, d);
        for ((v, &p), &n) in self.states.iter().zip(&probs).zip(self.counts) {
            let n = n as f64;
            let w = n / p - (self.shots - n) / (1.0 - p);
            g += (*v * v.adjoint()).scale(w);
        }
        g
    }
}

fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Maximum-likelihood density matrix for binomial counts, by projected
/// gradient ascent on the density matrices.
///
/// Starts from the projected linear inversion of the observed frequencies.
/// Steps use a Barzilai-Borwein length with Armijo backtracking, and each
/// iterate is projected back by projecting its spectrum onto the simplex.
pub fn mle_fit(
    counts: &[u64],
    shots: u64,
    set: &InputStateSet,
    options: &MleOptions,
) -> Result<MleFit> {
    check_len(counts.len(), set)?;
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    if let Some(&bad) = counts.iter().find(|&&n| n > shots) {
        return Err(Error::InvalidConfig(format!(
            "count {bad} exceeds shots {shots}"
        )));
    }
    let freqs: Vec<f64> = counts.iter().map(|&n| n as f64 / shots as f64).collect();
    let start = linear_estimate(&freqs, set)?;
    let lik = Likelihood::new(counts, shots, set);

    let mut sigma = start.density.matrix().clone();
    let mut value = lik.value(&sigma);
    let mut grad = lik.gradient(&sigma);
    let mut step = 1.0 / lik.shots;
    let mut gradient_norm = grad.norm();

    for iteration in 1..=options.max_iterations {
        let mut t = step;
        let accepted = loop {
            let candidate = project_to_density(&(&sigma + grad.scale(t)));
            let cand = candidate.matrix();
            let cand_value = lik.value(cand);
            let predicted = inner(&grad, &(cand - &sigma));
            if cand_value >= value + 1e-4 * predicted {
                break Some((candidate, cand_value));
            }
            t *= 0.5;
            if t < 1e-30 {
                break None;
            }
        };
        let Some((candidate, cand_value)) = accepted else {
            return finish(sigma, value, iteration, start);
        };
        let next = candidate.into_matrix();
        let next_grad = lik.gradient(&next);
        let s = &next - &sigma;
        let y = &next_grad - &grad;
        let sy = -inner(&s, &y);
        let ss = inner(&s, &s);
        step = if sy > 0.0 && ss > 0.0 {
            (ss / sy).clamp(1e-12 / lik.shots, 1e6)
        } else {
            (2.0 * t).min(1e6)
        };
        let gain = cand_value - value;
        sigma = next;
        value = cand_value;
        grad = next_grad;
        gradient_norm = grad.norm();
        if gain < options.tol {
            return finish(sigma, value, iteration, start);
        }
    }
    Err(Error::NoConvergence {
        iterations: options.max_iterations,
        gradient_norm,
        best: Box::new(DensityMatrix::new(sigma)?),
    })
}

fn finish(sigma: CMatrix, value: f64, iterations: usize, start: LinearEstimate) -> Result<MleFit> {
    Ok(MleFit {
        density: DensityMatrix::new(sigma)?,
        log_likelihood: value,
        iterations,
        start,
    })
}
