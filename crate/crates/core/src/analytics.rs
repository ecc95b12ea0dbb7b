//! Random-fidelity laws, the failure-probability formula, and summary
//! statistics for protocol ensembles.

use serde::{Deserialize, Serialize};

use crate::qmath::{fidelity, haar_state_with};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Fewest samples [`confidence_band`] accepts.
pub const MIN_BAND_SAMPLES: usize = 50;

fn check_unit(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: f,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "dimension must be at least 2, got {d}"
        )))
    }
}

/// Exponential approximation to the fidelity of two random pure states in
/// `d` dimensions, normalised on `[0, 1]`: `d·e^{−fd}/(1 − e^{−d})`.
pub fn fidelity_pdf_exponential(f: f64, d: usize) -> Result<f64> {
    check_unit(f)?;
    check_dim(d)?;
    let d = d as f64;
    Ok(d * (-f * d).exp() / -(-d).exp_m1())
}

pub fn fidelity_cdf_exponential(f: f64, d: usize) -> Result<f64> {
    check_unit(f)?;
    check_dim(d)?;
    let d = d as f64;
    Ok((-f * d).exp_m1() / (-d).exp_m1())
}

/// Exact density of `|⟨a|b⟩|²` for independent Haar states: `(d−1)(1−f)^{d−2}`.
pub fn fidelity_pdf_exact(f: f64, d: usize) -> Result<f64> {
    check_unit(f)?;
    check_dim(d)?;
    Ok((d - 1) as f64 * (1.0 - f).powi(d as i32 - 2))
}

pub fn fidelity_cdf_exact(f: f64, d: usize) -> Result<f64> {
    check_unit(f)?;
    check_dim(d)?;
    Ok(1.0 - (1.0 - f).powi(d as i32 - 1))
}

/// `(e^{d/√n} − 1)/(e^d − 1)`: the chance that two random same-block
/// vectors overlap more than `1 − 1/√n`, under the exponential law.
pub fn failure_probability(d: usize, n: u64) -> f64 {
    let d = d as f64;
    (d / (n as f64).sqrt()).exp_m1() / d.exp_m1()
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let c = cdf(x);
        acc.max((c - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - c).abs())
    }))
}

/// Fidelities of `n` independent pairs of Haar states in dimension `d`.
pub fn sample_haar_fidelities(d: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_dim(d)?;
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let a = haar_state_with(d, &mut rng)?;
            let b = haar_state_with(d, &mut rng)?;
            fidelity(&a, &b)
        })
        .collect()
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// ascending `sorted` data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Central 63% and 95% empirical intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub median: f64,
    pub band63: Interval,
    pub band95: Interval,
}

pub fn confidence_band(samples: &[f64]) -> Result<ConfidenceBand> {
    if samples.len() < MIN_BAND_SAMPLES {
        return Err(Error::InsufficientSamples {
            need: MIN_BAND_SAMPLES,
            got: samples.len(),
        });
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p| quantile_sorted(&s, p);
    Ok(ConfidenceBand {
        median: q(0.5),
        band63: Interval {
            lo: q(0.185),
            hi: q(0.815),
        },
        band95: Interval {
            lo: q(0.025),
            hi: q(0.975),
        },
    })
}

/// Fractions of fidelities in `[0, 0.1]`, `[0.9, 1]` and in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPeakSummary {
    pub mass_low: f64,
    pub mass_high: f64,
    pub mass_mid: f64,
}

pub fn two_peak_summary(fidelities: &[f64]) -> Result<TwoPeakSummary> {
    if fidelities.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let n = fidelities.len() as f64;
    let low = fidelities.iter().filter(|&&f| f <= 0.1).count();
    let high = fidelities.iter().filter(|&&f| f >= 0.9).count();
    let mid = fidelities.len() - low - high;
    Ok(TwoPeakSummary {
        mass_low: low as f64 / n,
        mass_high: high as f64 / n,
        mass_mid: mid as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_pdf_at_zero() {
        let v = fidelity_pdf_exponential(0.0, 3).unwrap();
        assert!((v - 3.0 / (1.0 - (-3.0f64).exp())).abs() < 1e-12);
        assert!((v - 3.157).abs() < 1e-3);
    }

    #[test]
    fn pdfs_reject_out_of_range() {
        assert!(fidelity_pdf_exponential(1.1, 3).is_err());
        assert!(fidelity_pdf_exact(-0.1, 3).is_err());
        assert!(fidelity_pdf_exact(0.5, 1).is_err());
    }

    #[test]
    fn qubit_law_is_uniform() {
        for f in [0.0, 0.3, 1.0] {
            assert_eq!(fidelity_pdf_exact(f, 2).unwrap(), 1.0);
        }
    }

    #[test]
    fn failure_probability_values() {
        let v = failure_probability(3, 100);
        assert!((v - 0.3f64.exp_m1() / 3f64.exp_m1()).abs() < 1e-15);
        assert!((v - 0.01833).abs() < 1e-5);
        assert!(failure_probability(3, 1_000_000_000_000) < 1e-5);
    }

    #[test]
    fn simpson_integrates_polynomials() {
        let v = integrate(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_peak_counting() {
        let s = two_peak_summary(&[0.05, 0.95, 0.5, 0.99]).unwrap();
        assert_eq!(
            s,
            TwoPeakSummary {
                mass_low: 0.25,
                mass_high: 0.5,
                mass_mid: 0.25
            }
        );
        let s = two_peak_summary(&[1.0; 7]).unwrap();
        assert_eq!((s.mass_low, s.mass_high, s.mass_mid), (0.0, 1.0, 0.0));
        assert!(two_peak_summary(&[]).is_err());
    }

    #[test]
    fn band_rules() {
        assert!(confidence_band(&[0.5; 49]).is_err());
        let b = confidence_band(&[0.7; 50]).unwrap();
        assert_eq!(b.band63.width(), 0.0);
        assert_eq!(b.band95.width(), 0.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert!((quantile_sorted(&s, 0.5) - 2.5).abs() < 1e-15);
    }
}
