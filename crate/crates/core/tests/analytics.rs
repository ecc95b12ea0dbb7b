use dfs_scout_core::analytics::{
    confidence_band, failure_probability, fidelity_cdf_exact, fidelity_cdf_exponential,
    fidelity_pdf_exact, fidelity_pdf_exponential, integrate, ks_distance, sample_haar_fidelities,
};
use dfs_scout_core::rng::rng_from_seed;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn densities_are_normalised() {
    for d in [2, 3, 4, 7, 20, 50] {
        let p = integrate(|f| fidelity_pdf_exponential(f, d).unwrap(), 0.0, 1.0, 1e-12);
        let e = integrate(|f| fidelity_pdf_exact(f, d).unwrap(), 0.0, 1.0, 1e-12);
        assert!((p - 1.0).abs() < 1e-8, "exponential d={d}: {p}");
        assert!((e - 1.0).abs() < 1e-8, "exact d={d}: {e}");
    }
}

#[test]
fn exact_law_has_mean_one_over_d() {
    for d in [2, 3, 4, 10] {
        let m = integrate(|f| f * fidelity_pdf_exact(f, d).unwrap(), 0.0, 1.0, 1e-12);
        assert!((m - 1.0 / d as f64).abs() < 1e-8);
    }
}

#[test]
fn cdfs_integrate_their_densities() {
    for d in [2, 3, 8] {
        for f in [0.1, 0.5, 0.9] {
            let p = integrate(|x| fidelity_pdf_exponential(x, d).unwrap(), 0.0, f, 1e-12);
            assert!((p - fidelity_cdf_exponential(f, d).unwrap()).abs() < 1e-9);
            let e = integrate(|x| fidelity_pdf_exact(x, d).unwrap(), 0.0, f, 1e-12);
            assert!((e - fidelity_cdf_exact(f, d).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn haar_samples_follow_the_exact_law() {
    for d in [2, 3, 4] {
        let s = sample_haar_fidelities(d, 100_000, d as u64).unwrap();
        let ks = ks_distance(&s, |f| fidelity_cdf_exact(f, d).unwrap()).unwrap();
        assert!(ks < 0.01, "d={d}: {ks}");
    }
}

#[test]
fn exponential_law_is_close_at_large_dimension() {
    let s = sample_haar_fidelities(20, 100_000, 20).unwrap();
    let ks = ks_distance(&s, |f| fidelity_cdf_exponential(f, 20).unwrap()).unwrap();
    assert!(ks < 0.06, "{ks}");
}

#[test]
fn failure_probability_scales_as_inverse_root() {
    for n in [10_000u64, 100_000, 1_000_000, 10_000_000] {
        let r = failure_probability(3, n) / failure_probability(3, 100 * n);
        assert!((r - 10.0).abs() < 1.5, "N={n}: {r}");
    }
}

#[test]
fn failure_probability_monotone_on_grid() {
    for d in 2..12 {
        assert!((failure_probability(d, 1) - 1.0).abs() < 1e-12);
        for k in 0..30 {
            let n = 1u64 << k;
            assert!(failure_probability(d, 2 * n) < failure_probability(d, n));
            // d ↦ (e^{ad} − 1)/(e^d − 1) falls for a = 1/√N < 1.
            if n >= 2 {
                assert!(failure_probability(d + 1, n) < failure_probability(d, n));
            }
        }
    }
}

#[test]
fn uniform_band_edges() {
    let mut rng = rng_from_seed(5);
    let s: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let b = confidence_band(&s).unwrap();
    assert!((b.band95.lo - 0.025).abs() < 0.01 && (b.band95.hi - 0.975).abs() < 0.01);
    assert!((b.band63.lo - 0.185).abs() < 0.02 && (b.band63.hi - 0.815).abs() < 0.02);
}

proptest! {
    #[test]
    fn bands_are_nested(v in prop::collection::vec(0.0f64..=1.0, 50..300)) {
        let b = confidence_band(&v).unwrap();
        prop_assert!(b.band95.contains(&b.band63));
        prop_assert!(b.band63.lo <= b.median && b.median <= b.band63.hi);
    }

    #[test]
    fn densities_are_non_negative(f in 0.0f64..=1.0, d in 2usize..40) {
        prop_assert!(fidelity_pdf_exponential(f, d).unwrap() >= 0.0);
        prop_assert!(fidelity_pdf_exact(f, d).unwrap() >= 0.0);
    }
}
