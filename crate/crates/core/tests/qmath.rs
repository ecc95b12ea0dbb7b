mod common;

use dfs_scout_core::qmath::{
    c, eigh, fidelity, haar_state, haar_unitary, hermiticity_error, max_abs_diff,
    project_to_density, state_average, trace, unitarity_error, CMatrix, CVector, Ket, Subspace,
};
use dfs_scout_core::rng::rng_from_seed;
use num_complex::Complex;
use proptest::prelude::*;

fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    let g = haar_unitary(d, seed).unwrap() * c(2.0, 0.0) + haar_unitary(d, seed ^ 0xff).unwrap();
    (&g + g.adjoint()) * c(0.5, 0.0)
}

#[test]
fn eigh_reconstructs_a_thousand_random_matrices() {
    let mut worst: f64 = 0.0;
    for seed in 0..1000 {
        let d = 2 + (seed as usize % 15);
        let m = random_hermitian(d, seed);
        let es = eigh(&m);
        worst = worst.max(max_abs_diff(&es.reconstruct(), &m));
        let v = CMatrix::from_columns(
            &es.pairs
                .iter()
                .map(|p| p.vector.amplitudes().clone())
                .collect::<Vec<_>>(),
        );
        assert!(unitarity_error(&v) < 1e-10);
        assert!(es.values().windows(2).all(|w| w[0] >= w[1]));
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn eigh_matches_characteristic_values_of_pauli_y_mix() {
    // [[1, i], [-i, 1]] has eigenvalues 2 and 0 with (1, -i)/√2 on top.
    let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
    let es = eigh(&m);
    assert!((es.pairs[0].value - 2.0).abs() < 1e-14);
    assert!(es.pairs[1].value.abs() < 1e-14);
    let expected = Ket::from_slice(&[c(1.0, 0.0), c(0.0, -1.0)]).unwrap();
    assert!((fidelity(&es.pairs[0].vector, &expected).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn haar_mean_fidelity_in_two_dimensions_is_one_half() {
    let n = 20_000;
    let mean: f64 = (0..n)
        .map(|i| {
            let a = haar_state(2, 2 * i).unwrap();
            let b = haar_state(2, 2 * i + 1).unwrap();
            fidelity(&a, &b).unwrap()
        })
        .sum::<f64>()
        / n as f64;
    assert!((mean - 0.5).abs() < 0.01, "{mean}");
}

#[test]
fn haar_unitaries_have_uniform_first_column_moments() {
    // E|U_00|² = 1/d and E|U_00|⁴ = 2/(d(d+1)) for Haar U.
    let d = 3;
    let n = 20_000;
    let (mut m2, mut m4) = (0.0, 0.0);
    for s in 0..n {
        let u = haar_unitary(d, s).unwrap();
        let x = u[(0, 0)].norm_sqr();
        m2 += x;
        m4 += x * x;
    }
    m2 /= n as f64;
    m4 /= n as f64;
    assert!((m2 - 1.0 / 3.0).abs() < 0.01, "{m2}");
    assert!((m4 - 2.0 / 12.0).abs() < 0.01, "{m4}");
}

#[test]
fn state_average_of_orthogonal_states_is_degenerate() {
    let a = Ket::basis(2, 0).unwrap();
    let b = Ket::basis(2, 1).unwrap();
    assert!(state_average(&a, &b).is_err());
}

#[test]
fn projection_is_nearest_density_matrix() {
    // Compare against brute-force: no random density matrix is closer.
    let mut rng = rng_from_seed(4);
    let h = random_hermitian(3, 9);
    let p = project_to_density(&h);
    let dist = |m: &CMatrix| (m - &h).norm();
    let best = dist(p.matrix());
    for _ in 0..2000 {
        let k = dfs_scout_core::qmath::haar_state_with(9, &mut rng).unwrap();
        let a = CMatrix::from_column_slice(3, 3, k.amplitudes().as_slice());
        let rho = &a * a.adjoint();
        assert!(dist(&rho) >= best - 1e-12);
    }
}

fn arb_vector(d: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
        .prop_filter("nonzero", |v| {
            v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b))))
}

proptest! {
    #[test]
    fn kets_are_unit_norm(v in arb_vector(4)) {
        let k = Ket::new(v).unwrap();
        prop_assert!((k.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in arb_vector(4), b in arb_vector(4)) {
        let (a, b) = (Ket::new(a).unwrap(), Ket::new(b).unwrap());
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn global_phase_does_not_change_kets(v in arb_vector(3), phase in 0.0f64..std::f64::consts::TAU) {
        let a = Ket::new(v.clone()).unwrap();
        let b = Ket::new(v * Complex::from_polar(1.0, phase)).unwrap();
        prop_assert!((fidelity(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projected_matrices_are_states(seed in 0u64..10_000, d in 2usize..6) {
        let rho = project_to_density(&random_hermitian(d, seed));
        let m = rho.matrix();
        prop_assert!(hermiticity_error(m) < 1e-12);
        prop_assert!((trace(m).re - 1.0).abs() < 1e-12);
        prop_assert!(rho.eigh().values().iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn complement_completes_the_space(vs in prop::collection::vec(arb_vector(5), 1..4)) {
        let Ok(sub) = Subspace::span(&vs, 1e-6) else { return Ok(()); };
        let comp = sub.complement().unwrap();
        let k = comp.as_ref().map_or(0, |c| c.dim());
        prop_assert_eq!(sub.dim() + k, 5);
        if let Some(comp) = comp {
            for a in sub.basis() {
                for b in comp.basis() {
                    prop_assert!(a.inner(b).norm() < 1e-8);
                }
            }
            let total = sub.projector() + comp.projector();
            prop_assert!(max_abs_diff(&total, &CMatrix::identity(5, 5)) < 1e-10);
        }
    }

    #[test]
    fn subspace_fidelity_is_one_only_with_itself(vs in prop::collection::vec(arb_vector(4), 2..3)) {
        let Ok(sub) = Subspace::span(&vs, 1e-6) else { return Ok(()); };
        prop_assert!((sub.fidelity(&sub).unwrap() - 1.0).abs() < 1e-12);
        if let Some(comp) = sub.complement().unwrap() {
            prop_assert!(sub.fidelity(&comp).unwrap() < 1e-12);
        }
    }
}
