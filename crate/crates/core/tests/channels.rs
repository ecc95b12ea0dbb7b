mod common;

use common::{adjoint_via_liouville, apply_via_liouville, random_channel, random_density};
use dfs_scout_core::channels::{
    block_dephasing, dressed, duality_pair, singlet, sswap, synthetic_block, synthetic_sswap,
    triplet_span, BlockSpec, DressedChannelSpec, KrausChannel,
};
use dfs_scout_core::qmath::{
    haar_state, haar_unitary, max_abs_diff, random_separable_pair, CMatrix, DensityMatrix,
};
use proptest::prelude::*;

#[test]
fn separable_inputs_through_full_swap_dephasing_average_two_thirds() {
    let ch = sswap(0.5).unwrap();
    let n = 20_000;
    let mean: f64 = (0..n)
        .map(|s| {
            ch.apply(&DensityMatrix::pure(&random_separable_pair(s)))
                .unwrap()
                .purity()
        })
        .sum::<f64>()
        / n as f64;
    assert!((mean - 2.0 / 3.0).abs() < 0.005, "{mean}");
}

#[test]
fn trace_duality_on_random_triples() {
    for s in 0..100u64 {
        let ch = random_channel(4, 1 + (s as usize % 4), s);
        let rho = random_density(4, 1000 + s);
        let pi = haar_state(4, 2000 + s).unwrap().projector();
        let (f, b) = duality_pair(&ch, rho.matrix(), &pi).unwrap();
        assert!((f - b).abs() < 1e-12, "{f} vs {b}");
    }
}

#[test]
fn kraus_action_matches_superoperator() {
    for s in 0..20u64 {
        let ch = random_channel(4, 3, s);
        let rho = random_density(4, 50 + s);
        let direct = ch.apply_operator(rho.matrix()).unwrap();
        assert!(max_abs_diff(&direct, &apply_via_liouville(&ch, rho.matrix())) < 1e-12);
        let pi = haar_state(4, 90 + s).unwrap().projector();
        let adj = ch.adjoint().apply_operator(&pi).unwrap();
        assert!(max_abs_diff(&adj, &adjoint_via_liouville(&ch, &pi)) < 1e-12);
    }
}

#[test]
fn dressing_composes_with_the_inner_map() {
    let u1 = haar_unitary(4, 1).unwrap();
    let u2 = haar_unitary(4, 2).unwrap();
    let inner = sswap(0.3).unwrap();
    let ch = dressed(&DressedChannelSpec {
        inner: inner.clone(),
        u1: u1.clone(),
        u2: u2.clone(),
    })
    .unwrap();
    let rho = random_density(4, 3);
    let direct = &u2
        * inner
            .apply_operator(&(&u1 * rho.matrix() * u1.adjoint()))
            .unwrap()
        * u2.adjoint();
    assert!(max_abs_diff(&ch.apply_operator(rho.matrix()).unwrap(), &direct) < 1e-12);
}

#[test]
fn dressed_identity_is_the_product_unitary() {
    let u1 = haar_unitary(4, 5).unwrap();
    let u2 = haar_unitary(4, 6).unwrap();
    let ch = dressed(&DressedChannelSpec {
        inner: KrausChannel::identity(4).unwrap(),
        u1: u1.clone(),
        u2: u2.clone(),
    })
    .unwrap();
    let v = &u2 * &u1;
    let rho = random_density(4, 7);
    let expected = &v * rho.matrix() * v.adjoint();
    assert!(max_abs_diff(&ch.apply_operator(rho.matrix()).unwrap(), &expected) < 1e-12);
}

#[test]
fn dressed_singlet_stays_pure() {
    let sc = synthetic_sswap(
        0.5,
        haar_unitary(4, 8).unwrap(),
        haar_unitary(4, 9).unwrap(),
    )
    .unwrap();
    let dfs = sc.truth.one_dimensional().unwrap();
    let out = sc.channel.apply(&DensityMatrix::pure(dfs)).unwrap();
    assert!((out.purity() - 1.0).abs() < 1e-12);
}

#[test]
fn block_channel_with_full_coherence_is_unitary() {
    let u1 = haar_unitary(4, 10).unwrap();
    let u2 = haar_unitary(4, 11).unwrap();
    let spec = BlockSpec {
        block_dims: vec![2, 2],
        coherence: 1.0,
    };
    let ch = block_dephasing(&spec, &u1, &u2).unwrap();
    let rho = random_density(4, 12);
    let v = &u2 * &u1;
    assert!(
        max_abs_diff(
            &ch.apply_operator(rho.matrix()).unwrap(),
            &(&v * rho.matrix() * v.adjoint())
        ) < 1e-12
    );
}

#[test]
fn block_truth_is_preserved_coherently() {
    let spec = BlockSpec {
        block_dims: vec![2, 1, 1],
        coherence: 0.2,
    };
    let sc = synthetic_block(
        &spec,
        haar_unitary(4, 13).unwrap(),
        haar_unitary(4, 14).unwrap(),
    )
    .unwrap();
    for block in &sc.truth.blocks {
        let b = block.basis();
        let psi = dfs_scout_core::qmath::Ket::new(
            b.iter()
                .fold(dfs_scout_core::qmath::CVector::zeros(4), |acc, k| {
                    acc + k.amplitudes()
                }),
        )
        .unwrap();
        let out = sc.channel.apply(&DensityMatrix::pure(&psi)).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn singlet_and_triplet_are_swap_eigenspaces() {
    let ch = sswap(1.0).unwrap();
    let s = singlet().projector();
    assert!(max_abs_diff(&ch.apply_operator(&s).unwrap(), &s) < 1e-15);
    let t = triplet_span().projector();
    assert!(max_abs_diff(&ch.apply_operator(&t).unwrap(), &t) < 1e-15);
}

proptest! {
    #[test]
    fn channels_preserve_trace_and_positivity(seed in 0u64..100_000, k in 1usize..5) {
        let ch = random_channel(3, k, seed);
        let rho = random_density(3, seed + 1);
        let out = ch.apply(&rho).unwrap();
        prop_assert!(out.eigh().values().iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn sswap_adjoint_is_itself(p in 0.0f64..=1.0, seed in 0u64..10_000) {
        let ch = sswap(p).unwrap();
        let x = haar_state(4, seed).unwrap().projector();
        let a = ch.adjoint().apply_operator(&x).unwrap();
        prop_assert!(max_abs_diff(&a, &ch.apply_operator(&x).unwrap()) < 1e-14);
        prop_assert!(ch.is_unital());
    }

    #[test]
    fn sswap_rejects_bad_probability(p in prop_oneof![-5.0f64..-1e-9, 1.000001f64..5.0]) {
        prop_assert!(sswap(p).is_err());
    }

    #[test]
    fn unital_channels_have_trace_one_adjoint_images(seed in 0u64..10_000) {
        let u = haar_unitary(4, seed).unwrap();
        let ch = dressed(&DressedChannelSpec { inner: sswap(0.4).unwrap(), u1: u.clone(), u2: u.adjoint() }).unwrap();
        let pi = haar_state(4, seed + 7).unwrap().projector();
        let img: CMatrix = ch.adjoint().apply_operator(&pi).unwrap();
        prop_assert!((img.trace().re - 1.0).abs() < 1e-12);
    }
}
