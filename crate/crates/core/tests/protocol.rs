use dfs_scout_core::channels::{
    sswap, synthetic_block, synthetic_sswap, triplet_span, BlockSpec, KrausChannel,
    SyntheticChannel,
};
use dfs_scout_core::protocol::{
    detect_syndromes, discover_subspaces, identify_1d_dfs, identify_1d_dfs_with_projectors,
    identify_without_averaging, ProtocolConfig, ProtocolStatus,
};
use dfs_scout_core::qmath::{
    c, fidelity, haar_unitary, CMatrix, DensityMatrix, EigenPair, EigenSystem, Ket, Subspace,
};
use dfs_scout_core::rng::derive_seed;
use dfs_scout_core::tomography::{
    Reconstruction, Shots, TomographyTrial, TrialDiagnostics, TrialSettings,
};
use proptest::prelude::*;

fn dressed_sswap(p: f64, seed: u64) -> SyntheticChannel {
    synthetic_sswap(
        p,
        haar_unitary(4, derive_seed(seed, 1, 0)).unwrap(),
        haar_unitary(4, derive_seed(seed, 2, 0)).unwrap(),
    )
    .unwrap()
}

fn block(dims: &[usize], seed: u64) -> SyntheticChannel {
    let d = dims.iter().sum();
    let spec = BlockSpec {
        block_dims: dims.to_vec(),
        coherence: 0.0,
    };
    synthetic_block(
        &spec,
        haar_unitary(d, 1000 + seed).unwrap(),
        haar_unitary(d, 2000 + seed).unwrap(),
    )
    .unwrap()
}

fn assert_mutually_orthogonal(subs: &[Subspace]) {
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            for x in a.basis() {
                for y in b.basis() {
                    assert!(x.inner(y).norm() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn clean_noiseless_runs_use_thirty_two_settings() {
    let cfg = ProtocolConfig::default();
    let mut clean = 0;
    for s in 0..60 {
        let sc = dressed_sswap(0.5, s);
        let r = identify_1d_dfs(&sc.channel, &TrialSettings::noiseless(), &cfg, s).unwrap();
        assert_eq!(
            r.measurement_settings_used,
            16 * r.trial_records.len() as u64
        );
        assert_eq!(r.status, ProtocolStatus::Identified);
        let f = fidelity(
            r.dfs_1d.as_ref().unwrap(),
            sc.truth.one_dimensional().unwrap(),
        )
        .unwrap();
        assert!(f > 1.0 - 1e-6, "seed {s}: {f}");
        if r.trial_records.len() == 2 {
            clean += 1;
            assert_eq!(r.measurement_settings_used, 32);
        }
    }
    assert!(clean > 0);
}

#[test]
fn complement_is_orthogonal_and_three_dimensional() {
    let cfg = ProtocolConfig::default();
    let s = TrialSettings::new(Shots::Finite(1000), Reconstruction::Mle);
    for seed in 0..20 {
        let sc = dressed_sswap(0.5, seed);
        let r = identify_1d_dfs(&sc.channel, &s, &cfg, seed).unwrap();
        let (Some(dfs), Some(comp)) = (&r.dfs_1d, &r.dfs_complement) else {
            continue;
        };
        assert_eq!(comp.dim(), 3);
        for b in comp.basis() {
            assert!(dfs.inner(b).norm() < 1e-8);
        }
    }
}

#[test]
fn equal_weight_projector_is_flagged_and_retried() {
    // |01⟩ has singlet weight ½ under the undressed channel.
    let ch = sswap(0.5).unwrap();
    let preset = [Ket::basis(4, 1).unwrap()];
    let r = identify_1d_dfs_with_projectors(
        &ch,
        &TrialSettings::noiseless(),
        &ProtocolConfig::default(),
        3,
        &preset,
    )
    .unwrap();
    assert!(r.syndromes.degenerate_trial[0]);
    assert!(r.trial_records.len() >= 3);
    let pair = r.chosen_pair.as_ref().unwrap();
    assert!(pair.matched.trial_a != 0 && pair.matched.trial_b != 0);
}

#[test]
fn identity_channel_fails_without_fabricating_a_dfs() {
    let ch = KrausChannel::identity(4).unwrap();
    let cfg = ProtocolConfig::default();
    let r = identify_1d_dfs(&ch, &TrialSettings::noiseless(), &cfg, 1).unwrap();
    assert_eq!(r.status, ProtocolStatus::Failed);
    assert!(r.dfs_1d.is_none());
    assert_eq!(r.trial_records.len(), 2 + cfg.max_extra_trials);
    assert!(r.syndromes.degenerate_trial.iter().all(|&b| b));
    assert_eq!(r.measurement_settings_used, 16 * 10);
}

#[test]
fn disabled_syndromes_always_pair_the_first_two_trials() {
    let cfg = ProtocolConfig {
        syndromes_enabled: false,
        ..Default::default()
    };
    for seed in 0..20 {
        let r = identify_1d_dfs(
            &KrausChannel::identity(4).unwrap(),
            &TrialSettings::noiseless(),
            &cfg,
            seed,
        )
        .unwrap();
        assert_eq!(r.status, ProtocolStatus::Identified);
        assert_eq!(r.measurement_settings_used, 32);
    }
}

fn fake_trial(vectors: &[Ket], values: &[f64]) -> TomographyTrial {
    let d = vectors[0].dim();
    let mut m = CMatrix::zeros(d, d);
    for (v, &l) in vectors.iter().zip(values) {
        m += v.projector() * c(l, 0.0);
    }
    TomographyTrial {
        projector: vectors[0].clone(),
        counts: None,
        shots_per_setting: Shots::Infinite,
        method: Reconstruction::Linear,
        reconstructed: DensityMatrix::new(m).unwrap(),
        eigensystem: EigenSystem {
            pairs: vectors
                .iter()
                .zip(values)
                .map(|(v, &value)| EigenPair {
                    value,
                    vector: v.clone(),
                })
                .collect(),
        },
        diagnostics: TrialDiagnostics::default(),
    }
}

fn tilted(from: usize, to: usize, overlap: f64) -> Ket {
    let mut v = [0.0; 4];
    v[from] = overlap.sqrt();
    v[to] = (1.0 - overlap).sqrt();
    Ket::from_real(&v).unwrap()
}

#[test]
fn syndrome_examples() {
    let cfg = ProtocolConfig::default();
    let e = |i| Ket::basis(4, i).unwrap();
    let a = fake_trial(&[e(0), e(1)], &[0.7, 0.3]);

    let near_equal = fake_trial(&[e(0), e(1)], &[0.52, 0.48]);
    let f = detect_syndromes(&near_equal, &a, &cfg).unwrap();
    assert!(f.degenerate_trial[0] && !f.degenerate_trial[1]);

    let b = fake_trial(&[tilted(0, 2, 0.99), tilted(1, 3, 0.95)], &[0.7, 0.3]);
    let f = detect_syndromes(&a, &b, &cfg).unwrap();
    assert!(f.ambiguous_match[0].ambiguous);

    let b = fake_trial(&[tilted(0, 2, 0.99), tilted(1, 3, 0.03)], &[0.7, 0.3]);
    let f = detect_syndromes(&a, &b, &cfg).unwrap();
    assert!(!f.any());

    let single = fake_trial(&[e(0), e(1)], &[1.0, 0.0]);
    assert!(
        detect_syndromes(&single, &a, &cfg)
            .unwrap()
            .degenerate_trial[0]
    );
}

#[test]
fn two_by_two_blocks_are_found_in_three_trials() {
    let cfg = ProtocolConfig::default();
    let mut good = 0;
    for seed in 0..100 {
        let sc = block(&[2, 2], seed);
        let r = discover_subspaces(&sc.channel, &TrialSettings::noiseless(), &cfg, seed).unwrap();
        assert_eq!(r.status, ProtocolStatus::Complete);
        assert_mutually_orthogonal(&r.subspaces);
        assert_eq!(r.subspaces.iter().map(|s| s.dim()).sum::<usize>(), 4);
        let all_match = r.subspaces.iter().all(|s| {
            sc.truth
                .blocks
                .iter()
                .any(|b| b.fidelity(s).unwrap() > 1.0 - 1e-6)
        });
        if all_match && r.measurement_settings_used <= 48 {
            good += 1;
        }
    }
    // A random member can land within the null threshold of a partial span.
    assert!(good >= 95, "{good}");
}

#[test]
fn fully_decohering_channel_exits_after_one_trial() {
    let sc = block(&[1, 1, 1, 1], 0);
    let r = discover_subspaces(
        &sc.channel,
        &TrialSettings::noiseless(),
        &ProtocolConfig::default(),
        0,
    )
    .unwrap();
    assert_eq!(r.status, ProtocolStatus::NoMultiDimensionalDfs);
    assert_eq!(r.measurement_settings_used, 16);
}

#[test]
fn discovery_on_swap_dephasing_finds_one_and_three() {
    let sc = dressed_sswap(0.5, 4);
    let r = discover_subspaces(
        &sc.channel,
        &TrialSettings::noiseless(),
        &ProtocolConfig::default(),
        4,
    )
    .unwrap();
    assert_eq!(r.status, ProtocolStatus::Complete);
    let mut dims: Vec<usize> = r.subspaces.iter().map(|s| s.dim()).collect();
    dims.sort();
    assert_eq!(dims, vec![1, 3]);
    let one = r.subspaces.iter().find(|s| s.dim() == 1).unwrap();
    assert!(fidelity(&one.basis()[0], sc.truth.one_dimensional().unwrap()).unwrap() > 1.0 - 1e-6);
}

#[test]
fn eight_dimensional_halves_fit_the_budget() {
    let sc = block(&[4, 4], 7);
    let r = discover_subspaces(
        &sc.channel,
        &TrialSettings::noiseless(),
        &ProtocolConfig::default(),
        7,
    )
    .unwrap();
    assert_eq!(r.status, ProtocolStatus::Complete);
    assert!(r.measurement_settings_used <= 320);
    assert_mutually_orthogonal(&r.subspaces);
}

#[test]
fn non_averaged_variant_recovers_the_triplet() {
    let ch = sswap(0.5).unwrap();
    let cfg = ProtocolConfig::default();
    let e = identify_without_averaging(&ch, &TrialSettings::noiseless(), &cfg, 2, 3).unwrap();
    assert_eq!(e.measurement_settings_used, 48);
    assert!(e.complement.fidelity(&triplet_span()).unwrap() > 1.0 - 1e-6);
    assert!(identify_without_averaging(&ch, &TrialSettings::noiseless(), &cfg, 2, 1).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let ch = sswap(0.5).unwrap();
    let cfg = ProtocolConfig {
        eigenvalue_floor: 0.5,
        ..Default::default()
    };
    assert!(identify_1d_dfs(&ch, &TrialSettings::noiseless(), &cfg, 0).is_err());
}

#[test]
fn identical_seeds_give_identical_results() {
    let sc = dressed_sswap(0.5, 9);
    let s = TrialSettings::new(Shots::Finite(1000), Reconstruction::Mle);
    let run = || {
        serde_json::to_string(
            &identify_1d_dfs(&sc.channel, &s, &ProtocolConfig::default(), 77).unwrap(),
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn settings_are_trials_times_d_squared(seed: u64, n in prop_oneof![Just(None), (50u64..5000).prop_map(Some)]) {
        let sc = dressed_sswap(0.5, seed);
        let shots = n.map_or(Shots::Infinite, Shots::Finite);
        let s = TrialSettings::new(shots, Reconstruction::Mle);
        let r = identify_1d_dfs(&sc.channel, &s, &ProtocolConfig::default(), seed).unwrap();
        prop_assert_eq!(r.measurement_settings_used, 16 * r.trial_records.len() as u64);
        prop_assert_eq!(r.syndromes.degenerate_trial.len(), r.trial_records.len());
        if let (Some(d), Some(comp)) = (&r.dfs_1d, &r.dfs_complement) {
            for b in comp.basis() {
                prop_assert!(d.inner(b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn noiseless_identified_runs_are_exact(seed: u64) {
        let sc = dressed_sswap(0.5, seed);
        let r = identify_1d_dfs(&sc.channel, &TrialSettings::noiseless(), &ProtocolConfig::default(), seed).unwrap();
        if let Some(d) = &r.dfs_1d {
            prop_assert!(fidelity(d, sc.truth.one_dimensional().unwrap()).unwrap() > 1.0 - 1e-6);
        }
    }
}
