use serde::{Deserialize, Serialize};

use super::{PairFlag, ProtocolConfig, ProtocolResult, ProtocolStatus, SyndromeFlags, TrialRunner};
use crate::channels::KrausChannel;
use crate::qmath::{fidelity, state_average, Ket, Subspace};
use crate::tomography::{TomographyTrial, TrialSettings};
use crate::{Error, Result};

/// The best cross-trial eigenvector pair of two trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMatch {
    pub trial_a: usize,
    pub trial_b: usize,
    /// Index into trial A's eigensystem.
    pub vec_a: usize,
    pub vec_b: usize,
    pub f_largest: f64,
    /// Second largest entry of `table`; 0 when the table has one entry.
    pub f_second: f64,
    /// `table[i][j]` is the fidelity of A's i-th and B's j-th above-floor eigenvector.
    pub table: Vec<Vec<f64>>,
}

impl PairMatch {
    pub fn margin(&self) -> f64 {
        self.f_largest - self.f_second
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub matched: PairMatch,
    pub degenerate_a: bool,
    pub degenerate_b: bool,
    pub ambiguous: bool,
    /// The 1D DFS estimate this pair gives.
    pub estimate: Ket,
    /// Whether `estimate` is the average of the pair or just A's vector.
    pub averaged: bool,
}

impl PairOutcome {
    pub fn is_clean(&self) -> bool {
        !(self.degenerate_a || self.degenerate_b || self.ambiguous)
    }
}

fn above_floor(trial: &TomographyTrial, floor: f64) -> Vec<&Ket> {
    trial.eigensystem.above(floor).map(|p| &p.vector).collect()
}

/// Fewer than two eigenvalues above the floor, or `λ₁/λ₂` below the minimum ratio.
pub fn trial_is_degenerate(trial: &TomographyTrial, config: &ProtocolConfig) -> bool {
    let vals: Vec<f64> = trial
        .eigensystem
        .above(config.eigenvalue_floor)
        .map(|p| p.value)
        .collect();
    match vals.as_slice() {
        [l1, l2, ..] => l1 / l2 < config.degeneracy_ratio_min,
        _ => true,
    }
}

/// Maximum-fidelity pairing of the above-floor eigenvectors of two trials.
/// Ties go to the lowest `(i, j)`.
pub fn match_eigenvectors(
    trials: &[TomographyTrial],
    a: usize,
    b: usize,
    floor: f64,
) -> Result<PairMatch> {
    let va = above_floor(&trials[a], floor);
    let vb = above_floor(&trials[b], floor);
    if va.is_empty() || vb.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let table: Vec<Vec<f64>> = va
        .iter()
        .map(|x| {
            vb.iter()
                .map(|y| fidelity(x, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let (mut vec_a, mut vec_b, mut f_largest) = (0, 0, f64::NEG_INFINITY);
    for (i, row) in table.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            if f > f_largest {
                (vec_a, vec_b, f_largest) = (i, j, f);
            }
        }
    }
    let f_second = table
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &f)| ((i, j), f)))
        .filter(|&(ij, _)| ij != (vec_a, vec_b))
        .map(|(_, f)| f)
        .fold(0.0, f64::max);
    Ok(PairMatch {
        trial_a: a,
        trial_b: b,
        vec_a,
        vec_b,
        f_largest,
        f_second,
        table,
    })
}

/// Pairs trials `a` and `b`, applies the syndrome tests and forms the estimate.
///
/// The estimate is the state average of the matched vectors when their
/// fidelity exceeds ½, and trial A's vector otherwise.
pub fn evaluate_pair(
    trials: &[TomographyTrial],
    a: usize,
    b: usize,
    config: &ProtocolConfig,
) -> Result<PairOutcome> {
    let matched = match_eigenvectors(trials, a, b, config.eigenvalue_floor)?;
    let va = &trials[a].eigensystem.pairs[matched.vec_a].vector;
    let vb = &trials[b].eigensystem.pairs[matched.vec_b].vector;
    let (estimate, averaged) = if matched.f_largest > 0.5 {
        match state_average(va, vb) {
            Ok(k) => (k, true),
            Err(Error::Degenerate { .. }) => (va.clone(), false),
            Err(e) => return Err(e),
        }
    } else {
        (va.clone(), false)
    };
    Ok(PairOutcome {
        ambiguous: matched.margin() < config.match_margin_min,
        degenerate_a: trial_is_degenerate(&trials[a], config),
        degenerate_b: trial_is_degenerate(&trials[b], config),
        matched,
        estimate,
        averaged,
    })
}

/// Syndromes of a single pair of trials.
pub fn detect_syndromes(
    a: &TomographyTrial,
    b: &TomographyTrial,
    config: &ProtocolConfig,
) -> Result<SyndromeFlags> {
    let trials = [a.clone(), b.clone()];
    let outcome = evaluate_pair(&trials, 0, 1, config)?;
    Ok(SyndromeFlags {
        degenerate_trial: vec![outcome.degenerate_a, outcome.degenerate_b],
        ambiguous_match: vec![PairFlag {
            trial_a: 0,
            trial_b: 1,
            ambiguous: outcome.ambiguous,
        }],
        warnings: Vec::new(),
    })
}

/// Orthonormal basis of the complement of `dfs`, seeded by the remaining
/// above-floor eigenvectors of the paired trials.
fn complement_of(
    dfs: &Ket,
    trials: &[TomographyTrial],
    pair: &PairMatch,
    config: &ProtocolConfig,
) -> Result<Option<Subspace>> {
    let mut span = Subspace::new(vec![dfs.clone()])?;
    for (t, skip) in [(pair.trial_a, pair.vec_a), (pair.trial_b, pair.vec_b)] {
        for (i, p) in trials[t]
            .eigensystem
            .above(config.eigenvalue_floor)
            .enumerate()
        {
            if i != skip {
                span.extend(p.vector.amplitudes(), config.gs_null_threshold)?;
            }
        }
    }
    let mut basis: Vec<Ket> = span.basis()[1..].to_vec();
    if let Some(rest) = span.complement()? {
        basis.extend(rest.basis().iter().cloned());
    }
    if basis.is_empty() {
        return Ok(None);
    }
    Subspace::new(basis).map(Some)
}

fn collect_warnings(trials: &[TomographyTrial]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for w in trials.iter().flat_map(|t| t.diagnostics.warnings.iter()) {
        if !out.contains(w) {
            out.push(w.clone());
        }
    }
    out
}

/// Finds a one-dimensional DFS from pairs of reversed trials.
pub fn identify_1d_dfs(
    ch: &KrausChannel,
    settings: &TrialSettings,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<ProtocolResult> {
    identify_1d_dfs_with_projectors(ch, settings, config, seed, &[])
}

/// As [`identify_1d_dfs`], with the first trials using `preset` projectors
/// in order before random draws take over.
pub fn identify_1d_dfs_with_projectors(
    ch: &KrausChannel,
    settings: &TrialSettings,
    config: &ProtocolConfig,
    seed: u64,
    preset: &[Ket],
) -> Result<ProtocolResult> {
    let mut runner = TrialRunner::new(ch, settings, config, seed)?;
    let mut preset = preset.iter().cloned();
    for _ in 0..2 {
        runner.run(preset.next())?;
    }
    let max_trials = 2 + if config.syndromes_enabled {
        config.max_extra_trials
    } else {
        0
    };

    loop {
        let n = runner.trials.len();
        let mut outcomes = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                outcomes.push(evaluate_pair(&runner.trials, a, b, config)?);
            }
        }
        let chosen = if config.syndromes_enabled {
            best_by_margin(outcomes.iter().filter(|o| o.is_clean()))
        } else {
            outcomes.first()
        }
        .cloned();

        if chosen.is_some() || n >= max_trials {
            let mut syndromes = SyndromeFlags {
                degenerate_trial: runner
                    .trials
                    .iter()
                    .map(|t| trial_is_degenerate(t, config))
                    .collect(),
                ambiguous_match: outcomes
                    .iter()
                    .map(|o| PairFlag {
                        trial_a: o.matched.trial_a,
                        trial_b: o.matched.trial_b,
                        ambiguous: o.ambiguous,
                    })
                    .collect(),
                warnings: collect_warnings(&runner.trials),
            };
            let (status, dfs_1d, dfs_complement, chosen_pair) = match chosen {
                Some(o) => {
                    let comp = complement_of(&o.estimate, &runner.trials, &o.matched, config)?;
                    (
                        ProtocolStatus::Identified,
                        Some(o.estimate.clone()),
                        comp,
                        Some(o),
                    )
                }
                None => {
                    syndromes
                        .warnings
                        .push(format!("no syndrome-free trial pair after {n} trials"));
                    let best = best_by_margin(outcomes.iter()).cloned();
                    (ProtocolStatus::Failed, None, None, best)
                }
            };
            return Ok(ProtocolResult {
                status,
                dfs_1d,
                dfs_complement,
                subspaces: Vec::new(),
                confirmed: Vec::new(),
                syndromes,
                measurement_settings_used: runner.ledger.count(),
                trial_records: runner.trials,
                chosen_pair,
            });
        }
        runner.run(preset.next())?;
    }
}

fn best_by_margin<'a>(it: impl Iterator<Item = &'a PairOutcome>) -> Option<&'a PairOutcome> {
    it.fold(None, |best: Option<&PairOutcome>, o| match best {
        Some(b) if b.matched.margin() >= o.matched.margin() => Some(b),
        _ => Some(o),
    })
}

/// A 1D DFS candidate and its complement taken from single trials, with no
/// state averaging.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonAveragedEstimate {
    pub dfs_1d: Ket,
    pub complement: Subspace,
    /// Trial whose eigenvector was kept.
    pub source_trial: usize,
    pub measurement_settings_used: u64,
    pub trial_records: Vec<TomographyTrial>,
}

/// Runs `n_trials` trials, locates the common eigenvector through the best
/// cross-trial match, and keeps the copy from the matching trial with the
/// largest `λ₁/λ₂`. The complement is spanned by the other eigenvectors.
pub fn identify_without_averaging(
    ch: &KrausChannel,
    settings: &TrialSettings,
    config: &ProtocolConfig,
    seed: u64,
    n_trials: usize,
) -> Result<NonAveragedEstimate> {
    if n_trials < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: n_trials,
        });
    }
    let mut runner = TrialRunner::new(ch, settings, config, seed)?;
    for _ in 0..n_trials {
        runner.run(None)?;
    }
    let trials = &runner.trials;
    let floor = config.eigenvalue_floor;

    let mut best: Option<PairMatch> = None;
    for a in 0..n_trials {
        for b in a + 1..n_trials {
            let m = match_eigenvectors(trials, a, b, floor)?;
            if best.as_ref().is_none_or(|x| m.f_largest > x.f_largest) {
                best = Some(m);
            }
        }
    }
    let best = best.expect("at least one pair");
    let reference = &trials[best.trial_a].eigensystem.pairs[best.vec_a].vector;

    // Per trial: the eigenvector closest to the reference, and the trial's ratio.
    let mut candidates = Vec::with_capacity(n_trials);
    for t in trials {
        let mut pick = (0, f64::NEG_INFINITY);
        for (i, p) in t.eigensystem.above(floor).enumerate() {
            let f = fidelity(reference, &p.vector)?;
            if f > pick.1 {
                pick = (i, f);
            }
        }
        // Trials whose closest vector is not a match carry no copy at all.
        let ratio = if pick.1 > 0.5 {
            t.diagnostics.eigenvalue_ratio.unwrap_or(f64::INFINITY)
        } else {
            f64::NEG_INFINITY
        };
        candidates.push((pick.0, ratio));
    }
    let source_trial = (0..n_trials).fold(best.trial_a, |b, i| {
        if candidates[i].1 > candidates[b].1 {
            i
        } else {
            b
        }
    });
    let dfs_1d = trials[source_trial].eigensystem.pairs[candidates[source_trial].0]
        .vector
        .clone();

    let mut span = Subspace::new(vec![dfs_1d.clone()])?;
    for (t, &(skip, _)) in trials.iter().zip(&candidates) {
        for (i, p) in t.eigensystem.above(floor).enumerate() {
            if i != skip {
                span.extend(p.vector.amplitudes(), config.gs_null_threshold)?;
            }
        }
    }
    let mut basis: Vec<Ket> = span.basis()[1..].to_vec();
    if let Some(rest) = span.complement()? {
        basis.extend(rest.basis().iter().cloned());
    }
    Ok(NonAveragedEstimate {
        dfs_1d,
        complement: Subspace::new(basis)?,
        source_trial,
        measurement_settings_used: runner.ledger.count(),
        trial_records: runner.trials,
    })
}
