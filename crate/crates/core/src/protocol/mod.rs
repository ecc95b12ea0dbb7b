//! Identification of decoherence-free subspaces from reversed tomography trials.
//!
//! Every entry point takes the channel, the trial settings, a
//! [`ProtocolConfig`] and a master seed; trial `k` draws its projector and
//! its counts from seeds derived from `(seed, stream, k)`, so results are
//! reproducible and independent of scheduling.

mod config;
mod discover;
mod identify;
mod verify;

pub use config::{ProjectorSampling, ProtocolConfig};
pub use discover::discover_subspaces;
pub use identify::{
    detect_syndromes, evaluate_pair, identify_1d_dfs, identify_1d_dfs_with_projectors,
    identify_without_averaging, match_eigenvectors, trial_is_degenerate, NonAveragedEstimate,
    PairMatch, PairOutcome,
};
pub use verify::{sample_purities, verify_average_purity, verify_unitarity, PuritySampling};

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::qmath::{haar_state_with, qubit_count, random_product_state_with, Ket, Subspace};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::tomography::{
    run_reversed_trial, InputStateSet, SettingsLedger, TomographyTrial, TrialSettings,
};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolStatus {
    /// A clean pair of trials produced a 1D DFS estimate.
    Identified,
    /// No syndrome-free pair within the trial budget.
    Failed,
    /// Every subspace was either confirmed by a null residual or inferred.
    Complete,
    /// Budget ran out with more than one unconfirmed group.
    Partial,
    /// A trial had `d` eigenvalues above the floor.
    NoMultiDimensionalDfs,
}

impl ProtocolStatus {
    pub fn is_success(&self) -> bool {
        matches!(
            self,
            ProtocolStatus::Identified
                | ProtocolStatus::Complete
                | ProtocolStatus::NoMultiDimensionalDfs
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairFlag {
    pub trial_a: usize,
    pub trial_b: usize,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SyndromeFlags {
    /// One entry per trial.
    pub degenerate_trial: Vec<bool>,
    /// One entry per evaluated pair.
    pub ambiguous_match: Vec<PairFlag>,
    pub warnings: Vec<String>,
}

impl SyndromeFlags {
    pub fn any(&self) -> bool {
        self.degenerate_trial.iter().any(|&b| b) || self.ambiguous_match.iter().any(|p| p.ambiguous)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub status: ProtocolStatus,
    pub dfs_1d: Option<Ket>,
    pub dfs_complement: Option<Subspace>,
    /// Discovered subspaces in order of confirmation; the last may be inferred.
    pub subspaces: Vec<Subspace>,
    /// Whether each entry of `subspaces` was confirmed by a null residual.
    pub confirmed: Vec<bool>,
    pub syndromes: SyndromeFlags,
    pub measurement_settings_used: u64,
    pub trial_records: Vec<TomographyTrial>,
    /// The accepted (or, on failure, best) pair.
    pub chosen_pair: Option<PairOutcome>,
}

pub(crate) fn sample_projector(d: usize, sampling: ProjectorSampling, seed: u64) -> Result<Ket> {
    let mut rng = rng_from_seed(seed);
    match (sampling, qubit_count(d)) {
        (ProjectorSampling::Separable, Some(n)) if n > 0 => random_product_state_with(n, &mut rng),
        _ => haar_state_with(d, &mut rng),
    }
}

/// Draws trials for one protocol run and keeps the settings tally.
pub(crate) struct TrialRunner<'a> {
    pub ch: &'a KrausChannel,
    pub set: InputStateSet,
    pub settings: &'a TrialSettings,
    pub sampling: ProjectorSampling,
    pub seed: u64,
    pub ledger: SettingsLedger,
    pub trials: Vec<TomographyTrial>,
}

impl<'a> TrialRunner<'a> {
    pub fn new(
        ch: &'a KrausChannel,
        settings: &'a TrialSettings,
        config: &ProtocolConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate(ch.dim())?;
        Ok(TrialRunner {
            ch,
            set: InputStateSet::for_dim(ch.dim())?,
            settings,
            sampling: config.projector_sampling,
            seed,
            ledger: SettingsLedger::new(),
            trials: Vec::new(),
        })
    }

    /// Runs the next trial, with `projector` or a fresh random one.
    pub fn run(&mut self, projector: Option<Ket>) -> Result<&TomographyTrial> {
        let k = self.trials.len() as u64;
        let projector = match projector {
            Some(p) => p,
            None => sample_projector(
                self.ch.dim(),
                self.sampling,
                derive_seed(self.seed, stream::PROJECTOR, k),
            )?,
        };
        let trial = run_reversed_trial(
            self.ch,
            &projector,
            &self.set,
            self.settings,
            derive_seed(self.seed, stream::COUNTS, k),
            &self.ledger,
        )?;
        self.trials.push(trial);
        Ok(self.trials.last().expect("just pushed"))
    }
}

/// `k` independent reversed trials with the projector and count seeds the
/// adaptive protocols would use for the same master seed.
pub fn run_trials(
    ch: &KrausChannel,
    settings: &TrialSettings,
    config: &ProtocolConfig,
    seed: u64,
    k: usize,
) -> Result<Vec<TomographyTrial>> {
    let mut runner = TrialRunner::new(ch, settings, config, seed)?;
    for _ in 0..k {
        runner.run(None)?;
    }
    Ok(runner.trials)
}
