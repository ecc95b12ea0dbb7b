//! Experiment configuration: a single TOML file, CLI overrides, and
//! materialised defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dfs_scout_core::channels::{synthetic_block, synthetic_sswap, BlockSpec, SyntheticChannel};
use dfs_scout_core::protocol::ProtocolConfig;
use dfs_scout_core::qmath::{haar_unitary, CMatrix};
use dfs_scout_core::rng::{derive_seed, stream};
use dfs_scout_core::tomography::{Reconstruction, Shots, TrialSettings};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Sswap,
    Block,
}

/// Where the dressing unitaries come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dressing {
    /// `U₁ = U₂ = I`.
    None,
    /// Haar unitaries from `u1_seed` and `u2_seed`.
    #[default]
    Fixed,
    /// Fresh Haar unitaries for every ensemble run.
    PerRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    /// Swap probability for `sswap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_dims: Option<Vec<usize>>,
    /// Residual inter-block coherence `λ` for `block`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<f64>,
    #[serde(default)]
    pub dressing: Dressing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default)]
    pub master: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub p_list: Vec<f64>,
    pub runs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            p_list: vec![0.5, 0.51, 0.55, 0.59, 0.65, 0.72, 0.8, 0.9],
            runs: 55,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PurityConfig {
    pub p_list: Vec<f64>,
    /// Protocol runs per swap probability.
    pub runs: usize,
    /// Input states per purity estimate.
    pub samples: usize,
}

impl Default for PurityConfig {
    fn default() -> Self {
        PurityConfig {
            p_list: vec![0.05, 0.51, 0.59, 0.72, 0.95],
            runs: 10,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FailureConfig {
    pub n_list: Vec<u64>,
    pub runs: usize,
    pub p: f64,
}

impl Default for FailureConfig {
    fn default() -> Self {
        FailureConfig {
            n_list: vec![100, 1000, 10_000],
            runs: 2000,
            p: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_shots")]
    pub shots: Shots,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<Reconstruction>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub purity: PurityConfig,
    #[serde(default)]
    pub failure: FailureConfig,
}

fn default_shots() -> Shots {
    Shots::Finite(10_000)
}

fn default_trials() -> usize {
    11
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<Shots>,
    pub out: Option<PathBuf>,
}

fn bad<T>(msg: impl Into<String>) -> Result<T, HarnessError> {
    Err(HarnessError::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads, applies overrides, fills defaults and validates.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.apply(overrides);
        cfg.materialize();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seeds.master = s;
        }
        if let Some(n) = o.shots {
            self.shots = n;
            self.reconstruction = None;
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
    }

    /// Makes every implicit choice explicit: reconstruction method and, for
    /// fixed dressing, the unitary seeds.
    pub fn materialize(&mut self) {
        if self.reconstruction.is_none() {
            self.reconstruction = Some(match self.shots {
                Shots::Infinite => Reconstruction::Linear,
                Shots::Finite(_) => Reconstruction::Mle,
            });
        }
        if self.channel.dressing == Dressing::Fixed {
            let m = self.seeds.master;
            self.channel
                .u1_seed
                .get_or_insert(derive_seed(m, stream::CHANNEL_U1, 0));
            self.channel
                .u2_seed
                .get_or_insert(derive_seed(m, stream::CHANNEL_U2, 0));
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let ch = &self.channel;
        match ch.kind {
            ChannelKind::Sswap => {
                let Some(p) = ch.p else {
                    return bad("channel.p is required for kind = \"sswap\"");
                };
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("channel.p = {p} is outside [0, 1]"));
                }
                if ch.block_dims.is_some() || ch.coherence.is_some() {
                    return bad("block_dims and coherence only apply to kind = \"block\"");
                }
            }
            ChannelKind::Block => {
                let spec = self.block_spec().ok_or_else(|| {
                    HarnessError::Config(
                        "channel.block_dims is required for kind = \"block\"".into(),
                    )
                })?;
                let d = spec
                    .validate()
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                if !((2..=16).contains(&d) && d.is_power_of_two()) {
                    return bad(format!(
                        "block dimensions must sum to 2, 4, 8 or 16, got {d}"
                    ));
                }
                if ch.p.is_some() {
                    return bad("channel.p only applies to kind = \"sswap\"");
                }
            }
        }
        if self.trials < 2 {
            return bad(format!("trials = {} must be at least 2", self.trials));
        }
        self.protocol
            .validate(self.dim())
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        for &p in self.sweep.p_list.iter().chain(&self.purity.p_list) {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("swap probability {p} is outside [0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.failure.p) {
            return bad(format!("failure.p = {} is outside [0, 1]", self.failure.p));
        }
        if let Some(&n) = self.failure.n_list.iter().find(|&&n| n < 10) {
            return bad(format!(
                "failure.n_list entries must be at least 10, got {n}"
            ));
        }
        if self.sweep.runs == 0
            || self.purity.runs == 0
            || self.purity.samples == 0
            || self.failure.runs == 0
        {
            return bad("ensemble sizes must be positive");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.channel.kind {
            ChannelKind::Sswap => 4,
            ChannelKind::Block => self.block_spec().map_or(0, |s| s.block_dims.iter().sum()),
        }
    }

    pub fn block_spec(&self) -> Option<BlockSpec> {
        Some(BlockSpec {
            block_dims: self.channel.block_dims.clone()?,
            coherence: self.channel.coherence.unwrap_or(0.0),
        })
    }

    pub fn trial_settings(&self) -> TrialSettings {
        let method = self.reconstruction.unwrap_or(match self.shots {
            Shots::Infinite => Reconstruction::Linear,
            Shots::Finite(_) => Reconstruction::Mle,
        });
        TrialSettings::new(self.shots, method)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form. The
    /// output directory is left out so relocated reruns hash the same.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let digest = Sha256::digest(c.to_toml().as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    fn dressing_for(&self, run_seed: Option<u64>) -> (CMatrix, CMatrix) {
        let d = self.dim();
        let seeds = match (self.channel.dressing, run_seed) {
            (Dressing::None, _) => None,
            (Dressing::PerRun, Some(r)) => Some((
                derive_seed(r, stream::CHANNEL_U1, 0),
                derive_seed(r, stream::CHANNEL_U2, 0),
            )),
            _ => {
                let m = self.seeds.master;
                Some((
                    self.channel
                        .u1_seed
                        .unwrap_or(derive_seed(m, stream::CHANNEL_U1, 0)),
                    self.channel
                        .u2_seed
                        .unwrap_or(derive_seed(m, stream::CHANNEL_U2, 0)),
                ))
            }
        };
        match seeds {
            None => (CMatrix::identity(d, d), CMatrix::identity(d, d)),
            Some((a, b)) => (
                haar_unitary(d, a).expect("d ≥ 2"),
                haar_unitary(d, b).expect("d ≥ 2"),
            ),
        }
    }

    /// The configured channel; `run_seed` picks per-run dressing.
    pub fn build_channel(&self, run_seed: Option<u64>) -> Result<SyntheticChannel, HarnessError> {
        self.build_channel_with_p(self.channel.p.unwrap_or(0.5), run_seed)
    }

    /// As [`Self::build_channel`] with the swap probability replaced by `p`.
    pub fn build_channel_with_p(
        &self,
        p: f64,
        run_seed: Option<u64>,
    ) -> Result<SyntheticChannel, HarnessError> {
        let (u1, u2) = self.dressing_for(run_seed);
        let sc = match self.channel.kind {
            ChannelKind::Sswap => synthetic_sswap(p, u1, u2)?,
            ChannelKind::Block => {
                let spec = self
                    .block_spec()
                    .ok_or_else(|| HarnessError::Config("missing block_dims".into()))?;
                synthetic_block(&spec, u1, u2)?
            }
        };
        Ok(sc)
    }
}
