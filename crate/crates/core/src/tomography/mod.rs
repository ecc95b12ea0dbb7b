//! Reversed-trial tomography.
//!
//! Instead of sending one state through the channel and measuring `d²`
//! projections at the output, `d²` informationally complete product states are
//! sent in and each output is projected onto one fixed state `|φ⟩`. The
//! probabilities `tr(Π ε(τ_k)) = tr(ε†(Π) τ_k)` are those of a tomography of
//! the adjoint image `ε†(Π)`, which is reconstructed here.

mod inputs;
mod reconstruct;
mod trial;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use inputs::{single_qubit_states, InputStateSet};
pub use reconstruct::{
    linear_estimate, linear_invert, log_likelihood, mle_fit, LinearEstimate, MleFit, MleOptions,
    PROBABILITY_CLAMP,
};
pub use trial::{
    forward_probabilities, run_reversed_trial, simulate_counts, Reconstruction, TomographyTrial,
    TrialDiagnostics, TrialSettings,
};

/// Copies of each input state measured per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shots {
    Finite(u64),
    /// Exact Born-rule probabilities, no sampling.
    Infinite,
}

impl Shots {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Shots::Infinite)
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            Shots::Finite(n) => Some(*n),
            Shots::Infinite => None,
        }
    }
}

impl std::fmt::Display for Shots {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shots::Finite(n) => write!(f, "{n}"),
            Shots::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Shots {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "∞" => Ok(Shots::Infinite),
            other => match other.parse::<u64>() {
                Ok(0) => Err("shots must be at least 1".into()),
                Ok(n) => Ok(Shots::Finite(n)),
                Err(_) => Err(format!(
                    "invalid shot count {s:?}; expected an integer or \"inf\""
                )),
            },
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Finite(n) => s.serialize_u64(*n),
            Shots::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(0) => Err(serde::de::Error::custom("shots must be at least 1")),
            Raw::Int(n) => Ok(Shots::Finite(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Counts measurement settings consumed: one per simulated binomial
/// experiment, or per exact probability evaluation in noiseless mode.
#[derive(Debug, Default)]
pub struct SettingsLedger {
    settings: AtomicU64,
}

impl SettingsLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, n: usize) {
        self.settings.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn count(&self) -> u64 {
        self.settings.load(Ordering::Relaxed)
    }
}
