use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the random output projectors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectorSampling {
    /// Product of independent Haar qubit states; falls back to `Haar` when
    /// `d` is not a power of two.
    Separable,
    Haar,
}

/// Thresholds for eigenvector selection, syndromes and subspace discovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Eigenvalues at or below this count as zero.
    pub eigenvalue_floor: f64,
    /// Trials whose leading eigenvalue ratio `λ₁/λ₂` is below this are degenerate.
    pub degeneracy_ratio_min: f64,
    /// Pairs with `F_largest − F_second` below this are ambiguous.
    pub match_margin_min: f64,
    /// Gram-Schmidt residual norm below which a vector is in a group's span.
    pub gs_null_threshold: f64,
    /// Squared projection onto a group's span needed to join that group.
    pub group_overlap_min: f64,
    pub max_extra_trials: usize,
    /// When false, the first two trials are paired and used no matter what
    /// the syndromes say.
    pub syndromes_enabled: bool,
    pub projector_sampling: ProjectorSampling,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            eigenvalue_floor: 0.02,
            degeneracy_ratio_min: 1.5,
            match_margin_min: 0.5,
            gs_null_threshold: 0.1,
            group_overlap_min: 0.25,
            max_extra_trials: 8,
            syndromes_enabled: true,
            projector_sampling: ProjectorSampling::Separable,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eigenvalue_floor >= 0.0 && self.eigenvalue_floor < 1.0 / d as f64) {
            return bad(format!(
                "eigenvalue_floor {} must lie in [0, 1/d) = [0, {})",
                self.eigenvalue_floor,
                1.0 / d as f64
            ));
        }
        if !(self.degeneracy_ratio_min >= 1.0 && self.degeneracy_ratio_min.is_finite()) {
            return bad(format!(
                "degeneracy_ratio_min {} must be a finite value ≥ 1",
                self.degeneracy_ratio_min
            ));
        }
        if !(0.0..=1.0).contains(&self.match_margin_min) {
            return bad(format!(
                "match_margin_min {} must lie in [0, 1]",
                self.match_margin_min
            ));
        }
        if !(self.gs_null_threshold > 0.0 && self.gs_null_threshold < 1.0) {
            return bad(format!(
                "gs_null_threshold {} must lie in (0, 1)",
                self.gs_null_threshold
            ));
        }
        if !(self.group_overlap_min > 0.0 && self.group_overlap_min < 1.0) {
            return bad(format!(
                "group_overlap_min {} must lie in (0, 1)",
                self.group_overlap_min
            ));
        }
        Ok(())
    }
}
