//! Learning rules. Single-unit rules live in [`single`]; network rules in
//! this module produce an [`UpdateStack`] from one [`ForwardTrace`] and its
//! reward.

mod network;
pub mod single;

pub use network::{
    apply_regularization, global_reinforce, layer_reward, ste_backprop, wm_classification,
    wm_direct, wm_reinforce, wm_sweep, HiddenRule, HiddenSignal, SweepOptions,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ForwardTrace, WeightStack};
use crate::numerics::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    GlobalReinforce,
    WmReinforce,
    #[serde(rename = "wm_direct")]
    WmDirectGrad,
    WmClassification,
    SteBackprop,
}

impl RuleKind {
    pub const ALL: [RuleKind; 5] = [
        RuleKind::GlobalReinforce,
        RuleKind::WmReinforce,
        RuleKind::WmDirectGrad,
        RuleKind::WmClassification,
        RuleKind::SteBackprop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::GlobalReinforce => "global_reinforce",
            RuleKind::WmReinforce => "wm_reinforce",
            RuleKind::WmDirectGrad => "wm_direct",
            RuleKind::WmClassification => "wm_classification",
            RuleKind::SteBackprop => "ste_backprop",
        }
    }
}

impl std::str::FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown rule kind {s:?}")))
    }
}

/// When hidden layer rewards read the next layer's weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardTiming {
    /// Against the weights used in the forward pass.
    #[default]
    PreUpdate,
    /// Against `W^{l+1} + αΔW^{l+1}`, the literal update-then-read loop order.
    PostUpdate,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub kind: RuleKind,
    /// Reward baseline. Applied to the output unit of every rule and to all
    /// units of global REINFORCE.
    #[serde(default)]
    pub baseline: f64,
    /// Interpolation toward classification for the hidden units of
    /// `wm_reinforce` (0 is pure REINFORCE, 1 equals `wm_classification`).
    #[serde(default)]
    pub lambda: f64,
    /// L2 regularization weights `β_1 … β_L`; empty means none.
    #[serde(default)]
    pub reg_weights: Vec<f64>,
    #[serde(default)]
    pub reward_timing: RewardTiming,
    /// Use the printed classification form, which subtracts `2E[A|H^{L−1}]`
    /// instead of the layer's own expectation.
    #[serde(default, skip_serializing_if = "is_default")]
    pub printed_classification: bool,
}

impl RuleSpec {
    pub fn new(kind: RuleKind) -> Self {
        Self {
            kind,
            baseline: 0.0,
            lambda: 0.0,
            reg_weights: Vec::new(),
            reward_timing: RewardTiming::PreUpdate,
            printed_classification: false,
        }
    }

    pub fn with_reg(mut self, reg: &[f64]) -> Self {
        self.reg_weights = reg.to_vec();
        self
    }

    pub fn validate(&self, layers: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if !self.baseline.is_finite() {
            return Err(Error::Config("baseline must be finite".into()));
        }
        if !self.reg_weights.is_empty() && self.reg_weights.len() != layers {
            return Err(Error::Config(format!(
                "expected {layers} regularization weights, got {}",
                self.reg_weights.len()
            )));
        }
        if self.reg_weights.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(Error::Config("regularization weights must be >= 0".into()));
        }
        Ok(())
    }

    /// `β_l` for `l` in `1..=L`.
    pub fn reg_weight(&self, l: usize) -> f64 {
        self.reg_weights.get(l - 1).copied().unwrap_or(0.0)
    }

    /// Raw update for one trace. `step_size` is read only under
    /// [`RewardTiming::PostUpdate`].
    pub fn update(
        &self,
        trace: &ForwardTrace,
        r: f64,
        w: &WeightStack,
        step_size: f64,
    ) -> Result<UpdateStack> {
        let hidden = match self.kind {
            RuleKind::GlobalReinforce => return global_reinforce(trace, r, w, self.baseline),
            RuleKind::SteBackprop => return ste_backprop(trace, r, w, self.baseline),
            RuleKind::WmReinforce if self.lambda > 0.0 => HiddenRule::Mixture {
                lambda: self.lambda,
                printed: self.printed_classification,
            },
            RuleKind::WmReinforce => HiddenRule::Reinforce,
            RuleKind::WmDirectGrad => HiddenRule::Direct,
            RuleKind::WmClassification => HiddenRule::Classification {
                printed: self.printed_classification,
            },
        };
        let opts = SweepOptions {
            baseline: self.baseline,
            hidden,
            signal: HiddenSignal::LayerReward,
            timing: self.reward_timing,
            step_size,
        };
        wm_sweep(trace, r, w, &opts)
    }
}

/// Per-layer raw updates `ΔW¹ … ΔW^L`, plus the hidden layer rewards
/// `R¹ … R^{L−1}` for rules that compute them.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStack {
    deltas: Vec<Mat>,
    layer_rewards: Option<Vec<Vec<f64>>>,
}

impl UpdateStack {
    pub fn new(deltas: Vec<Mat>, layer_rewards: Option<Vec<Vec<f64>>>) -> Self {
        Self {
            deltas,
            layer_rewards,
        }
    }

    pub fn zeros_like(w: &WeightStack) -> Self {
        Self {
            deltas: w.layers().iter().map(|m| Mat::zeros(m.rows(), m.cols())).collect(),
            layer_rewards: None,
        }
    }

    /// `ΔW^l`, `l` in `1..=L`.
    pub fn delta(&self, l: usize) -> &Mat {
        &self.deltas[l - 1]
    }

    pub fn deltas(&self) -> &[Mat] {
        &self.deltas
    }

    pub fn into_deltas(self) -> Vec<Mat> {
        self.deltas
    }

    pub fn layers(&self) -> usize {
        self.deltas.len()
    }

    /// `R^l` for a hidden layer `l` in `1..L`, when the rule produced one.
    pub fn layer_reward(&self, l: usize) -> Option<&[f64]> {
        self.layer_rewards
            .as_ref()
            .and_then(|r| r.get(l - 1))
            .map(Vec::as_slice)
    }

    /// `self += c · other`; layer rewards are dropped.
    pub fn accumulate(&mut self, c: f64, other: &UpdateStack) -> Result<()> {
        if self.deltas.len() != other.deltas.len() {
            return Err(Error::Config("update stacks have different depths".into()));
        }
        for (a, b) in self.deltas.iter_mut().zip(&other.deltas) {
            a.add_scaled(c, b)?;
        }
        self.layer_rewards = None;
        Ok(())
    }

    pub fn scale(&self, c: f64) -> UpdateStack {
        UpdateStack {
            deltas: self.deltas.iter().map(|m| m.scale(c)).collect(),
            layer_rewards: None,
        }
    }

    /// Replaces each `ΔW^l` by `f(l, ΔW^l)`, keeping the layer rewards.
    pub fn map_deltas(&self, mut f: impl FnMut(usize, &Mat) -> Result<Mat>) -> Result<UpdateStack> {
        let deltas = self
            .deltas
            .iter()
            .enumerate()
            .map(|(i, d)| f(i + 1, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(UpdateStack {
            deltas,
            layer_rewards: self.layer_rewards.clone(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.deltas.iter().all(Mat::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_parse() {
        for k in RuleKind::ALL {
            assert_eq!(k.name().parse::<RuleKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("wm".parse::<RuleKind>().is_err());
    }

    #[test]
    fn rule_defaults_and_validation() {
        let spec: RuleSpec = serde_json::from_str(r#"{"kind":"wm_direct"}"#).unwrap();
        assert_eq!(spec, RuleSpec::new(RuleKind::WmDirectGrad));
        assert_eq!(spec.reward_timing, RewardTiming::PreUpdate);
        assert!(spec.validate(3).is_ok());
        assert!(RuleSpec { lambda: 1.2, ..spec.clone() }.validate(3).is_err());
        assert!(spec.clone().with_reg(&[0.0, -1.0, 0.0]).validate(3).is_err());
        assert!(spec.clone().with_reg(&[0.0, 1.0]).validate(3).is_err());
        assert_eq!(spec.with_reg(&[0.0, 1e-5, 1e-3]).reg_weight(3), 1e-3);
        assert!(serde_json::from_str::<RuleSpec>(r#"{"kind":"wm_direct","bogus":1}"#).is_err());
    }
}
