use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::WeightStack;
use crate::optim::AdamState;

use super::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerState {
    Adam(AdamState),
    Sgd { lr: f64 },
}

/// Everything needed to continue a run bit for bit. Sample streams are
/// derived from `(seed, step, index)`, so the seed and step are the whole
/// generator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: ExperimentConfig,
    pub step: u64,
    pub seed: u64,
    pub weights: WeightStack,
    pub optimizer: OptimizerState,
    pub recent_rewards: Vec<f64>,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes to a sibling temp file first so a crash never leaves a torn file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        std::fs::write(&tmp, self.to_json()?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// A checkpoint may be resumed under a config that differs only in run
    /// length and output locations.
    pub fn check_compatible(&self, cfg: &ExperimentConfig) -> Result<()> {
        let a = &self.config;
        let same = a.env == cfg.env
            && a.hidden == cfg.hidden
            && a.bias == cfg.bias
            && a.rule == cfg.rule
            && a.optimizer == cfg.optimizer
            && a.batch_size == cfg.batch_size
            && a.window == cfg.window
            && self.seed == cfg.seed;
        if !same {
            return Err(Error::Config(
                "checkpoint was written by an incompatible configuration".into(),
            ));
        }
        if self.step > cfg.steps() {
            return Err(Error::Config(format!(
                "checkpoint is at step {} but the run has only {} steps",
                self.step,
                cfg.steps()
            )));
        }
        Ok(())
    }
}
