use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::{Env, SingleStepEnv};
use crate::error::{Error, Result};
use crate::network::NetShape;
use crate::optim::AdamHyper;
use crate::rules::RuleSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub lr: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_true() -> bool {
    true
}
fn default_init_scale() -> f64 {
    0.1
}
fn default_window() -> usize {
    100
}

impl OptimizerSpec {
    pub fn adam(lr: f64) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            lr,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }

    pub fn adam_hyper(&self) -> AdamHyper {
        AdamHyper {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }
}

/// One training run, read from a single JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// `mux:k=<k>` or `toy:<path>`.
    pub env: String,
    pub hidden: Vec<usize>,
    #[serde(default = "default_true")]
    pub bias: bool,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    pub rule: RuleSpec,
    pub optimizer: OptimizerSpec,
    pub batch_size: usize,
    pub total_samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Running-average window, in batches.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Steps between checkpoints; needs `checkpoint_path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_interval: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn steps(&self) -> u64 {
        if self.batch_size == 0 {
            0
        } else {
            self.total_samples / self.batch_size as u64
        }
    }

    pub fn build_env(&self) -> Result<Env> {
        Env::parse(&self.env)
    }

    pub fn shape(&self, env: &Env) -> Result<NetShape> {
        NetShape::new(env.state_dim(), self.hidden.clone(), self.bias)
    }

    /// Checks everything that can be checked before training starts.
    pub fn validate(&self) -> Result<(Env, NetShape)> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !self.total_samples.is_multiple_of(self.batch_size as u64) {
            return Err(Error::Config(format!(
                "total_samples {} is not divisible by batch_size {}",
                self.total_samples, self.batch_size
            )));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config("init_scale must be >= 0".into()));
        }
        let o = &self.optimizer;
        if !(o.lr > 0.0 && o.lr.is_finite()) {
            return Err(Error::Config("optimizer lr must be > 0".into()));
        }
        if o.kind == OptimizerKind::Adam
            && !((0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2) && o.eps > 0.0)
        {
            return Err(Error::Config("adam needs beta1, beta2 in [0, 1) and eps > 0".into()));
        }
        if self.checkpoint_interval.is_some() != self.checkpoint_path.is_some() {
            return Err(Error::Config(
                "checkpoint_interval and checkpoint_path must be given together".into(),
            ));
        }
        if self.checkpoint_interval == Some(0) {
            return Err(Error::Config("checkpoint_interval must be >= 1".into()));
        }
        let env = self.build_env()?;
        let shape = self.shape(&env)?;
        self.rule.validate(shape.layers())?;
        Ok((env, shape))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_fills_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"env":"mux:k=2","hidden":[4],"rule":{"kind":"wm_reinforce"},
                "optimizer":{"kind":"sgd","lr":0.1},"batch_size":4,"total_samples":8}"#,
        )
        .unwrap();
        assert!(cfg.bias);
        assert_eq!((cfg.window, cfg.seed, cfg.init_scale), (100, 0, 0.1));
        assert_eq!(cfg.steps(), 2);
        let (_, shape) = cfg.validate().unwrap();
        assert_eq!(shape.input_dim(), 6);
        let again = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = ExperimentConfig::from_json(
            r#"{"env":"mux:k=2","hidden":[4],"rule":{"kind":"wm_reinforce"},
                "optimizer":{"kind":"sgd","lr":0.1},"batch_size":4,"total_samples":8,"lr":1}"#,
        );
        assert!(err.is_err());
    }
}
