use rayon::prelude::*;

use crate::envs::{Env, SingleStepEnv};
use crate::error::{Error, Result};
use crate::network::{forward_sample, init_weights, WeightStack};
use crate::numerics::RandomStream;
use crate::optim::{sgd_step_in_place, AdamState};
use crate::rules::{apply_regularization, UpdateStack};

use super::checkpoint::{Checkpoint, OptimizerState};
use super::config::{ExperimentConfig, OptimizerKind};
use super::metrics::{MetricsRow, RunMetrics, RunningAverage};

/// Stream key reserved for weight initialization; step keys start at 1.
const INIT_KEY: u64 = 0;

pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub weights: WeightStack,
}

/// Mutable state of one run, advanced one batch at a time.
pub struct Trainer {
    cfg: ExperimentConfig,
    env: Env,
    weights: WeightStack,
    optimizer: OptimizerState,
    step: u64,
    average: RunningAverage,
}

impl Trainer {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        let (env, shape) = cfg.validate()?;
        let mut rng = RandomStream::derive(cfg.seed, &[INIT_KEY]);
        let weights = init_weights(&shape, cfg.init_scale, &mut rng)?;
        let optimizer = match cfg.optimizer.kind {
            OptimizerKind::Adam => OptimizerState::Adam(AdamState::new(&weights, cfg.optimizer.adam_hyper())),
            OptimizerKind::Sgd => OptimizerState::Sgd { lr: cfg.optimizer.lr },
        };
        let average = RunningAverage::new(cfg.window);
        Ok(Self {
            cfg,
            env,
            weights,
            optimizer,
            step: 0,
            average,
        })
    }

    pub fn resume(cfg: ExperimentConfig, ckpt: Checkpoint) -> Result<Self> {
        let (env, shape) = cfg.validate()?;
        ckpt.check_compatible(&cfg)?;
        if ckpt.weights.shape() != &shape {
            return Err(Error::Config("checkpoint weights do not match the network shape".into()));
        }
        let average = RunningAverage::with_values(cfg.window, &ckpt.recent_rewards);
        Ok(Self {
            cfg,
            env,
            weights: ckpt.weights,
            optimizer: ckpt.optimizer,
            step: ckpt.step,
            average,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn weights(&self) -> &WeightStack {
        &self.weights
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.cfg.steps()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.cfg.clone(),
            step: self.step,
            seed: self.cfg.seed,
            weights: self.weights.clone(),
            optimizer: self.optimizer.clone(),
            recent_rewards: self.average.values(),
        }
    }

    /// Batch-averaged raw update and mean reward at the current weights.
    /// Samples run in parallel but are summed in index order, so the result
    /// does not depend on thread count.
    fn batch_update(&self, step: u64) -> Result<(UpdateStack, f64)> {
        let w = &self.weights;
        let rule = &self.cfg.rule;
        let lr = self.cfg.optimizer.lr;
        let seed = self.cfg.seed;
        let per_sample = (0..self.cfg.batch_size as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomStream::derive(seed, &[step, i]);
                let x = self.env.sample_state(&mut rng);
                let trace = forward_sample(w, &x, &mut rng)?;
                let r = self.env.reward(&x, trace.action())?;
                Ok((rule.update(&trace, r, w, lr)?, r))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = UpdateStack::zeros_like(w);
        let mut reward = 0.0;
        for (u, r) in &per_sample {
            total.accumulate(1.0, u)?;
            reward += r;
        }
        let n = per_sample.len() as f64;
        Ok((total.scale(1.0 / n), reward / n))
    }

    pub fn advance(&mut self) -> Result<MetricsRow> {
        let step = self.step + 1;
        let (mean, batch_reward) = self.batch_update(step)?;
        let update = apply_regularization(&mean, &self.weights, &self.cfg.rule.reg_weights)?;
        match &mut self.optimizer {
            OptimizerState::Adam(state) => state.step(&mut self.weights, &update)?,
            OptimizerState::Sgd { lr } => sgd_step_in_place(&mut self.weights, &update, *lr)?,
        }
        if let Some(i) = self.weights.layers().iter().position(|m| !m.is_finite()) {
            return Err(Error::NonFinite { step, layer: i + 1 });
        }
        self.step = step;
        let running_avg = self.average.push(batch_reward);
        Ok(MetricsRow {
            step,
            samples: step * self.cfg.batch_size as u64,
            batch_reward,
            running_avg,
            wnorms: self.weights.norms(),
        })
    }

    /// Runs to the configured sample count, checkpointing on the way when
    /// asked. Metrics cover only the steps taken by this call.
    pub fn run(mut self) -> Result<RunOutcome> {
        let mut metrics = RunMetrics::new(self.weights.layers().len());
        while !self.is_done() {
            metrics.rows.push(self.advance()?);
            if let (Some(every), Some(path)) = (self.cfg.checkpoint_interval, &self.cfg.checkpoint_path) {
                if self.step.is_multiple_of(every) || self.is_done() {
                    self.checkpoint().save(path)?;
                }
            }
        }
        if let Some(path) = &self.cfg.output {
            metrics.write_csv(path)?;
        }
        Ok(RunOutcome {
            metrics,
            weights: self.weights,
        })
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    Trainer::new(cfg.clone())?.run()
}
