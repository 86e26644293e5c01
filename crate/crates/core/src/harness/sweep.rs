use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::metrics::RunMetrics;
use super::train::run_experiment;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config: String,
    pub step: u64,
    pub samples: u64,
    pub mean: f64,
    /// Population standard deviation across seeds.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub config: String,
    pub seed: u64,
    pub metrics: RunMetrics,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub runs: Vec<SeedRun>,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,step,samples,mean_running_avg,std_running_avg\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.config, r.step, r.samples, r.mean, r.std).expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Final running averages of every seed of `config`, in seed order.
    pub fn finals(&self, config: &str) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.config == config)
            .filter_map(|r| r.metrics.final_running_avg())
            .collect()
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn label(cfg: &ExperimentConfig, index: usize) -> String {
    if cfg.name.is_empty() {
        format!("config{index}")
    } else {
        cfg.name.clone()
    }
}

/// Runs every config under every seed, in parallel, and aggregates the
/// running-average curves step by step. Per-run output and checkpoint paths
/// are cleared so runs cannot clobber each other.
pub fn run_matrix(configs: &[ExperimentConfig], seeds: &[u64]) -> Result<Summary> {
    if seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one seed".into()));
    }
    let jobs: Vec<(String, ExperimentConfig)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, cfg)| {
            seeds.iter().map(move |&seed| {
                let mut c = cfg.clone();
                c.seed = seed;
                c.output = None;
                c.checkpoint_interval = None;
                c.checkpoint_path = None;
                (label(cfg, i), c)
            })
        })
        .collect();
    let runs = jobs
        .into_par_iter()
        .map(|(name, cfg)| {
            let out = run_experiment(&cfg)?;
            Ok(SeedRun {
                config: name,
                seed: cfg.seed,
                metrics: out.metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let name = label(cfg, i);
        let group: Vec<&SeedRun> = runs.iter().filter(|r| r.config == name).collect();
        let steps = group.first().map_or(0, |r| r.metrics.rows.len());
        for k in 0..steps {
            let vals: Vec<f64> = group.iter().map(|r| r.metrics.rows[k].running_avg).collect();
            let (mean, std) = mean_std(&vals);
            let base = &group[0].metrics.rows[k];
            rows.push(SummaryRow {
                config: name.clone(),
                step: base.step,
                samples: base.samples,
                mean,
                std,
            });
        }
    }
    Ok(Summary { runs, rows })
}
