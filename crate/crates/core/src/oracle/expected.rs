use serde::Serialize;

use crate::envs::SingleStepEnv;
use crate::error::{Error, Result};
use crate::network::{init_weights, NetShape, WeightStack};
use crate::numerics::RandomStream;
use crate::rules::{RuleSpec, UpdateStack};

use super::compare::{cosine, lsq_residual, lsq_scale};
use super::enumerate::exact_expectation_of;
use super::gradient::{analytic_gradient, ScoreForm};
use super::EnumBudget;

/// Exact expected update `E[ΔW | π_W]` of a network rule over every state,
/// hidden configuration and action.
pub fn exact_expected_update(
    w: &WeightStack,
    env: &dyn SingleStepEnv,
    rule: &RuleSpec,
    budget: &EnumBudget,
) -> Result<UpdateStack> {
    rule.validate(w.shape().layers())?;
    exact_expectation_of(w, env, budget, &|trace, r| rule.update(trace, r, w, 0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingLayer {
    pub layer: usize,
    pub cosine: f64,
    pub scale: f64,
    pub residual: f64,
    pub residual_over_eps2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub layers: Vec<ScalingLayer>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Per layer: consecutive ratios of `residual/ε²` down the ε list.
    pub consecutive_ratios: Vec<Vec<f64>>,
    /// Per hidden layer: `max/min` of `residual/ε²` across the list.
    pub spread: Vec<f64>,
}

/// Fixes a random direction `U` (uniform on `[−1, 1]`), sets `W = εU` for
/// each `ε`, and fits `E[ΔW^l] ≈ c(ε)∇_{W^l}E[R]` by least squares.
pub fn theorem1_scaling_check(
    shape: &NetShape,
    env: &dyn SingleStepEnv,
    eps_list: &[f64],
    rule: &RuleSpec,
    seed: u64,
    budget: &EnumBudget,
) -> Result<ScalingReport> {
    if eps_list.is_empty() {
        return Err(Error::Domain("eps list is empty".into()));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Domain("every eps must be > 0; the ε = 0 report is degenerate".into()));
    }
    if eps_list.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::Domain("eps list must be strictly decreasing".into()));
    }
    let direction = init_weights(shape, 1.0, &mut RandomStream::new(seed))?;
    let layers = shape.layers();
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let w = direction.map_layers(|_, m| m.scale(eps))?;
        let expected = exact_expected_update(&w, env, rule, budget)?;
        let grad = analytic_gradient(&w, env, ScoreForm::LayerLocal, budget)?;
        let layer_rows = (1..=layers)
            .map(|l| {
                let e = expected.delta(l);
                let g = &grad[l - 1];
                let residual = lsq_residual(e, g);
                ScalingLayer {
                    layer: l,
                    cosine: cosine(e, g),
                    scale: lsq_scale(e, g),
                    residual,
                    residual_over_eps2: residual / (eps * eps),
                }
            })
            .collect();
        rows.push(ScalingRow {
            eps,
            layers: layer_rows,
        });
    }
    let per_layer = |l: usize| -> Vec<f64> { rows.iter().map(|r| r.layers[l].residual_over_eps2).collect() };
    let consecutive_ratios = (0..layers)
        .map(|l| per_layer(l).windows(2).map(|p| p[0] / p[1]).collect())
        .collect();
    let spread = (0..layers - 1)
        .map(|l| {
            let v = per_layer(l);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            hi / lo
        })
        .collect();
    Ok(ScalingReport {
        rows,
        consecutive_ratios,
        spread,
    })
}
