use crate::error::{Error, Result};
use crate::network::{ForwardTrace, WeightStack};
use crate::numerics::{sigmoid, sigmoid_prime, Mat};

use super::{RewardTiming, UpdateStack};

/// How a hidden unit turns its reward `R^l_j` into a per-unit update signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HiddenRule {
    /// `R_j (H_j − E[H_j])`.
    Reinforce,
    /// `2 R_j H_j σ'(S_j)`.
    Direct,
    /// `|R_j| (sgn(R_j) H_j − E[H_j])`, or with `2E[A|H^{L−1}]` subtracted
    /// when `printed` is set.
    Classification { printed: bool },
    /// `(1 − λ)·Reinforce + λ·Classification`.
    Mixture { lambda: f64, printed: bool },
}

/// Source of the hidden layer rewards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HiddenSignal {
    /// `R^l` from the change in outgoing weight norm.
    LayerReward,
    /// Every hidden unit receives the same scalar.
    Scalar(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub baseline: f64,
    pub hidden: HiddenRule,
    pub signal: HiddenSignal,
    pub timing: RewardTiming,
    pub step_size: f64,
}

impl SweepOptions {
    pub fn new(hidden: HiddenRule) -> Self {
        Self {
            baseline: 0.0,
            hidden,
            signal: HiddenSignal::LayerReward,
            timing: RewardTiming::PreUpdate,
            step_size: 0.0,
        }
    }
}

/// `R^l_j = 2 Σ_c ΔW_{j,c} W_{j,c}` for the first `units` rows. The bias row,
/// when present, is last and does not belong to a unit.
pub fn layer_reward(dw_next: &Mat, w_next: &Mat, units: usize) -> Result<Vec<f64>> {
    if dw_next.shape() != w_next.shape() {
        return Err(Error::Shape {
            op: "layer_reward",
            left: dw_next.shape(),
            right: w_next.shape(),
        });
    }
    if units > w_next.rows() {
        return Err(Error::Shape {
            op: "layer_reward",
            left: (units, w_next.cols()),
            right: w_next.shape(),
        });
    }
    Ok((0..units)
        .map(|j| {
            2.0 * dw_next
                .row(j)
                .iter()
                .zip(w_next.row(j))
                .map(|(d, w)| d * w)
                .sum::<f64>()
        })
        .collect())
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(r − b)(A − E[A|H^{L−1}])` times the output layer's input row.
fn output_update(trace: &ForwardTrace, r: f64, baseline: f64) -> Mat {
    let top = trace.layers();
    let signal = (r - baseline) * (trace.action() - trace.expectation(top)[0]);
    Mat::outer(&trace.input_row(top), &[signal])
}

fn hidden_signal(rule: HiddenRule, trace: &ForwardTrace, l: usize, reward: &[f64]) -> Vec<f64> {
    let h = trace.h(l);
    let e = trace.expectation(l);
    let output_expectation = trace.expectation(trace.layers())[0];
    let classification = |printed: bool| -> Vec<f64> {
        reward
            .iter()
            .zip(h)
            .zip(&e)
            .map(|((&rj, &hj), &ej)| {
                let sub = if printed { 2.0 * output_expectation } else { ej };
                rj.abs() * (sgn(rj) * hj - sub)
            })
            .collect()
    };
    match rule {
        HiddenRule::Reinforce => reward
            .iter()
            .zip(h)
            .zip(&e)
            .map(|((&rj, &hj), &ej)| rj * (hj - ej))
            .collect(),
        HiddenRule::Direct => reward
            .iter()
            .zip(h)
            .zip(trace.s(l))
            .map(|((&rj, &hj), &sj)| 2.0 * rj * hj * sigmoid_prime(sj))
            .collect(),
        HiddenRule::Classification { printed } => classification(printed),
        HiddenRule::Mixture { lambda, printed } => {
            let rf = hidden_signal(HiddenRule::Reinforce, trace, l, reward);
            rf.iter()
                .zip(classification(printed))
                .map(|(a, c)| (1.0 - lambda) * a + lambda * c)
                .collect()
        }
    }
}

/// Backward sweep shared by the Weight Maximization rules: the output layer
/// takes the REINFORCE update, then each hidden layer from `L − 1` down to 1
/// derives its reward from the raw update of the layer above and applies
/// `opts.hidden`. Nothing is written back to `w`.
pub fn wm_sweep(trace: &ForwardTrace, r: f64, w: &WeightStack, opts: &SweepOptions) -> Result<UpdateStack> {
    let top = trace.layers();
    if top != w.shape().layers() {
        return Err(Error::Config(format!(
            "trace has {top} layers, weights have {}",
            w.shape().layers()
        )));
    }
    let mut deltas = vec![Mat::zeros(0, 0); top];
    let mut rewards = vec![Vec::new(); top - 1];
    deltas[top - 1] = output_update(trace, r, opts.baseline);
    for l in (1..top).rev() {
        let units = trace.h(l).len();
        let reward = match opts.signal {
            HiddenSignal::Scalar(v) => vec![v; units],
            HiddenSignal::LayerReward => {
                let dw_next = &deltas[l];
                match opts.timing {
                    RewardTiming::PreUpdate => layer_reward(dw_next, w.layer(l + 1), units)?,
                    RewardTiming::PostUpdate => {
                        let mut post = w.layer(l + 1).clone();
                        post.add_scaled(opts.step_size, dw_next)?;
                        layer_reward(dw_next, &post, units)?
                    }
                }
            }
        };
        let signal = hidden_signal(opts.hidden, trace, l, &reward);
        deltas[l - 1] = Mat::outer(&trace.input_row(l), &signal);
        rewards[l - 1] = reward;
    }
    Ok(UpdateStack::new(deltas, Some(rewards)))
}

/// REINFORCE on every unit with the shared reward: `ΔW^l = (H^{l−1})ᵀ((r − b)(H^l − E[H^l|H^{l−1}]))`.
pub fn global_reinforce(trace: &ForwardTrace, r: f64, _w: &WeightStack, baseline: f64) -> Result<UpdateStack> {
    let deltas = (1..=trace.layers())
        .map(|l| {
            let signal: Vec<f64> = trace
                .h(l)
                .iter()
                .zip(trace.expectation(l))
                .map(|(&h, e)| (r - baseline) * (h - e))
                .collect();
            Mat::outer(&trace.input_row(l), &signal)
        })
        .collect();
    Ok(UpdateStack::new(deltas, None))
}

/// Weight Maximization with REINFORCE hidden units.
pub fn wm_reinforce(trace: &ForwardTrace, r: f64, w: &WeightStack) -> Result<UpdateStack> {
    wm_sweep(trace, r, w, &SweepOptions::new(HiddenRule::Reinforce))
}

/// Weight Maximization with direct-gradient hidden units.
pub fn wm_direct(trace: &ForwardTrace, r: f64, w: &WeightStack) -> Result<UpdateStack> {
    wm_sweep(trace, r, w, &SweepOptions::new(HiddenRule::Direct))
}

/// Weight Maximization with hidden units trained as `|R^l|`-weighted classifiers.
pub fn wm_classification(trace: &ForwardTrace, r: f64, w: &WeightStack) -> Result<UpdateStack> {
    wm_sweep(
        trace,
        r,
        w,
        &SweepOptions::new(HiddenRule::Classification { printed: false }),
    )
}

/// REINFORCE at the output, straight-through backprop below it.
///
/// With `g = (r − b)·A·(1 − π(H^{L−1}, A))`, the output update is `g·(H^{L−1})ᵀ`
/// and the error is carried down through the unit rows of each `W^{l+1}`,
/// scaled by `σ'(S^l)` at every hidden layer.
pub fn ste_backprop(trace: &ForwardTrace, r: f64, w: &WeightStack, baseline: f64) -> Result<UpdateStack> {
    let top = trace.layers();
    let a = trace.action();
    let pi = sigmoid(a * trace.s(top)[0]);
    let mut delta = vec![(r - baseline) * a * (1.0 - pi)];
    let mut deltas = vec![Mat::zeros(0, 0); top];
    deltas[top - 1] = Mat::outer(&trace.input_row(top), &delta);
    for l in (1..top).rev() {
        let w_next = w.layer(l + 1);
        delta = trace
            .s(l)
            .iter()
            .enumerate()
            .map(|(j, &sj)| {
                let back: f64 = w_next.row(j).iter().zip(&delta).map(|(wv, d)| wv * d).sum();
                back * sigmoid_prime(sj)
            })
            .collect();
        deltas[l - 1] = Mat::outer(&trace.input_row(l), &delta);
    }
    Ok(UpdateStack::new(deltas, None))
}

/// Folds L2 regularization into the updates: `ΔW^l − 2β_l W^l`. Bias rows
/// are regularized like the others.
pub fn apply_regularization(updates: &UpdateStack, w: &WeightStack, beta: &[f64]) -> Result<UpdateStack> {
    if !beta.is_empty() && beta.len() != updates.layers() {
        return Err(Error::Config(format!(
            "expected {} regularization weights, got {}",
            updates.layers(),
            beta.len()
        )));
    }
    if beta.iter().any(|&b| b < 0.0) {
        return Err(Error::Domain("regularization weights must be >= 0".into()));
    }
    updates.map_deltas(|l, d| {
        let b = beta.get(l - 1).copied().unwrap_or(0.0);
        let mut reg = d.clone();
        if b != 0.0 {
            reg.add_scaled(-2.0 * b, w.layer(l))?;
        }
        Ok(reg)
    })
}
