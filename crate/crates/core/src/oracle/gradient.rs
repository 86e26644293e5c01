use crate::envs::SingleStepEnv;
use crate::error::{Error, Result};
use crate::network::{with_bias, WeightStack};
use crate::numerics::{sigmoid, Mat};

use super::enumerate::{check_hidden, check_states, exact_expected_reward, for_each_config};
use super::EnumBudget;

/// Per-layer gradient matrices, shaped like the weights.
pub type GradStack = Vec<Mat>;

/// Central differences of [`exact_expected_reward`], one entry at a time.
pub fn finite_difference_gradient(
    w: &WeightStack,
    env: &dyn SingleStepEnv,
    h: f64,
    budget: &EnumBudget,
) -> Result<GradStack> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut probe = w.clone();
    let mut out = Vec::with_capacity(w.layers().len());
    for l in 1..=w.shape().layers() {
        let (rows, cols) = w.layer(l).shape();
        let mut g = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let orig = w.layer(l).get(i, j);
                probe.layer_mut(l).set(i, j, orig + h);
                let up = exact_expected_reward(&probe, env, budget)?;
                probe.layer_mut(l).set(i, j, orig - h);
                let down = exact_expected_reward(&probe, env, budget)?;
                probe.layer_mut(l).set(i, j, orig);
                g.set(i, j, (up - down) / (2.0 * h));
            }
        }
        out.push(g);
    }
    Ok(out)
}

/// One Richardson extrapolation of central differences at `h` and `h/2`;
/// truncation error is `O(h⁴)`.
pub fn richardson_gradient(
    w: &WeightStack,
    env: &dyn SingleStepEnv,
    h: f64,
    budget: &EnumBudget,
) -> Result<GradStack> {
    let coarse = finite_difference_gradient(w, env, h, budget)?;
    let fine = finite_difference_gradient(w, env, h / 2.0, budget)?;
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| {
            let mut r = f.scale(4.0);
            r.add_scaled(-1.0, c)?;
            Ok(r.scale(1.0 / 3.0))
        })
        .collect()
}

/// Which score function is averaged in [`analytic_gradient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreForm {
    /// `R ∇_{W^l} log Pr(A | X)`.
    Marginal,
    /// `R ∇_{W^l} log Pr(A | H^{l−1})`.
    LayerInput,
    /// `R ∇_{W^l} log Pr(H^l | H^{l−1})`.
    LayerLocal,
}

/// `∇_{W^l} log π_l(h_prev, h_l) = (h_prev)ᵀ((h_l + 1)/2 − σ(S^l))`, the
/// bias entry appended to `h_prev` when enabled.
fn layer_score(w: &WeightStack, l: usize, h_prev: &[f64], h_l: &[f64]) -> Result<Mat> {
    let s = w.pre_activation(l, h_prev)?;
    let col: Vec<f64> = h_l
        .iter()
        .zip(&s)
        .map(|(&h, &si)| (h + 1.0) / 2.0 - sigmoid(si))
        .collect();
    Ok(Mat::outer(&with_bias(h_prev, w.shape().bias()), &col))
}

/// For input `h_prev` to layer `l`: `Pr(A = a | H^{l−1})` and
/// `∇_{W^l} Pr(A = a | H^{l−1})` for `a = +1, −1`, by enumerating layers
/// `l … L − 1`.
fn conditional_from(
    w: &WeightStack,
    l: usize,
    h_prev: &[f64],
    budget: &EnumBudget,
) -> Result<[(f64, Mat); 2]> {
    let top = w.shape().layers();
    let (r, c) = w.layer(l).shape();
    let mut out = [(0.0, Mat::zeros(r, c)), (0.0, Mat::zeros(r, c))];
    if l == top {
        for (slot, a) in out.iter_mut().zip([1.0, -1.0]) {
            let s = w.pre_activation(top, h_prev)?[0];
            let p = sigmoid(a * s);
            slot.0 = p;
            slot.1 = layer_score(w, top, h_prev, &[a])?.scale(p);
        }
        return Ok(out);
    }
    for_each_config(w, l, top - 1, h_prev, budget, &mut |rows, log_p| {
        let s = w.pre_activation(top, rows.last().expect("hidden rows"))?[0];
        let score = layer_score(w, l, h_prev, &rows[0])?;
        for (slot, a) in out.iter_mut().zip([1.0, -1.0]) {
            let p = log_p.exp() * sigmoid(a * s);
            slot.0 += p;
            slot.1.add_scaled(p, &score)?;
        }
        Ok(())
    })?;
    Ok(out)
}

/// Exact expectation of one of the three score-function estimators, for every
/// layer. All three equal `∇E[R]`.
pub fn analytic_gradient(
    w: &WeightStack,
    env: &dyn SingleStepEnv,
    form: ScoreForm,
    budget: &EnumBudget,
) -> Result<GradStack> {
    let top = w.shape().layers();
    check_hidden(w.shape(), budget)?;
    let states = check_states(env, budget)?;
    let mut grads: GradStack = w.layers().iter().map(|m| Mat::zeros(m.rows(), m.cols())).collect();
    for (x, px) in &states {
        let rewards = [env.reward(x, 1.0)?, env.reward(x, -1.0)?];
        for l in 1..=top {
            let g = &mut grads[l - 1];
            match form {
                ScoreForm::LayerLocal => {
                    for_each_config(w, 1, top - 1, x, budget, &mut |rows, log_p| {
                        let input_of = |k: usize| if k == 1 { x.as_slice() } else { rows[k - 2].as_slice() };
                        let last = if top == 1 { x.as_slice() } else { rows[top - 2].as_slice() };
                        let s = w.pre_activation(top, last)?[0];
                        for (a, r) in [(1.0, rewards[0]), (-1.0, rewards[1])] {
                            let p = px * log_p.exp() * sigmoid(a * s);
                            let action = [a];
                            let h_l: &[f64] = if l == top { &action } else { &rows[l - 1] };
                            g.add_scaled(p * r, &layer_score(w, l, input_of(l), h_l)?)?;
                        }
                        Ok(())
                    })?;
                }
                ScoreForm::LayerInput => {
                    // Prefix H¹ … H^{l−1}, then the exact conditional of A given H^{l−1}.
                    for_each_config(w, 1, l - 1, x, budget, &mut |rows, log_p| {
                        let h_prev = rows.last().map_or(x.as_slice(), |r| r.as_slice());
                        let cond = conditional_from(w, l, h_prev, budget)?;
                        for ((pa, dpa), r) in cond.iter().zip(rewards) {
                            if *pa == 0.0 {
                                continue;
                            }
                            // weight Pr(h^{l−1}, a | x), estimator R ∇Pr/Pr
                            let joint = px * log_p.exp() * pa;
                            g.add_scaled(joint * r / pa, dpa)?;
                        }
                        Ok(())
                    })?;
                }
                ScoreForm::Marginal => {
                    let cond = conditional_from_state(w, l, x, budget)?;
                    for ((pa, dpa), r) in cond.iter().zip(rewards) {
                        if *pa == 0.0 {
                            continue;
                        }
                        g.add_scaled(px * pa * r / pa, dpa)?;
                    }
                }
            }
        }
    }
    Ok(grads)
}

/// `Pr(A = a | X)` and `∇_{W^l} Pr(A = a | X)`.
fn conditional_from_state(w: &WeightStack, l: usize, x: &[f64], budget: &EnumBudget) -> Result<[(f64, Mat); 2]> {
    let (r, c) = w.layer(l).shape();
    let mut out = [(0.0, Mat::zeros(r, c)), (0.0, Mat::zeros(r, c))];
    for_each_config(w, 1, l - 1, x, budget, &mut |rows, log_p| {
        let h_prev = rows.last().map_or(x, |r| r.as_slice());
        let cond = conditional_from(w, l, h_prev, budget)?;
        let p = log_p.exp();
        for (slot, (pa, dpa)) in out.iter_mut().zip(cond.iter()) {
            slot.0 += p * pa;
            slot.1.add_scaled(p, dpa)?;
        }
        Ok(())
    })?;
    Ok(out)
}
