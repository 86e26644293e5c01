use crate::envs::SingleStepEnv;
use crate::error::{Error, Result};
use crate::network::{ForwardTrace, NetShape, WeightStack};
use crate::numerics::{log_sigmoid, sigmoid};
use crate::rules::UpdateStack;

use super::EnumBudget;

/// Layers `first..=last` of a network, all their `±1` configurations in
/// binary counting order, starting from input `h_prev`. `f` receives the
/// configuration rows and their joint log-probability given `h_prev`. When
/// `first > last` it is called once with no rows and log-probability 0.
pub(crate) fn for_each_config(
    w: &WeightStack,
    first: usize,
    last: usize,
    h_prev: &[f64],
    budget: &EnumBudget,
    f: &mut dyn FnMut(&[Vec<f64>], f64) -> Result<()>,
) -> Result<()> {
    if first > last {
        return f(&[], 0.0);
    }
    let shape = w.shape();
    let widths: Vec<usize> = (first..=last).map(|l| shape.units(l)).collect();
    let bits: usize = widths.iter().sum();
    if bits > budget.max_total_hidden_bits {
        return Err(Error::Budget(format!(
            "{bits} hidden bits exceed the limit of {}",
            budget.max_total_hidden_bits
        )));
    }
    let mut rows: Vec<Vec<f64>> = widths.iter().map(|&m| vec![0.0; m]).collect();
    for code in 0..1u64 << bits {
        let mut offset = 0;
        let mut log_p = 0.0;
        for (i, l) in (first..=last).enumerate() {
            for (j, h) in rows[i].iter_mut().enumerate() {
                *h = if code >> (offset + j) & 1 == 1 { 1.0 } else { -1.0 };
            }
            offset += widths[i];
            let input = if i == 0 { h_prev } else { &rows[i - 1] };
            let s = w.pre_activation(l, input)?;
            log_p += s.iter().zip(&rows[i]).map(|(&si, &hi)| log_sigmoid(hi * si)).sum::<f64>();
        }
        f(&rows, log_p)?;
    }
    Ok(())
}

pub(crate) fn check_states(env: &dyn SingleStepEnv, budget: &EnumBudget) -> Result<Vec<(Vec<f64>, f64)>> {
    let count = env
        .state_count()
        .ok_or_else(|| Error::Budget("environment state space is not finite".into()))?;
    if count > budget.max_states as u64 {
        return Err(Error::Budget(format!(
            "{count} states exceed the limit of {}",
            budget.max_states
        )));
    }
    env.enumerate_states()
        .ok_or_else(|| Error::Budget("environment cannot enumerate its states".into()))
}

pub(crate) fn check_hidden(shape: &NetShape, budget: &EnumBudget) -> Result<()> {
    let bits = shape.total_hidden_units();
    if bits > budget.max_total_hidden_bits {
        return Err(Error::Budget(format!(
            "{bits} hidden bits exceed the limit of {}",
            budget.max_total_hidden_bits
        )));
    }
    Ok(())
}

/// `Pr(A = +1 | x)`, summing the product of layer probabilities over every
/// hidden configuration.
pub fn exact_action_prob(w: &WeightStack, x: &[f64], budget: &EnumBudget) -> Result<f64> {
    let top = w.shape().layers();
    check_hidden(w.shape(), budget)?;
    let mut total = 0.0;
    for_each_config(w, 1, top - 1, x, budget, &mut |rows, log_p| {
        let last = rows.last().map_or(x, |r| r.as_slice());
        let s = w.pre_activation(top, last)?[0];
        total += log_p.exp() * sigmoid(s);
        Ok(())
    })?;
    Ok(total)
}

/// `Σ_x d₀(x) Σ_a Pr(a|x) R(x, a)`.
pub fn exact_expected_reward(w: &WeightStack, env: &dyn SingleStepEnv, budget: &EnumBudget) -> Result<f64> {
    let states = check_states(env, budget)?;
    let mut total = 0.0;
    for (x, px) in &states {
        let p_plus = exact_action_prob(w, x, budget)?;
        total += px * (p_plus * env.reward(x, 1.0)? + (1.0 - p_plus) * env.reward(x, -1.0)?);
    }
    Ok(total)
}

/// Calls `f(trace, reward, probability)` for every state, hidden configuration
/// and action, with the joint probability of that episode.
pub fn for_each_episode(
    w: &WeightStack,
    env: &dyn SingleStepEnv,
    budget: &EnumBudget,
    f: &mut dyn FnMut(&ForwardTrace, f64, f64) -> Result<()>,
) -> Result<()> {
    let top = w.shape().layers();
    check_hidden(w.shape(), budget)?;
    let states = check_states(env, budget)?;
    for (x, px) in &states {
        let rewards = [env.reward(x, 1.0)?, env.reward(x, -1.0)?];
        for_each_config(w, 1, top - 1, x, budget, &mut |rows, log_p| {
            let p_hidden = px * log_p.exp();
            for (a, r) in [(1.0, rewards[0]), (-1.0, rewards[1])] {
                let mut acts = Vec::with_capacity(top + 1);
                acts.push(x.clone());
                acts.extend(rows.iter().cloned());
                acts.push(vec![a]);
                let trace = ForwardTrace::from_activations(w, acts)?;
                let pa = sigmoid(a * trace.s(top)[0]);
                f(&trace, r, p_hidden * pa)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Exact `E[ΔW]` of an arbitrary per-episode rule.
pub fn exact_expectation_of(
    w: &WeightStack,
    env: &dyn SingleStepEnv,
    budget: &EnumBudget,
    rule: &dyn Fn(&ForwardTrace, f64) -> Result<UpdateStack>,
) -> Result<UpdateStack> {
    let mut acc = UpdateStack::zeros_like(w);
    for_each_episode(w, env, budget, &mut |trace, r, p| {
        let u = rule(trace, r)?;
        acc.accumulate(p, &u)
    })?;
    Ok(acc)
}
