//! Closed-form expansions of the Weight Maximization updates for one episode.
//! `∝`-equal to the rule outputs; the per-layer constant is not included.

use crate::error::Result;
use crate::network::{ForwardTrace, WeightStack};
use crate::numerics::{sigmoid, sigmoid_prime, Mat};
use crate::rules::UpdateStack;

/// `rA·(H^{l−1})ᵀ(D^l M^{l+1} ⋯ M^L)ᵀ` where `D^l` is diagonal with entries
/// `layer_factor(l, j)` and `M^k` is the unit rows of `W^k` with column `j`
/// scaled by `link_factor(k, j)`.
fn expand(
    trace: &ForwardTrace,
    w: &WeightStack,
    prefactor: f64,
    layer_factor: &dyn Fn(usize, usize) -> f64,
    link_factor: &dyn Fn(usize, usize) -> f64,
) -> Result<UpdateStack> {
    let top = trace.layers();
    let mut deltas = Vec::with_capacity(top);
    for l in 1..=top {
        let width = trace.h(l).len();
        let d: Vec<f64> = (0..width).map(|j| layer_factor(l, j)).collect();
        let mut chain = Mat::diag(&d);
        for k in l + 1..=top {
            let units = trace.h(k - 1).len();
            let cols = trace.h(k).len();
            let scale: Vec<f64> = (0..cols).map(|j| link_factor(k, j)).collect();
            let m = w.layer(k).top_rows(units).scale_columns(&scale)?;
            chain = chain.matmul(&m)?;
        }
        // chain is m^l × 1 for hidden layers and 1 × 1 at the top.
        let col = chain.transpose();
        deltas.push(Mat::outer(&trace.input_row(l), col.data()).scale(prefactor));
    }
    Ok(UpdateStack::new(deltas, None))
}

/// Expansion of Weight Maximization with REINFORCE:
/// `M^k = W^k ⊙ k σ(−H^k ⊙ S^k)`, `D^l = diag σ(−H^l ⊙ S^l)`.
pub fn lemma1_expansion(trace: &ForwardTrace, r: f64, w: &WeightStack) -> Result<UpdateStack> {
    let f = |k: usize, j: usize| sigmoid(-trace.h(k)[j] * trace.s(k)[j]);
    expand(trace, w, r * trace.action(), &f, &f)
}

/// Expansion shared by straight-through backprop and Weight Maximization with
/// direct gradient: prefactor `rA(1 − π(H^{L−1}, A))`, `D^l = diag σ'(S^l)`,
/// `M^k = W^k ⊙ k σ'(S^k)` for `k < L` and the plain `W^L` at the top.
pub fn lemma2_expansion(trace: &ForwardTrace, r: f64, w: &WeightStack) -> Result<UpdateStack> {
    let top = trace.layers();
    let a = trace.action();
    let pi = sigmoid(a * trace.s(top)[0]);
    let layer = |k: usize, j: usize| if k == top { 1.0 } else { sigmoid_prime(trace.s(k)[j]) };
    expand(trace, w, r * a * (1.0 - pi), &layer, &layer)
}
