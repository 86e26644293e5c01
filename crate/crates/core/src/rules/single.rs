//! Learning rules for a single Bernoulli logistic unit with `π_w(x, +1) =
//! σ(wᵀx)`. Each returns the raw update `Δw`; the learning rate is applied by
//! the optimizer.

use crate::error::{Error, Result};
use crate::numerics::{sigmoid, sigmoid_prime};

fn check(x: &[f64], w: &[f64], op: &'static str) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::Shape {
            op,
            left: (1, x.len()),
            right: (1, w.len()),
        });
    }
    Ok(x.iter().zip(w).map(|(a, b)| a * b).sum())
}

fn check_pm1(v: f64, what: &str) -> Result<()> {
    if v == 1.0 || v == -1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be ±1, got {v}")))
    }
}

fn scaled(x: &[f64], c: f64) -> Vec<f64> {
    x.iter().map(|&xi| c * xi).collect()
}

/// REINFORCE with baseline: `(r − b)(a − E[A|x]) x`.
pub fn reinforce_1(x: &[f64], a: f64, r: f64, b: f64, w: &[f64]) -> Result<Vec<f64>> {
    let s = check(x, w, "reinforce_1")?;
    check_pm1(a, "action")?;
    let expected = 2.0 * sigmoid(s) - 1.0;
    Ok(scaled(x, (r - b) * (a - expected)))
}

/// Supervised step toward the corrected action `A* = a·r`: `(a r − E[A|x]) x`.
pub fn classification_1(x: &[f64], a: f64, r: f64, w: &[f64]) -> Result<Vec<f64>> {
    let s = check(x, w, "classification_1")?;
    check_pm1(a, "action")?;
    check_pm1(r, "reward")?;
    let expected = 2.0 * sigmoid(s) - 1.0;
    Ok(scaled(x, a * r - expected))
}

/// Associative reward-penalty: full step toward `a` on reward, a `λ`-scaled
/// step toward `−a` on penalty.
pub fn arp_1(x: &[f64], a: f64, r: f64, w: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let s = check(x, w, "arp_1")?;
    check_pm1(a, "action")?;
    check_pm1(r, "reward")?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let expected = 2.0 * sigmoid(s) - 1.0;
    let c = if r > 0.0 {
        a - expected
    } else {
        lambda * (-a - expected)
    };
    Ok(scaled(x, c))
}

/// Uses the known reward function: `(r⁺ − r⁻) · 2σ'(wᵀx) · x`. Does not
/// depend on the sampled action.
pub fn direct_gradient_1(x: &[f64], r_plus: f64, r_minus: f64, w: &[f64]) -> Result<Vec<f64>> {
    let s = check(x, w, "direct_gradient_1")?;
    Ok(scaled(x, (r_plus - r_minus) * 2.0 * sigmoid_prime(s)))
}
