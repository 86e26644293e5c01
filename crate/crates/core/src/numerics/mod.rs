//! Dense matrix algebra, logistic functions and the seeded random stream.

mod mat;
mod rng;

pub use mat::Mat;
pub use rng::RandomStream;

use crate::error::{Error, Result};

/// Logistic function, evaluated in the sign-split form so neither branch
/// exponentiates a large positive number.
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `σ(s)(1 − σ(s))`, computed as `σ(s)σ(−s)` to avoid cancellation.
pub fn sigmoid_prime(s: f64) -> f64 {
    sigmoid(s) * sigmoid(-s)
}

/// `log σ(s)` without forming `σ(s)` first.
pub fn log_sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        -(-s).exp().ln_1p()
    } else {
        s - s.exp().ln_1p()
    }
}

/// Draws `+1` with probability `p`, `−1` otherwise. Consumes one draw.
pub fn bernoulli_pm1(p: f64, rng: &mut RandomStream) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("bernoulli probability {p} outside [0, 1]")));
    }
    Ok(if rng.next_f64() < p { 1.0 } else { -1.0 })
}
