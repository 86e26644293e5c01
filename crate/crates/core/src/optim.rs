//! Optimizers. Both ascend: updates already point uphill on expected reward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::WeightStack;
use crate::numerics::Mat;
use crate::rules::UpdateStack;

fn check_depth(w: &WeightStack, updates: &UpdateStack) -> Result<()> {
    if w.layers().len() != updates.layers() {
        return Err(Error::Config(format!(
            "weights have {} layers, updates have {}",
            w.layers().len(),
            updates.layers()
        )));
    }
    Ok(())
}

/// `W^l + α ΔW^l` for every layer.
pub fn sgd_step(w: &WeightStack, updates: &UpdateStack, alpha: f64) -> Result<WeightStack> {
    let mut out = w.clone();
    sgd_step_in_place(&mut out, updates, alpha)?;
    Ok(out)
}

pub fn sgd_step_in_place(w: &mut WeightStack, updates: &UpdateStack, alpha: f64) -> Result<()> {
    check_depth(w, updates)?;
    for (wl, d) in w.layers_mut().iter_mut().zip(updates.deltas()) {
        wl.add_scaled(alpha, d)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam moments for one run. Serialized with checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub hyper: AdamHyper,
    pub t: u64,
    m: Vec<Mat>,
    v: Vec<Mat>,
}

impl AdamState {
    pub fn new(w: &WeightStack, hyper: AdamHyper) -> Self {
        let zeros: Vec<Mat> = w.layers().iter().map(|m| Mat::zeros(m.rows(), m.cols())).collect();
        Self {
            hyper,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn first_moment(&self) -> &[Mat] {
        &self.m
    }

    pub fn second_moment(&self) -> &[Mat] {
        &self.v
    }

    /// One bias-corrected Adam ascent step, treating `updates` as the gradient.
    pub fn step(&mut self, w: &mut WeightStack, updates: &UpdateStack) -> Result<()> {
        check_depth(w, updates)?;
        if self.m.len() != updates.layers() {
            return Err(Error::Config("adam state depth does not match updates".into()));
        }
        for ((m, v), (wl, g)) in self
            .m
            .iter()
            .zip(&self.v)
            .zip(w.layers().iter().zip(updates.deltas()))
        {
            if m.shape() != g.shape() || v.shape() != g.shape() || wl.shape() != g.shape() {
                return Err(Error::Shape {
                    op: "adam_step",
                    left: m.shape(),
                    right: g.shape(),
                });
            }
        }
        let AdamHyper { lr, beta1, beta2, eps } = self.hyper;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for ((m, v), (wl, g)) in self
            .m
            .iter_mut()
            .zip(self.v.iter_mut())
            .zip(w.layers_mut().iter_mut().zip(updates.deltas()))
        {
            for (((mi, vi), wi), &gi) in m
                .data_mut()
                .iter_mut()
                .zip(v.data_mut().iter_mut())
                .zip(wl.data_mut().iter_mut())
                .zip(g.data())
            {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *wi += lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(state: &AdamState, w: &WeightStack, updates: &UpdateStack) -> Result<(WeightStack, AdamState)> {
    let mut s = state.clone();
    let mut out = w.clone();
    s.step(&mut out, updates)?;
    Ok((out, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_weights, NetShape};
    use crate::numerics::RandomStream;
    use proptest::prelude::*;

    fn setup(seed: u64) -> WeightStack {
        let shape = NetShape::new(3, vec![4], true).unwrap();
        init_weights(&shape, 0.5, &mut RandomStream::new(seed)).unwrap()
    }

    fn updates_from(w: &WeightStack, f: impl Fn(f64) -> f64) -> UpdateStack {
        UpdateStack::new(w.layers().iter().map(|m| m.map(&f)).collect(), None)
    }

    #[test]
    fn sgd_cases() {
        let w = setup(1);
        let u = updates_from(&w, |x| x * 3.0 + 1.0);
        assert_eq!(sgd_step(&w, &u, 0.0).unwrap(), w);
        let neg = updates_from(&w, |x| -x);
        let z = sgd_step(&w, &neg, 1.0).unwrap();
        assert!(z.max_abs() == 0.0);
        let twice = sgd_step(&sgd_step(&w, &u, 0.1).unwrap(), &u, 0.1).unwrap();
        let once = sgd_step(&w, &u.scale(2.0), 0.1).unwrap();
        for (a, b) in twice.layers().iter().zip(once.layers()) {
            assert!(a.sub(b).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        let w = setup(2);
        let g = updates_from(&w, |x| if x >= 0.0 { 0.3 } else { -2.0 });
        let state = AdamState::new(&w, AdamHyper::default());
        let (w1, s1) = adam_step(&state, &w, &g).unwrap();
        assert_eq!(s1.t, 1);
        for ((a, b), gl) in w1.layers().iter().zip(w.layers()).zip(g.deltas()) {
            for ((x, y), gi) in a.data().iter().zip(b.data()).zip(gl.data()) {
                assert!((x - y - 0.01 * gi.signum()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn adam_zero_updates_keep_weights() {
        let w = setup(3);
        let zero = UpdateStack::zeros_like(&w);
        let mut state = AdamState::new(&w, AdamHyper::default());
        let mut cur = w.clone();
        for _ in 0..50 {
            state.step(&mut cur, &zero).unwrap();
        }
        assert_eq!(cur, w);
    }

    #[test]
    fn adam_hyper_from_json() {
        let h: AdamHyper = serde_json::from_str(r#"{"lr":0.01,"beta1":0.9,"beta2":0.999,"eps":1e-8}"#).unwrap();
        assert_eq!(h, AdamHyper::default());
    }

    #[test]
    fn adam_rejects_mismatched_shapes() {
        let w = setup(4);
        let other = init_weights(&NetShape::new(2, vec![4], true).unwrap(), 0.1, &mut RandomStream::new(1)).unwrap();
        let state = AdamState::new(&other, AdamHyper::default());
        assert!(adam_step(&state, &w, &UpdateStack::zeros_like(&w)).is_err());
    }

    proptest! {
        #[test]
        fn adam_step_bounded_and_finite(seed in 0u64..500, scale in 0.001f64..100.0) {
            let w = setup(seed);
            let mut rng = RandomStream::new(seed ^ 0xAB);
            let mut state = AdamState::new(&w, AdamHyper::default());
            let mut cur = w.clone();
            for _ in 0..20 {
                let deltas = w
                    .layers()
                    .iter()
                    .map(|m| {
                        let data = (0..m.data().len()).map(|_| scale * rng.uniform(-1.0, 1.0)).collect();
                        Mat::new(m.rows(), m.cols(), data).unwrap()
                    })
                    .collect();
                let g = UpdateStack::new(deltas, None);
                let before = cur.clone();
                state.step(&mut cur, &g).unwrap();
                for (a, b) in cur.layers().iter().zip(before.layers()) {
                    prop_assert!(a.is_finite());
                    // |Δ| <= α(1−β1)/√(1−β2) ≈ 3.1623α when 1−β1 > √(1−β2).
                    prop_assert!(a.sub(b).unwrap().max_abs() <= 0.01 * 3.1623);
                }
            }
        }
    }
}
