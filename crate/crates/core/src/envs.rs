//! Single-step environments: a state is drawn, one `±1` action is taken and
//! a reward comes back.
//!
//! States use bipolar `±1` bits throughout.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RandomStream;

pub trait SingleStepEnv: Send + Sync {
    fn state_dim(&self) -> usize;

    fn sample_state(&self, rng: &mut RandomStream) -> Vec<f64>;

    /// Reward function `R(x, a)`.
    fn reward(&self, state: &[f64], action: f64) -> Result<f64>;

    /// Number of distinct states when the state space is finite.
    fn state_count(&self) -> Option<u64>;

    /// All states with their initial probabilities.
    fn enumerate_states(&self) -> Option<Vec<(Vec<f64>, f64)>>;
}

fn check_action(action: f64) -> Result<()> {
    if action == 1.0 || action == -1.0 {
        Ok(())
    } else {
        Err(Error::Env(format!("action must be ±1, got {action}")))
    }
}

/// k-bit multiplexer: `k` address bits (bit 0 most significant, `−1 ↦ 0`,
/// `+1 ↦ 1`) select one of `2^k` data bits; the desired action is that bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Multiplexer {
    k: usize,
}

impl Multiplexer {
    pub fn new(k: usize) -> Result<Self> {
        if !(1..=20).contains(&k) {
            return Err(Error::Config(format!("multiplexer needs 1 <= k <= 20, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `k + 2^k`.
    pub fn state_dim(&self) -> usize {
        self.k + (1 << self.k)
    }

    /// The data bit selected by the address bits.
    pub fn desired(&self, state: &[f64]) -> Result<f64> {
        if state.len() != self.state_dim() {
            return Err(Error::Env(format!(
                "multiplexer k={} expects {} inputs, got {}",
                self.k,
                self.state_dim(),
                state.len()
            )));
        }
        if state.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::Env("multiplexer inputs must be ±1".into()));
        }
        let address = state[..self.k]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b > 0.0));
        Ok(state[self.k + address])
    }
}

pub fn mux_sample_state(k: usize, rng: &mut RandomStream) -> Vec<f64> {
    (0..k + (1 << k)).map(|_| rng.sign()).collect()
}

pub fn mux_reward(k: usize, state: &[f64], action: f64) -> Result<f64> {
    check_action(action)?;
    let desired = Multiplexer::new(k)?.desired(state)?;
    Ok(if action == desired { 1.0 } else { -1.0 })
}

/// All `2^n` bipolar vectors of length `n`, in binary counting order with the
/// first entry most significant.
pub fn all_bipolar(n: usize) -> Vec<Vec<f64>> {
    (0..1u64 << n)
        .map(|code| {
            (0..n)
                .map(|i| if code >> (n - 1 - i) & 1 == 1 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect()
}

impl SingleStepEnv for Multiplexer {
    fn state_dim(&self) -> usize {
        Multiplexer::state_dim(self)
    }

    fn sample_state(&self, rng: &mut RandomStream) -> Vec<f64> {
        mux_sample_state(self.k, rng)
    }

    fn reward(&self, state: &[f64], action: f64) -> Result<f64> {
        mux_reward(self.k, state, action)
    }

    fn state_count(&self) -> Option<u64> {
        let n = self.state_dim();
        (n < 64).then(|| 1u64 << n)
    }

    fn enumerate_states(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        let n = self.state_dim();
        if n > 24 {
            return None;
        }
        let p = 1.0 / (1u64 << n) as f64;
        Some(all_bipolar(n).into_iter().map(|s| (s, p)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRow {
    pub state: Vec<f64>,
    pub prob: f64,
    pub r_plus: f64,
    pub r_minus: f64,
}

/// Finite environment given by an explicit table of states, initial
/// probabilities and reward function values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyEnv {
    rows: Vec<ToyRow>,
}

impl ToyEnv {
    pub fn new(rows: Vec<ToyRow>) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.state.len())
            .ok_or_else(|| Error::Config("toy table has no rows".into()))?;
        if rows.iter().any(|r| r.state.len() != dim) {
            return Err(Error::Config("toy table states differ in dimension".into()));
        }
        if rows.iter().any(|r| !(r.prob >= 0.0) || !r.r_plus.is_finite() || !r.r_minus.is_finite()) {
            return Err(Error::Config("toy table needs prob >= 0 and finite rewards".into()));
        }
        let total: f64 = rows.iter().map(|r| r.prob).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("toy table probabilities sum to {total}, not 1")));
        }
        Ok(Self { rows })
    }

    /// Equiprobable states with rewards given by `f(state) = (r⁺, r⁻)`.
    pub fn uniform(states: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> (f64, f64)) -> Result<Self> {
        let p = 1.0 / states.len() as f64;
        let rows = states
            .into_iter()
            .map(|state| {
                let (r_plus, r_minus) = f(&state);
                ToyRow {
                    state,
                    prob: p,
                    r_plus,
                    r_minus,
                }
            })
            .collect();
        Self::new(rows)
    }

    /// Both-bits XOR on bipolar inputs: `+1` is rewarded when the bits differ.
    pub fn xor2() -> Self {
        Self::uniform(all_bipolar(2), |s| {
            let target = -s[0] * s[1];
            (target, -target)
        })
        .expect("xor table is valid")
    }

    pub fn rows(&self) -> &[ToyRow] {
        &self.rows
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Table {
            Wrapped { rows: Vec<ToyRow> },
            Bare(Vec<ToyRow>),
        }
        let rows = match serde_json::from_str(text)? {
            Table::Wrapped { rows } | Table::Bare(rows) => rows,
        };
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Builds a toy environment from a table. Probabilities must sum to one.
pub fn toy_env(table: Vec<ToyRow>) -> Result<ToyEnv> {
    ToyEnv::new(table)
}

impl SingleStepEnv for ToyEnv {
    fn state_dim(&self) -> usize {
        self.rows[0].state.len()
    }

    fn sample_state(&self, rng: &mut RandomStream) -> Vec<f64> {
        let u = rng.next_f64();
        let mut acc = 0.0;
        for row in &self.rows {
            acc += row.prob;
            if u < acc {
                return row.state.clone();
            }
        }
        self.rows
            .iter()
            .rev()
            .find(|r| r.prob > 0.0)
            .unwrap_or(&self.rows[0])
            .state
            .clone()
    }

    fn reward(&self, state: &[f64], action: f64) -> Result<f64> {
        check_action(action)?;
        let row = self
            .rows
            .iter()
            .find(|r| r.state == state)
            .ok_or_else(|| Error::Env(format!("state {state:?} not in toy table")))?;
        Ok(if action > 0.0 { row.r_plus } else { row.r_minus })
    }

    fn state_count(&self) -> Option<u64> {
        Some(self.rows.len() as u64)
    }

    fn enumerate_states(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        Some(self.rows.iter().map(|r| (r.state.clone(), r.prob)).collect())
    }
}

/// Environment selected by a config string: `mux:k=<k>` or `toy:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum Env {
    Mux(Multiplexer),
    Toy(ToyEnv),
}

impl Env {
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("mux:") {
            let k = rest
                .strip_prefix("k=")
                .and_then(|v| v.trim().parse::<usize>().ok())
                .ok_or_else(|| Error::Config(format!("bad multiplexer spec {spec:?}, want mux:k=<int>")))?;
            Ok(Env::Mux(Multiplexer::new(k)?))
        } else if let Some(path) = spec.strip_prefix("toy:") {
            Ok(Env::Toy(ToyEnv::load(Path::new(path))?))
        } else {
            Err(Error::Config(format!("unknown environment {spec:?}")))
        }
    }

    fn inner(&self) -> &dyn SingleStepEnv {
        match self {
            Env::Mux(m) => m,
            Env::Toy(t) => t,
        }
    }
}

impl SingleStepEnv for Env {
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }

    fn sample_state(&self, rng: &mut RandomStream) -> Vec<f64> {
        self.inner().sample_state(rng)
    }

    fn reward(&self, state: &[f64], action: f64) -> Result<f64> {
        self.inner().reward(state, action)
    }

    fn state_count(&self) -> Option<u64> {
        self.inner().state_count()
    }

    fn enumerate_states(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        self.inner().enumerate_states()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(Multiplexer::new(5).unwrap().state_dim(), 37);
        assert_eq!(mux_sample_state(5, &mut RandomStream::new(0)).len(), 37);
        assert_eq!(mux_sample_state(1, &mut RandomStream::new(0)).len(), 3);
        assert!(Multiplexer::new(0).is_err());
    }

    #[test]
    fn bit_means_are_balanced() {
        // Standard error per bit is 1/sqrt(1e5) ≈ 3.2e-3.
        let mut rng = RandomStream::new(17);
        let n = 100_000;
        let mut sums = [0.0; 6];
        for _ in 0..n {
            for (s, b) in sums.iter_mut().zip(mux_sample_state(2, &mut rng)) {
                *s += b;
            }
        }
        assert!(sums.iter().all(|s| (s / n as f64).abs() < 0.02));
    }

    #[test]
    fn one_bit_cases() {
        let s = [-1.0, 1.0, -1.0];
        assert_eq!(mux_reward(1, &s, 1.0).unwrap(), 1.0);
        assert_eq!(mux_reward(1, &s, -1.0).unwrap(), -1.0);
        let s = [1.0, 1.0, -1.0];
        assert_eq!(mux_reward(1, &s, -1.0).unwrap(), 1.0);
        assert_eq!(mux_reward(1, &s, 1.0).unwrap(), -1.0);
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(mux_reward(1, &[1.0, 1.0], 1.0).is_err());
        assert!(mux_reward(1, &[1.0, 0.0, 1.0], 1.0).is_err());
        assert!(mux_reward(1, &[1.0, 1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn exactly_one_rewarded_action_per_state() {
        for k in 1..=2 {
            let env = Multiplexer::new(k).unwrap();
            let states = env.enumerate_states().unwrap();
            assert_eq!(states.len(), 1 << env.state_dim());
            let p = 1.0 / states.len() as f64;
            for (s, ps) in &states {
                assert_eq!(*ps, p);
                let up = env.reward(s, 1.0).unwrap();
                let down = env.reward(s, -1.0).unwrap();
                assert_eq!(up + down, 0.0);
                assert!(up == 1.0 || down == 1.0);
            }
        }
    }

    #[test]
    fn unaddressed_bits_do_not_matter() {
        for k in 1..=2 {
            let env = Multiplexer::new(k).unwrap();
            for (s, _) in env.enumerate_states().unwrap() {
                let want = env.desired(&s).unwrap();
                let address = s[..k].iter().fold(0, |a, &b| (a << 1) | usize::from(b > 0.0));
                for j in 0..1 << k {
                    if j == address {
                        continue;
                    }
                    let mut t = s.clone();
                    t[k + j] = -t[k + j];
                    assert_eq!(env.desired(&t).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn toy_tables() {
        let row = |state: Vec<f64>, prob| ToyRow {
            state,
            prob,
            r_plus: 1.0,
            r_minus: -1.0,
        };
        assert!(toy_env(vec![row(vec![1.0], 0.5), row(vec![-1.0], 0.4)]).is_err());
        let env = toy_env(vec![row(vec![1.0], 0.25), row(vec![-1.0], 0.75)]).unwrap();
        assert_eq!(env.reward(&[1.0], 1.0).unwrap(), 1.0);
        assert!(env.reward(&[0.5], 1.0).is_err());
        let mut rng = RandomStream::new(3);
        let n = 40_000;
        let ups = (0..n).filter(|_| env.sample_state(&mut rng)[0] > 0.0).count();
        assert!((ups as f64 / n as f64 - 0.25).abs() < 0.01);

        let json = r#"{"rows":[{"state":[1.0],"prob":1.0,"r_plus":1.0,"r_minus":-1.0}]}"#;
        assert_eq!(ToyEnv::from_json(json).unwrap().rows().len(), 1);
        let bare = r#"[{"state":[1.0],"prob":1.0,"r_plus":0.5,"r_minus":0.0}]"#;
        assert_eq!(ToyEnv::from_json(bare).unwrap().rows()[0].r_plus, 0.5);
    }

    #[test]
    fn env_strings() {
        assert_eq!(Env::parse("mux:k=5").unwrap().state_dim(), 37);
        assert!(Env::parse("mux:k=x").is_err());
        assert!(Env::parse("cartpole").is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        std::fs::write(&path, serde_json::to_string(&ToyEnv::xor2()).unwrap()).unwrap();
        let env = Env::parse(&format!("toy:{}", path.display())).unwrap();
        assert_eq!(env.state_count(), Some(4));
    }
}
