//! Layered network of Bernoulli logistic units with `±1` activations.
//!
//! Layers are indexed `1..=L` with layer `L` the single output unit; `H⁰` is
//! the state. When bias is enabled a constant `+1` is appended to the input of
//! every layer, so `W^l` has shape `(m^{l−1} + 1) × m^l` and its last row holds
//! the bias weights.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bernoulli_pm1, log_sigmoid, sigmoid, Mat, RandomStream};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShape {
    input_dim: usize,
    hidden: Vec<usize>,
    bias: bool,
}

impl NetShape {
    pub fn new(input_dim: usize, hidden: Vec<usize>, bias: bool) -> Result<Self> {
        if input_dim == 0 || hidden.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must be >= 1, got input {input_dim} hidden {hidden:?}"
            )));
        }
        Ok(Self {
            input_dim,
            hidden,
            bias,
        })
    }

    /// Builds a shape from the full size list `[n, m¹, …, m^L]`; `m^L` must be 1.
    pub fn from_sizes(sizes: &[usize], bias: bool) -> Result<Self> {
        match sizes {
            [n, hidden @ .., 1] => Self::new(*n, hidden.to_vec(), bias),
            _ => Err(Error::Config(format!(
                "size list must be [input, hidden.., 1], got {sizes:?}"
            ))),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn bias(&self) -> bool {
        self.bias
    }

    /// Number of layers `L`, output included.
    pub fn layers(&self) -> usize {
        self.hidden.len() + 1
    }

    /// `[n, m¹, …, m^{L−1}, 1]`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.hidden.len() + 2);
        s.push(self.input_dim);
        s.extend_from_slice(&self.hidden);
        s.push(1);
        s
    }

    /// Units in layer `l` (`l = 0` is the state).
    pub fn units(&self, l: usize) -> usize {
        self.sizes()[l]
    }

    /// Shape of `W^l`.
    pub fn weight_shape(&self, l: usize) -> (usize, usize) {
        let sizes = self.sizes();
        (sizes[l - 1] + usize::from(self.bias), sizes[l])
    }

    pub fn total_hidden_units(&self) -> usize {
        self.hidden.iter().sum()
    }

    pub fn param_count(&self) -> usize {
        (1..=self.layers())
            .map(|l| {
                let (r, c) = self.weight_shape(l);
                r * c
            })
            .sum()
    }
}

/// Appends the bias constant when enabled.
pub fn with_bias(h: &[f64], bias: bool) -> Vec<f64> {
    let mut v = Vec::with_capacity(h.len() + 1);
    v.extend_from_slice(h);
    if bias {
        v.push(1.0);
    }
    v
}

/// The network parameters `W¹ … W^L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightStack {
    shape: NetShape,
    layers: Vec<Mat>,
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    shape: Vec<usize>,
    bias: bool,
    layers: Vec<Vec<f64>>,
}

impl WeightStack {
    pub fn new(shape: NetShape, layers: Vec<Mat>) -> Result<Self> {
        if layers.len() != shape.layers() {
            return Err(Error::Config(format!(
                "expected {} weight layers, got {}",
                shape.layers(),
                layers.len()
            )));
        }
        for (i, m) in layers.iter().enumerate() {
            let want = shape.weight_shape(i + 1);
            if m.shape() != want {
                return Err(Error::Shape {
                    op: "WeightStack::new",
                    left: want,
                    right: m.shape(),
                });
            }
            if !m.is_finite() {
                return Err(Error::Domain(format!("layer {} has non-finite weights", i + 1)));
            }
        }
        Ok(Self { shape, layers })
    }

    pub fn zeros(shape: &NetShape) -> Self {
        let layers = (1..=shape.layers())
            .map(|l| {
                let (r, c) = shape.weight_shape(l);
                Mat::zeros(r, c)
            })
            .collect();
        Self {
            shape: shape.clone(),
            layers,
        }
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    /// `W^l`, `l` in `1..=L`.
    pub fn layer(&self, l: usize) -> &Mat {
        &self.layers[l - 1]
    }

    pub fn layer_mut(&mut self, l: usize) -> &mut Mat {
        &mut self.layers[l - 1]
    }

    pub fn layers(&self) -> &[Mat] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Mat] {
        &mut self.layers
    }

    pub fn into_layers(self) -> Vec<Mat> {
        self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|m| m.data().len()).sum()
    }

    /// Per-layer Frobenius norms.
    pub fn norms(&self) -> Vec<f64> {
        self.layers.iter().map(Mat::frobenius_norm).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.layers.iter().fold(0.0, |m, w| m.max(w.max_abs()))
    }

    /// Same shape, layers replaced by `f(l, W^l)`.
    pub fn map_layers(&self, mut f: impl FnMut(usize, &Mat) -> Mat) -> Result<Self> {
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, m)| f(i + 1, m))
            .collect();
        Self::new(self.shape.clone(), layers)
    }

    /// Pre-activation `S^l = H^{l−1}W^l`; `h_prev` excludes the bias entry.
    pub fn pre_activation(&self, l: usize, h_prev: &[f64]) -> Result<Vec<f64>> {
        if l == 0 || l > self.shape.layers() {
            return Err(Error::Domain(format!("layer index {l} out of range")));
        }
        self.layer(l).vec_mul(&with_bias(h_prev, self.shape.bias))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = WeightFile {
            shape: self.shape.sizes(),
            bias: self.shape.bias,
            layers: self.layers.iter().map(|m| m.data().to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightFile = serde_json::from_str(text)?;
        let shape = NetShape::from_sizes(&file.shape, file.bias)?;
        let layers = file
            .layers
            .into_iter()
            .enumerate()
            .map(|(i, data)| {
                let (r, c) = shape.weight_shape(i + 1);
                Mat::new(r, c, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape, layers)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Entries i.i.d. uniform on `[−scale, scale]`, drawn layer by layer in
/// row-major order.
pub fn init_weights(shape: &NetShape, scale: f64, rng: &mut RandomStream) -> Result<WeightStack> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("init scale must be >= 0, got {scale}")));
    }
    let mut w = WeightStack::zeros(shape);
    if scale > 0.0 {
        for m in w.layers_mut() {
            for x in m.data_mut() {
                *x = rng.uniform(-scale, scale);
            }
        }
    }
    Ok(w)
}

/// One sampled pass through the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    bias: bool,
    /// `H⁰ … H^L`, bias entries excluded.
    acts: Vec<Vec<f64>>,
    /// `S¹ … S^L`.
    pre: Vec<Vec<f64>>,
    /// `P¹ … P^L`, probabilities of `+1`.
    probs: Vec<Vec<f64>>,
}

impl ForwardTrace {
    /// Rebuilds a trace from fixed activations `H⁰ … H^L`, recomputing the
    /// pre-activations and probabilities. Used to enumerate configurations.
    pub fn from_activations(w: &WeightStack, acts: Vec<Vec<f64>>) -> Result<Self> {
        let shape = w.shape();
        if acts.len() != shape.layers() + 1 {
            return Err(Error::Domain(format!(
                "expected {} activation rows, got {}",
                shape.layers() + 1,
                acts.len()
            )));
        }
        let mut pre = Vec::with_capacity(shape.layers());
        let mut probs = Vec::with_capacity(shape.layers());
        for l in 1..=shape.layers() {
            if acts[l].len() != shape.units(l) {
                return Err(Error::Shape {
                    op: "ForwardTrace::from_activations",
                    left: (1, shape.units(l)),
                    right: (1, acts[l].len()),
                });
            }
            if acts[l].iter().any(|&h| h != 1.0 && h != -1.0) {
                return Err(Error::Domain(format!("layer {l} activations must be ±1")));
            }
            let s = w.pre_activation(l, &acts[l - 1])?;
            probs.push(s.iter().map(|&v| sigmoid(v)).collect());
            pre.push(s);
        }
        Ok(Self {
            bias: shape.bias(),
            acts,
            pre,
            probs,
        })
    }

    /// Number of layers `L`.
    pub fn layers(&self) -> usize {
        self.pre.len()
    }

    /// `H^l` for `l` in `0..=L`, bias excluded.
    pub fn h(&self, l: usize) -> &[f64] {
        &self.acts[l]
    }

    /// `H^{l−1}` with the bias constant appended: the row multiplying `W^l`.
    pub fn input_row(&self, l: usize) -> Vec<f64> {
        with_bias(&self.acts[l - 1], self.bias)
    }

    pub fn s(&self, l: usize) -> &[f64] {
        &self.pre[l - 1]
    }

    pub fn p(&self, l: usize) -> &[f64] {
        &self.probs[l - 1]
    }

    /// `E[H^l | H^{l−1}] = 2P^l − 1`.
    pub fn expectation(&self, l: usize) -> Vec<f64> {
        self.p(l).iter().map(|&p| 2.0 * p - 1.0).collect()
    }

    pub fn state(&self) -> &[f64] {
        &self.acts[0]
    }

    pub fn action(&self) -> f64 {
        self.acts[self.layers()][0]
    }

    pub fn bias(&self) -> bool {
        self.bias
    }
}

/// Samples `H¹ … H^L` in order, each unit `+1` with probability `σ(S^l_i)`.
pub fn forward_sample(w: &WeightStack, x: &[f64], rng: &mut RandomStream) -> Result<ForwardTrace> {
    let shape = w.shape();
    if x.len() != shape.input_dim() {
        return Err(Error::Shape {
            op: "forward_sample",
            left: (1, shape.input_dim()),
            right: (1, x.len()),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("state has non-finite entries".into()));
    }
    let layers = shape.layers();
    let mut acts = Vec::with_capacity(layers + 1);
    let mut pre = Vec::with_capacity(layers);
    let mut probs = Vec::with_capacity(layers);
    acts.push(x.to_vec());
    for l in 1..=layers {
        let s = w.pre_activation(l, &acts[l - 1])?;
        let p: Vec<f64> = s.iter().map(|&v| sigmoid(v)).collect();
        let h = p
            .iter()
            .map(|&pi| bernoulli_pm1(pi, rng))
            .collect::<Result<Vec<_>>>()?;
        acts.push(h);
        pre.push(s);
        probs.push(p);
    }
    Ok(ForwardTrace {
        bias: shape.bias(),
        acts,
        pre,
        probs,
    })
}

/// `E[H^l | H^{l−1} = h_prev] = 2σ(h_prev·W^l) − 1`.
pub fn expected_activation(w: &WeightStack, l: usize, h_prev: &[f64]) -> Result<Vec<f64>> {
    Ok(w
        .pre_activation(l, h_prev)?
        .into_iter()
        .map(|s| 2.0 * sigmoid(s) - 1.0)
        .collect())
}

/// `log π_l(h_prev, h_l) = Σ_i log σ(h_l_i · s_i)`.
pub fn layer_log_prob(w: &WeightStack, l: usize, h_prev: &[f64], h_l: &[f64]) -> Result<f64> {
    let s = w.pre_activation(l, h_prev)?;
    if s.len() != h_l.len() {
        return Err(Error::Shape {
            op: "layer_log_prob",
            left: (1, s.len()),
            right: (1, h_l.len()),
        });
    }
    if h_l.iter().any(|&h| h != 1.0 && h != -1.0) {
        return Err(Error::Domain("layer values must be ±1".into()));
    }
    Ok(s.iter().zip(h_l).map(|(&si, &hi)| log_sigmoid(hi * si)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_shape() -> NetShape {
        NetShape::new(37, vec![64, 32], true).unwrap()
    }

    #[test]
    fn parameter_count_matches_reported_shape() {
        let shape = reference_shape();
        assert_eq!(shape.param_count(), 38 * 64 + 65 * 32 + 33);
        assert_eq!(shape.param_count(), 4545);
        assert_eq!(WeightStack::zeros(&shape).param_count(), 4545);
        assert_eq!(shape.weight_shape(1), (38, 64));
        assert_eq!(shape.weight_shape(3), (33, 1));
    }

    #[test]
    fn zero_scale_gives_half_probabilities() {
        let shape = NetShape::new(3, vec![4, 2], true).unwrap();
        let mut rng = RandomStream::new(1);
        let w = init_weights(&shape, 0.0, &mut rng).unwrap();
        let t = forward_sample(&w, &[1.0, -1.0, 1.0], &mut rng).unwrap();
        for l in 1..=3 {
            assert!(t.p(l).iter().all(|&p| p == 0.5));
        }
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let shape = NetShape::new(5, vec![6], true).unwrap();
        let a = init_weights(&shape, 0.1, &mut RandomStream::new(4)).unwrap();
        let b = init_weights(&shape, 0.1, &mut RandomStream::new(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs() <= 0.1 && a.max_abs() > 0.0);
        assert!(init_weights(&shape, -1.0, &mut RandomStream::new(4)).is_err());
    }

    #[test]
    fn saturated_unit_always_fires() {
        let shape = NetShape::new(2, vec![], false).unwrap();
        let w = WeightStack::new(shape, vec![Mat::column(&[25.0, -25.0])]).unwrap();
        let mut rng = RandomStream::new(8);
        for _ in 0..1_000_000 {
            let t = forward_sample(&w, &[1.0, -1.0], &mut rng).unwrap();
            assert_eq!(t.action(), 1.0);
        }
    }

    #[test]
    fn forward_replay_and_dimension_check() {
        let shape = NetShape::new(3, vec![4], true).unwrap();
        let w = init_weights(&shape, 0.5, &mut RandomStream::new(2)).unwrap();
        let x = [1.0, 1.0, -1.0];
        let a = forward_sample(&w, &x, &mut RandomStream::new(3)).unwrap();
        let b = forward_sample(&w, &x, &mut RandomStream::new(3)).unwrap();
        assert_eq!(a, b);
        assert!(forward_sample(&w, &[1.0], &mut RandomStream::new(3)).is_err());
        let rebuilt = ForwardTrace::from_activations(&w, (0..=2).map(|l| a.h(l).to_vec()).collect()).unwrap();
        assert_eq!(rebuilt, a);
    }

    #[test]
    fn expected_activation_cases() {
        let shape = NetShape::new(2, vec![], false).unwrap();
        let w = WeightStack::new(shape.clone(), vec![Mat::column(&[0.0, 0.0])]).unwrap();
        assert_eq!(expected_activation(&w, 1, &[1.0, -1.0]).unwrap(), vec![0.0]);
        let w = WeightStack::new(shape, vec![Mat::column(&[25.0, -25.0])]).unwrap();
        let e = expected_activation(&w, 1, &[1.0, -1.0]).unwrap()[0];
        assert!((e - 1.0).abs() < 1e-12);
        assert!(expected_activation(&w, 1, &[1.0]).is_err());
    }

    #[test]
    fn expected_activation_matches_sampling() {
        // 1e6 draws of ±1: standard error < 1e-3.
        let shape = NetShape::new(2, vec![3], true).unwrap();
        let w = init_weights(&shape, 1.0, &mut RandomStream::new(21)).unwrap();
        let x = [1.0, -1.0];
        let e = expected_activation(&w, 1, &x).unwrap();
        let mut rng = RandomStream::new(22);
        let n = 1_000_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            let t = forward_sample(&w, &x, &mut rng).unwrap();
            for (s, h) in sums.iter_mut().zip(t.h(1)) {
                *s += h;
            }
        }
        for (s, ei) in sums.iter().zip(&e) {
            assert!((s / n as f64 - ei).abs() < 0.005);
        }
    }

    #[test]
    fn layer_log_prob_cases() {
        let shape = NetShape::new(2, vec![3], true).unwrap();
        let zero = WeightStack::zeros(&shape);
        let lp = layer_log_prob(&zero, 1, &[1.0, -1.0], &[1.0, -1.0, 1.0]).unwrap();
        assert!((lp - 3.0 * 0.5f64.ln()).abs() < 1e-15);

        let w = init_weights(&shape, 1.0, &mut RandomStream::new(5)).unwrap();
        let hp = [1.0, -1.0];
        let s = w.pre_activation(1, &hp).unwrap();
        let base = layer_log_prob(&w, 1, &hp, &[1.0, 1.0, -1.0]).unwrap();
        let flipped = layer_log_prob(&w, 1, &hp, &[1.0, -1.0, -1.0]).unwrap();
        let want = log_sigmoid(-s[1]) - log_sigmoid(s[1]);
        assert!((flipped - base - want).abs() < 1e-13);
        assert!(layer_log_prob(&w, 1, &hp, &[1.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn layer_distribution_normalizes() {
        for m in 1..=6usize {
            let shape = NetShape::new(3, vec![m], true).unwrap();
            let w = init_weights(&shape, 1.5, &mut RandomStream::new(m as u64)).unwrap();
            let hp = [1.0, -1.0, -1.0];
            let total: f64 = (0..1u32 << m)
                .map(|bits| {
                    let h: Vec<f64> = (0..m).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                    layer_log_prob(&w, 1, &hp, &h).unwrap().exp()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_layer_frequencies_match_probabilities() {
        // 1e5 samples: each mean has standard error <= 3.2e-3; 0.015 is ~5σ.
        let shape = NetShape::new(2, vec![4], false).unwrap();
        let w = init_weights(&shape, 1.0, &mut RandomStream::new(30)).unwrap();
        let x = [-1.0, 1.0];
        let p = forward_sample(&w, &x, &mut RandomStream::new(0)).unwrap().p(1).to_vec();
        let mut rng = RandomStream::new(31);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            let t = forward_sample(&w, &x, &mut rng).unwrap();
            for (c, &h) in counts.iter_mut().zip(t.h(1)) {
                *c += usize::from(h > 0.0);
            }
        }
        for (c, pi) in counts.iter().zip(&p) {
            assert!((*c as f64 / n as f64 - pi).abs() < 0.015);
        }
    }

    #[test]
    fn weight_file_roundtrip() {
        let shape = NetShape::new(3, vec![2], true).unwrap();
        let w = init_weights(&shape, 0.3, &mut RandomStream::new(9)).unwrap();
        let text = w.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["shape"], serde_json::json!([3, 2, 1]));
        assert_eq!(v["bias"], serde_json::json!(true));
        assert_eq!(v["layers"][0].as_array().unwrap().len(), 8);
        assert_eq!(WeightStack::from_json(&text).unwrap(), w);
        assert!(WeightStack::from_json(r#"{"shape":[3,2,1],"bias":true,"layers":[[1.0]]}"#).is_err());
    }
}
