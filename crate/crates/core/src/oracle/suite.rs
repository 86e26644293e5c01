//! The full verification suite behind `verify`: every exact identity the
//! learning rules are expected to satisfy, each measured and compared with a
//! fixed tolerance.

use serde::Serialize;

use crate::envs::{all_bipolar, Multiplexer, SingleStepEnv, ToyEnv, ToyRow};
use crate::error::Result;
use crate::network::{forward_sample, init_weights, NetShape, WeightStack};
use crate::numerics::{Mat, RandomStream};
use crate::rules::single::{arp_1, classification_1, reinforce_1};
use crate::rules::{ste_backprop, wm_direct, wm_reinforce, RuleKind, RuleSpec};

use super::compare::{cosine, max_abs_diff, ratio_spread};
use super::gradient::{analytic_gradient, finite_difference_gradient, ScoreForm};
use super::expected::{exact_expected_update, theorem1_scaling_check};
use super::{exact_action_prob, EnumBudget, DEFAULT_FD_STEP};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst value observed; compared against `tolerance`.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn below(name: &str, measured: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: measured < tolerance,
        measured,
        tolerance,
        detail,
    }
}

fn random_net(sizes: &[usize], scale: f64, seed: u64) -> Result<WeightStack> {
    let shape = NetShape::from_sizes(sizes, true)?;
    init_weights(&shape, scale, &mut RandomStream::derive(seed, &[1]))
}

fn random_state(n: usize, rng: &mut RandomStream) -> Vec<f64> {
    (0..n).map(|_| rng.sign()).collect()
}

/// Equiprobable bipolar states with rewards uniform on `[−1, 1]`.
pub fn random_toy_env(dim: usize, seed: u64) -> Result<ToyEnv> {
    let mut rng = RandomStream::derive(seed, &[2]);
    let states = all_bipolar(dim);
    let p = 1.0 / states.len() as f64;
    let rows = states
        .into_iter()
        .map(|state| ToyRow {
            state,
            prob: p,
            r_plus: rng.uniform(-1.0, 1.0),
            r_minus: rng.uniform(-1.0, 1.0),
        })
        .collect();
    ToyEnv::new(rows)
}

/// Random bipolar-reward associative reward-penalty tuples against the
/// REINFORCE/classification decomposition.
pub fn check_arp_identity(trials: usize) -> Result<CheckResult> {
    let mut rng = RandomStream::new(7);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = 1 + (rng.next_u64() % 6) as usize;
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let a = rng.sign();
        let r = rng.sign();
        let lambda = rng.next_f64();
        let lhs = arp_1(&x, a, r, &w, lambda)?;
        let rf = reinforce_1(&x, a, r, -1.0, &w)?;
        let cl = classification_1(&x, a, r, &w)?;
        for ((l, f), c) in lhs.iter().zip(&rf).zip(&cl) {
            let rhs = (1.0 - lambda) * 0.5 * f + lambda * c;
            worst = worst.max((l - rhs).abs());
        }
    }
    Ok(below("arp_decomposition", worst, 1e-12, format!("{trials} random tuples, max abs difference")))
}

fn stack_max_diff(a: &[Mat], b: &[Mat], scale_b: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| max_abs_diff(x, &y.scale(scale_b)))
        .fold(0.0, f64::max)
}

fn stack_max_abs(a: &[Mat]) -> f64 {
    a.iter().map(Mat::max_abs).fold(0.0, f64::max)
}

/// Exact expected global REINFORCE update against twice the exact gradient
/// (each unit's update is twice its log-likelihood gradient for ±1 outputs).
pub fn check_global_reinforce_unbiased(seeds: &[u64], budget: &EnumBudget) -> Result<CheckResult> {
    let env = ToyEnv::xor2();
    let rule = RuleSpec::new(RuleKind::GlobalReinforce);
    let mut worst: f64 = 0.0;
    let mut min_cos = f64::INFINITY;
    for &seed in seeds {
        let w = random_net(&[2, 2, 1], 0.5, seed)?;
        let e = exact_expected_update(&w, &env, &rule, budget)?;
        let g = finite_difference_gradient(&w, &env, DEFAULT_FD_STEP, budget)?;
        worst = worst.max(stack_max_diff(e.deltas(), &g, 2.0));
        for (a, b) in e.deltas().iter().zip(&g) {
            min_cos = min_cos.min(cosine(a, b));
        }
    }
    Ok(below(
        "global_reinforce_unbiased",
        worst,
        1e-10,
        format!("{} 2-2-1 nets on xor; max |E[ΔW] − 2∇E[R]|, min cosine {min_cos:.15}", seeds.len()),
    ))
}

/// The three score-function forms of the exact gradient against each other
/// and against central differences.
pub fn check_score_forms(budget: &EnumBudget) -> Result<CheckResult> {
    let cases: Vec<(Vec<usize>, Box<dyn SingleStepEnv>)> = vec![
        (vec![2, 2, 1], Box::new(ToyEnv::xor2())),
        (vec![3, 3, 2, 1], Box::new(Multiplexer::new(1)?)),
    ];
    let mut worst: f64 = 0.0;
    for (sizes, env) in &cases {
        for seed in 0..3 {
            let w = random_net(sizes, 0.5, 100 + seed)?;
            let fd = finite_difference_gradient(&w, env.as_ref(), DEFAULT_FD_STEP, budget)?;
            for form in [ScoreForm::Marginal, ScoreForm::LayerInput, ScoreForm::LayerLocal] {
                let g = analytic_gradient(&w, env.as_ref(), form, budget)?;
                worst = worst.max(stack_max_diff(&g, &fd, 1.0));
            }
        }
    }
    Ok(below(
        "score_form_equality",
        worst,
        1e-10,
        "2-2-1 on xor and 3-3-2-1 on mux k=1; max abs difference to central differences".into(),
    ))
}

/// Relative agreement of central differences and the analytic gradient.
pub fn check_fd_vs_analytic(budget: &EnumBudget) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let nets: Vec<(Vec<usize>, Box<dyn SingleStepEnv>, u64)> = (0..5)
        .map(|s| (vec![2, 2, 1], Box::new(ToyEnv::xor2()) as Box<dyn SingleStepEnv>, s))
        .chain((0..5).map(|s| (vec![2, 2, 1], Box::new(random_toy_env(2, s).unwrap()) as Box<dyn SingleStepEnv>, s)))
        .chain((0..3).map(|s| (vec![3, 3, 2, 1], Box::new(Multiplexer::new(1).unwrap()) as Box<dyn SingleStepEnv>, s)))
        .collect();
    for (sizes, env, seed) in &nets {
        let w = random_net(sizes, 0.5, 200 + seed)?;
        let fd = finite_difference_gradient(&w, env.as_ref(), DEFAULT_FD_STEP, budget)?;
        let an = analytic_gradient(&w, env.as_ref(), ScoreForm::LayerLocal, budget)?;
        let rel = stack_max_diff(&fd, &an, 1.0) / stack_max_abs(&an).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    Ok(below(
        "finite_difference_vs_analytic",
        worst,
        1e-6,
        format!("{} nets; max abs difference over max abs gradient", nets.len()),
    ))
}

/// Straight-through backprop equals the shared closed-form expansion, and
/// Weight Maximization with direct gradient is a constant multiple of it in
/// every layer.
pub fn check_direct_vs_ste(traces: usize) -> Result<(CheckResult, CheckResult)> {
    let mut rng = RandomStream::new(31);
    let mut worst_spread: f64 = 0.0;
    let mut worst_exp: f64 = 0.0;
    let mut ratios: Vec<f64> = Vec::new();
    for t in 0..traces {
        let w = random_net(&[3, 4, 2, 1], 1.0, 300 + t as u64)?;
        let x = random_state(3, &mut rng);
        let trace = forward_sample(&w, &x, &mut rng)?;
        let r = rng.uniform(-1.0, 1.0);
        let direct = wm_direct(&trace, r, &w)?;
        let ste = ste_backprop(&trace, r, &w, 0.0)?;
        let exp = super::lemma2_expansion(&trace, r, &w)?;
        worst_exp = worst_exp.max(stack_max_diff(ste.deltas(), exp.deltas(), 1.0));
        for (l, (d, s)) in direct.deltas().iter().zip(ste.deltas()).enumerate() {
            if let Some((mean, spread)) = ratio_spread(d, s, 1e-6) {
                worst_spread = worst_spread.max(spread);
                if t == 0 {
                    ratios.push(mean);
                }
            } else if l == 0 && t == 0 {
                ratios.push(f64::NAN);
            }
        }
    }
    Ok((
        below(
            "direct_over_ste_ratio",
            worst_spread,
            1e-9,
            format!("{traces} 3-4-2-1 traces; worst relative spread of entrywise ratios; first trace ratios {ratios:?}"),
        ),
        below(
            "ste_equals_expansion",
            worst_exp,
            1e-12,
            format!("{traces} 3-4-2-1 traces; max abs difference"),
        ),
    ))
}

/// Weight Maximization with REINFORCE points the same way as its closed-form
/// expansion in every layer.
pub fn check_reinforce_expansion(traces: usize) -> Result<CheckResult> {
    let mut rng = RandomStream::new(41);
    let mut worst: f64 = 0.0;
    for t in 0..traces {
        let w = random_net(&[2, 2, 1], 1.0, 400 + t as u64)?;
        let x = random_state(2, &mut rng);
        let trace = forward_sample(&w, &x, &mut rng)?;
        let r = rng.uniform(-1.0, 1.0);
        let rule = wm_reinforce(&trace, r, &w)?;
        let exp = super::lemma1_expansion(&trace, r, &w)?;
        for (a, b) in rule.deltas().iter().zip(exp.deltas()) {
            if a.max_abs() > 0.0 || b.max_abs() > 0.0 {
                worst = worst.max(1.0 - cosine(a, b));
            }
        }
    }
    Ok(below(
        "reinforce_expansion_direction",
        worst,
        1e-10,
        format!("{traces} 2-2-1 traces; worst 1 − cosine"),
    ))
}

/// Weight Maximization with REINFORCE at small weights follows the gradient
/// with second-order error in the weight scale.
pub fn check_small_norm_scaling(seeds: &[u64], budget: &EnumBudget) -> Result<(CheckResult, CheckResult, CheckResult)> {
    let shape = NetShape::from_sizes(&[2, 2, 1], true)?;
    let rule = RuleSpec::new(RuleKind::WmReinforce);
    let eps = [0.2, 0.1, 0.05];
    let mut min_cos = f64::INFINITY;
    let mut worst_spread: f64 = 0.0;
    let mut worst_top: f64 = 0.0;
    let mut spreads = Vec::new();
    for &seed in seeds {
        let env = random_toy_env(2, seed)?;
        let report = theorem1_scaling_check(&shape, &env, &eps, &rule, seed, budget)?;
        let last = report.rows.last().expect("three rows");
        for layer in &last.layers {
            min_cos = min_cos.min(layer.cosine);
        }
        for row in &report.rows {
            let top = row.layers.last().expect("output layer");
            worst_top = worst_top.max(top.residual);
        }
        for &s in &report.spread {
            worst_spread = worst_spread.max(s);
            spreads.push(s);
        }
    }
    let cos = CheckResult {
        name: "small_norm_cosine".into(),
        passed: min_cos > 0.99,
        measured: min_cos,
        tolerance: 0.99,
        detail: format!("{} 2-2-1 nets on random reward tables, ε = 0.05; min per-layer cosine (must exceed)", seeds.len()),
    };
    let spread = below(
        "small_norm_residual_spread",
        worst_spread,
        4.0,
        format!("ε ∈ {eps:?}; max/min of residual/ε² per hidden layer: {spreads:?}"),
    );
    let top = below(
        "output_layer_exact",
        worst_top,
        1e-12,
        "least-squares residual of the output layer at every ε".into(),
    );
    Ok((cos, spread, top))
}

/// Exact action marginals are normalized.
pub fn check_action_probs(budget: &EnumBudget) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let w = random_net(&[3, 3, 2, 1], 2.0, 500 + seed)?;
        for x in all_bipolar(3) {
            let p = exact_action_prob(&w, &x, budget)?;
            let neg = negate_output(&w)?;
            let q = exact_action_prob(&neg, &x, budget)?;
            worst = worst.max((p + q - 1.0).abs());
        }
    }
    Ok(below(
        "action_probs_sum_to_one",
        worst,
        1e-14,
        "Pr(+1) plus Pr(−1), the latter via the negated output layer".into(),
    ))
}

/// Negating the output weights swaps the two actions' probabilities.
fn negate_output(w: &WeightStack) -> Result<WeightStack> {
    let top = w.layers().len();
    w.map_layers(|l, m| if l == top { m.scale(-1.0) } else { m.clone() })
}

/// Exact marginal against a Monte Carlo frequency.
pub fn check_action_prob_monte_carlo(budget: &EnumBudget) -> Result<CheckResult> {
    let w = random_net(&[3, 3, 2, 1], 1.5, 600)?;
    let x = vec![1.0, -1.0, 1.0];
    let p = exact_action_prob(&w, &x, budget)?;
    let mut rng = RandomStream::new(61);
    let n = 200_000;
    let mut hits = 0u32;
    for _ in 0..n {
        if forward_sample(&w, &x, &mut rng)?.action() > 0.0 {
            hits += 1;
        }
    }
    let freq = f64::from(hits) / n as f64;
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    Ok(below(
        "action_prob_monte_carlo",
        (freq - p).abs(),
        5.0 * sd,
        format!("exact {p}, sampled {freq} over {n} draws; tolerance is five standard errors"),
    ))
}

pub fn run_verification(budget: &EnumBudget) -> Result<VerifyReport> {
    let seeds = [0, 1, 2, 3, 4];
    let mut checks = vec![
        check_arp_identity(10_000)?,
        check_global_reinforce_unbiased(&seeds, budget)?,
        check_score_forms(budget)?,
        check_fd_vs_analytic(budget)?,
    ];
    let (ratio, exp) = check_direct_vs_ste(200)?;
    checks.push(ratio);
    checks.push(exp);
    checks.push(check_reinforce_expansion(100)?);
    let (cos, spread, top) = check_small_norm_scaling(&seeds, budget)?;
    checks.extend([cos, spread, top]);
    checks.push(check_action_probs(budget)?);
    checks.push(check_action_prob_monte_carlo(budget)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { passed, checks })
}
