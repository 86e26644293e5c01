//! Exact computation on small networks by exhaustive enumeration over states,
//! hidden configurations and actions: true action marginals, true gradients,
//! exact expected updates, and the closed-form expansions the learning rules
//! are checked against.
//!
//! Hidden configurations are visited by binary counting; each term's
//! probability is accumulated in log space and exponentiated once.

pub mod compare;
mod enumerate;
mod expansions;
mod gradient;
pub mod suite;
mod expected;

pub use enumerate::{exact_action_prob, exact_expectation_of, exact_expected_reward, for_each_episode};
pub use expansions::{lemma1_expansion, lemma2_expansion};
pub use gradient::{analytic_gradient, finite_difference_gradient, richardson_gradient, GradStack, ScoreForm};
pub use suite::{run_verification, CheckResult, VerifyReport};
pub use expected::{exact_expected_update, theorem1_scaling_check, ScalingLayer, ScalingReport, ScalingRow};

use serde::{Deserialize, Serialize};

/// Limits on what the oracle will enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumBudget {
    pub max_total_hidden_bits: usize,
    pub max_states: usize,
}

impl Default for EnumBudget {
    fn default() -> Self {
        Self {
            max_total_hidden_bits: 16,
            max_states: 4096,
        }
    }
}

/// Central-difference step used by default.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// [`finite_difference_gradient`] at [`DEFAULT_FD_STEP`].
pub fn exact_gradient(
    w: &crate::network::WeightStack,
    env: &dyn crate::envs::SingleStepEnv,
    budget: &EnumBudget,
) -> crate::Result<GradStack> {
    finite_difference_gradient(w, env, DEFAULT_FD_STEP, budget)
}
