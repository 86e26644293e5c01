//! Weight Maximization for networks of stochastic Bernoulli logistic units.
//!
//! Each hidden unit is trained as its own REINFORCE agent, but instead of the
//! global reward it receives the first-order change in the squared L2 norm of
//! its outgoing weights. The crate contains:
//!
//! - [`numerics`]: dense row-major matrices, stable logistic functions and a
//!   deterministic SplitMix64 stream.
//! - [`network`]: the layered Bernoulli network, forward sampling and
//!   per-layer probabilities.
//! - [`rules`]: single-unit rules (REINFORCE, classification, A_rp, direct
//!   gradient) and network rules (global REINFORCE, the three Weight
//!   Maximization variants, straight-through backprop).
//! - [`optim`]: gradient ascent and Adam.
//! - [`envs`]: single-step environments, including the k-bit multiplexer.
//! - [`oracle`]: exact enumeration of small networks, true gradients and
//!   closed-form expansions used to check the learning rules.
//! - [`harness`]: experiment configs, training loop, CSV metrics, checkpoints.

pub mod envs;
pub mod error;
pub mod harness;
pub mod network;
pub mod numerics;
pub mod optim;
pub mod oracle;
pub mod rules;

pub use error::{Error, Result};
