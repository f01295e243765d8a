//! Domain types for a two-state subjective-expected-utility world.
//!
//! The state space is binary, `θ₀` and `θ₁`, and every probability in this
//! crate is the probability of `θ₁`. An [`Agent`] ranks acts by
//!
//! ```text
//! E_μ(u(f)) = (1 − μ)·⟨f(θ₀), u₀⟩ + μ·⟨f(θ₁), u₁⟩
//! ```
//!
//! where `u₀`, `u₁` are state-dependent Bernoulli utilities. Lotteries over
//! payoff/action pairs ([`OutcomeLottery`]) are ranked by evaluating each atom
//! under the belief the attached action induces.

mod agent;
mod lottery;
mod utility;
mod value;

pub use agent::{
    rescale_representation, seu, seu_act, seu_outcome_lottery, state_expectation, Agent,
};
pub use lottery::{vnm_value, Act, ActionTag, Atom, OutcomeAtom, OutcomeLottery, SimpleLottery};
pub use utility::{marginal_gap_ratio, utility_gaps, StateUtility, UtilityFamily, UtilityFn};
pub use value::{Belief, Payoff};

/// Tolerance on the total mass of a lottery.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Number of evenly spaced points used to verify strict monotonicity.
pub const MONOTONE_SAMPLES: usize = 1000;
