//! Belief elicitation under state-dependent preferences.
//!
//! Agents with state-dependent subjective expected utility may misreport
//! their beliefs under a proper binarized scoring rule. A single extra choice
//! between two fifty-fifty lotteries over (payoff, influential action) pairs
//! reveals whether they did and in which direction.
//!
//! - [`model`]: beliefs, utilities, lotteries, acts and SEU evaluation.
//! - [`mechanisms`]: scoring rules, properness checks, optimal reports and
//!   matching probabilities.
//! - [`identification`]: the A/B task, choice evaluation, verdicts, sessions
//!   and the chord picture.
//! - [`oracle`]: brute-force cross-checks and seeded sweeps.

pub mod error;
pub mod identification;
pub mod mechanisms;
pub mod model;
pub mod oracle;
mod search;

pub use error::{Error, Result};
