//! Identifying misreports from one extra binary choice.
//!
//! After the belief report the agent picks between two fifty-fifty lotteries
//! over (payoff, action) pairs:
//!
//! ```text
//! A = ½·(x̲, default) + ½·(x̄, influential)
//! B = ½·(x̄, default) + ½·(x̲, influential)
//! ```
//!
//! When the influential action raises the probability of `θ₁`, preferring A
//! means the report overstated that probability, preferring B means it
//! understated it, and indifference means it was truthful. The mapping flips
//! for an action that lowers the probability of `θ₁`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{optimal_report, ScoringRule};
use crate::model::{
    seu_outcome_lottery, state_expectation, ActionTag, Agent, Belief, OutcomeAtom, OutcomeLottery, Payoff,
};

/// Default indifference band for simulated choices.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Slope difference below which the two chords count as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

macro_rules! snake_display {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    RaisesTheta1,
    LowersTheta1,
}

snake_display!(Direction { RaisesTheta1 => "raises_theta1", LowersTheta1 => "lowers_theta1" });

impl Direction {
    /// The direction implied by an agent's `(μ, μ̂)`.
    pub fn of(agent: &Agent) -> Direction {
        if agent.mu_hat() > agent.mu() {
            Direction::RaisesTheta1
        } else {
            Direction::LowersTheta1
        }
    }
}

/// An experimenter-controlled action known to move the probability of `θ₁`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfluentialAction {
    pub label: String,
    pub direction: Direction,
}

impl InfluentialAction {
    pub fn new(label: impl Into<String>, direction: Direction) -> Self {
        InfluentialAction { label: label.into(), direction }
    }

    /// Errors unless the declared direction agrees with the agent's `(μ, μ̂)`.
    pub fn check_against(&self, agent: &Agent) -> Result<()> {
        let implied = Direction::of(agent);
        if implied != self.direction {
            return Err(Error::InvalidArgument(format!(
                "action `{}` is declared {} but mu = {} and mu_hat = {} imply {}",
                self.label,
                self.direction,
                agent.mu(),
                agent.mu_hat(),
                implied
            )));
        }
        Ok(())
    }
}

/// The pair of fifty-fifty lotteries A and B on the payoffs `x_lo < x_hi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbTask {
    x_lo: Payoff,
    x_hi: Payoff,
    lottery_a: OutcomeLottery,
    lottery_b: OutcomeLottery,
}

impl AbTask {
    pub fn x_lo(&self) -> Payoff {
        self.x_lo
    }

    pub fn x_hi(&self) -> Payoff {
        self.x_hi
    }

    pub fn lottery_a(&self) -> &OutcomeLottery {
        &self.lottery_a
    }

    pub fn lottery_b(&self) -> &OutcomeLottery {
        &self.lottery_b
    }
}

pub fn build_ab_task(x_lo: Payoff, x_hi: Payoff) -> Result<AbTask> {
    if x_lo >= x_hi {
        return Err(Error::InvalidArgument(format!("need x_lo < x_hi, got {x_lo} and {x_hi}")));
    }
    let half = |payoff, action| OutcomeAtom { payoff, action, prob: 0.5 };
    let lottery_a = OutcomeLottery::new([half(x_lo, ActionTag::Default), half(x_hi, ActionTag::Influential)])?;
    let lottery_b = OutcomeLottery::new([half(x_hi, ActionTag::Default), half(x_lo, ActionTag::Influential)])?;
    Ok(AbTask { x_lo, x_hi, lottery_a, lottery_b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    PrefersA,
    PrefersB,
    Indifferent,
}

snake_display!(Choice { PrefersA => "prefers_a", PrefersB => "prefers_b", Indifferent => "indifferent" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    OverReported,
    UnderReported,
    Truthful,
}

snake_display!(Verdict {
    OverReported => "over_reported",
    UnderReported => "under_reported",
    Truthful => "truthful",
});

impl Verdict {
    /// The verdict an observer who knew `μ` would reach from the report.
    pub fn from_report(reported: Belief, mu: Belief) -> Verdict {
        if reported > mu {
            Verdict::OverReported
        } else if reported < mu {
            Verdict::UnderReported
        } else {
            Verdict::Truthful
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbEvaluation {
    pub u_a: f64,
    pub u_b: f64,
    pub choice: Choice,
}

/// Values both lotteries and picks the better one; differences within
/// `epsilon` are indifference.
pub fn evaluate_choice(agent: &Agent, task: &AbTask, epsilon: f64) -> Result<AbEvaluation> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("indifference tolerance must be positive, got {epsilon}")));
    }
    let u_a = seu_outcome_lottery(agent, &task.lottery_a)?;
    let u_b = seu_outcome_lottery(agent, &task.lottery_b)?;
    let choice = if u_a - u_b > epsilon {
        Choice::PrefersA
    } else if u_b - u_a > epsilon {
        Choice::PrefersB
    } else {
        Choice::Indifferent
    };
    Ok(AbEvaluation { u_a, u_b, choice })
}

pub fn classify(choice: Choice, direction: Direction) -> Verdict {
    match (choice, direction) {
        (Choice::Indifferent, _) => Verdict::Truthful,
        (Choice::PrefersA, Direction::RaisesTheta1) | (Choice::PrefersB, Direction::LowersTheta1) => {
            Verdict::OverReported
        }
        (Choice::PrefersB, Direction::RaisesTheta1) | (Choice::PrefersA, Direction::LowersTheta1) => {
            Verdict::UnderReported
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaidTask {
    Elicitation,
    AbChoice,
}

snake_display!(PaidTask { Elicitation => "elicitation", AbChoice => "ab_choice" });

/// One simulated experiment: report, A/B choice, verdict and payment draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub reported: Belief,
    pub choice: Choice,
    pub verdict: Verdict,
    pub paid_task: PaidTask,
    pub realized_action_taken: bool,
    /// Payoff of the realized A/B atom; `None` when the elicitation task is paid.
    pub realized_payoff: Option<f64>,
}

/// Runs both tasks and pays one of them, drawn uniformly.
///
/// The agent answers each task on its own, since only one is paid. The
/// chosen lottery is realized only when the A/B task is the one paid, so the
/// influential action can be taken only then. An indifferent agent's lottery
/// is picked by a fair coin.
pub fn run_session(
    agent: &Agent,
    rule: &ScoringRule,
    task: &AbTask,
    action: &InfluentialAction,
    epsilon: f64,
    seed: u64,
) -> Result<SessionRecord> {
    if rule.bad_payoff() != task.x_lo || rule.prize() != task.x_hi {
        return Err(Error::InvalidArgument(format!(
            "rule pays {{{}, {}}} but the A/B task uses {{{}, {}}}",
            rule.bad_payoff(),
            rule.prize(),
            task.x_lo,
            task.x_hi
        )));
    }
    action.check_against(agent)?;

    let reported = optimal_report(agent, rule)?;
    let choice = evaluate_choice(agent, task, epsilon)?.choice;
    let verdict = classify(choice, action.direction);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paid_task = if rng.gen_bool(0.5) { PaidTask::AbChoice } else { PaidTask::Elicitation };
    let (realized_action_taken, realized_payoff) = match paid_task {
        PaidTask::Elicitation => (false, None),
        PaidTask::AbChoice => {
            let take_a = match choice {
                Choice::PrefersA => true,
                Choice::PrefersB => false,
                Choice::Indifferent => rng.gen_bool(0.5),
            };
            let lottery = if take_a { &task.lottery_a } else { &task.lottery_b };
            let atom = draw_atom(lottery, rng.gen::<f64>());
            (atom.action == ActionTag::Influential, Some(atom.payoff.value()))
        }
    };

    Ok(SessionRecord { reported, choice, verdict, paid_task, realized_action_taken, realized_payoff })
}

fn draw_atom(lottery: &OutcomeLottery, u: f64) -> OutcomeAtom {
    let atoms = lottery.atoms();
    let mut cumulative = 0.0;
    for atom in atoms {
        cumulative += atom.prob;
        if u < cumulative {
            return *atom;
        }
    }
    *atoms.last().expect("lotteries are nonempty")
}

/// The two chords of the A/B picture on payoffs normalized to `[0, 1]`:
/// `E_μ(u(x̲)) → E_μ̂(u(x̄))` and `E_μ̂(u(x̲)) → E_μ(u(x̄))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chords {
    pub mu_at_lo: f64,
    pub mu_at_hi: f64,
    pub mu_hat_at_lo: f64,
    pub mu_hat_at_hi: f64,
}

impl Chords {
    pub fn new(agent: &Agent, x_lo: Payoff, x_hi: Payoff) -> Result<Self> {
        if x_lo >= x_hi {
            return Err(Error::InvalidArgument(format!("need x_lo < x_hi, got {x_lo} and {x_hi}")));
        }
        let e = |belief, x: Payoff| state_expectation(agent.utility(), belief, x.value());
        Ok(Chords {
            mu_at_lo: e(agent.mu(), x_lo)?,
            mu_at_hi: e(agent.mu(), x_hi)?,
            mu_hat_at_lo: e(agent.mu_hat(), x_lo)?,
            mu_hat_at_hi: e(agent.mu_hat(), x_hi)?,
        })
    }

    /// Height at normalized `t` of the chord rising to `E_μ̂(u(x̄))`.
    pub fn first(&self, t: f64) -> f64 {
        self.mu_at_lo + t * (self.mu_hat_at_hi - self.mu_at_lo)
    }

    /// Height at normalized `t` of the chord ending at `E_μ(u(x̄))`.
    pub fn second(&self, t: f64) -> f64 {
        self.mu_hat_at_lo + t * (self.mu_at_hi - self.mu_hat_at_lo)
    }

    /// Abscissa where the chords cross, `None` if they are parallel.
    pub fn intersection(&self) -> Option<f64> {
        let slope_gap = (self.mu_hat_at_hi - self.mu_at_lo) - (self.mu_at_hi - self.mu_hat_at_lo);
        if slope_gap.abs() < PARALLEL_TOL {
            return None;
        }
        Some((self.mu_hat_at_lo - self.mu_at_lo) / slope_gap)
    }
}

/// Where the two chords of the A/B picture cross on the normalized payoff
/// axis. For `μ̂ > μ` with `E_μ̂(u)` above `E_μ(u)` at the endpoints, a
/// crossing left of ½ goes with preferring A.
pub fn chord_intersection(agent: &Agent, x_lo: Payoff, x_hi: Payoff) -> Result<Option<f64>> {
    Ok(Chords::new(agent, x_lo, x_hi)?.intersection())
}
