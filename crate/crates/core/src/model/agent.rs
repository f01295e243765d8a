use serde::Serialize;

use super::{vnm_value, Act, ActionTag, Belief, OutcomeLottery, StateUtility};
use crate::error::{Error, Result};

/// An SEU agent: actual belief `μ`, the belief `μ̂` induced by the
/// influential action, and state-dependent utilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent {
    mu: Belief,
    mu_hat: Belief,
    utility: StateUtility,
}

impl Agent {
    pub fn new(mu: f64, mu_hat: f64, utility: StateUtility) -> Result<Self> {
        let mu = Belief::interior("mu", mu)?;
        let mu_hat = Belief::interior("mu_hat", mu_hat)?;
        if mu == mu_hat {
            return Err(Error::InvalidArgument(format!(
                "mu_hat must differ from mu, both are {mu}"
            )));
        }
        Ok(Agent { mu, mu_hat, utility })
    }

    pub fn mu(&self) -> Belief {
        self.mu
    }

    pub fn mu_hat(&self) -> Belief {
        self.mu_hat
    }

    pub fn utility(&self) -> &StateUtility {
        &self.utility
    }

    /// Same agent, different influenced belief.
    pub fn with_mu_hat(&self, mu_hat: f64) -> Result<Self> {
        Agent::new(self.mu.value(), mu_hat, self.utility.clone())
    }

    /// The agent written in the representation `(ũ, μ̃)` of
    /// [`rescale_representation`], with `μ̂` carried along the same odds map.
    ///
    /// Act rankings under either action are preserved (SEU values under the
    /// default action are identical, those under the influential action are
    /// multiplied by a positive constant). Rankings of lotteries that mix the
    /// two actions are not preserved unless `μ̃ = μ`.
    pub fn rescaled(&self, mu_tilde: f64) -> Result<Self> {
        let (utility, mu_tilde) = rescale_representation(&self.utility, self.mu, mu_tilde)?;
        let odds = self.mu_hat.odds() * mu_tilde.odds() / self.mu.odds();
        Agent::new(mu_tilde.value(), odds / (1.0 + odds), utility)
    }
}

/// `E_ν(u(f)) = (1 − ν)·⟨f(θ₀), u₀⟩ + ν·⟨f(θ₁), u₁⟩`.
pub fn seu(utility: &StateUtility, belief: Belief, act: &Act) -> Result<f64> {
    let nu = belief.value();
    let v0 = vnm_value(&act.at_theta0, &utility.u0)?;
    let v1 = vnm_value(&act.at_theta1, &utility.u1)?;
    Ok((1.0 - nu) * v0 + nu * v1)
}

/// SEU of an act under the agent's actual belief.
pub fn seu_act(agent: &Agent, act: &Act) -> Result<f64> {
    seu(&agent.utility, agent.mu, act)
}

/// `E_ν(u(x)) = (1 − ν)·u₀(x) + ν·u₁(x)` for a sure payoff.
pub fn state_expectation(utility: &StateUtility, belief: Belief, x: f64) -> Result<f64> {
    let nu = belief.value();
    Ok((1.0 - nu) * utility.u0.eval(x)? + nu * utility.u1.eval(x)?)
}

/// Value of a lottery over (payoff, action) pairs. The action only selects
/// the belief (`μ` or `μ̂`) under which the payoff is evaluated; utilities
/// never depend on it.
pub fn seu_outcome_lottery(agent: &Agent, lot: &OutcomeLottery) -> Result<f64> {
    let mut acc = 0.0;
    for atom in lot.atoms().iter().filter(|a| a.prob > 0.0) {
        let belief = match atom.action {
            ActionTag::Default => agent.mu,
            ActionTag::Influential => agent.mu_hat,
        };
        acc += atom.prob * state_expectation(&agent.utility, belief, atom.payoff.value())?;
    }
    Ok(acc)
}

/// The alternative representation `(ũ, μ̃)` of the same act preferences:
/// `ũ₀ = (1 − μ)/(1 − μ̃)·u₀` and `ũ₁ = μ/μ̃·u₁`.
pub fn rescale_representation(
    utility: &StateUtility,
    mu: Belief,
    mu_tilde: f64,
) -> Result<(StateUtility, Belief)> {
    if !mu.is_interior() {
        return Err(Error::InvalidArgument(format!("mu = {mu} must lie strictly inside (0, 1)")));
    }
    if !(mu_tilde > 0.0 && mu_tilde < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mu_tilde = {mu_tilde} must lie strictly inside (0, 1)"
        )));
    }
    let mu_v = mu.value();
    let c0 = (1.0 - mu_v) / (1.0 - mu_tilde);
    let c1 = mu_v / mu_tilde;
    let rescaled = StateUtility::new(utility.u0.scaled(c0)?, utility.u1.scaled(c1)?)?;
    Ok((rescaled, Belief::interior("mu_tilde", mu_tilde)?))
}
