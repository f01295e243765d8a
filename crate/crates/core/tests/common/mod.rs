#![allow(dead_code)]

use misreport_core::model::{Agent, Payoff, StateUtility, UtilityFamily, UtilityFn};
use proptest::prelude::*;

pub fn pay(x: f64) -> Payoff {
    Payoff::new(x).unwrap()
}

pub fn unit(family: UtilityFamily) -> UtilityFn {
    UtilityFn::new(family, pay(0.0), pay(1.0)).unwrap()
}

pub fn figure_agent() -> Agent {
    let su = StateUtility::new(
        unit(UtilityFamily::Polynomial(vec![0.0, 0.0, 0.5])),
        unit(UtilityFamily::Polynomial(vec![4.0, 0.0, 2.0])),
    )
    .unwrap();
    Agent::new(1.0 / 3.0, 2.0 / 3.0, su).unwrap()
}

/// Strictly increasing families on `[0, 1]`.
pub fn family() -> impl Strategy<Value = UtilityFamily> {
    prop_oneof![
        (0.1..5.0f64, -2.0..2.0f64).prop_map(|(a, b)| UtilityFamily::Linear(a, b)),
        (0.0..5.0f64, 0.1..5.0f64, 0.0..3.0f64, 0.0..3.0f64)
            .prop_map(|(c0, c1, c2, c4)| UtilityFamily::Polynomial(vec![c0, c1, c2, 0.0, c4])),
        (0.2..4.0f64).prop_map(|rate| UtilityFamily::Exponential(1.0, rate)),
        (0.3..3.0f64).prop_map(|g| UtilityFamily::Power(g, 0.0)),
    ]
}

pub fn state_utility() -> impl Strategy<Value = StateUtility> {
    (family(), family()).prop_map(|(a, b)| StateUtility::new(unit(a), unit(b)).unwrap())
}

pub fn state_independent() -> impl Strategy<Value = StateUtility> {
    family().prop_map(|f| StateUtility::state_independent(unit(f)))
}

/// Agents with `μ ∈ [0.05, 0.95]` and `|μ̂ − μ| ∈ [0.01, 0.3]`, either side.
pub fn agent_with(utility: impl Strategy<Value = StateUtility>) -> impl Strategy<Value = Agent> {
    (utility, 0.05..0.95f64, 0.01..0.3f64, any::<bool>()).prop_map(|(u, mu, off, up)| {
        let mu_hat = if up { (mu + off).min(0.999) } else { (mu - off).max(0.001) };
        Agent::new(mu, mu_hat, u).unwrap()
    })
}

pub fn agent() -> impl Strategy<Value = Agent> {
    agent_with(state_utility())
}
