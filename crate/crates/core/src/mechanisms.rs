//! Scoring rules and the agent's best response to them.
//!
//! A binarized rule pays, at each state, a lottery over a bad payoff `x̲` and a
//! prize `x̄`; its winning probabilities are `π⁰_r` (at `θ₀`) and `π¹_r` (at
//! `θ₁`). With state-dependent utilities the agent maximizes
//!
//! ```text
//! (1 − μ)·(u₀(x̲) + π⁰_r·Δ₀) + μ·(u₁(x̲) + π¹_r·Δ₁),   Δ_k = u_k(x̄) − u_k(x̲)
//! ```
//!
//! which under any proper binarized rule is maximized at the belief `p` with
//! `p/(1 − p) = μ/(1 − μ) · Δ₁/Δ₀`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{seu_act, utility_gaps, Act, Agent, Belief, Payoff, SimpleLottery};
use crate::search::{bisect_increasing, golden_section_max};

/// Points in the dense report grid searched before refinement.
pub const REPORT_GRID: usize = 10_001;

/// Bracket width at which golden-section refinement stops.
pub const REFINE_TOL: f64 = 1e-9;

/// Bracket width at which the matching-probability bisection stops.
pub const MATCHING_TOL: f64 = 1e-12;

/// Slack below which two expected payments count as tied in the
/// properness check.
pub const PROPERNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    BinarizedQuadratic,
    BinarizedSpherical,
    NonbinarizedQuadratic,
    /// Improper; kept as a negative control for the properness check.
    BinarizedLinear,
}

impl RuleKind {
    pub const ALL: [RuleKind; 4] = [
        RuleKind::BinarizedQuadratic,
        RuleKind::BinarizedSpherical,
        RuleKind::NonbinarizedQuadratic,
        RuleKind::BinarizedLinear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::BinarizedQuadratic => "binarized_quadratic",
            RuleKind::BinarizedSpherical => "binarized_spherical",
            RuleKind::NonbinarizedQuadratic => "nonbinarized_quadratic",
            RuleKind::BinarizedLinear => "binarized_linear",
        }
    }

    pub fn is_binarized(self) -> bool {
        !matches!(self, RuleKind::NonbinarizedQuadratic)
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rule kind `{s}`")))
    }
}

/// A scoring rule paying in lotteries over `bad_payoff` and `prize`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoringRule {
    kind: RuleKind,
    bad_payoff: Payoff,
    prize: Payoff,
}

impl ScoringRule {
    pub fn new(kind: RuleKind, bad_payoff: Payoff, prize: Payoff) -> Result<Self> {
        if bad_payoff >= prize {
            return Err(Error::InvalidArgument(format!(
                "bad payoff {bad_payoff} must be below the prize {prize}"
            )));
        }
        Ok(ScoringRule { kind, bad_payoff, prize })
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn bad_payoff(&self) -> Payoff {
        self.bad_payoff
    }

    pub fn prize(&self) -> Payoff {
        self.prize
    }

    /// `(π⁰_r, π¹_r)`: the quadratic form of the rule for the non-binarized
    /// kind, where it is a payoff share rather than a winning probability.
    fn shares(&self, r: f64) -> (f64, f64) {
        match self.kind {
            RuleKind::BinarizedQuadratic | RuleKind::NonbinarizedQuadratic => {
                (1.0 - r * r, 1.0 - (1.0 - r) * (1.0 - r))
            }
            RuleKind::BinarizedSpherical => {
                // (1 − r, r)/‖(1 − r, r)‖ already spans [0, 1] as r does, so
                // the normalizing affine map is the identity.
                let norm = (r * r + (1.0 - r) * (1.0 - r)).sqrt();
                ((1.0 - r) / norm, r / norm)
            }
            RuleKind::BinarizedLinear => (1.0 - r, r),
        }
    }

    /// Winning probabilities `(π⁰_r, π¹_r)`; `None` for non-binarized rules.
    pub fn winning_probabilities(&self, r: Belief) -> Option<(f64, f64)> {
        self.kind.is_binarized().then(|| self.shares(r.value()))
    }

    /// The act `π_r` paid for the report `r`.
    pub fn score(&self, r: Belief) -> Act {
        let (s0, s1) = self.shares(r.value());
        let (lo, hi) = (self.bad_payoff, self.prize);
        if self.kind.is_binarized() {
            let lottery = |p: f64| SimpleLottery::binary(lo, hi, p.clamp(0.0, 1.0)).expect("clamped");
            Act::new(lottery(s0), lottery(s1))
        } else {
            let span = hi.value() - lo.value();
            let sure = |share: f64| {
                let x = (lo.value() + span * share).clamp(lo.value(), hi.value());
                SimpleLottery::degenerate(Payoff::new(x).expect("finite"))
            };
            Act::new(sure(s0), sure(s1))
        }
    }

    /// Like [`ScoringRule::score`] for a raw report, rejecting `r ∉ [0, 1]`.
    pub fn score_at(&self, r: f64) -> Result<Act> {
        Ok(self.score(Belief::named("report", r)?))
    }

    /// Expected payment at belief `mu` for report `r`: total winning
    /// probability for binarized rules, expected money otherwise.
    pub fn expected_payment(&self, mu: f64, r: f64) -> f64 {
        if self.kind.is_binarized() {
            let (p0, p1) = self.shares(r);
            (1.0 - mu) * p0 + mu * p1
        } else {
            let act = self.score(Belief::new(r).expect("report grid stays in [0, 1]"));
            (1.0 - mu) * act.at_theta0.expected_payoff() + mu * act.at_theta1.expected_payoff()
        }
    }

    /// `(π⁰_p − π⁰_r) / (π¹_r − π¹_p)`, the rate at which winning probability
    /// at `θ₀` is traded for winning probability at `θ₁` between reports
    /// `p` and `r`. Tends to `p/(1 − p)` as `r → p` for proper rules.
    pub fn incremental_ratio(&self, p: Belief, r: Belief) -> Option<f64> {
        let (p0, p1) = self.winning_probabilities(p)?;
        let (r0, r1) = self.winning_probabilities(r)?;
        let den = r1 - p1;
        (den != 0.0).then(|| (p0 - r0) / den)
    }
}

/// A report that pays at least as much as the truth at belief `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub mu: f64,
    pub report: f64,
    /// Expected payment at `report` minus expected payment at `mu`.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropernessReport {
    pub rule: RuleKind,
    pub grid_size: usize,
    pub is_proper: bool,
    pub counterexamples: Vec<Counterexample>,
}

/// Grid check of properness: for every belief `μ` on a uniform grid, the
/// report `r = μ` must beat every other grid report by more than
/// [`PROPERNESS_TOL`].
pub fn check_properness(rule: &ScoringRule, grid_size: usize) -> Result<PropernessReport> {
    if grid_size < 3 {
        return Err(Error::InvalidArgument(format!("grid size must be at least 3, got {grid_size}")));
    }
    let step = 1.0 / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 * step).collect();
    let mut counterexamples = Vec::new();
    let mut payments = vec![0.0; grid_size];
    for (i, &mu) in grid.iter().enumerate() {
        for (slot, &r) in payments.iter_mut().zip(&grid) {
            *slot = rule.expected_payment(mu, r);
        }
        let truthful = payments[i];
        let best = payments
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(None::<(usize, f64)>, |best, (j, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((j, v)),
            });
        if let Some((j, v)) = best {
            if v >= truthful - PROPERNESS_TOL {
                counterexamples.push(Counterexample { mu, report: grid[j], gain: v - truthful });
            }
        }
    }
    Ok(PropernessReport {
        rule: rule.kind,
        grid_size,
        is_proper: counterexamples.is_empty(),
        counterexamples,
    })
}

fn report_value(agent: &Agent, rule: &ScoringRule, r: f64) -> Result<f64> {
    seu_act(agent, &rule.score(Belief::named("report", r)?))
}

/// The agent's best report: dense grid search over [`REPORT_GRID`] reports,
/// then golden-section refinement on the cell pair around the grid maximizer.
/// Ties go to the smallest report.
///
/// The rule is assumed proper; the objective is then unimodal and the
/// refined point cannot leave the bracketing cells or do worse than the grid.
pub fn optimal_report(agent: &Agent, rule: &ScoringRule) -> Result<Belief> {
    let n = REPORT_GRID;
    let step = 1.0 / (n - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..n {
        let v = report_value(agent, rule, i as f64 * step)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let (i, grid_value) = best;
    let grid_r = i as f64 * step;
    let a = i.saturating_sub(1) as f64 * step;
    let b = ((i + 1).min(n - 1)) as f64 * step;
    let refined = golden_section_max(
        |r| report_value(agent, rule, r).unwrap_or(f64::NAN),
        a,
        b,
        REFINE_TOL,
    );
    let refined_value = report_value(agent, rule, refined)?;

    let slack = 1e-12 * (1.0 + grid_value.abs());
    if (refined - grid_r).abs() > step || refined_value.is_nan() || refined_value < grid_value - slack {
        return Err(Error::Internal(format!(
            "report objective is not unimodal: grid maximizer {grid_r} ({grid_value}), \
             refined {refined} ({refined_value})"
        )));
    }
    let p = if refined_value > grid_value || (refined_value == grid_value && refined < grid_r) {
        refined
    } else {
        grid_r
    };
    Belief::new(p)
}

/// `p = μΔ₁ / (μΔ₁ + (1 − μ)Δ₀)`, the best report under every proper
/// binarized rule paying `x_lo` or `x_hi`.
pub fn closed_form_report(agent: &Agent, x_lo: Payoff, x_hi: Payoff) -> Result<Belief> {
    let (d0, d1) = utility_gaps(agent.utility(), x_lo, x_hi)?;
    let mu = agent.mu().value();
    Belief::new(mu * d1 / (mu * d1 + (1.0 - mu) * d0))
}

/// The probability `q*` at which the agent is indifferent between the bet
/// paying `x_hi` at `θ₁` (and `x_lo` at `θ₀`) and a state-independent
/// lottery paying `x_hi` with probability `q*`. Found by bisection.
pub fn matching_probability(agent: &Agent, x_lo: Payoff, x_hi: Payoff) -> Result<Belief> {
    if x_lo >= x_hi {
        return Err(Error::InvalidArgument(format!("need x_lo < x_hi, got {x_lo} and {x_hi}")));
    }
    let bet = Act::new(SimpleLottery::degenerate(x_lo), SimpleLottery::degenerate(x_hi));
    let bet_value = seu_act(agent, &bet)?;
    let excess = |q: f64| -> Result<f64> {
        let chance = Act::constant(SimpleLottery::binary(x_lo, x_hi, q)?);
        Ok(seu_act(agent, &chance)? - bet_value)
    };
    // Fail early on domain errors; inside the loop they cannot occur.
    let (g0, g1) = (excess(0.0)?, excess(1.0)?);
    if !(g0 <= 0.0 && g1 >= 0.0) {
        return Err(Error::Internal(format!(
            "matching task has no interior indifference point ({g0}, {g1})"
        )));
    }
    let q = bisect_increasing(|q| excess(q).unwrap_or(f64::NAN), 0.0, 1.0, MATCHING_TOL);
    Belief::new(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StateUtility, UtilityFamily, UtilityFn};

    fn pay(x: f64) -> Payoff {
        Payoff::new(x).unwrap()
    }

    fn b(x: f64) -> Belief {
        Belief::new(x).unwrap()
    }

    fn unit(family: UtilityFamily) -> UtilityFn {
        UtilityFn::new(family, pay(0.0), pay(1.0)).unwrap()
    }

    fn rule(kind: RuleKind) -> ScoringRule {
        ScoringRule::new(kind, pay(0.0), pay(1.0)).unwrap()
    }

    fn agent(mu: f64, u0: UtilityFamily, u1: UtilityFamily) -> Agent {
        let mu_hat = if mu < 0.5 { mu + 0.2 } else { mu - 0.2 };
        Agent::new(mu, mu_hat, StateUtility::new(unit(u0), unit(u1)).unwrap()).unwrap()
    }

    fn figure_agent() -> Agent {
        let su = StateUtility::new(
            unit(UtilityFamily::Polynomial(vec![0.0, 0.0, 0.5])),
            unit(UtilityFamily::Polynomial(vec![4.0, 0.0, 2.0])),
        )
        .unwrap();
        Agent::new(1.0 / 3.0, 2.0 / 3.0, su).unwrap()
    }

    #[test]
    fn quadratic_winning_probabilities() {
        let q = rule(RuleKind::BinarizedQuadratic);
        assert_eq!(q.winning_probabilities(b(0.0)), Some((1.0, 0.0)));
        assert_eq!(q.winning_probabilities(b(0.5)), Some((0.75, 0.75)));
        let (p0, p1) = q.winning_probabilities(b(2.0 / 3.0)).unwrap();
        assert!((p0 - 5.0 / 9.0).abs() < 1e-15);
        assert!((p1 - 8.0 / 9.0).abs() < 1e-15);
        assert!(rule(RuleKind::NonbinarizedQuadratic).winning_probabilities(b(0.5)).is_none());
    }

    #[test]
    fn score_acts_are_supported_on_two_payoffs() {
        for kind in [RuleKind::BinarizedQuadratic, RuleKind::BinarizedSpherical, RuleKind::BinarizedLinear] {
            let rule = ScoringRule::new(kind, pay(2.0), pay(7.0)).unwrap();
            for i in 0..=50 {
                let act = rule.score(b(i as f64 / 50.0));
                for lot in [&act.at_theta0, &act.at_theta1] {
                    assert!(lot.atoms().iter().all(|a| a.payoff == pay(2.0) || a.payoff == pay(7.0)));
                    let win = lot.prob_of(pay(7.0));
                    assert!((0.0..=1.0).contains(&win));
                }
            }
        }
    }

    #[test]
    fn spherical_values() {
        let s = rule(RuleKind::BinarizedSpherical);
        assert_eq!(s.winning_probabilities(b(0.0)), Some((1.0, 0.0)));
        assert_eq!(s.winning_probabilities(b(1.0)), Some((0.0, 1.0)));
        let (p0, p1) = s.winning_probabilities(b(0.5)).unwrap();
        assert!((p0 - 0.5f64.sqrt()).abs() < 1e-15 && (p1 - p0).abs() < 1e-15);
    }

    #[test]
    fn nonbinarized_pays_sure_amounts() {
        let nb = ScoringRule::new(RuleKind::NonbinarizedQuadratic, pay(10.0), pay(20.0)).unwrap();
        let act = nb.score(b(0.5));
        assert_eq!(act.at_theta0, SimpleLottery::degenerate(pay(17.5)));
        assert_eq!(act.at_theta1, SimpleLottery::degenerate(pay(17.5)));
        let act = nb.score(b(1.0));
        assert_eq!(act.at_theta0, SimpleLottery::degenerate(pay(10.0)));
        assert_eq!(act.at_theta1, SimpleLottery::degenerate(pay(20.0)));
    }

    #[test]
    fn report_out_of_range() {
        assert!(rule(RuleKind::BinarizedQuadratic).score_at(1.5).is_err());
        assert!(rule(RuleKind::BinarizedQuadratic).score_at(-0.1).is_err());
        assert!(ScoringRule::new(RuleKind::BinarizedQuadratic, pay(1.0), pay(1.0)).is_err());
    }

    #[test]
    fn properness_verdicts() {
        for kind in [RuleKind::BinarizedQuadratic, RuleKind::BinarizedSpherical, RuleKind::NonbinarizedQuadratic] {
            let report = check_properness(&rule(kind), 1001).unwrap();
            assert!(report.is_proper, "{kind}: {:?}", report.counterexamples.first());
        }
        let report = check_properness(&rule(RuleKind::BinarizedLinear), 1001).unwrap();
        assert!(!report.is_proper);
        assert_eq!(report.counterexamples.len(), 999);
        let low = report.counterexamples.iter().find(|c| (c.mu - 0.2).abs() < 1e-12).unwrap();
        assert_eq!(low.report, 0.0);
        let high = report.counterexamples.iter().find(|c| (c.mu - 0.8).abs() < 1e-12).unwrap();
        assert_eq!(high.report, 1.0);
        assert!(check_properness(&rule(RuleKind::BinarizedQuadratic), 2).is_err());
    }

    #[test]
    fn optimal_report_examples() {
        let same = agent(0.37, UtilityFamily::Exponential(1.0, 2.0), UtilityFamily::Exponential(1.0, 2.0));
        let p = optimal_report(&same, &rule(RuleKind::BinarizedQuadratic)).unwrap();
        assert!((p.value() - 0.37).abs() < 1e-6);

        let p = optimal_report(&figure_agent(), &rule(RuleKind::BinarizedQuadratic)).unwrap();
        assert!((p.value() - 2.0 / 3.0).abs() < 1e-6);

        let lin = agent(0.5, UtilityFamily::Linear(1.0, 0.0), UtilityFamily::Linear(2.0, 0.0));
        let p = optimal_report(&lin, &rule(RuleKind::BinarizedQuadratic)).unwrap();
        assert!((p.value() - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_examples() {
        let (lo, hi) = (pay(0.0), pay(1.0));
        let same = agent(0.42, UtilityFamily::Power(0.5, 0.0), UtilityFamily::Power(0.5, 0.0));
        assert!((closed_form_report(&same, lo, hi).unwrap().value() - 0.42).abs() < 1e-15);
        assert!((closed_form_report(&figure_agent(), lo, hi).unwrap().value() - 2.0 / 3.0).abs() < 1e-15);
        let sub = agent(0.9, UtilityFamily::Linear(2.0, 0.0), UtilityFamily::Linear(1.0, 0.0));
        assert!((closed_form_report(&sub, lo, hi).unwrap().value() - 9.0 / 11.0).abs() < 1e-15);
        let p = optimal_report(&sub, &rule(RuleKind::BinarizedQuadratic)).unwrap();
        assert!((p.value() - 9.0 / 11.0).abs() < 1e-6);
    }

    #[test]
    fn matching_probability_examples() {
        let (lo, hi) = (pay(0.0), pay(1.0));
        let same = agent(0.37, UtilityFamily::Linear(3.0, 1.0), UtilityFamily::Linear(3.0, 1.0));
        assert!((matching_probability(&same, lo, hi).unwrap().value() - 0.37).abs() < 1e-9);
        assert!((matching_probability(&figure_agent(), lo, hi).unwrap().value() - 2.0 / 3.0).abs() < 1e-9);
        let sub = agent(0.9, UtilityFamily::Linear(2.0, 0.0), UtilityFamily::Linear(1.0, 0.0));
        assert!((matching_probability(&sub, lo, hi).unwrap().value() - 9.0 / 11.0).abs() < 1e-9);
        assert!(matching_probability(&sub, hi, lo).is_err());
    }

    #[test]
    fn spherical_rule_gives_same_report() {
        let a = figure_agent();
        let p = optimal_report(&a, &rule(RuleKind::BinarizedSpherical)).unwrap();
        assert!((p.value() - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn risk_neutral_nonbinarized_matches_closed_form() {
        // linear utilities at both states: the non-binarized quadratic rule
        // distorts exactly like a binarized one
        let a = agent(0.3, UtilityFamily::Linear(1.5, 0.2), UtilityFamily::Linear(0.6, 1.0));
        let p = optimal_report(&a, &rule(RuleKind::NonbinarizedQuadratic)).unwrap();
        let closed = closed_form_report(&a, pay(0.0), pay(1.0)).unwrap();
        assert!((p.value() - closed.value()).abs() < 1e-6);
    }

    #[test]
    fn side_limits_of_incremental_ratio() {
        let q = rule(RuleKind::BinarizedQuadratic);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let target = p / (1.0 - p);
            for r in [p - 1e-5, p + 1e-5] {
                let ratio = q.incremental_ratio(b(p), b(r)).unwrap();
                assert!(((ratio - target) / target).abs() < 1e-3, "p = {p}, r = {r}");
            }
        }
    }

    #[test]
    fn rule_kind_parsing() {
        for kind in RuleKind::ALL {
            assert_eq!(kind.as_str().parse::<RuleKind>().unwrap(), kind);
        }
        assert!("brier".parse::<RuleKind>().is_err());
    }
}
