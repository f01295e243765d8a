//! Brute-force cross-checks and seeded sweeps over random agents.
//!
//! Nothing here shares a search path with [`crate::mechanisms`]: the grid
//! oracle is exhaustive with no refinement and no unimodality assumption.
//! A sweep draws each agent from its own generator seeded with
//! `seed ^ index`, so results do not depend on evaluation order.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identification::{build_ab_task, classify, evaluate_choice, Choice, Direction, Verdict};
use crate::mechanisms::{
    closed_form_report, matching_probability, optimal_report, RuleKind, ScoringRule,
};
use crate::model::{
    marginal_gap_ratio, seu_act, Agent, Belief, Payoff, StateUtility, UtilityFamily, UtilityFn,
};

/// Smallest grid accepted by [`grid_optimal_report`].
pub const MIN_ORACLE_GRID: usize = 101;

/// Sampled agents whose gap ratio is this close to one are near-ties.
pub const NEAR_TIE_BAND: f64 = 1e-6;

/// Largest `|p − μ|` tolerated for a near-tie.
pub const NEAR_TIE_REPORT_TOL: f64 = 1e-6;

/// Largest `|U(A) − U(B)|` tolerated for a near-tie.
pub const NEAR_TIE_VALUE_TOL: f64 = 1e-9;

/// Per-step tolerance of [`supermodularity_scan`].
pub const SCAN_STEP_TOL: f64 = 1e-12;

const SCAN_SAMPLES: usize = 1001;
const MAX_RESAMPLES: usize = 100;
/// Sampled `μ̂` is clamped into `[MU_HAT_MARGIN, 1 − MU_HAT_MARGIN]`.
const MU_HAT_MARGIN: f64 = 1e-3;

/// Exhaustive arg max of the report objective over a uniform grid, ties to
/// the smallest report.
pub fn grid_optimal_report(agent: &Agent, rule: &ScoringRule, grid_size: usize) -> Result<Belief> {
    if grid_size < MIN_ORACLE_GRID {
        return Err(Error::InvalidArgument(format!(
            "oracle grid needs at least {MIN_ORACLE_GRID} points, got {grid_size}"
        )));
    }
    let step = 1.0 / (grid_size - 1) as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..grid_size {
        let r = i as f64 * step;
        let v = seu_act(agent, &rule.score_at(r)?)?;
        if v > best.1 {
            best = (r, v);
        }
    }
    Belief::new(best.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupermodularityClass {
    Increasing,
    Decreasing,
    Flat,
    NonMonotone,
}

impl SupermodularityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SupermodularityClass::Increasing => "increasing",
            SupermodularityClass::Decreasing => "decreasing",
            SupermodularityClass::Flat => "flat",
            SupermodularityClass::NonMonotone => "non_monotone",
        }
    }
}

impl fmt::Display for SupermodularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Shape of `u₁ − u₀` on `[x_lo, x_hi]` from `samples` evenly spaced points.
/// Steps within [`SCAN_STEP_TOL`] count as flat.
pub fn supermodularity_scan(
    utility: &StateUtility,
    x_lo: Payoff,
    x_hi: Payoff,
    samples: usize,
) -> Result<SupermodularityClass> {
    if samples < 3 {
        return Err(Error::InvalidArgument(format!("scan needs at least 3 samples, got {samples}")));
    }
    let (lo, hi) = (x_lo.value(), x_hi.value());
    if lo >= hi {
        return Err(Error::InvalidArgument(format!("need x_lo < x_hi, got {lo} and {hi}")));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    let gap = |i: usize| -> Result<f64> {
        let x = if i + 1 == samples { hi } else { lo + step * i as f64 };
        Ok(utility.u1.eval(x)? - utility.u0.eval(x)?)
    };
    let (mut up, mut down) = (false, false);
    let mut prev = gap(0)?;
    for i in 1..samples {
        let g = gap(i)?;
        let d = g - prev;
        up |= d > SCAN_STEP_TOL;
        down |= d < -SCAN_STEP_TOL;
        prev = g;
    }
    Ok(match (up, down) {
        (true, false) => SupermodularityClass::Increasing,
        (false, true) => SupermodularityClass::Decreasing,
        (false, false) => SupermodularityClass::Flat,
        (true, true) => SupermodularityClass::NonMonotone,
    })
}

/// How a sweep draws the utility pair of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    /// `a·x + b` at both states, independent parameters.
    Linear,
    /// `c₀ + c₁x + c₂x² + c₄x⁴`, nonnegative even coefficients, `c₁ ≥ 0.1`.
    Polynomial,
    /// `1 − e^(−λx)`.
    Exponential,
    /// `x^γ`.
    Power,
    /// Each state independently picks one of the four families above.
    Mixed,
    /// One draw from the four families, shared by both states.
    StateIndependent,
    /// One linear draw shared by both states.
    StateIndependentLinear,
}

impl SweepFamily {
    pub const ALL: [SweepFamily; 7] = [
        SweepFamily::Linear,
        SweepFamily::Polynomial,
        SweepFamily::Exponential,
        SweepFamily::Power,
        SweepFamily::Mixed,
        SweepFamily::StateIndependent,
        SweepFamily::StateIndependentLinear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepFamily::Linear => "linear",
            SweepFamily::Polynomial => "polynomial",
            SweepFamily::Exponential => "exponential",
            SweepFamily::Power => "power",
            SweepFamily::Mixed => "mixed",
            SweepFamily::StateIndependent => "state_independent",
            SweepFamily::StateIndependentLinear => "state_independent_linear",
        }
    }

    /// The families used when a sweep does not name any.
    pub fn default_mix() -> Vec<SweepFamily> {
        vec![
            SweepFamily::Linear,
            SweepFamily::Polynomial,
            SweepFamily::Exponential,
            SweepFamily::Power,
            SweepFamily::Mixed,
            SweepFamily::StateIndependent,
        ]
    }
}

impl fmt::Display for SweepFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SweepFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown utility family `{s}`")))
    }
}

const BASE_FAMILIES: [SweepFamily; 4] =
    [SweepFamily::Linear, SweepFamily::Polynomial, SweepFamily::Exponential, SweepFamily::Power];

fn draw_base(rng: &mut ChaCha8Rng, family: SweepFamily) -> UtilityFamily {
    match family {
        SweepFamily::Linear => UtilityFamily::Linear(rng.gen_range(0.1..=5.0), rng.gen_range(-2.0..=2.0)),
        SweepFamily::Polynomial => UtilityFamily::Polynomial(vec![
            rng.gen_range(0.0..=5.0),
            rng.gen_range(0.1..=5.0),
            rng.gen_range(0.0..=3.0),
            0.0,
            rng.gen_range(0.0..=3.0),
        ]),
        SweepFamily::Exponential => UtilityFamily::Exponential(1.0, rng.gen_range(0.2..=4.0)),
        SweepFamily::Power => UtilityFamily::Power(rng.gen_range(0.3..=3.0), rng.gen_range(0.0..=2.0)),
        _ => {
            let base = BASE_FAMILIES[rng.gen_range(0..BASE_FAMILIES.len())];
            draw_base(rng, base)
        }
    }
}

fn draw_pair(rng: &mut ChaCha8Rng, family: SweepFamily) -> (UtilityFamily, UtilityFamily) {
    match family {
        SweepFamily::StateIndependent => {
            let u = draw_base(rng, SweepFamily::Mixed);
            (u.clone(), u)
        }
        SweepFamily::StateIndependentLinear => {
            let u = draw_base(rng, SweepFamily::Linear);
            (u.clone(), u)
        }
        other => (draw_base(rng, other), draw_base(rng, other)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_agents: usize,
    pub seed: u64,
    pub families: Vec<SweepFamily>,
    /// Range of the actual belief `μ`.
    pub mu_range: (f64, f64),
    /// Range of `|μ̂ − μ|`; the sign is drawn separately, so both directions occur.
    pub offset_range: (f64, f64),
    pub payoff_pair: (Payoff, Payoff),
    pub rule_kinds: Vec<RuleKind>,
    pub grid_size: usize,
    pub epsilon: f64,
}

impl SweepConfig {
    pub fn new(n_agents: usize, seed: u64) -> Self {
        SweepConfig {
            n_agents,
            seed,
            families: SweepFamily::default_mix(),
            mu_range: (0.05, 0.95),
            offset_range: (0.01, 0.3),
            payoff_pair: (Payoff::new(0.0).expect("finite"), Payoff::new(1.0).expect("finite")),
            rule_kinds: vec![RuleKind::BinarizedQuadratic, RuleKind::BinarizedSpherical],
            grid_size: 10_001,
            epsilon: crate::identification::DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_agents == 0 {
            return bad("sweep needs at least one agent".into());
        }
        if self.families.is_empty() {
            return bad("sweep needs at least one utility family".into());
        }
        let (lo, hi) = self.mu_range;
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return bad(format!("mu_range [{lo}, {hi}] must be an interval inside (0, 1)"));
        }
        let (lo, hi) = self.offset_range;
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return bad(format!("offset_range [{lo}, {hi}] must be an interval of magnitudes in (0, 1)"));
        }
        if self.payoff_pair.0 >= self.payoff_pair.1 {
            return bad(format!("payoff pair ({}, {}) must be increasing", self.payoff_pair.0, self.payoff_pair.1));
        }
        if self.rule_kinds.is_empty() {
            return bad("sweep needs at least one rule kind".into());
        }
        for kind in &self.rule_kinds {
            if !matches!(kind, RuleKind::BinarizedQuadratic | RuleKind::BinarizedSpherical) {
                return bad(format!("sweeps run proper binarized rules only, got {kind}"));
            }
        }
        if self.grid_size < MIN_ORACLE_GRID {
            return bad(format!("grid_size must be at least {MIN_ORACLE_GRID}, got {}", self.grid_size));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledAgent {
    pub agent: Agent,
    pub rule: ScoringRule,
    pub family: SweepFamily,
}

/// Draws agent `index` of a sweep. Invalid draws are retried a bounded
/// number of times from the same stream.
pub fn sample_agent(config: &SweepConfig, index: usize) -> Result<SampledAgent> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ index as u64);
    let (lo, hi) = config.payoff_pair;
    let mut last_err = None;
    for _ in 0..MAX_RESAMPLES {
        let family = config.families[rng.gen_range(0..config.families.len())];
        let (f0, f1) = draw_pair(&mut rng, family);
        let mu = rng.gen_range(config.mu_range.0..=config.mu_range.1);
        let magnitude = rng.gen_range(config.offset_range.0..=config.offset_range.1);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mu_hat = (mu + sign * magnitude).clamp(MU_HAT_MARGIN, 1.0 - MU_HAT_MARGIN);
        let kind = config.rule_kinds[rng.gen_range(0..config.rule_kinds.len())];

        let built = UtilityFn::new(f0, lo, hi)
            .and_then(|u0| Ok((u0, UtilityFn::new(f1, lo, hi)?)))
            .and_then(|(u0, u1)| StateUtility::new(u0, u1))
            .and_then(|su| Agent::new(mu, mu_hat, su))
            .and_then(|agent| Ok((agent, ScoringRule::new(kind, lo, hi)?)));
        match built {
            Ok((agent, rule)) => return Ok(SampledAgent { agent, rule, family }),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::InvalidArgument(format!(
        "agent {index}: no valid draw in {MAX_RESAMPLES} attempts (last: {})",
        last_err.expect("at least one attempt")
    )))
}

/// Everything a sweep records about one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentOutcome {
    pub mu: f64,
    pub mu_hat: f64,
    pub ratio: f64,
    pub p_solver: f64,
    pub p_closed: f64,
    pub p_grid: f64,
    pub q_match: f64,
    pub u_a: f64,
    pub u_b: f64,
    pub choice: Choice,
    pub verdict: Verdict,
    pub theorem_ok: bool,
    pub near_tie: bool,
    pub scan: SupermodularityClass,
    pub rule: RuleKind,
}

/// Runs every solver and oracle on one agent and checks that the A/B
/// verdict agrees with the direction of the report.
///
/// Outside the near-tie band the verdict must equal the sign of `p − μ`.
/// Inside it the report must be within [`NEAR_TIE_REPORT_TOL`] of `μ` and the
/// lotteries within [`NEAR_TIE_VALUE_TOL`] of each other.
pub fn evaluate_agent(agent: &Agent, rule: &ScoringRule, grid_size: usize, epsilon: f64) -> Result<AgentOutcome> {
    let (lo, hi) = (rule.bad_payoff(), rule.prize());
    let mu = agent.mu();
    let ratio = marginal_gap_ratio(agent.utility(), lo, hi)?;
    let p_solver = optimal_report(agent, rule)?;
    let p_grid = grid_optimal_report(agent, rule, grid_size)?;
    let p_closed = closed_form_report(agent, lo, hi)?;
    let q_match = matching_probability(agent, lo, hi)?;
    let ev = evaluate_choice(agent, &build_ab_task(lo, hi)?, epsilon)?;
    let verdict = classify(ev.choice, Direction::of(agent));
    let scan = supermodularity_scan(agent.utility(), lo, hi, SCAN_SAMPLES)?;

    let near_tie = (ratio - 1.0).abs() <= NEAR_TIE_BAND;
    let theorem_ok = if near_tie {
        (p_solver.value() - mu.value()).abs() <= NEAR_TIE_REPORT_TOL
            && (ev.u_a - ev.u_b).abs() <= NEAR_TIE_VALUE_TOL
    } else {
        verdict == Verdict::from_report(p_solver, mu)
    };

    Ok(AgentOutcome {
        mu: mu.value(),
        mu_hat: agent.mu_hat().value(),
        ratio,
        p_solver: p_solver.value(),
        p_closed: p_closed.value(),
        p_grid: p_grid.value(),
        q_match: q_match.value(),
        u_a: ev.u_a,
        u_b: ev.u_b,
        choice: ev.choice,
        verdict,
        theorem_ok,
        near_tie,
        scan,
        rule: rule.kind(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub n_total: usize,
    pub n_over: usize,
    pub n_under: usize,
    pub n_truthful: usize,
    pub n_theorem_violations: usize,
    /// Agents inside the near-tie band; their check is the near-tie one.
    pub n_near_tie: usize,
    pub max_closed_form_gap: f64,
    pub max_matching_gap: f64,
    /// Largest `|p_solver − p_grid|`.
    pub max_grid_gap: f64,
}

impl SweepStats {
    pub fn tally<'a>(outcomes: impl IntoIterator<Item = &'a AgentOutcome>) -> Self {
        outcomes.into_iter().fold(SweepStats::default(), |mut s, o| {
            s.n_total += 1;
            match o.verdict {
                Verdict::OverReported => s.n_over += 1,
                Verdict::UnderReported => s.n_under += 1,
                Verdict::Truthful => s.n_truthful += 1,
            }
            s.n_theorem_violations += usize::from(!o.theorem_ok);
            s.n_near_tie += usize::from(o.near_tie);
            s.max_closed_form_gap = s.max_closed_form_gap.max((o.p_solver - o.p_closed).abs());
            s.max_matching_gap = s.max_matching_gap.max((o.q_match - o.p_closed).abs());
            s.max_grid_gap = s.max_grid_gap.max((o.p_solver - o.p_grid).abs());
            s
        })
    }
}

impl fmt::Display for SweepStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "agents            {}", self.n_total)?;
        writeln!(f, "over_reported     {}", self.n_over)?;
        writeln!(f, "under_reported    {}", self.n_under)?;
        writeln!(f, "truthful          {}", self.n_truthful)?;
        writeln!(f, "near ties         {}", self.n_near_tie)?;
        writeln!(f, "violations        {}", self.n_theorem_violations)?;
        writeln!(f, "max |p - closed|  {:.3e}", self.max_closed_form_gap)?;
        writeln!(f, "max |q - closed|  {:.3e}", self.max_matching_gap)?;
        write!(f, "max |p - grid|    {:.3e}", self.max_grid_gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub stats: SweepStats,
    /// One entry per agent, in index order.
    pub outcomes: Vec<AgentOutcome>,
}

/// Samples and evaluates `config.n_agents` agents. Deterministic in the
/// config, whatever the thread count.
pub fn theorem_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let outcomes = (0..config.n_agents)
        .into_par_iter()
        .map(|i| {
            let s = sample_agent(config, i)?;
            evaluate_agent(&s.agent, &s.rule, config.grid_size, config.epsilon)
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = SweepStats::tally(&outcomes);
    Ok(SweepReport { stats, outcomes })
}
