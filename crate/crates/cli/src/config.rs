//! TOML run configuration.
//!
//! The document is parsed into plain serde structs, then every core invariant
//! is checked while building [`RunConfig`]. Nothing downstream sees an
//! unvalidated value.

use std::path::Path;

use misreport_core::identification::{Direction, InfluentialAction, DEFAULT_EPSILON};
use misreport_core::mechanisms::{RuleKind, ScoringRule};
use misreport_core::model::{Agent, Payoff, StateUtility, UtilityFamily, UtilityFn};
use misreport_core::oracle::{SweepConfig, SweepFamily};
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    seed: Option<u64>,
    agent: Option<RawAgent>,
    rule: Option<RawRule>,
    #[serde(default)]
    task: RawTask,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    mu: f64,
    mu_hat: f64,
    u0: UtilityFamily,
    u1: UtilityFamily,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    kind: RuleKind,
    #[serde(default)]
    x_lo: f64,
    #[serde(default = "one")]
    x_hi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    direction: Option<Direction>,
    label: Option<String>,
}

impl Default for RawTask {
    fn default() -> Self {
        RawTask { epsilon: DEFAULT_EPSILON, direction: None, label: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_agents: usize,
    seed: Option<u64>,
    families: Option<Vec<SweepFamily>>,
    mu_range: Option<(f64, f64)>,
    offset_range: Option<(f64, f64)>,
    rule_kinds: Option<Vec<RuleKind>>,
    grid_size: Option<usize>,
}

fn one() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub rule: ScoringRule,
    pub epsilon: f64,
    pub agent: Option<Agent>,
    /// Present whenever `agent` is. Taken from `task.direction` if given,
    /// otherwise read off the agent's beliefs.
    pub action: Option<InfluentialAction>,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version = {} is not supported, expected {SCHEMA_VERSION}",
                raw.schema_version
            )));
        }

        let (kind, x_lo, x_hi) = match raw.rule {
            Some(r) => (r.kind, r.x_lo, r.x_hi),
            None => (RuleKind::BinarizedQuadratic, 0.0, 1.0),
        };
        let x_lo = payoff("rule.x_lo", x_lo)?;
        let x_hi = payoff("rule.x_hi", x_hi)?;
        if x_lo >= x_hi {
            return Err(invalid(format!("rule.x_lo = {x_lo} must be below rule.x_hi = {x_hi}")));
        }
        let rule = ScoringRule::new(kind, x_lo, x_hi).map_err(section("rule"))?;

        let epsilon = raw.task.epsilon;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("task.epsilon = {epsilon} must be positive")));
        }

        let (agent, action) = match raw.agent {
            Some(a) => {
                let u0 = UtilityFn::new(a.u0, x_lo, x_hi).map_err(section("agent.u0"))?;
                let u1 = UtilityFn::new(a.u1, x_lo, x_hi).map_err(section("agent.u1"))?;
                let utility = StateUtility::new(u0, u1).map_err(section("agent"))?;
                let agent = Agent::new(a.mu, a.mu_hat, utility).map_err(section("agent"))?;
                let direction = raw.task.direction.unwrap_or_else(|| Direction::of(&agent));
                let label = raw.task.label.unwrap_or_else(|| "influential".to_string());
                let action = InfluentialAction::new(label, direction);
                action.check_against(&agent).map_err(section("task.direction"))?;
                (Some(agent), Some(action))
            }
            None => (None, None),
        };

        let sweep = match raw.sweep {
            Some(s) => {
                let mut config = SweepConfig::new(s.n_agents, s.seed.or(raw.seed).unwrap_or(0));
                if let Some(f) = s.families {
                    config.families = f;
                }
                if let Some(r) = s.mu_range {
                    config.mu_range = r;
                }
                if let Some(r) = s.offset_range {
                    config.offset_range = r;
                }
                if let Some(k) = s.rule_kinds {
                    config.rule_kinds = k;
                }
                if let Some(g) = s.grid_size {
                    config.grid_size = g;
                }
                config.payoff_pair = (x_lo, x_hi);
                config.epsilon = epsilon;
                config.validate().map_err(section("sweep"))?;
                Some(config)
            }
            None => None,
        };

        Ok(RunConfig { seed: raw.seed, rule, epsilon, agent, action, sweep })
    }
}

fn payoff(name: &str, x: f64) -> Result<Payoff, CliError> {
    Payoff::new(x).map_err(|e| invalid(format!("{name}: {e}")))
}

fn invalid(msg: String) -> CliError {
    CliError::Input(msg)
}

fn section(name: &'static str) -> impl Fn(misreport_core::Error) -> CliError {
    move |e| CliError::Input(format!("{name}: {e}"))
}
