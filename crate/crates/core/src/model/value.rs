use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A monetary payoff. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Payoff(f64);

impl Payoff {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Payoff(value))
        } else {
            Err(Error::InvalidArgument(format!("payoff {value} is not finite")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Payoff {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Payoff::new(value)
    }
}

impl From<Payoff> for f64 {
    fn from(p: Payoff) -> f64 {
        p.0
    }
}

impl fmt::Display for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Probability attached to `θ₁`.
///
/// Used for actual and influenced beliefs, for reports and for matching
/// probabilities alike.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Belief(f64);

impl Belief {
    pub fn new(p: f64) -> Result<Self> {
        Self::named("belief", p)
    }

    /// Like [`Belief::new`], with `name` quoted in the error.
    pub fn named(name: &'static str, p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Belief(p))
        } else {
            Err(Error::BeliefOutOfRange { name, value: p })
        }
    }

    /// A belief in the open interval `(0, 1)`.
    pub fn interior(name: &'static str, p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Belief(p))
        } else {
            Err(Error::BeliefNotInterior { name, value: p })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }

    /// `p / (1 − p)`.
    pub fn odds(self) -> f64 {
        self.0 / (1.0 - self.0)
    }
}

impl TryFrom<f64> for Belief {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Belief::new(value)
    }
}

impl From<Belief> for f64 {
    fn from(b: Belief) -> f64 {
        b.0
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
