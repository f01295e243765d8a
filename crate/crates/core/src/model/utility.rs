use serde::{Deserialize, Serialize};

use super::{Payoff, MONOTONE_SAMPLES};
use crate::error::{Error, Result};

/// Closed parametric families of Bernoulli utilities.
///
/// Serialized as `{ family = "...", params = [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum UtilityFamily {
    /// `a·x + b`
    Linear(f64, f64),
    /// `Σ c_k·x^k`, coefficients from the constant term upward.
    Polynomial(Vec<f64>),
    /// `scale·(1 − e^(−rate·x))`
    Exponential(f64, f64),
    /// `(x + shift)^exponent`
    Power(f64, f64),
}

impl UtilityFamily {
    pub fn name(&self) -> &'static str {
        match self {
            UtilityFamily::Linear(..) => "linear",
            UtilityFamily::Polynomial(_) => "polynomial",
            UtilityFamily::Exponential(..) => "exponential",
            UtilityFamily::Power(..) => "power",
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            UtilityFamily::Linear(a, b) => a * x + b,
            UtilityFamily::Polynomial(coeffs) => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            UtilityFamily::Exponential(scale, rate) => scale * -(-rate * x).exp_m1(),
            UtilityFamily::Power(exponent, shift) => (x + shift).powf(*exponent),
        }
    }
}

/// A strictly increasing utility on a closed payoff interval, optionally
/// composed with a positive affine map `scale·f(x) + offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityFn {
    family: UtilityFamily,
    lo: f64,
    hi: f64,
    scale: f64,
    offset: f64,
}

impl UtilityFn {
    /// Builds and validates a utility on `[lo, hi]`: it must be finite and
    /// strictly increasing across [`MONOTONE_SAMPLES`] evenly spaced points.
    pub fn new(family: UtilityFamily, lo: Payoff, hi: Payoff) -> Result<Self> {
        Self::with_affine(family, lo, hi, 1.0, 0.0)
    }

    fn with_affine(family: UtilityFamily, lo: Payoff, hi: Payoff, scale: f64, offset: f64) -> Result<Self> {
        let (lo, hi) = (lo.value(), hi.value());
        if lo >= hi {
            return Err(Error::InvalidArgument(format!("utility domain [{lo}, {hi}] is empty")));
        }
        if !(scale.is_finite() && scale > 0.0 && offset.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "affine map needs finite scale > 0 and finite offset, got scale {scale}, offset {offset}"
            )));
        }
        let u = UtilityFn { family, lo, hi, scale, offset };
        u.check_monotone()?;
        Ok(u)
    }

    fn check_monotone(&self) -> Result<()> {
        let step = (self.hi - self.lo) / (MONOTONE_SAMPLES - 1) as f64;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..MONOTONE_SAMPLES {
            let x = if i + 1 == MONOTONE_SAMPLES { self.hi } else { self.lo + step * i as f64 };
            let v = self.raw(x);
            if !v.is_finite() || v <= prev {
                return Err(Error::NotIncreasing { lo: self.lo, hi: self.hi, at: x });
            }
            prev = v;
        }
        Ok(())
    }

    #[inline]
    fn raw(&self, x: f64) -> f64 {
        self.scale * self.family.eval(x) + self.offset
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < self.lo || x > self.hi {
            return Err(Error::OutOfDomain { x, lo: self.lo, hi: self.hi });
        }
        Ok(self.raw(x))
    }

    pub fn family(&self) -> &UtilityFamily {
        &self.family
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `c·u` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let lo = Payoff::new(self.lo)?;
        let hi = Payoff::new(self.hi)?;
        Self::with_affine(self.family.clone(), lo, hi, self.scale * c, self.offset * c)
    }

    /// `u + k`.
    pub fn shifted(&self, k: f64) -> Result<Self> {
        let lo = Payoff::new(self.lo)?;
        let hi = Payoff::new(self.hi)?;
        Self::with_affine(self.family.clone(), lo, hi, self.scale, self.offset + k)
    }
}

/// The pair `(u₀, u₁)` on a common payoff domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateUtility {
    pub u0: UtilityFn,
    pub u1: UtilityFn,
}

impl StateUtility {
    pub fn new(u0: UtilityFn, u1: UtilityFn) -> Result<Self> {
        if u0.domain() != u1.domain() {
            return Err(Error::InvalidArgument(format!(
                "u0 domain {:?} differs from u1 domain {:?}",
                u0.domain(),
                u1.domain()
            )));
        }
        Ok(StateUtility { u0, u1 })
    }

    /// Same utility at both states.
    pub fn state_independent(u: UtilityFn) -> Self {
        StateUtility { u0: u.clone(), u1: u }
    }

    pub fn is_state_independent(&self) -> bool {
        self.u0 == self.u1
    }

    pub fn domain(&self) -> (f64, f64) {
        self.u0.domain()
    }
}

/// `(u₀(x̄) − u₀(x̲), u₁(x̄) − u₁(x̲))`.
pub fn utility_gaps(utility: &StateUtility, x_lo: Payoff, x_hi: Payoff) -> Result<(f64, f64)> {
    let (lo, hi) = (x_lo.value(), x_hi.value());
    if lo >= hi {
        return Err(Error::InvalidArgument(format!("need x_lo < x_hi, got {lo} and {hi}")));
    }
    let d0 = utility.u0.eval(hi)? - utility.u0.eval(lo)?;
    let d1 = utility.u1.eval(hi)? - utility.u1.eval(lo)?;
    Ok((d0, d1))
}

/// `(u₁(x̄) − u₁(x̲)) / (u₀(x̄) − u₀(x̲))`.
///
/// Above one the gap `u₁ − u₀` grows from `x̲` to `x̄` (local
/// supermodularity); below one it shrinks.
pub fn marginal_gap_ratio(utility: &StateUtility, x_lo: Payoff, x_hi: Payoff) -> Result<f64> {
    let (d0, d1) = utility_gaps(utility, x_lo, x_hi)?;
    if d0 <= 0.0 || d1 <= 0.0 {
        return Err(Error::Internal(format!(
            "utility gaps must be positive for increasing utilities, got {d0} and {d1}"
        )));
    }
    Ok(d1 / d0)
}
