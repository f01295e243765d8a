use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{Payoff, UtilityFn, PROB_SUM_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub payoff: Payoff,
    pub prob: f64,
}

fn check_masses(probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for p in probs {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidLottery(format!("probability {p} is not a nonnegative number")));
        }
        total += p;
    }
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidLottery(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// A finite lottery over monetary payoffs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpleLottery {
    atoms: SmallVec<[Atom; 2]>,
}

impl SimpleLottery {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let atoms: SmallVec<[Atom; 2]> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidLottery("no atoms".into()));
        }
        check_masses(atoms.iter().map(|a| a.prob))?;
        Ok(SimpleLottery { atoms })
    }

    /// Pays `x` for sure.
    pub fn degenerate(x: Payoff) -> Self {
        SimpleLottery { atoms: smallvec::smallvec![Atom { payoff: x, prob: 1.0 }] }
    }

    /// Pays `hi` with probability `p_hi` and `lo` otherwise.
    pub fn binary(lo: Payoff, hi: Payoff, p_hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_hi) {
            return Err(Error::InvalidLottery(format!("winning probability {p_hi} outside [0, 1]")));
        }
        Ok(SimpleLottery {
            atoms: smallvec::smallvec![
                Atom { payoff: lo, prob: 1.0 - p_hi },
                Atom { payoff: hi, prob: p_hi },
            ],
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Probability of paying exactly `x`.
    pub fn prob_of(&self, x: Payoff) -> f64 {
        self.atoms.iter().filter(|a| a.payoff == x).map(|a| a.prob).sum()
    }

    pub fn expected_payoff(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob * a.payoff.value()).sum()
    }

    /// Probability mixture `w·self + (1 − w)·other`.
    pub fn mix(&self, other: &SimpleLottery, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidArgument(format!("mixture weight {w} outside [0, 1]")));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { payoff: a.payoff, prob: w * a.prob })
            .chain(other.atoms.iter().map(|a| Atom { payoff: a.payoff, prob: (1.0 - w) * a.prob }));
        SimpleLottery::new(atoms)
    }
}

/// vNM expected utility `Σ prob·u(payoff)`. Atoms of mass zero are skipped.
pub fn vnm_value(lottery: &SimpleLottery, u: &UtilityFn) -> Result<f64> {
    let mut acc = 0.0;
    for atom in lottery.atoms.iter().filter(|a| a.prob > 0.0) {
        acc += atom.prob * u.eval(atom.payoff.value())?;
    }
    Ok(acc)
}

/// A state-indexed pair of lotteries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Act {
    pub at_theta0: SimpleLottery,
    pub at_theta1: SimpleLottery,
}

impl Act {
    pub fn new(at_theta0: SimpleLottery, at_theta1: SimpleLottery) -> Self {
        Act { at_theta0, at_theta1 }
    }

    /// The same lottery in both states.
    pub fn constant(lottery: SimpleLottery) -> Self {
        Act { at_theta0: lottery.clone(), at_theta1: lottery }
    }

    /// Statewise mixture `w·self + (1 − w)·other`.
    pub fn mix(&self, other: &Act, w: f64) -> Result<Self> {
        Ok(Act {
            at_theta0: self.at_theta0.mix(&other.at_theta0, w)?,
            at_theta1: self.at_theta1.mix(&other.at_theta1, w)?,
        })
    }
}

/// Whether the experimenter takes the influential action alongside a payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionTag {
    Default,
    Influential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeAtom {
    pub payoff: Payoff,
    pub action: ActionTag,
    pub prob: f64,
}

/// A lottery over (payoff, action) pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeLottery {
    atoms: Vec<OutcomeAtom>,
}

impl OutcomeLottery {
    pub fn new(atoms: impl IntoIterator<Item = OutcomeAtom>) -> Result<Self> {
        let atoms: Vec<OutcomeAtom> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidLottery("no atoms".into()));
        }
        check_masses(atoms.iter().map(|a| a.prob))?;
        Ok(OutcomeLottery { atoms })
    }

    pub fn atoms(&self) -> &[OutcomeAtom] {
        &self.atoms
    }

    /// Marginal probability that `action` is taken.
    pub fn action_prob(&self, action: ActionTag) -> f64 {
        self.atoms.iter().filter(|a| a.action == action).map(|a| a.prob).sum()
    }

    /// Marginal probability of the payoff `x`, whatever the action.
    pub fn payoff_prob(&self, x: Payoff) -> f64 {
        self.atoms.iter().filter(|a| a.payoff == x).map(|a| a.prob).sum()
    }
}
