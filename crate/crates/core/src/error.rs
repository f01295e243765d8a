use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} must lie in [0, 1]")]
    BeliefOutOfRange { name: &'static str, value: f64 },

    #[error("{name} = {value} must lie strictly inside (0, 1)")]
    BeliefNotInterior { name: &'static str, value: f64 },

    #[error("payoff {x} outside utility domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("utility is not strictly increasing on [{lo}, {hi}] (fails near x = {at})")]
    NotIncreasing { lo: f64, hi: f64, at: f64 },

    #[error("invalid lottery: {0}")]
    InvalidLottery(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
