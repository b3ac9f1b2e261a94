use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: must be {bound}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("invalid occupancy distribution: {0}")]
    InvalidDistribution(String),

    /// Quasi-extinction analysis was asked of a chain whose extinct state can be left.
    #[error("state 0 is not absorbing (row 0 must be (1, 0, 0))")]
    NotAbsorbing,

    #[error("the transient block on states {{1, 2}} is identically zero; no quasi-stationary distribution exists")]
    DegenerateBlock,

    #[error("chain has no unique stationary distribution: {0}")]
    Reducible(&'static str),

    #[error("objective `{kind}` cannot be used with variant `{variant}`: {reason}")]
    IncompatibleObjective {
        kind: String,
        variant: String,
        reason: &'static str,
    },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            bound: "a probability in [0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            bound: "finite and > 0",
        })
    }
}
