use thiserror::Error;

use crate::model::Diagnostic;

/// Errors raised by the library. Regime violations of a bound are not
/// errors; they surface as `valid == false` on the returned value.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid network parameters: {0}")]
    InvalidParams(String),

    #[error("invalid scenario: {}", format_diagnostics(.0))]
    InvalidScenario(Vec<Diagnostic>),

    #[error("{what} must lie in {range}, got {value}")]
    Domain {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("root bracket for {equation} is numerically empty")]
    BracketFailure { equation: &'static str },

    #[error("fixed point for {equation} has no root in its bracket")]
    FixedPointDivergence { equation: &'static str },

    #[error("closed-form field optimum requires unit field weights; fold weights into the sensing gains first")]
    NonUnitGamma,

    #[error("brute-force search supports at most {max} sensors, got {got}")]
    DimensionTooLarge { got: usize, max: usize },

    #[error("metric expects {expected} power input")]
    PowerFormMismatch { expected: &'static str },

    #[error("scenario has no {0} power specification")]
    MissingPower(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
