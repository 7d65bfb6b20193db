use thiserror::Error;

use crate::pickands::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is out of range (expected {expected})")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid dependence function: {0}")]
    InvalidDependenceFunction(ValidationReport),

    #[error("quadrature did not converge (estimate {estimate}, error bound {error_bound})")]
    NonConvergent { estimate: f64, error_bound: f64 },

    #[error("integrand is not finite at t = {at}")]
    NonFinite { at: f64 },

    #[error("root is not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    BadBracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("probability {p} is outside the range [{h_lo}, {h_hi}] of the distribution function")]
    OutOfRange { p: f64, h_lo: f64, h_hi: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    expected: &'static str,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value,
            expected,
        })
    }
}
