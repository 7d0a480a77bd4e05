use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this bath model.
    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("undamped resonance: susceptibility has a pole at omega = {omega}")]
    UndampedResonance { omega: f64 },

    #[error("UV-divergent; set omega_max")]
    UvDivergent,

    #[error("no stationary state: {0}")]
    NoStationaryState(&'static str),

    /// Adaptive quadrature ran out of panels before meeting its tolerance.
    #[error("quadrature did not converge within {panels} panels: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        panels: usize,
    },

    #[error("integration became unstable at t = {time}: {hint}")]
    Instability { time: f64, hint: &'static str },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Returns a domain error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("{name} must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("{name} must be finite and >= 0, got {value}")))
    }
}
