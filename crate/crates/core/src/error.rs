use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the model, sampler and estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A model parameter is invalid.
    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Covariate vectors of inconsistent length.
    #[error("covariate dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    /// Root finding failed to bracket or converge.
    #[error("root finding did not converge: bracket [{lo}, {hi}] after {iterations} iterations")]
    Convergence { lo: f64, hi: f64, iterations: usize },

    /// A log-likelihood evaluated to NaN or an infinity.
    #[error("non-finite log-likelihood contribution at observation {index}")]
    NonFiniteObservation { index: usize },

    /// An objective evaluated to NaN or an infinity at the given parameters.
    #[error("non-finite objective at parameters {params:?}")]
    NonFiniteObjective { params: Vec<f64> },

    /// The data do not contain enough events for the requested fit.
    #[error("no events of risk {risk} in the data")]
    NoEvents { risk: u8 },

    /// Censored rows passed to an estimator that requires complete data.
    #[error("{0} censored observation(s) present; this estimator needs uncensored data")]
    Censored(usize),

    /// Invalid configuration of a study or quadrature rule.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, 1]",
        })
    }
}

pub(crate) fn check_open_probability(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "(0, 1)",
        })
    }
}

pub(crate) fn check_time(value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "t",
            value,
            domain: "(0, inf)",
        })
    }
}
