use thiserror::Error;

/// Failure modes shared by every module.
///
/// `Validation` covers violated preconditions (bad input); every other variant
/// is a numerical condition detected at run time.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("no critical coupling: {0}")]
    NoCriticalCoupling(String),
    #[error("channel is not critical: top Birman-Schwinger eigenvalue {mu_max} differs from 1 by more than {tol}")]
    NotCritical { mu_max: f64, tol: f64 },
    #[error("I - BS(z) is numerically singular at z = {z} (1 - mu_max = {gap}, condition estimate {condition})")]
    Singular { z: f64, gap: f64, condition: f64 },
    #[error("eigenvalue {eigenvalue} lies within {tol} of 1: count is either {lower} or {upper}")]
    BoundaryAmbiguous {
        eigenvalue: f64,
        tol: f64,
        lower: usize,
        upper: usize,
    },
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for precondition violations, false for numerical conditions.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::NoCriticalCoupling(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Validation(msg()))
    }
}
