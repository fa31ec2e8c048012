use thiserror::Error;

use crate::measure::Flavor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("closed-form recurrence is only available for the bosonic measure, got {0:?}")]
    UnsupportedFlavor(Flavor),

    #[error(
        "tridiagonal eigensolver did not converge for eigenvalue {index} after {sweeps} sweeps"
    )]
    EigenNonConvergence { index: usize, sweeps: usize },

    #[error("quadrature nodes are not strictly increasing at position {index}")]
    NodeOrdering { index: usize },

    #[error("series did not converge within {terms} terms")]
    SeriesNonConvergence { terms: usize },

    #[error("Stieltjes procedure lost positivity at step {step} (norm {norm:e})")]
    IllConditioned { step: usize, norm: f64 },

    #[error("summand needs its x -> 0+ limit but none was supplied")]
    MissingZeroLimit,

    #[error("summand is not finite at x = {x}")]
    NonFiniteSummand { x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
