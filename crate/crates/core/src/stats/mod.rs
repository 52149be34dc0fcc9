//! Rank statistics and the Kruskal-Wallis omnibus test.

mod gamma;
mod kruskal;
mod omnibus;
mod ranks;

pub use gamma::{chi_square_sf, ln_gamma, regularized_gamma_q};
pub use kruskal::{kruskal_wallis, KwResult, SMALL_GROUP};
pub use omnibus::{omnibus_factor_test, ObservationMode};
pub use ranks::{midranks, RankedSample};

use thiserror::Error;

use crate::metrics::MetricError;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("non-finite observation {0}")]
    NonFinite(f64),
    #[error("no observations")]
    Empty,
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("need at least 3 observations in total, got {0}")]
    TooFewObservations(usize),
    #[error("chi-square statistic must be non-negative and finite, got {0}")]
    BadStatistic(f64),
    #[error("degrees of freedom must be at least 1")]
    BadDegreesOfFreedom,
    #[error("incomplete gamma did not converge for a = {a}, x = {x}")]
    NoConvergence { a: f64, x: f64 },
    #[error("undeclared factor `{0}`")]
    UndeclaredFactor(String),
    #[error("factor `{factor}` has {found} level(s) present; at least 2 are needed")]
    TooFewLevels { factor: String, found: usize },
    #[error("level `{level}` of `{factor}` has no observations for model `{model}`")]
    EmptyLevel {
        factor: String,
        level: String,
        model: String,
    },
    #[error("location-f1 observations cannot be grouped by `location` (one observation per group)")]
    LocationGrouping,
    #[error("no records for model `{model}` with seed {seed}")]
    MissingRun { model: String, seed: u64 },
    #[error("no records for model `{0}`")]
    UnknownModel(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}
