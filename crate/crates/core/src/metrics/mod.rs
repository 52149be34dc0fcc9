//! Per-stratum metrics, seed aggregation, dispersion, box summaries and
//! evaluation tables.

mod boxplot;
mod classification;
mod dispersion;
mod table;

pub use boxplot::{box_summary, quantile_sorted, BoxSummary};
pub use classification::{
    accuracy, class_prf, location_f1, macro_f1, overall_f1, relative_f1, relative_f1_by_location,
    Baseline, F1Averaging, PrecisionScope, Prf, RelativeF1Options,
};
pub use dispersion::{aggregate_seeds, population_stddev, MetricCell};
pub use table::{build_table, EvaluationTable, Metric};

use thiserror::Error;

use crate::strata::StrataError;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{0} undefined on empty stratum")]
    Empty(&'static str),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("location `{0}` has no class mapping")]
    UnmappedLocation(String),
    #[error("location `{0}` has no samples in scope")]
    EmptyLocation(String),
    #[error("location `{0}` has records without a city")]
    MissingCity(String),
    #[error("location `{location}` spans several cities ({cities})")]
    LocationSpansCities { location: String, cities: String },
    #[error("baseline F1 is zero for location `{0}`; the model is degenerate in this scope")]
    DegenerateBaseline(String),
    #[error("duplicate seed {0}")]
    DuplicateSeed(u64),
    #[error("metric cell needs at least one sample")]
    ZeroSamples,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("no records for model `{model}` with seed {seed}")]
    MissingRun { model: String, seed: u64 },
    #[error("no models requested")]
    NoModels,
    #[error("relative F1 tables need a selector containing `location`")]
    SelectorLacksLocation,
    #[error(transparent)]
    Strata(#[from] StrataError),
}
