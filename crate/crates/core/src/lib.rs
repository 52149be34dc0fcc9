//! Disaggregated evaluation of classifier prediction logs.
//!
//! Records are partitioned by factors such as city, location and recording
//! device ([`strata`]); per-stratum accuracy, F1 and relative location F1 are
//! averaged over seeds and summarized by their cross-stratum spread
//! ([`metrics`]); Kruskal-Wallis tests check whether a factor matters
//! ([`stats`]); results render to Markdown, CSV and JSON ([`report`]). The
//! [`synth`] module generates logs with exact per-stratum accuracies.

pub mod log;
pub mod metrics;
pub mod report;
pub mod schema;
pub mod strata;
pub mod stats;
pub mod synth;

pub use log::{
    load_predictions, parse_predictions, validate_location_consistency, write_predictions,
    LoadError, LocationReport, MetadataTable, PredictionRecord,
};
pub use metrics::{
    build_table, BoxSummary, EvaluationTable, Metric, MetricCell, MetricError, Prf,
};
pub use report::{RenderOptions, SignificanceRow};
pub use schema::{parse_filename, CorpusSchema, Factor, FilenamePattern, SchemaError};
pub use strata::{partition, FactorSelector, Partition, StrataError, StratumKey};
pub use stats::{kruskal_wallis, KwResult, ObservationMode, StatsError};
pub use synth::{generate, BiasSpec, SynthError};
