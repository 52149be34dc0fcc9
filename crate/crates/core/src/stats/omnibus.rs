use std::collections::BTreeSet;

use super::kruskal::{kruskal_wallis, KwResult};
use super::StatsError;
use crate::log::{seeds_of, PredictionRecord};
use crate::metrics::{location_f1, PrecisionScope};
use crate::schema::{CorpusSchema, LOCATION};

/// What counts as one observation in a factor-level test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// 1 for a correct prediction, 0 otherwise, one per record.
    Correctness,
    /// One F1 per location, computed within the factor level's records.
    LocationF1,
}

impl ObservationMode {
    pub fn name(self) -> &'static str {
        match self {
            ObservationMode::Correctness => "correctness",
            ObservationMode::LocationF1 => "location-f1",
        }
    }
}

/// Kruskal-Wallis test of `model`'s performance across the levels of
/// `factor`. Observations from all `seeds` are pooled; pass one seed for a
/// per-seed test, or an empty slice for every logged seed.
///
/// Groups are the factor's levels present anywhere in `records`, in schema
/// order. A level present in the corpus but missing for this model is an error.
pub fn omnibus_factor_test(
    records: &[PredictionRecord],
    factor: &str,
    mode: ObservationMode,
    model: &str,
    seeds: &[u64],
    schema: &CorpusSchema,
) -> Result<KwResult, StatsError> {
    let declared = schema
        .factor(factor)
        .ok_or_else(|| StatsError::UndeclaredFactor(factor.to_string()))?;
    if mode == ObservationMode::LocationF1 && factor == LOCATION {
        return Err(StatsError::LocationGrouping);
    }
    let present: BTreeSet<&str> = records.iter().filter_map(|r| r.factor(factor)).collect();
    let levels: Vec<&str> = declared
        .levels
        .iter()
        .map(String::as_str)
        .filter(|l| present.contains(l))
        .collect();
    if levels.len() < 2 {
        return Err(StatsError::TooFewLevels {
            factor: factor.to_string(),
            found: levels.len(),
        });
    }

    let logged = seeds_of(records, model);
    if logged.is_empty() {
        return Err(StatsError::UnknownModel(model.to_string()));
    }
    let seeds = if seeds.is_empty() { logged.clone() } else { seeds.to_vec() };
    if let Some(&missing) = seeds.iter().find(|s| !logged.contains(s)) {
        return Err(StatsError::MissingRun {
            model: model.to_string(),
            seed: missing,
        });
    }

    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];
    for &seed in &seeds {
        let run: Vec<&PredictionRecord> = records
            .iter()
            .filter(|r| r.model_id == model && r.seed == seed)
            .collect();
        for (level, group) in levels.iter().zip(groups.iter_mut()) {
            let in_level = run.iter().copied().filter(|r| r.factor(factor) == Some(level));
            match mode {
                ObservationMode::Correctness => {
                    group.extend(in_level.map(|r| if r.is_correct() { 1.0 } else { 0.0 }))
                }
                ObservationMode::LocationF1 => {
                    let locations: BTreeSet<&str> =
                        in_level.clone().filter_map(|r| r.factor(LOCATION)).collect();
                    let ordered = schema
                        .factor(LOCATION)
                        .map(|f| f.levels.iter().filter(|l| locations.contains(l.as_str())));
                    for location in ordered.into_iter().flatten() {
                        group.push(location_f1(
                            in_level.clone(),
                            location,
                            schema,
                            PrecisionScope::Scope,
                        )?);
                    }
                }
            }
        }
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(StatsError::EmptyLevel {
            factor: factor.to_string(),
            level: levels[i].to_string(),
            model: model.to_string(),
        });
    }
    kruskal_wallis(&groups)
}
