//! Deterministic synthetic prediction logs with exact per-stratum accuracy.
//!
//! A [`BiasSpec`] lists cells: a stratum (levels for some factors), a sample
//! count and a target accuracy, optionally restricted to one model. For every
//! (model, seed) run, each applicable cell produces `n` records of which
//! exactly `round(n · accuracy)` are correct. Factors the stratum leaves open
//! are filled by enumerating their level combinations in mixed radix over the
//! record index, so a sample id always carries the same factors and true
//! label across models and seeds. True labels follow the location → class
//! map when the schema has a location factor.

mod oracle;
mod rng;

pub use oracle::{brute_force_metrics, ClassCounts, ReferenceMetrics};
pub use rng::SplitMix64;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::PredictionRecord;
use crate::schema::{CorpusSchema, SchemaError, LOCATION};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("spec has no cells")]
    NoCells,
    #[error("spec has no models")]
    NoModels,
    #[error("spec has no seeds")]
    NoSeeds,
    #[error("duplicate seed {0}")]
    DuplicateSeed(u64),
    #[error("duplicate model `{0}`")]
    DuplicateModel(String),
    #[error("cell {cell}: accuracy {accuracy} outside [0, 1]")]
    AccuracyRange { cell: usize, accuracy: f64 },
    #[error("cell {cell}: n = 0")]
    EmptyCell { cell: usize },
    #[error("cell {cell}: {n} × {accuracy} is not an integer count of correct records")]
    NonIntegerCount { cell: usize, n: usize, accuracy: f64 },
    #[error("cell {cell}: undeclared factor `{factor}`")]
    UnknownFactor { cell: usize, factor: String },
    #[error("cell {cell}: unknown level `{level}` for factor `{factor}`")]
    UnknownLevel {
        cell: usize,
        factor: String,
        level: String,
    },
    #[error("cell {cell}: unknown model `{model}`")]
    UnknownModel { cell: usize, model: String },
    #[error("cell {cell}: unknown confusion class `{class}`")]
    UnknownClass { cell: usize, class: String },
    #[error("cell {cell}: stratum duplicates cell {other}")]
    DuplicateStratum { cell: usize, other: usize },
    #[error("cell {cell}: a single-class schema cannot produce wrong predictions")]
    NoWrongLabel { cell: usize },
    #[error("generated sample id `{0}` collides within a run")]
    DuplicateSample(String),
    #[error("cannot read spec {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed spec: {0}")]
    Syntax(String),
}

/// How incorrect records pick their predicted label.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ErrorModel {
    /// Uniform over the classes other than the true one.
    #[default]
    Uniform,
    /// Always `class`, unless that is the true label (then uniform).
    Confusion { class: String },
}

/// How `n · accuracy` becomes a count of correct records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// The product must already be an integer.
    #[default]
    Exact,
    /// Round half away from zero.
    Rounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    /// Factor → level; factors not named here are enumerated.
    #[serde(default)]
    pub stratum: BTreeMap<String, String>,
    pub n: usize,
    pub accuracy: f64,
    /// Restricts the cell to one model; absent means every model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default)]
    pub error_model: ErrorModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    pub models: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub mode: CountMode,
    pub schema: CorpusSchema,
    pub cells: Vec<CellSpec>,
}

const COUNT_TOLERANCE: f64 = 1e-6;

impl BiasSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        let spec: BiasSpec = toml::from_str(text).map_err(|e| SynthError::Syntax(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SynthError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| SynthError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes to TOML")
    }

    fn correct_count(&self, cell: usize) -> Result<usize, SynthError> {
        let c = &self.cells[cell];
        let exact = c.n as f64 * c.accuracy;
        let rounded = exact.round();
        if self.mode == CountMode::Exact && (exact - rounded).abs() > COUNT_TOLERANCE {
            return Err(SynthError::NonIntegerCount {
                cell,
                n: c.n,
                accuracy: c.accuracy,
            });
        }
        Ok(rounded as usize)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        self.schema.validate()?;
        if self.models.is_empty() {
            return Err(SynthError::NoModels);
        }
        if self.seeds.is_empty() {
            return Err(SynthError::NoSeeds);
        }
        if self.cells.is_empty() {
            return Err(SynthError::NoCells);
        }
        let mut seen = HashSet::new();
        for &s in &self.seeds {
            if !seen.insert(s) {
                return Err(SynthError::DuplicateSeed(s));
            }
        }
        let mut names = HashSet::new();
        for m in &self.models {
            if !names.insert(m.as_str()) {
                return Err(SynthError::DuplicateModel(m.clone()));
            }
        }
        for (i, c) in self.cells.iter().enumerate() {
            if !(0.0..=1.0).contains(&c.accuracy) {
                return Err(SynthError::AccuracyRange {
                    cell: i,
                    accuracy: c.accuracy,
                });
            }
            if c.n == 0 {
                return Err(SynthError::EmptyCell { cell: i });
            }
            self.correct_count(i)?;
            for (factor, level) in &c.stratum {
                let f = self.schema.factor(factor).ok_or_else(|| SynthError::UnknownFactor {
                    cell: i,
                    factor: factor.clone(),
                })?;
                if f.level_index(level).is_none() {
                    return Err(SynthError::UnknownLevel {
                        cell: i,
                        factor: factor.clone(),
                        level: level.clone(),
                    });
                }
            }
            if let Some(m) = &c.model {
                if !self.models.contains(m) {
                    return Err(SynthError::UnknownModel {
                        cell: i,
                        model: m.clone(),
                    });
                }
            }
            if let ErrorModel::Confusion { class } = &c.error_model {
                if !self.schema.has_class(class) {
                    return Err(SynthError::UnknownClass {
                        cell: i,
                        class: class.clone(),
                    });
                }
            }
            if self.schema.classes.len() < 2 && c.accuracy < 1.0 {
                return Err(SynthError::NoWrongLabel { cell: i });
            }
            for (j, other) in self.cells[..i].iter().enumerate() {
                let overlapping_models = match (&c.model, &other.model) {
                    (Some(a), Some(b)) => a == b,
                    _ => true,
                };
                if overlapping_models && other.stratum == c.stratum {
                    return Err(SynthError::DuplicateStratum { cell: i, other: j });
                }
            }
        }
        Ok(())
    }
}

fn sample_id(schema: &CorpusSchema, stratum: &BTreeMap<String, String>, index: usize) -> String {
    let levels: Vec<&str> = schema
        .factors
        .iter()
        .filter_map(|f| stratum.get(&f.name).map(String::as_str))
        .collect();
    let prefix = if levels.is_empty() {
        "all".to_string()
    } else {
        levels.join("-")
    };
    format!("{prefix}-{index:05}")
}

/// Generates the log described by `spec`. Records are ordered by model,
/// then seed, then cell, then sample index.
pub fn generate(spec: &BiasSpec, rng_seed: u64) -> Result<Vec<PredictionRecord>, SynthError> {
    spec.validate()?;
    let schema = &spec.schema;
    let classes = &schema.classes;
    let mut rng = SplitMix64::new(rng_seed);
    let mut records = Vec::new();

    for model in &spec.models {
        for &seed in &spec.seeds {
            let mut ids = HashSet::new();
            for (ci, cell) in spec.cells.iter().enumerate() {
                if cell.model.as_ref().is_some_and(|m| m != model) {
                    continue;
                }
                let correct_n = spec.correct_count(ci)?;
                let mut order: Vec<usize> = (0..cell.n).collect();
                rng.shuffle(&mut order);
                let mut correct = vec![false; cell.n];
                for &i in &order[..correct_n] {
                    correct[i] = true;
                }

                for (i, &is_correct) in correct.iter().enumerate() {
                    let mut rest = i;
                    let mut factors = BTreeMap::new();
                    for f in &schema.factors {
                        let level = match cell.stratum.get(&f.name) {
                            Some(l) => l.clone(),
                            None => {
                                let l = f.levels[rest % f.levels.len()].clone();
                                rest /= f.levels.len();
                                l
                            }
                        };
                        factors.insert(f.name.clone(), level);
                    }
                    let true_idx = match factors.get(LOCATION) {
                        Some(loc) => schema
                            .class_index(schema.location_class(loc).expect("schema maps every location"))
                            .expect("mapped class exists"),
                        None => rest % classes.len(),
                    };
                    let pred_idx = if is_correct {
                        true_idx
                    } else {
                        let confusion = match &cell.error_model {
                            ErrorModel::Confusion { class } => schema.class_index(class),
                            ErrorModel::Uniform => None,
                        };
                        match confusion {
                            Some(c) if c != true_idx => c,
                            _ => {
                                let j = rng.below(classes.len() as u64 - 1) as usize;
                                if j >= true_idx {
                                    j + 1
                                } else {
                                    j
                                }
                            }
                        }
                    };
                    let id = sample_id(schema, &cell.stratum, i);
                    if !ids.insert(id.clone()) {
                        return Err(SynthError::DuplicateSample(id));
                    }
                    records.push(PredictionRecord {
                        sample_id: id,
                        model_id: model.clone(),
                        seed,
                        true_label: classes[true_idx].clone(),
                        predicted_label: classes[pred_idx].clone(),
                        factors,
                    });
                }
            }
        }
    }
    Ok(records)
}

/// Per-cell counts of a spec, as (model, cell index, n, correct).
pub fn cell_summary(spec: &BiasSpec) -> Result<Vec<(String, usize, usize, usize)>, SynthError> {
    let mut out = Vec::new();
    for model in &spec.models {
        for (i, cell) in spec.cells.iter().enumerate() {
            if cell.model.as_ref().is_some_and(|m| m != model) {
                continue;
            }
            out.push((model.clone(), i, cell.n, spec.correct_count(i)?));
        }
    }
    Ok(out)
}
