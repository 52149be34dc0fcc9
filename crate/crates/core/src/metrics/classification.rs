use std::collections::BTreeSet;

use super::MetricError;
use crate::log::PredictionRecord;
use crate::schema::{CorpusSchema, CITY, LOCATION};

/// Fraction of records whose prediction matches the true label.
pub fn accuracy<'a>(records: impl IntoIterator<Item = &'a PredictionRecord>) -> Result<f64, MetricError> {
    let (mut n, mut correct) = (0usize, 0usize);
    for r in records {
        n += 1;
        correct += usize::from(r.is_correct());
    }
    if n == 0 {
        return Err(MetricError::Empty("accuracy"));
    }
    Ok(correct as f64 / n as f64)
}

/// Precision, recall and F1 for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    /// Set when the precision or recall denominator was zero.
    pub degenerate: bool,
}

impl Prf {
    pub fn from_counts(true_pos: usize, false_pos: usize, false_neg: usize) -> Self {
        let precision = ratio(true_pos, true_pos + false_pos);
        let recall = ratio(true_pos, true_pos + false_neg);
        Prf {
            precision,
            recall,
            f1: harmonic(true_pos, precision, recall),
            true_pos,
            false_pos,
            false_neg,
            degenerate: true_pos + false_pos == 0 || true_pos + false_neg == 0,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(true_pos: usize, precision: f64, recall: f64) -> f64 {
    if true_pos == 0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn class_of(schema: &CorpusSchema, label: &str) -> Result<usize, MetricError> {
    schema
        .class_index(label)
        .ok_or_else(|| MetricError::UnknownClass(label.to_string()))
}

pub fn class_prf<'a>(
    records: impl IntoIterator<Item = &'a PredictionRecord>,
    class: &str,
    schema: &CorpusSchema,
) -> Result<Prf, MetricError> {
    class_of(schema, class)?;
    let (mut tp, mut fp, mut fneg) = (0, 0, 0);
    for r in records {
        let truth = r.true_label == class;
        let pred = r.predicted_label == class;
        match (truth, pred) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            (false, false) => {}
        }
    }
    Ok(Prf::from_counts(tp, fp, fneg))
}

/// Per-class (tp, fp, fn) counts over the schema's class set, in one pass.
fn confusion_counts<'a>(
    records: impl IntoIterator<Item = &'a PredictionRecord>,
    schema: &CorpusSchema,
) -> Result<(Vec<[usize; 3]>, usize), MetricError> {
    let mut counts = vec![[0usize; 3]; schema.classes.len()];
    let mut n = 0;
    for r in records {
        n += 1;
        let t = class_of(schema, &r.true_label)?;
        let p = class_of(schema, &r.predicted_label)?;
        if t == p {
            counts[t][0] += 1;
        } else {
            counts[p][1] += 1;
            counts[t][2] += 1;
        }
    }
    Ok((counts, n))
}

/// Unweighted mean of per-class F1 over every class in the schema.
pub fn macro_f1<'a>(
    records: impl IntoIterator<Item = &'a PredictionRecord>,
    schema: &CorpusSchema,
) -> Result<f64, MetricError> {
    let (counts, n) = confusion_counts(records, schema)?;
    if n == 0 {
        return Err(MetricError::Empty("macro F1"));
    }
    let sum: f64 = counts
        .iter()
        .map(|&[tp, fp, fneg]| Prf::from_counts(tp, fp, fneg).f1)
        .sum();
    Ok(sum / counts.len() as f64)
}

/// How the overall F1 used as a normalization baseline is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum F1Averaging {
    #[default]
    Macro,
    /// Micro-averaged F1, which for single-label data equals accuracy.
    Micro,
}

pub fn overall_f1<'a>(
    records: impl IntoIterator<Item = &'a PredictionRecord>,
    schema: &CorpusSchema,
    averaging: F1Averaging,
) -> Result<f64, MetricError> {
    match averaging {
        F1Averaging::Macro => macro_f1(records, schema),
        F1Averaging::Micro => {
            let (counts, n) = confusion_counts(records, schema)?;
            if n == 0 {
                return Err(MetricError::Empty("micro F1"));
            }
            let (tp, fp, fneg) = counts
                .iter()
                .fold((0, 0, 0), |(a, b, c), &[tp, fp, fneg]| (a + tp, b + fp, c + fneg));
            Ok(Prf::from_counts(tp, fp, fneg).f1)
        }
    }
}

/// Records over which per-location precision is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecisionScope {
    /// Every prediction of the location's class in the normalization scope.
    #[default]
    Scope,
    /// Only the location's own records.
    Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelativeF1Options {
    pub averaging: F1Averaging,
    pub precision_scope: PrecisionScope,
}

/// F1 of the location's class. Recall counts the location's own samples;
/// precision counts per `precision_scope`.
pub fn location_f1<'a>(
    scope: impl IntoIterator<Item = &'a PredictionRecord>,
    location: &str,
    schema: &CorpusSchema,
    precision_scope: PrecisionScope,
) -> Result<f64, MetricError> {
    let class = schema
        .location_class(location)
        .ok_or_else(|| MetricError::UnmappedLocation(location.to_string()))?;
    let mut at_location = 0usize;
    let (mut recall_hit, mut recall_miss) = (0usize, 0usize);
    let (mut precision_hit, mut precision_miss) = (0usize, 0usize);
    for r in scope {
        let here = r.factor(LOCATION) == Some(location);
        let truth = r.true_label == class;
        let pred = r.predicted_label == class;
        if here {
            at_location += 1;
            if truth {
                if pred {
                    recall_hit += 1;
                } else {
                    recall_miss += 1;
                }
            }
        }
        if pred && (here || precision_scope == PrecisionScope::Scope) {
            if truth {
                precision_hit += 1;
            } else {
                precision_miss += 1;
            }
        }
    }
    if at_location == 0 {
        return Err(MetricError::EmptyLocation(location.to_string()));
    }
    let precision = ratio(precision_hit, precision_hit + precision_miss);
    let recall = ratio(recall_hit, recall_hit + recall_miss);
    Ok(harmonic(recall_hit, precision, recall))
}

/// Normalization baseline for relative location F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Baseline {
    /// Overall F1 of the full record set.
    #[default]
    Overall,
    /// F1 of the location's city; the location F1 scope is also the city.
    WithinCity,
}

fn city_of<'a, I>(records: I, location: &str) -> Result<String, MetricError>
where
    I: IntoIterator<Item = &'a PredictionRecord>,
{
    let mut cities = BTreeSet::new();
    let mut any = false;
    for r in records {
        if r.factor(LOCATION) != Some(location) {
            continue;
        }
        any = true;
        let city = r
            .factor(CITY)
            .ok_or_else(|| MetricError::MissingCity(location.to_string()))?;
        cities.insert(city);
    }
    if !any {
        return Err(MetricError::EmptyLocation(location.to_string()));
    }
    if cities.len() > 1 {
        return Err(MetricError::LocationSpansCities {
            location: location.to_string(),
            cities: cities.into_iter().collect::<Vec<_>>().join(", "),
        });
    }
    Ok(cities.into_iter().next().unwrap().to_string())
}

/// Location F1 divided by the baseline F1.
pub fn relative_f1<'a, I>(
    records: I,
    location: &str,
    baseline: Baseline,
    schema: &CorpusSchema,
    opts: RelativeF1Options,
) -> Result<f64, MetricError>
where
    I: IntoIterator<Item = &'a PredictionRecord> + Clone,
{
    let (loc_f1, base) = match baseline {
        Baseline::Overall => (
            location_f1(records.clone(), location, schema, opts.precision_scope)?,
            overall_f1(records, schema, opts.averaging)?,
        ),
        Baseline::WithinCity => {
            let city = city_of(records.clone(), location)?;
            let in_city: Vec<&PredictionRecord> = records
                .into_iter()
                .filter(|r| r.factor(CITY) == Some(city.as_str()))
                .collect();
            (
                location_f1(in_city.iter().copied(), location, schema, opts.precision_scope)?,
                overall_f1(in_city.iter().copied(), schema, opts.averaging)?,
            )
        }
    };
    if base <= 0.0 {
        return Err(MetricError::DegenerateBaseline(location.to_string()));
    }
    Ok(loc_f1 / base)
}

/// Relative F1 for every location present in `records`, in schema level order.
pub fn relative_f1_by_location<'a, I>(
    records: I,
    baseline: Baseline,
    schema: &CorpusSchema,
    opts: RelativeF1Options,
) -> Result<Vec<(String, f64)>, MetricError>
where
    I: IntoIterator<Item = &'a PredictionRecord> + Clone,
{
    let present: BTreeSet<&str> = records
        .clone()
        .into_iter()
        .filter_map(|r| r.factor(LOCATION))
        .collect();
    let Some(factor) = schema.factor(LOCATION) else {
        return Ok(Vec::new());
    };
    factor
        .levels
        .iter()
        .filter(|l| present.contains(l.as_str()))
        .map(|l| Ok((l.clone(), relative_f1(records.clone(), l, baseline, schema, opts)?)))
        .collect()
}
