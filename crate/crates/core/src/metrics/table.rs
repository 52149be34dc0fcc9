use std::collections::HashMap;

use super::classification::{accuracy, overall_f1, relative_f1, Baseline, F1Averaging, RelativeF1Options};
use super::dispersion::{aggregate_seeds, population_stddev, MetricCell};
use super::MetricError;
use crate::log::{seeds_of, PredictionRecord};
use crate::schema::{CorpusSchema, LOCATION};
use crate::strata::{partition, FactorSelector, StratumKey};

/// The per-stratum quantity tabulated by [`build_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    /// Macro (or micro) averaged F1 of the stratum's records.
    F1(F1Averaging),
    /// F1 of the stratum's location relative to a baseline. The location F1
    /// and baseline are computed on the full run, not on the stratum alone.
    RelativeF1 {
        baseline: Baseline,
        options: RelativeF1Options,
    },
}

impl Metric {
    pub fn is_fraction(&self) -> bool {
        !matches!(self, Metric::RelativeF1 { .. })
    }
}

/// Strata × models grid of seed-averaged metric cells.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationTable {
    pub selector: FactorSelector,
    pub metric: Metric,
    pub rows: Vec<StratumKey>,
    pub models: Vec<String>,
    /// `cells[row][model]`; `None` marks a stratum with no data for that model.
    pub cells: Vec<Vec<Option<MetricCell>>>,
    /// Population σ of each column over its present cells.
    pub dispersion: Vec<Option<f64>>,
}

impl EvaluationTable {
    pub fn cell(&self, row: usize, model: usize) -> Option<&MetricCell> {
        self.cells.get(row)?.get(model)?.as_ref()
    }

    pub fn column_values(&self, model: usize) -> Vec<f64> {
        self.cells
            .iter()
            .filter_map(|row| row[model].as_ref().map(|c| c.value))
            .collect()
    }

    fn column_dispersion(&self, model: usize, rows: impl Iterator<Item = usize>) -> Option<f64> {
        let values: Vec<f64> = rows
            .filter_map(|r| self.cells[r][model].as_ref().map(|c| c.value))
            .collect();
        population_stddev(&values).ok()
    }

    /// σ computed separately within each level of `factor` (e.g. per device
    /// over cities for a device × city table), in row order of first appearance.
    pub fn dispersion_by(&self, factor: &str) -> Vec<(String, Vec<Option<f64>>)> {
        let mut levels: Vec<String> = Vec::new();
        for key in &self.rows {
            if let Some(l) = key.level(factor) {
                if !levels.iter().any(|x| x == l) {
                    levels.push(l.to_string());
                }
            }
        }
        levels
            .into_iter()
            .map(|level| {
                let sigmas = (0..self.models.len())
                    .map(|m| {
                        let rows = self
                            .rows
                            .iter()
                            .enumerate()
                            .filter(|(_, k)| k.level(factor) == Some(level.as_str()))
                            .map(|(i, _)| i);
                        self.column_dispersion(m, rows)
                    })
                    .collect();
                (level, sigmas)
            })
            .collect()
    }
}

type Run<'a> = Vec<&'a PredictionRecord>;

/// Evaluates `metric` on every (stratum, model) cell. Each cell is computed
/// per seed, then averaged across seeds. `seeds = None` uses every seed
/// logged for each model.
pub fn build_table(
    records: &[PredictionRecord],
    selector: &FactorSelector,
    metric: Metric,
    models: &[String],
    seeds: Option<&[u64]>,
    schema: &CorpusSchema,
) -> Result<EvaluationTable, MetricError> {
    if models.is_empty() {
        return Err(MetricError::NoModels);
    }
    if matches!(metric, Metric::RelativeF1 { .. }) && !selector.contains(LOCATION) {
        return Err(MetricError::SelectorLacksLocation);
    }

    let mut model_seeds: Vec<Vec<u64>> = Vec::with_capacity(models.len());
    for m in models {
        let logged = seeds_of(records, m);
        let wanted = match seeds {
            Some(s) => s.to_vec(),
            None => logged.clone(),
        };
        if wanted.is_empty() {
            return Err(MetricError::MissingRun {
                model: m.clone(),
                seed: 0,
            });
        }
        if let Some(&missing) = wanted.iter().find(|s| !logged.contains(s)) {
            return Err(MetricError::MissingRun {
                model: m.clone(),
                seed: missing,
            });
        }
        model_seeds.push(wanted);
    }

    let model_index: HashMap<&str, usize> =
        models.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
    let wanted = |r: &PredictionRecord| {
        model_index
            .get(r.model_id.as_str())
            .is_some_and(|&m| model_seeds[m].contains(&r.seed))
    };

    let mut runs: HashMap<(usize, u64), Run> = HashMap::new();
    if !metric.is_fraction() {
        for r in records.iter().filter(|r| wanted(r)) {
            runs.entry((model_index[r.model_id.as_str()], r.seed))
                .or_default()
                .push(r);
        }
    }

    let part = partition(records, selector, schema)?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for stratum in part.strata() {
        let mut buckets: HashMap<(usize, u64), Run> = HashMap::new();
        for r in part.subset(stratum).filter(|r| wanted(r)) {
            buckets
                .entry((model_index[r.model_id.as_str()], r.seed))
                .or_default()
                .push(r);
        }
        if buckets.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(models.len());
        for (m, seeds) in model_seeds.iter().enumerate() {
            let mut per_seed = Vec::new();
            let mut n_samples = 0;
            for &seed in seeds {
                let Some(bucket) = buckets.get(&(m, seed)) else {
                    continue;
                };
                n_samples += bucket.len();
                let value = match metric {
                    Metric::Accuracy => accuracy(bucket.iter().copied())?,
                    Metric::F1(avg) => overall_f1(bucket.iter().copied(), schema, avg)?,
                    Metric::RelativeF1 { baseline, options } => {
                        let location = stratum.key.level(LOCATION).expect("selector has location");
                        relative_f1(runs[&(m, seed)].iter().copied(), location, baseline, schema, options)?
                    }
                };
                per_seed.push((seed, value));
            }
            row.push(if per_seed.is_empty() {
                None
            } else {
                Some(aggregate_seeds(per_seed, n_samples)?)
            });
        }
        rows.push(stratum.key.clone());
        cells.push(row);
    }

    let mut table = EvaluationTable {
        selector: selector.clone(),
        metric,
        rows,
        models: models.to_vec(),
        cells,
        dispersion: Vec::new(),
    };
    table.dispersion = (0..models.len())
        .map(|m| table.column_dispersion(m, 0..table.rows.len()))
        .collect();
    Ok(table)
}
