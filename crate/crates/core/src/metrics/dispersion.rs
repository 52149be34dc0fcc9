use std::collections::HashSet;

use super::MetricError;

/// Population standard deviation (divisor N).
pub fn population_stddev(values: &[f64]) -> Result<f64, MetricError> {
    if values.is_empty() {
        return Err(MetricError::Empty("standard deviation"));
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite(bad));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / n).sqrt())
}

/// A metric for one (stratum, model) cell, averaged over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCell {
    pub value: f64,
    pub per_seed: Vec<(u64, f64)>,
    pub n_samples: usize,
}

/// Averages per-seed values; `per_seed` is kept in the given order.
pub fn aggregate_seeds(per_seed: Vec<(u64, f64)>, n_samples: usize) -> Result<MetricCell, MetricError> {
    if per_seed.is_empty() {
        return Err(MetricError::Empty("seed average"));
    }
    if n_samples == 0 {
        return Err(MetricError::ZeroSamples);
    }
    let mut seen = HashSet::new();
    for &(seed, v) in &per_seed {
        if !seen.insert(seed) {
            return Err(MetricError::DuplicateSeed(seed));
        }
        if !v.is_finite() {
            return Err(MetricError::NonFinite(v));
        }
    }
    let value = per_seed.iter().map(|(_, v)| v).sum::<f64>() / per_seed.len() as f64;
    Ok(MetricCell {
        value,
        per_seed,
        n_samples,
    })
}
