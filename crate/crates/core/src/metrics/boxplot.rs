use serde::Serialize;

use super::MetricError;

/// Five-number summary with Tukey whiskers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    /// Points outside the 1.5·IQR fences, ascending by value.
    pub outliers: Vec<(String, f64)>,
    pub n: usize,
}

/// Quantile of sorted data by linear interpolation at position (n−1)·q.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn box_summary(values: &[(String, f64)]) -> Result<BoxSummary, MetricError> {
    if values.is_empty() {
        return Err(MetricError::Empty("box summary"));
    }
    if let Some((_, bad)) = values.iter().find(|(_, v)| !v.is_finite()) {
        return Err(MetricError::NonFinite(*bad));
    }
    let mut sorted: Vec<(String, f64)> = values.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let xs: Vec<f64> = sorted.iter().map(|(_, v)| *v).collect();

    let q1 = quantile_sorted(&xs, 0.25);
    let median = quantile_sorted(&xs, 0.5);
    let q3 = quantile_sorted(&xs, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);

    let inside = |v: f64| v >= lo_fence && v <= hi_fence;
    // the median is always inside, so both whiskers exist
    let lower_whisker = xs.iter().copied().find(|&v| inside(v)).unwrap_or(median);
    let upper_whisker = xs.iter().rev().copied().find(|&v| inside(v)).unwrap_or(median);
    let outliers = sorted.into_iter().filter(|(_, v)| !inside(*v)).collect();
    Ok(BoxSummary {
        median,
        q1,
        q3,
        lower_whisker,
        upper_whisker,
        outliers,
        n: xs.len(),
    })
}
