//! Reference metrics by exhaustive counting.
//!
//! Deliberately independent of `crate::metrics`: every quantity is counted
//! with its own loop over the raw records, one class or location at a time.

use std::collections::BTreeMap;

use crate::log::PredictionRecord;
use crate::schema::{CorpusSchema, LOCATION};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassCounts {
    pub class: String,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Metrics of one record set. `None` / empty maps mean "no data".
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMetrics {
    pub accuracy: Option<f64>,
    pub per_class: Vec<ClassCounts>,
    pub macro_f1: Option<f64>,
    /// Location F1 with precision over all records and recall over the location.
    pub location_f1: BTreeMap<String, f64>,
}

fn safe_div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn f1_of(tp: usize, p: f64, r: f64) -> f64 {
    if tp == 0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn brute_force_metrics(records: &[PredictionRecord], schema: &CorpusSchema) -> ReferenceMetrics {
    let n = records.len();
    let mut hits = 0usize;
    for r in records {
        if r.predicted_label == r.true_label {
            hits += 1;
        }
    }
    let accuracy = if n == 0 { None } else { Some(hits as f64 / n as f64) };

    let mut per_class = Vec::new();
    for class in &schema.classes {
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_ = 0;
        for r in records {
            let t = &r.true_label == class;
            let p = &r.predicted_label == class;
            if t && p {
                tp += 1;
            }
            if !t && p {
                fp += 1;
            }
            if t && !p {
                fn_ += 1;
            }
        }
        let precision = safe_div(tp, tp + fp);
        let recall = safe_div(tp, tp + fn_);
        per_class.push(ClassCounts {
            class: class.clone(),
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1: f1_of(tp, precision, recall),
        });
    }
    let macro_f1 = if n == 0 {
        None
    } else {
        let mut total = 0.0;
        for c in &per_class {
            total += c.f1;
        }
        Some(total / per_class.len() as f64)
    };

    let mut location_f1 = BTreeMap::new();
    let locations: Vec<&String> = schema
        .factor(LOCATION)
        .map(|f| f.levels.iter().collect())
        .unwrap_or_default();
    for loc in locations {
        let Some(class) = schema.location_class(loc) else {
            continue;
        };
        let mut present = false;
        let (mut rec_tp, mut rec_fn, mut prec_tp, mut prec_fp) = (0, 0, 0, 0);
        for r in records {
            let here = r.factors.get(LOCATION) == Some(loc);
            present |= here;
            if here && r.true_label == class {
                if r.predicted_label == class {
                    rec_tp += 1;
                } else {
                    rec_fn += 1;
                }
            }
            if r.predicted_label == class {
                if r.true_label == class {
                    prec_tp += 1;
                } else {
                    prec_fp += 1;
                }
            }
        }
        if present {
            let p = safe_div(prec_tp, prec_tp + prec_fp);
            let rc = safe_div(rec_tp, rec_tp + rec_fn);
            location_f1.insert(loc.clone(), f1_of(rec_tp, p, rc));
        }
    }

    ReferenceMetrics {
        accuracy,
        per_class,
        macro_f1,
        location_f1,
    }
}
