use serde_json::{json, Value};

use super::number::format_fixed;
use super::{csv_line, emphasize, markdown_row, markdown_rule, BoldAxis, Format, RenderOptions};
use crate::metrics::{Baseline, EvaluationTable, F1Averaging, Metric};

fn metric_name(metric: Metric) -> &'static str {
    match metric {
        Metric::Accuracy => "accuracy",
        Metric::F1(F1Averaging::Macro) => "macro-f1",
        Metric::F1(F1Averaging::Micro) => "micro-f1",
        Metric::RelativeF1 {
            baseline: Baseline::Overall,
            ..
        } => "relative-f1",
        Metric::RelativeF1 {
            baseline: Baseline::WithinCity,
            ..
        } => "relative-f1-within-city",
    }
}

/// One rendered line of the grid before formatting.
struct GridRow {
    label: String,
    values: Vec<Option<f64>>,
    /// Smaller is better (σ rows).
    lower_is_better: bool,
    is_dispersion: bool,
}

fn best_mask(values: &[Option<f64>], lower_is_better: bool) -> Vec<bool> {
    let present = values.iter().flatten().copied();
    let best = if lower_is_better {
        present.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    } else {
        present.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    values
        .iter()
        .map(|v| matches!((v, best), (Some(v), Some(b)) if *v == b))
        .collect()
}

fn grid(table: &EvaluationTable) -> (String, Vec<String>, Vec<GridRow>) {
    if table.selector.is_empty() {
        // aggregated: one line per model
        let rows = table
            .models
            .iter()
            .enumerate()
            .map(|(m, model)| GridRow {
                label: model.clone(),
                values: vec![table.cell(0, m).map(|c| c.value)],
                lower_is_better: false,
                is_dispersion: false,
            })
            .collect();
        return (
            "model".to_string(),
            vec![metric_name(table.metric).to_string()],
            rows,
        );
    }
    let mut rows: Vec<GridRow> = table
        .rows
        .iter()
        .enumerate()
        .map(|(r, key)| GridRow {
            label: key.label(),
            values: (0..table.models.len())
                .map(|m| table.cell(r, m).map(|c| c.value))
                .collect(),
            lower_is_better: false,
            is_dispersion: false,
        })
        .collect();
    rows.push(GridRow {
        label: "σ".to_string(),
        values: table.dispersion.clone(),
        lower_is_better: true,
        is_dispersion: true,
    });
    if table.selector.is_intersectional() {
        let outer = &table.selector.factors()[0];
        for (level, sigmas) in table.dispersion_by(outer) {
            rows.push(GridRow {
                label: format!("σ ({outer}={level})"),
                values: sigmas,
                lower_is_better: true,
                is_dispersion: true,
            });
        }
    }
    (table.selector.factors().join("/"), table.models.clone(), rows)
}

fn bold_flags(rows: &[GridRow], axis: BoldAxis, aggregated: bool) -> Vec<Vec<bool>> {
    let mut flags: Vec<Vec<bool>> = rows.iter().map(|r| vec![false; r.values.len()]).collect();
    match axis {
        BoldAxis::Off => {}
        _ if aggregated => {
            let column: Vec<Option<f64>> = rows.iter().map(|r| r.values[0]).collect();
            for (i, b) in best_mask(&column, false).into_iter().enumerate() {
                flags[i][0] = b;
            }
        }
        BoldAxis::Row => {
            for (row, f) in rows.iter().zip(flags.iter_mut()) {
                *f = best_mask(&row.values, row.lower_is_better);
            }
        }
        BoldAxis::Column => {
            let strata: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].is_dispersion).collect();
            let width = rows.first().map_or(0, |r| r.values.len());
            let masks: Vec<Vec<bool>> = (0..width)
                .map(|c| {
                    let column: Vec<Option<f64>> = strata.iter().map(|&i| rows[i].values[c]).collect();
                    best_mask(&column, false)
                })
                .collect();
            for (k, &i) in strata.iter().enumerate() {
                for (c, mask) in masks.iter().enumerate() {
                    flags[i][c] = mask[k];
                }
            }
        }
    }
    flags
}

/// Renders an evaluation table. Fraction metrics are shown in percent when
/// `opts.percent` is set; σ rows share the unit of the cells they summarize.
pub fn render_table(table: &EvaluationTable, opts: &RenderOptions) -> String {
    let (corner, columns, rows) = grid(table);
    let aggregated = table.selector.is_empty();
    let flags = bold_flags(&rows, opts.bold_best, aggregated);
    let percent = opts.percent && table.metric.is_fraction();

    if opts.format == Format::Json {
        return render_json(table, &rows, &flags, &columns);
    }

    let mut out = String::new();
    let mut header = vec![corner];
    header.extend(columns);
    match opts.format {
        Format::Markdown => {
            out.push_str(&markdown_row(&header));
            out.push_str(&markdown_rule(header.len()));
        }
        Format::Csv => out.push_str(&csv_line(&header)),
        Format::Json => unreachable!(),
    }
    for (row, bold) in rows.iter().zip(&flags) {
        let mut fields = vec![row.label.clone()];
        for (v, &b) in row.values.iter().zip(bold) {
            fields.push(match v {
                None => opts.absent_marker.clone(),
                Some(v) => {
                    let text = format_fixed(*v, opts.decimals, percent);
                    if b {
                        emphasize(&text, opts.format)
                    } else {
                        text
                    }
                }
            });
        }
        match opts.format {
            Format::Markdown => out.push_str(&markdown_row(&fields)),
            _ => out.push_str(&csv_line(&fields)),
        }
    }
    out
}

fn render_json(table: &EvaluationTable, rows: &[GridRow], flags: &[Vec<bool>], columns: &[String]) -> String {
    let strata: Vec<Value> = if table.selector.is_empty() {
        Vec::new()
    } else {
        table
            .rows
            .iter()
            .enumerate()
            .map(|(r, key)| {
                let cells: Vec<Value> = (0..table.models.len())
                    .map(|m| match table.cell(r, m) {
                        None => Value::Null,
                        Some(c) => json!({
                            "value": c.value,
                            "per_seed": c.per_seed.iter().map(|(s, v)| json!([s, v])).collect::<Vec<_>>(),
                            "n_samples": c.n_samples,
                            "best": flags[r][m],
                        }),
                    })
                    .collect();
                let stratum: serde_json::Map<String, Value> = key
                    .pairs()
                    .iter()
                    .map(|(f, l)| (f.clone(), Value::String(l.clone())))
                    .collect();
                json!({ "label": key.label(), "stratum": stratum, "cells": cells })
            })
            .collect()
    };
    let aggregated: Vec<Value> = if table.selector.is_empty() {
        rows.iter()
            .zip(flags)
            .map(|(row, f)| json!({ "model": row.label, "value": row.values[0], "best": f[0] }))
            .collect()
    } else {
        Vec::new()
    };
    let dispersion: Vec<Value> = rows
        .iter()
        .filter(|r| r.is_dispersion)
        .map(|r| json!({ "label": r.label, "values": r.values }))
        .collect();
    let doc = json!({
        "metric": metric_name(table.metric),
        "factors": table.selector.factors(),
        "models": if table.selector.is_empty() { table.models.clone() } else { columns.to_vec() },
        "rows": strata,
        "aggregated": aggregated,
        "dispersion": dispersion,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON value serializes");
    s.push('\n');
    s
}
