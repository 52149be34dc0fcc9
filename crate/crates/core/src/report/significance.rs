use serde_json::json;

use super::number::format_p;
use super::{csv_line, markdown_row, markdown_rule, Format};
use crate::stats::KwResult;

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRow {
    pub model: String,
    pub factor: String,
    pub result: KwResult,
}

fn verdict(p: f64, alpha: f64) -> &'static str {
    if p < alpha {
        "significant"
    } else {
        "not significant"
    }
}

/// Table of H, df, p and a verdict at `alpha`. `caption` is emitted above the
/// table (Markdown), as `#` comment lines (CSV) or as a field (JSON).
pub fn render_significance(
    rows: &[SignificanceRow],
    alpha: f64,
    format: Format,
    caption: Option<&str>,
) -> String {
    let header = ["model", "factor", "H", "df", "p", "N", "verdict"];
    let fields = |r: &SignificanceRow| {
        vec![
            r.model.clone(),
            r.factor.clone(),
            format!("{:.4}", r.result.h),
            r.result.df.to_string(),
            format_p(r.result.p),
            r.result.total().to_string(),
            verdict(r.result.p, alpha).to_string(),
        ]
    };
    let mut out = String::new();
    match format {
        Format::Markdown => {
            if let Some(c) = caption {
                out.push_str(c);
                out.push_str("\n\n");
            }
            out.push_str(&markdown_row(&header));
            out.push_str(&markdown_rule(header.len()));
            for r in rows {
                out.push_str(&markdown_row(&fields(r)));
            }
        }
        Format::Csv => {
            if let Some(c) = caption {
                for line in c.lines() {
                    out.push_str(&format!("# {line}\n"));
                }
            }
            out.push_str(&csv_line(&header));
            for r in rows {
                out.push_str(&csv_line(&fields(r)));
            }
        }
        Format::Json => {
            let results: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "model": r.model,
                        "factor": r.factor,
                        "h": r.result.h,
                        "df": r.result.df,
                        "p": r.result.p,
                        "tie_correction": r.result.tie_correction,
                        "group_sizes": r.result.group_sizes,
                        "significant": r.result.p < alpha,
                    })
                })
                .collect();
            let doc = json!({ "caption": caption, "alpha": alpha, "results": results });
            out = serde_json::to_string_pretty(&doc).expect("JSON value serializes");
            out.push('\n');
        }
    }
    out
}
