//! Markdown, CSV and JSON renderings of tables, box summaries and test results.
//!
//! Column orders:
//! - tables: stratum label, then one column per model; σ rows follow the
//!   strata. Aggregated tables (no factors) list one row per model instead.
//! - box summaries: `group, median, q1, q3, lo_whisker, hi_whisker, outliers, n`.
//! - significance: `model, factor, H, df, p, N, verdict`.

mod boxes;
mod number;
mod significance;
mod table;

pub use boxes::render_box_json;
pub use number::{format_fixed, format_p};
pub use significance::{render_significance, SignificanceRow};
pub use table::render_table;

use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Markdown,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (markdown, csv, json)")),
        }
    }
}

/// Which cells compete for emphasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoldAxis {
    Off,
    /// Best model per stratum; on σ rows the smallest spread.
    #[default]
    Row,
    /// Best stratum per model.
    Column,
}

impl FromStr for BoldAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" | "none" => Ok(BoldAxis::Off),
            "row" => Ok(BoldAxis::Row),
            "column" | "col" => Ok(BoldAxis::Column),
            other => Err(format!("unknown bold axis `{other}` (off, row, column)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOptions {
    pub format: Format,
    pub decimals: usize,
    /// Scale fraction-valued metrics by 100. Ratios are never scaled.
    pub percent: bool,
    pub bold_best: BoldAxis,
    pub absent_marker: String,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            format: Format::Markdown,
            decimals: 1,
            percent: true,
            bold_best: BoldAxis::Row,
            absent_marker: "—".to_string(),
        }
    }
}

/// Wraps `text` in the format's emphasis marker.
pub(crate) fn emphasize(text: &str, format: Format) -> String {
    match format {
        Format::Markdown => format!("**{text}**"),
        Format::Csv => format!("*{text}*"),
        Format::Json => text.to_string(),
    }
}

pub(crate) fn csv_line<S: AsRef<str>>(fields: &[S]) -> String {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    wtr.write_record(fields.iter().map(AsRef::as_ref))
        .expect("write to Vec");
    String::from_utf8(wtr.into_inner().expect("flush Vec")).expect("UTF-8 fields")
}

pub(crate) fn markdown_row<S: AsRef<str>>(fields: &[S]) -> String {
    let cells: Vec<String> = fields
        .iter()
        .map(|f| f.as_ref().replace('|', "\\|"))
        .collect();
    format!("| {} |\n", cells.join(" | "))
}

pub(crate) fn markdown_rule(columns: usize) -> String {
    let mut parts = vec!["---".to_string()];
    parts.extend(std::iter::repeat_n("---:".to_string(), columns.saturating_sub(1)));
    format!("|{}|\n", parts.join("|"))
}
