use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use disagg_core::metrics::{Baseline, F1Averaging, Metric, PrecisionScope, RelativeF1Options};
use disagg_core::report::{BoldAxis, Format};
use disagg_core::{CorpusSchema, FactorSelector, ObservationMode, RenderOptions};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Accuracy,
    MacroF1,
    MicroF1,
    RelativeF1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineArg {
    Overall,
    WithinCity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObsArg {
    Correctness,
    LocationF1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoldArg {
    Off,
    Row,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingArg {
    Macro,
    Micro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecisionScopeArg {
    Scope,
    Location,
}

/// Flags shared by the commands that read a prediction log.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with default values for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prediction log (CSV).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Per-sample factor table (CSV keyed by sample_id).
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Corpus schema (TOML).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Restrict to these models, in this column order.
    #[arg(long = "model")]
    pub models: Vec<String>,
    /// Restrict to these seeds.
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
    /// Treat warnings as data errors.
    #[arg(long)]
    pub strict: bool,
}

/// Values a `--config` file may provide. Keys mirror the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub predictions: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub factor: Vec<String>,
    #[serde(default)]
    pub model: Vec<String>,
    #[serde(default)]
    pub seed: Vec<u64>,
    pub metric: Option<MetricArg>,
    pub baseline: Option<BaselineArg>,
    pub averaging: Option<AveragingArg>,
    pub precision_scope: Option<PrecisionScopeArg>,
    pub obs: Option<ObsArg>,
    pub alpha: Option<f64>,
    pub format: Option<FormatArg>,
    pub decimals: Option<usize>,
    pub bold_best: Option<BoldArg>,
    pub raw: Option<bool>,
    pub strict: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        // a config file is relative to its own directory
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.predictions, &mut cfg.metadata, &mut cfg.schema, &mut cfg.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Fully resolved settings of one command run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub predictions: PathBuf,
    pub metadata: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub schema: CorpusSchema,
    pub selector: FactorSelector,
    pub models: Vec<String>,
    pub seeds: Vec<u64>,
    pub metric: Metric,
    pub baseline: Baseline,
    pub relative: RelativeF1Options,
    pub observation: Option<ObservationMode>,
    pub alpha: f64,
    pub render: RenderOptions,
    pub strict: bool,
}

/// Command-specific flags, before merging with the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub factors: Vec<String>,
    pub metric: Option<MetricArg>,
    pub baseline: Option<BaselineArg>,
    pub averaging: Option<AveragingArg>,
    pub precision_scope: Option<PrecisionScopeArg>,
    pub obs: Option<ObsArg>,
    pub alpha: Option<f64>,
    pub format: Option<FormatArg>,
    pub decimals: Option<usize>,
    pub bold_best: Option<BoldArg>,
    pub raw: bool,
}

fn existing(path: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    let path = path.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))?;
    if !path.is_file() {
        return Err(CliError::Usage(format!("{} does not exist", path.display())));
    }
    Ok(path)
}

impl RunConfig {
    pub fn resolve(common: CommonArgs, over: Overrides) -> Result<Self, CliError> {
        let file = FileConfig::load(common.config.as_deref())?;
        let predictions = existing(common.predictions.or(file.predictions), "predictions")?;
        let schema_path = existing(common.schema.or(file.schema), "schema")?;
        let metadata = match common.metadata.or(file.metadata) {
            Some(p) => Some(existing(Some(p), "metadata")?),
            None => None,
        };
        let schema = CorpusSchema::load(&schema_path).map_err(|e| CliError::Usage(e.to_string()))?;

        let factors = if over.factors.is_empty() { file.factor } else { over.factors };
        let selector =
            FactorSelector::new(factors, &schema).map_err(|e| CliError::Usage(e.to_string()))?;

        let averaging = match over.averaging.or(file.averaging).unwrap_or(AveragingArg::Macro) {
            AveragingArg::Macro => F1Averaging::Macro,
            AveragingArg::Micro => F1Averaging::Micro,
        };
        let precision_scope =
            match over.precision_scope.or(file.precision_scope).unwrap_or(PrecisionScopeArg::Scope) {
                PrecisionScopeArg::Scope => PrecisionScope::Scope,
                PrecisionScopeArg::Location => PrecisionScope::Location,
            };
        let relative = RelativeF1Options {
            averaging,
            precision_scope,
        };
        let baseline = match over.baseline.or(file.baseline).unwrap_or(BaselineArg::Overall) {
            BaselineArg::Overall => Baseline::Overall,
            BaselineArg::WithinCity => Baseline::WithinCity,
        };
        let metric = match over.metric.or(file.metric).unwrap_or(MetricArg::Accuracy) {
            MetricArg::Accuracy => Metric::Accuracy,
            MetricArg::MacroF1 => Metric::F1(F1Averaging::Macro),
            MetricArg::MicroF1 => Metric::F1(F1Averaging::Micro),
            MetricArg::RelativeF1 => Metric::RelativeF1 {
                baseline,
                options: relative,
            },
        };
        let observation = over.obs.or(file.obs).map(|o| match o {
            ObsArg::Correctness => ObservationMode::Correctness,
            ObsArg::LocationF1 => ObservationMode::LocationF1,
        });
        let alpha = over.alpha.or(file.alpha).unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Usage(format!("--alpha {alpha} outside (0, 1)")));
        }

        let defaults = RenderOptions::default();
        let render = RenderOptions {
            format: match over.format.or(file.format) {
                None => defaults.format,
                Some(FormatArg::Markdown) => Format::Markdown,
                Some(FormatArg::Csv) => Format::Csv,
                Some(FormatArg::Json) => Format::Json,
            },
            decimals: over.decimals.or(file.decimals).unwrap_or(defaults.decimals),
            percent: !(over.raw || file.raw.unwrap_or(false)),
            bold_best: match over.bold_best.or(file.bold_best) {
                None => defaults.bold_best,
                Some(BoldArg::Off) => BoldAxis::Off,
                Some(BoldArg::Row) => BoldAxis::Row,
                Some(BoldArg::Column) => BoldAxis::Column,
            },
            absent_marker: defaults.absent_marker,
        };

        Ok(RunConfig {
            predictions,
            metadata,
            out: common.out.or(file.out),
            schema,
            selector,
            models: if common.models.is_empty() { file.model } else { common.models },
            seeds: if common.seeds.is_empty() { file.seed } else { common.seeds },
            metric,
            baseline,
            relative,
            observation,
            alpha,
            render,
            strict: common.strict || file.strict.unwrap_or(false),
        })
    }
}
