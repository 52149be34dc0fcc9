//! `disagg`: disaggregated evaluation of prediction logs from the command line.
//!
//! Exit status is 0 on success, 1 on a data error and 2 on a usage or
//! configuration error. Diagnostics go to stderr, results to stdout or `--out`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use commands::SynthArgs;
use config::{
    AveragingArg, BaselineArg, BoldArg, CommonArgs, FormatArg, MetricArg, ObsArg, Overrides,
    PrecisionScopeArg, RunConfig,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

pub fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

#[derive(Parser)]
#[command(name = "disagg", version, about = "Disaggregated evaluation of classifier prediction logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
struct RenderArgs {
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Digits after the decimal point.
    #[arg(long)]
    decimals: Option<usize>,
    #[arg(long, value_enum)]
    bold_best: Option<BoldArg>,
    /// Print fractions as fractions instead of percentages.
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Clone, Default, Args)]
struct RelativeArgs {
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
    /// Averaging of the baseline F1.
    #[arg(long, value_enum)]
    averaging: Option<AveragingArg>,
    /// Records counted for location precision.
    #[arg(long, value_enum)]
    precision_scope: Option<PrecisionScopeArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-stratum metric table: aggregated, unitary or intersectional.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Stratify by this factor; repeat for intersections.
        #[arg(long = "factor")]
        factors: Vec<String>,
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
        #[command(flatten)]
        relative: RelativeArgs,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Box summaries of relative location F1 per model, or per model and city.
    Locations {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        relative: RelativeArgs,
    },
    /// Kruskal-Wallis test per model and factor.
    Kwtest {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "factor")]
        factors: Vec<String>,
        /// Observation unit of the test.
        #[arg(long, value_enum)]
        obs: Option<ObsArg>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Generate a prediction log from a bias spec.
    Synth {
        /// Bias spec (TOML).
        #[arg(long)]
        spec: PathBuf,
        /// RNG seed; there is no default.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the spec's corpus schema here.
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },
    /// Check a log against its schema and summarize it.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn relative_overrides(r: RelativeArgs) -> Overrides {
    Overrides {
        baseline: r.baseline,
        averaging: r.averaging,
        precision_scope: r.precision_scope,
        ..Overrides::default()
    }
}

type Action = fn(&RunConfig) -> Result<String, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, action): (RunConfig, Action) = match cli.command {
        Command::Synth {
            spec,
            seed,
            out,
            schema_out,
        } => {
            return commands::synth(&SynthArgs {
                spec,
                seed,
                out,
                schema_out,
            })
        }
        Command::Evaluate {
            common,
            factors,
            metric,
            relative,
            render,
        } => {
            let over = Overrides {
                factors,
                metric,
                format: render.format,
                decimals: render.decimals,
                bold_best: render.bold_best,
                raw: render.raw,
                ..relative_overrides(relative)
            };
            (RunConfig::resolve(common, over)?, commands::evaluate)
        }
        Command::Locations { common, relative } => (
            RunConfig::resolve(common, relative_overrides(relative))?,
            commands::locations,
        ),
        Command::Kwtest {
            common,
            factors,
            obs,
            alpha,
            format,
        } => {
            let over = Overrides {
                factors,
                obs,
                alpha,
                format,
                ..Overrides::default()
            };
            (RunConfig::resolve(common, over)?, commands::kwtest)
        }
        Command::Validate { common } => {
            (RunConfig::resolve(common, Overrides::default())?, commands::validate)
        }
    };
    let text = action(&cfg)?;
    commands::write_output(cfg.out.as_deref(), &text)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
