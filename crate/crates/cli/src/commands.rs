use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use disagg_core::log::{model_ids, seeds_of};
use disagg_core::metrics::{box_summary, relative_f1_by_location, Baseline};
use disagg_core::report::{render_box_json, render_significance, render_table};
use disagg_core::schema::{CITY, LOCATION};
use disagg_core::stats::omnibus_factor_test;
use disagg_core::synth::cell_summary;
use disagg_core::{
    build_table, generate, load_predictions, validate_location_consistency, write_predictions,
    BiasSpec, MetadataTable, PredictionRecord, SignificanceRow,
};

use crate::config::RunConfig;
use crate::{warn, CliError};

fn load(cfg: &RunConfig) -> Result<Vec<PredictionRecord>, CliError> {
    let metadata = cfg
        .metadata
        .as_ref()
        .map(|p| {
            MetadataTable::load(p, &cfg.schema)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
        })
        .transpose()?;
    let records = load_predictions(&cfg.predictions, &cfg.schema, metadata.as_ref())
        .map_err(|e| CliError::Data(format!("{}: {e}", cfg.predictions.display())))?;
    if records.is_empty() {
        return Err(CliError::Data(format!("{}: no records", cfg.predictions.display())));
    }
    if !cfg.schema.location_class_map.is_empty() {
        let report = validate_location_consistency(&records, &cfg.schema);
        if !report.is_consistent() {
            let list: Vec<&str> = report.inconsistent.iter().map(String::as_str).collect();
            let msg = format!(
                "true labels disagree with the location map at {}",
                list.join(", ")
            );
            if cfg.strict {
                return Err(CliError::Data(msg));
            }
            warn(&msg);
        }
    }
    Ok(records)
}

fn models(cfg: &RunConfig, records: &[PredictionRecord]) -> Result<Vec<String>, CliError> {
    let logged = model_ids(records);
    if cfg.models.is_empty() {
        return Ok(logged);
    }
    if let Some(m) = cfg.models.iter().find(|m| !logged.contains(m)) {
        return Err(CliError::Data(format!("model `{m}` not in the log")));
    }
    Ok(cfg.models.clone())
}

fn seeds(cfg: &RunConfig, records: &[PredictionRecord], model: &str) -> Result<Vec<u64>, CliError> {
    let logged = seeds_of(records, model);
    if cfg.seeds.is_empty() {
        return Ok(logged);
    }
    if let Some(s) = cfg.seeds.iter().find(|s| !logged.contains(s)) {
        return Err(CliError::Data(format!("model `{model}` has no run with seed {s}")));
    }
    Ok(cfg.seeds.clone())
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn evaluate(cfg: &RunConfig) -> Result<String, CliError> {
    let records = load(cfg)?;
    let models = models(cfg, &records)?;
    let seeds = (!cfg.seeds.is_empty()).then_some(cfg.seeds.as_slice());
    let table = build_table(&records, &cfg.selector, cfg.metric, &models, seeds, &cfg.schema)
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(render_table(&table, &cfg.render))
}

pub fn locations(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.schema.factor(LOCATION).is_none() || cfg.schema.location_class_map.is_empty() {
        return Err(CliError::Usage(
            "schema must declare a `location` factor and location classes".into(),
        ));
    }
    let within_city = cfg.baseline == Baseline::WithinCity;
    if within_city && cfg.schema.factor(CITY).is_none() {
        return Err(CliError::Usage("within-city baseline needs a `city` factor".into()));
    }
    let records = load(cfg)?;
    let mut summaries = Vec::new();
    for model in models(cfg, &records)? {
        let seeds = seeds(cfg, &records, &model)?;
        let groups: Vec<(String, Option<&str>)> = if within_city {
            let present: BTreeSet<&str> = records
                .iter()
                .filter(|r| r.model_id == model)
                .filter_map(|r| r.factor(CITY))
                .collect();
            cfg.schema
                .factor(CITY)
                .into_iter()
                .flat_map(|f| f.levels.iter())
                .filter(|c| present.contains(c.as_str()))
                .map(|c| (format!("{model}/{c}"), Some(c.as_str())))
                .collect()
        } else {
            vec![(model.clone(), None)]
        };
        for (label, city) in groups {
            let mut per_location: Vec<(String, Vec<f64>)> = Vec::new();
            for &seed in &seeds {
                let run: Vec<&PredictionRecord> = records
                    .iter()
                    .filter(|r| r.model_id == model && r.seed == seed)
                    .filter(|r| city.is_none_or(|c| r.factor(CITY) == Some(c)))
                    .collect();
                if run.is_empty() {
                    continue;
                }
                let values = relative_f1_by_location(
                    run.iter().copied(),
                    cfg.baseline,
                    &cfg.schema,
                    cfg.relative,
                )
                .map_err(|e| CliError::Data(format!("{label}, seed {seed}: {e}")))?;
                for (location, v) in values {
                    match per_location.iter_mut().find(|(l, _)| *l == location) {
                        Some((_, vs)) => vs.push(v),
                        None => per_location.push((location, vec![v])),
                    }
                }
            }
            // keep schema order across seeds
            let order = &cfg.schema.factor(LOCATION).expect("checked above").levels;
            per_location.sort_by_key(|(l, _)| order.iter().position(|o| o == l));
            let means: Vec<(String, f64)> = per_location
                .into_iter()
                .map(|(l, vs)| {
                    let mean = vs.iter().sum::<f64>() / vs.len() as f64;
                    (l, mean)
                })
                .collect();
            let summary =
                box_summary(&means).map_err(|e| CliError::Data(format!("{label}: {e}")))?;
            summaries.push((label, summary));
        }
    }
    Ok(render_box_json(&summaries))
}

pub fn kwtest(cfg: &RunConfig) -> Result<String, CliError> {
    let mode = cfg.observation.ok_or_else(|| {
        CliError::Usage("--obs is required (correctness or location-f1)".into())
    })?;
    if cfg.selector.is_empty() {
        return Err(CliError::Usage("kwtest needs at least one --factor".into()));
    }
    let records = load(cfg)?;
    let mut rows = Vec::new();
    for model in models(cfg, &records)? {
        let seeds = seeds(cfg, &records, &model)?;
        for factor in cfg.selector.factors() {
            let result = omnibus_factor_test(&records, factor, mode, &model, &seeds, &cfg.schema)
                .map_err(|e| CliError::Data(format!("model `{model}`, factor `{factor}`: {e}")))?;
            if result.has_small_group() {
                let msg = format!(
                    "model `{model}`, factor `{factor}`: group sizes {:?} include fewer than 5 observations; p is approximate",
                    result.group_sizes
                );
                if cfg.strict {
                    return Err(CliError::Data(msg));
                }
                warn(&msg);
            }
            rows.push(SignificanceRow {
                model: model.clone(),
                factor: factor.clone(),
                result,
            });
        }
    }
    let caption = format!("Kruskal-Wallis H tests, observation: {}", mode.name());
    Ok(render_significance(&rows, cfg.alpha, cfg.render.format, Some(&caption)))
}

pub fn validate(cfg: &RunConfig) -> Result<String, CliError> {
    let records = load(cfg)?;
    let mut out = format!("records: {}\n", records.len());
    let mut seed_sets = BTreeSet::new();
    for model in model_ids(&records) {
        let seeds = seeds_of(&records, &model);
        let n = records.iter().filter(|r| r.model_id == model).count();
        let list: Vec<String> = seeds.iter().map(u64::to_string).collect();
        out.push_str(&format!("model {model}: {n} records, seeds {}\n", list.join(",")));
        seed_sets.insert(seeds);
    }
    for factor in &cfg.schema.factors {
        let present: BTreeSet<&str> = records.iter().filter_map(|r| r.factor(&factor.name)).collect();
        out.push_str(&format!(
            "factor {}: {} of {} levels present\n",
            factor.name,
            present.len(),
            factor.levels.len()
        ));
    }
    if seed_sets.len() > 1 {
        let msg = "models were run with different seed sets";
        if cfg.strict {
            return Err(CliError::Data(msg.into()));
        }
        warn(msg);
    }
    if !cfg.schema.location_class_map.is_empty() {
        let report = validate_location_consistency(&records, &cfg.schema);
        out.push_str(&format!(
            "locations: {} distinct, {} inconsistent\n",
            report.distinct_locations,
            report.inconsistent.len()
        ));
        if !report.is_consistent() {
            return Err(CliError::Data(format!(
                "inconsistent locations: {}",
                report.inconsistent.iter().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
    }
    Ok(out)
}

pub struct SynthArgs {
    pub spec: PathBuf,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub schema_out: Option<PathBuf>,
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let spec = BiasSpec::load(&args.spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let records = generate(&spec, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    for (model, cell, n, correct) in cell_summary(&spec).map_err(|e| CliError::Usage(e.to_string()))? {
        eprintln!("{model} cell {cell}: n = {n}, correct = {correct}");
    }
    eprintln!("{} records", records.len());
    if let Some(path) = &args.schema_out {
        write_output(Some(path), &spec.schema.to_toml_string())?;
    }
    write_output(args.out.as_deref(), &write_predictions(&records, &spec.schema))
}
