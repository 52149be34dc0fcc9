//! Fixture corpora shared by the benchmarks.

use std::collections::BTreeMap;

use disagg_core::synth::{CellSpec, CountMode, ErrorModel};
use disagg_core::{generate, BiasSpec, CorpusSchema, Factor, PredictionRecord};

pub const CITIES: [&str; 6] = ["barcelona", "helsinki", "london", "paris", "stockholm", "vienna"];
pub const CLASSES: [&str; 10] = [
    "airport",
    "bus",
    "metro",
    "metro_station",
    "park",
    "public_square",
    "shopping_mall",
    "street_pedestrian",
    "street_traffic",
    "tram",
];

/// Six cities, three devices, 84 locations spread evenly over cities and classes.
pub fn schema() -> CorpusSchema {
    let locations: Vec<String> = (0..84).map(|i| i.to_string()).collect();
    let map = locations
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), CLASSES[i % CLASSES.len()].to_string()))
        .collect();
    CorpusSchema::new(
        CLASSES.iter().map(|c| c.to_string()).collect(),
        vec![
            Factor::new("city", CITIES),
            Factor::new("location", locations),
            Factor::new("device", ["a", "b", "c"]),
        ],
        map,
    )
    .expect("fixture schema is valid")
}

/// One cell per (city, location) with `per_location` samples per run.
pub fn corpus(models: usize, seeds: u64, per_location: usize) -> (CorpusSchema, Vec<PredictionRecord>) {
    let schema = schema();
    let cells = (0..84)
        .map(|i| CellSpec {
            stratum: BTreeMap::from([
                ("city".to_string(), CITIES[i % 6].to_string()),
                ("location".to_string(), i.to_string()),
            ]),
            n: per_location,
            accuracy: 0.5,
            model: None,
            error_model: ErrorModel::Uniform,
        })
        .collect();
    let spec = BiasSpec {
        models: (0..models).map(|m| format!("model{m}")).collect(),
        seeds: (0..seeds).collect(),
        mode: CountMode::Rounded,
        schema: schema.clone(),
        cells,
    };
    let records = generate(&spec, 42).expect("fixture spec is valid");
    (schema, records)
}
