//! Acceptance suite: one line per criterion, then a summary.
//!
//! Exits non-zero when a criterion fails unless it is listed in `KNOWN_GAPS`,
//! whose failures are still printed as FAIL together with the reason.

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use disagg_core::log::model_ids;
use disagg_core::metrics::{
    accuracy, build_table, class_prf, location_f1, macro_f1, population_stddev,
    relative_f1_by_location, Baseline, Metric, PrecisionScope, RelativeF1Options,
};
use disagg_core::report::{render_table, RenderOptions};
use disagg_core::stats::chi_square_sf;
use disagg_core::synth::{brute_force_metrics, generate, BiasSpec, CellSpec, CountMode, ErrorModel};
use disagg_core::{
    kruskal_wallis, parse_predictions, partition, write_predictions, CorpusSchema, Factor,
    FactorSelector, PredictionRecord,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const CITIES: [&str; 6] = ["barcelona", "helsinki", "london", "paris", "stockholm", "vienna"];

/// Published per-city accuracies [%] for TUT-Urban then TUT-Mobile, models FFNN, TDNN,
/// CNN6, CNN10, CNN14, with the printed σ row.
const PUBLISHED: [(&str, [f64; 6], f64); 10] = [
    ("TUT-Urban FFNN", [52.9, 56.1, 51.1, 45.5, 53.0, 59.8], 4.4),
    ("TUT-Urban TDNN", [61.7, 61.3, 61.7, 53.8, 47.4, 57.9], 5.2),
    ("TUT-Urban CNN6", [64.8, 70.2, 71.6, 62.0, 73.1, 69.9], 3.9),
    ("TUT-Urban CNN10", [60.9, 67.3, 74.2, 61.0, 68.4, 74.0], 5.4),
    ("TUT-Urban CNN14", [58.9, 63.5, 71.5, 62.4, 68.2, 73.0], 5.1),
    ("TUT-Mobile FFNN", [55.9, 50.8, 52.7, 45.8, 56.2, 58.8], 4.3),
    ("TUT-Mobile TDNN", [56.4, 57.1, 59.2, 54.1, 46.9, 54.3], 3.9),
    ("TUT-Mobile CNN6", [61.3, 67.9, 70.1, 60.1, 72.5, 68.0], 4.5),
    ("TUT-Mobile CNN10", [57.9, 66.7, 72.0, 59.7, 68.3, 72.4], 5.6),
    ("TUT-Mobile CNN14", [57.6, 58.3, 70.8, 60.8, 67.3, 65.7], 4.9),
];

/// Criteria whose stated targets cannot be met by a faithful implementation.
const KNOWN_GAPS: [(u32, &str); 2] = [
    (1, "the printed TUT-Mobile FFNN σ (4.3) is not the population σ of its printed per-city values (4.2476)"),
    (2, "the targeted column's own per-city values give σ = 4.2476, outside 4.3 ± 0.05"),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sigma_reproduction() -> Outcome {
    let mut misses = Vec::new();
    for (name, cities, printed) in PUBLISHED {
        let sigma = population_stddev(&cities).unwrap();
        if (sigma - printed).abs() > 0.05 || format!("{sigma:.1}") != format!("{printed:.1}") {
            misses.push(format!("{name}: σ = {sigma:.4}, printed {printed}"));
        }
    }
    let detail = if misses.is_empty() {
        "10/10 columns".to_string()
    } else {
        format!("{}/10 columns; {}", 10 - misses.len(), misses.join("; "))
    };
    outcome(misses.is_empty(), detail)
}

fn city_schema() -> CorpusSchema {
    let classes = [
        "airport", "bus", "metro", "metro_station", "park", "public_square", "shopping_mall",
        "street_pedestrian", "street_traffic", "tram",
    ];
    CorpusSchema::new(
        classes.iter().map(|c| c.to_string()).collect(),
        vec![Factor::new("city", CITIES), Factor::new("device", ["a", "b", "c"])],
        BTreeMap::new(),
    )
    .unwrap()
}

fn table_reproduction() -> Outcome {
    let targets = PUBLISHED[5].1;
    let n = 1000;
    let schema = city_schema();
    let spec = BiasSpec {
        models: vec!["FFNN".into()],
        seeds: vec![0],
        mode: CountMode::Exact,
        schema: schema.clone(),
        cells: CITIES
            .iter()
            .zip(targets)
            .map(|(city, pct)| CellSpec {
                stratum: BTreeMap::from([("city".to_string(), city.to_string())]),
                n,
                accuracy: pct / 100.0,
                model: None,
                error_model: ErrorModel::Uniform,
            })
            .collect(),
    };
    let spec = BiasSpec::from_toml_str(&spec.to_toml_string()).unwrap();
    let generated = generate(&spec, 2018).unwrap();
    let records = parse_predictions(&write_predictions(&generated, &schema), &schema, None).unwrap();
    let selector = FactorSelector::new(["city"], &schema).unwrap();
    let table = build_table(&records, &selector, Metric::Accuracy, &["FFNN".into()], None, &schema).unwrap();
    let md = render_table(&table, &RenderOptions::default());

    let mut cells_ok = true;
    for (line, (city, pct)) in md.lines().skip(2).zip(CITIES.iter().zip(targets)) {
        let expected = format!("{pct:.1}");
        let ok = line == format!("| {city} | {expected} |") || line == format!("| {city} | **{expected}** |");
        cells_ok &= ok;
    }
    let sigma = table.dispersion[0].unwrap() * 100.0;
    let sigma_ok = (sigma - 4.3).abs() <= 0.05;
    outcome(
        cells_ok && sigma_ok,
        format!(
            "cells {}; σ = {sigma:.4} (target 4.3 ± 0.05)",
            if cells_ok { "6/6 exact" } else { "mismatch" }
        ),
    )
}

/// Direct tie-aware formula with O(N²) ranking.
fn kw_oracle(groups: &[Vec<f64>]) -> Option<(f64, f64)> {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let rank = |x: f64| {
        let below = all.iter().filter(|&&y| y < x).count() as f64;
        let equal = all.iter().filter(|&&y| y == x).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let mean = (n + 1.0) / 2.0;
    let spread: f64 = all.iter().map(|&x| (rank(x) - mean).powi(2)).sum();
    if spread == 0.0 {
        return None;
    }
    let between: f64 = groups
        .iter()
        .map(|g| {
            let r = g.iter().map(|&x| rank(x)).sum::<f64>() / g.len() as f64;
            g.len() as f64 * (r - mean).powi(2)
        })
        .sum();
    let h = (n - 1.0) * between / spread;
    let p = ChiSquared::new((groups.len() - 1) as f64).unwrap().sf(h);
    Some((h, p))
}

fn kruskal_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let (mut worst_h, mut worst_p) = (0.0f64, 0.0f64);
    let mut degenerate = 0;
    for i in 0..1000 {
        let k = rng.gen_range(2..=6);
        let tied = i % 2 == 0;
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..rng.gen_range(3..=50))
                    .map(|_| if tied { rng.gen_range(0..8) as f64 } else { rng.gen::<f64>() * 100.0 })
                    .collect()
            })
            .collect();
        let got = kruskal_wallis(&groups).unwrap();
        match kw_oracle(&groups) {
            Some((h, p)) => {
                worst_h = worst_h.max((got.h - h).abs());
                worst_p = worst_p.max((got.p - p).abs());
            }
            None => {
                degenerate += 1;
                worst_h = worst_h.max(got.h.abs());
                worst_p = worst_p.max((got.p - 1.0).abs());
            }
        }
    }
    let a = kruskal_wallis(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]).unwrap();
    let b = kruskal_wallis(&[vec![1.0, 2.0, 2.0], vec![2.0, 3.0]]).unwrap();
    let fixed = (a.h - 7.2).abs() <= 1e-10
        && (a.p - 0.027_324).abs() <= 5e-7
        && (b.h - 5.0 / 3.0).abs() <= 1e-10
        && (b.p - 0.1967).abs() <= 5e-5;
    outcome(
        worst_h <= 1e-10 && worst_p <= 1e-8 && fixed,
        format!(
            "1000 instances, max |ΔH| = {worst_h:.1e}, max |Δp| = {worst_p:.1e}, {degenerate} all-tied; fixed cases H = {:.4} (p = {:.6}), H = {:.4} (p = {:.4})",
            a.h, a.p, b.h, b.p
        ),
    )
}

fn chi_square_backend() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..=10_000 {
        let x = i as f64 * 0.01;
        worst = worst.max((chi_square_sf(x, 2).unwrap() - (-x / 2.0).exp()).abs());
    }
    let c1 = chi_square_sf(3.841, 1).unwrap();
    let c2 = chi_square_sf(5.991, 2).unwrap();
    let pass = worst <= 1e-12 && (c1 - 0.05).abs() <= 1e-3 && (c2 - 0.05).abs() <= 1e-3;
    outcome(
        pass,
        format!("df=2 max error {worst:.1e} on [0, 100]; Q(3.841; 1) = {c1:.5}, Q(5.991; 2) = {c2:.5}"),
    )
}

fn random_spec(rng: &mut ChaCha8Rng) -> BiasSpec {
    let k = rng.gen_range(2..=8);
    let classes: Vec<String> = (0..k).map(|c| format!("class{c}")).collect();
    let cities = rng.gen_range(1..=4);
    let locations = rng.gen_range(1..=8);
    let city_levels: Vec<String> = (0..cities).map(|c| format!("city{c}")).collect();
    let loc_levels: Vec<String> = (0..locations).map(|l| format!("loc{l}")).collect();
    let map = loc_levels
        .iter()
        .map(|l| (l.clone(), classes[rng.gen_range(0..k)].clone()))
        .collect();
    let schema = CorpusSchema::new(
        classes.clone(),
        vec![
            Factor::new("city", city_levels.clone()),
            Factor::new("location", loc_levels.clone()),
            Factor::new("device", ["a", "b", "c"]),
        ],
        map,
    )
    .unwrap();
    let per_cell_max = 10_000 / locations;
    let cells = loc_levels
        .iter()
        .enumerate()
        .map(|(i, loc)| CellSpec {
            stratum: BTreeMap::from([
                ("city".to_string(), city_levels[i % cities].clone()),
                ("location".to_string(), loc.clone()),
            ]),
            n: {
                let cap = if rng.gen_bool(0.1) { per_cell_max } else { per_cell_max.min(300) };
                rng.gen_range(1..=cap)
            },
            accuracy: rng.gen(),
            model: None,
            error_model: if rng.gen_bool(0.3) {
                ErrorModel::Confusion {
                    class: classes[rng.gen_range(0..k)].clone(),
                }
            } else {
                ErrorModel::Uniform
            },
        })
        .collect();
    BiasSpec {
        models: vec!["m".into()],
        seeds: vec![0],
        mode: CountMode::Rounded,
        schema,
        cells,
    }
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = Vec::new();
    let mut largest = 0;
    for case in 0..200 {
        let spec = random_spec(&mut rng);
        let s = &spec.schema;
        let records = generate(&spec, rng.gen()).unwrap();
        largest = largest.max(records.len());
        let reference = brute_force_metrics(&records, s);
        let mut ok = reference.accuracy == Some(accuracy(&records).unwrap())
            && reference.macro_f1 == Some(macro_f1(&records, s).unwrap());
        for c in &reference.per_class {
            let prf = class_prf(&records, &c.class, s).unwrap();
            ok &= (c.tp, c.fp, c.fn_) == (prf.true_pos, prf.false_pos, prf.false_neg)
                && (c.precision, c.recall, c.f1) == (prf.precision, prf.recall, prf.f1);
        }
        for (loc, f1) in &reference.location_f1 {
            ok &= *f1 == location_f1(&records, loc, s, PrecisionScope::Scope).unwrap();
        }
        if !ok {
            mismatches.push(case);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("200 corpora up to {largest} records, mismatching cases {mismatches:?}"),
    )
}

fn invariant_corpus(rng: &mut ChaCha8Rng) -> (CorpusSchema, Vec<PredictionRecord>) {
    let classes = ["airport", "bus", "park"];
    let schema = CorpusSchema::new(
        classes.iter().map(|c| c.to_string()).collect(),
        vec![
            Factor::new("city", ["b", "h", "l"]),
            Factor::new("location", ["0", "1", "2", "3", "4", "5"]),
            Factor::new("device", ["a", "b", "c"]),
        ],
        (0..6).map(|i| (i.to_string(), classes[i % 3].to_string())).collect(),
    )
    .unwrap();
    let n = rng.gen_range(1..300);
    let records = (0..n)
        .map(|i| {
            let loc = rng.gen_range(0..6);
            PredictionRecord {
                sample_id: format!("s{i}"),
                model_id: "m".into(),
                seed: 0,
                true_label: classes[loc % 3].to_string(),
                predicted_label: classes[rng.gen_range(0..3)].to_string(),
                factors: BTreeMap::from([
                    ("city".to_string(), ["b", "h", "l"][loc % 3].to_string()),
                    ("location".to_string(), loc.to_string()),
                    ("device".to_string(), ["a", "b", "c"][rng.gen_range(0..3)].to_string()),
                ]),
            }
        })
        .collect();
    (schema, records)
}

fn structural_invariants() -> Outcome {
    const CASES: usize = 150;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fail = |name: &'static str, ok: bool| {
        if !ok {
            *failures.entry(name).or_default() += 1;
        }
    };
    for _ in 0..CASES {
        let (s, recs) = invariant_corpus(&mut rng);
        let both = FactorSelector::new(["city", "device"], &s).unwrap();
        let city = FactorSelector::new(["city"], &s).unwrap();

        let p = partition(&recs, &both, &s).unwrap();
        let mut seen = vec![0usize; recs.len()];
        p.strata().iter().flat_map(|st| &st.members).for_each(|&i| seen[i] += 1);
        fail("partition completeness", seen.iter().all(|&c| c == 1));

        let models = model_ids(&recs);
        let fine = build_table(&recs, &both, Metric::Accuracy, &models, None, &s).unwrap();
        let coarse = build_table(&recs, &city, Metric::Accuracy, &models, None, &s).unwrap();
        let mut marginal_ok = true;
        for (r, key) in coarse.rows.iter().enumerate() {
            let (mut n, mut sum) = (0usize, 0.0);
            for (fr, fkey) in fine.rows.iter().enumerate() {
                if fkey.level("city") == key.level("city") {
                    let c = fine.cell(fr, 0).unwrap();
                    n += c.n_samples;
                    sum += c.n_samples as f64 * c.value;
                }
            }
            marginal_ok &= (sum / n as f64 - coarse.cell(r, 0).unwrap().value).abs() <= 1e-12;
        }
        fail("marginal consistency", marginal_ok);

        let total = accuracy(&recs).unwrap();
        let weighted: f64 = coarse
            .rows
            .iter()
            .enumerate()
            .map(|(r, _)| {
                let c = coarse.cell(r, 0).unwrap();
                c.n_samples as f64 / recs.len() as f64 * c.value
            })
            .sum();
        fail("weighted-mean accuracy", (weighted - total).abs() <= 1e-12);

        // every location identical: errors go to the next class
        let classes = rng.gen_range(2..6);
        let per = rng.gen_range(1..20);
        let correct = rng.gen_range(1..=per);
        let (us, urecs) = uniform_corpus(classes, per, correct);
        let ratios = relative_f1_by_location(&urecs, Baseline::Overall, &us, RelativeF1Options::default()).unwrap();
        fail("relative F1 ≡ 1", ratios.iter().all(|(_, r)| (r - 1.0).abs() <= 1e-12));

        let k = rng.gen_range(2..6);
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..rng.gen_range(2..30)).map(|_| rng.gen_range(-50..50) as f64 / 7.0).collect())
            .collect();
        let transformed: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|&x| x.powi(3) + 2.0 * x.exp().ln_1p()).collect())
            .collect();
        let mut shuffled = groups.clone();
        shuffled.shuffle(&mut rng);
        let h = kruskal_wallis(&groups).unwrap().h;
        fail(
            "H monotone invariance",
            (kruskal_wallis(&transformed).unwrap().h - h).abs() <= 1e-12
                && (kruskal_wallis(&shuffled).unwrap().h - h).abs() <= 1e-12,
        );
    }
    outcome(
        failures.is_empty(),
        format!("5 properties × {CASES} cases, failures {failures:?}"),
    )
}

fn uniform_corpus(classes: usize, n: usize, correct: usize) -> (CorpusSchema, Vec<PredictionRecord>) {
    let names: Vec<String> = (0..classes).map(|c| format!("c{c}")).collect();
    let locations: Vec<String> = (0..2 * classes).map(|l| format!("l{l}")).collect();
    let schema = CorpusSchema::new(
        names.clone(),
        vec![Factor::new("location", locations.clone())],
        locations.iter().enumerate().map(|(i, l)| (l.clone(), names[i % classes].clone())).collect(),
    )
    .unwrap();
    let mut records = Vec::new();
    for (li, loc) in locations.iter().enumerate() {
        let class = li % classes;
        for k in 0..n {
            let pred = if k < correct { class } else { (class + 1) % classes };
            records.push(PredictionRecord {
                sample_id: format!("{loc}-{k}"),
                model_id: "m".into(),
                seed: 0,
                true_label: names[class].clone(),
                predicted_label: names[pred].clone(),
                factors: BTreeMap::from([("location".to_string(), loc.clone())]),
            });
        }
    }
    (schema, records)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let schema = CorpusSchema::new(
        vec!["airport".into(), "park".into(), "tram".into()],
        vec![
            Factor::new("city", ["b", "h", "l"]),
            Factor::new("location", ["0", "1", "2", "3", "4", "5"]),
            Factor::new("device", ["a", "b"]),
        ],
        (0..6).map(|i| (i.to_string(), ["airport", "park", "tram"][i % 3].to_string())).collect(),
    )
    .unwrap();
    let spec = BiasSpec {
        models: vec!["A".into(), "B".into()],
        seeds: vec![0, 1],
        mode: CountMode::Rounded,
        schema,
        cells: (0..6)
            .map(|i| CellSpec {
                stratum: BTreeMap::from([
                    ("city".to_string(), ["b", "h", "l"][i % 3].to_string()),
                    ("location".to_string(), i.to_string()),
                ]),
                n: 60,
                accuracy: 0.4 + 0.08 * i as f64,
                model: None,
                error_model: ErrorModel::Uniform,
            })
            .collect(),
    };
    fs::write(path("spec.toml"), spec.to_toml_string()).unwrap();

    let run = |args: &[&str]| {
        let o = Command::new(env!("CARGO_BIN_EXE_disagg")).args(args).output().unwrap();
        (o.status.code(), o.stdout)
    };
    let synth = |out: &str| {
        run(&["synth", "--spec", &path("spec.toml"), "--seed", "99", "--out", out, "--schema-out", &path("schema.toml")]);
        fs::read(out).unwrap()
    };
    let mut failed = Vec::new();
    if synth(&path("a.csv")) != synth(&path("b.csv")) {
        failed.push("synth".to_string());
    }
    let (log, schema) = (path("a.csv"), path("schema.toml"));
    let commands: Vec<Vec<&str>> = vec![
        vec!["evaluate"],
        vec!["evaluate", "--factor", "city", "--factor", "device", "--format", "csv"],
        vec!["evaluate", "--factor", "location", "--metric", "relative-f1", "--format", "json"],
        vec!["locations"],
        vec!["locations", "--baseline", "within-city"],
        vec!["kwtest", "--factor", "city", "--factor", "device", "--obs", "correctness"],
        vec!["kwtest", "--factor", "city", "--obs", "location-f1", "--format", "json"],
        vec!["validate"],
    ];
    for cmd in &commands {
        let mut args = cmd.clone();
        args.extend(["--predictions", &log, "--schema", &schema]);
        let first = run(&args);
        let second = run(&args);
        if first.0 != Some(0) || first != second {
            failed.push(cmd.join(" "));
        }
    }
    outcome(
        failed.is_empty(),
        format!("{} commands run twice, differing {failed:?}", commands.len() + 1),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        (1, "σ reproduction", Duration::from_secs(1), sigma_reproduction),
        (2, "end-to-end table reproduction", Duration::from_secs(10), table_reproduction),
        (3, "Kruskal-Wallis oracle equivalence", Duration::from_secs(5), kruskal_oracle),
        (4, "chi-square backend", Duration::from_secs(1), chi_square_backend),
        (5, "metric oracle equivalence", Duration::from_secs(30), metric_oracle),
        (6, "structural invariants", Duration::from_secs(30), structural_invariants),
        (7, "CLI determinism", Duration::from_secs(10), cli_determinism),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        let status = if pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} [{name}]: {status} ({}; {:.2}s of {}s)",
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if pass {
            passed += 1;
        } else if let Some((_, reason)) = KNOWN_GAPS.iter().find(|(k, _)| *k == id) {
            println!("    known gap: {reason}");
        } else {
            unexpected += 1;
        }
    }
    println!("acceptance: {passed}/7 passed, {unexpected} unexpected failures");
    if unexpected > 0 {
        std::process::exit(1);
    }
}
