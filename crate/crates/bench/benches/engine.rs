use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use disagg_core::metrics::{relative_f1_by_location, Baseline, RelativeF1Options};
use disagg_core::stats::chi_square_sf;
use disagg_core::{build_table, kruskal_wallis, partition, FactorSelector, Metric};

fn tables(c: &mut Criterion) {
    let (schema, records) = disagg_bench::corpus(5, 5, 100);
    let models = disagg_core::log::model_ids(&records);
    let city = FactorSelector::new(["city"], &schema).unwrap();
    let city_device = FactorSelector::new(["device", "city"], &schema).unwrap();

    c.bench_function("partition city×device", |b| {
        b.iter(|| partition(black_box(&records), &city_device, &schema).unwrap())
    });
    c.bench_function("accuracy table by city", |b| {
        b.iter(|| build_table(black_box(&records), &city, Metric::Accuracy, &models, None, &schema).unwrap())
    });

    let run: Vec<_> = records
        .iter()
        .filter(|r| r.model_id == models[0] && r.seed == 0)
        .cloned()
        .collect();
    c.bench_function("relative f1 per location", |b| {
        b.iter(|| {
            relative_f1_by_location(black_box(&run), Baseline::WithinCity, &schema, RelativeF1Options::default())
                .unwrap()
        })
    });
}

fn statistics(c: &mut Criterion) {
    let groups: Vec<Vec<f64>> = (0..6)
        .map(|g| (0..700).map(|i| ((i * 7 + g * 13) % 2) as f64).collect())
        .collect();
    c.bench_function("kruskal-wallis 6×700 binary", |b| {
        b.iter(|| kruskal_wallis(black_box(&groups)).unwrap())
    });
    c.bench_function("chi-square sf sweep", |b| {
        b.iter(|| {
            (1..=100)
                .map(|df| chi_square_sf(black_box(df as f64 * 1.3), df).unwrap())
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, tables, statistics);
criterion_main!(benches);
