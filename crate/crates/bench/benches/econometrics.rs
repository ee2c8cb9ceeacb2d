use criterion::{criterion_group, criterion_main, Criterion};
use housing_seasonality::{chow_scan, fit_seasonal_shift, shift_battery};
use housing_seasonality_bench::shifted_components;
use std::hint::black_box;

fn shift_tests(c: &mut Criterion) {
    let comps = shifted_components(2008..2026, 2021);
    c.bench_function("shift_fit_year_effects", |b| {
        b.iter(|| fit_seasonal_shift(black_box(&comps), 2021, true).unwrap())
    });
    c.bench_function("shift_battery", |b| {
        b.iter(|| shift_battery(black_box(&comps), 2021, true).unwrap())
    });
    c.bench_function("chow_scan_2013_2023", |b| {
        b.iter(|| chow_scan(black_box(&comps), 2013..=2023))
    });

    let long = shifted_components(1950..2050, 2000);
    c.bench_function("shift_fit_century_no_year_effects", |b| {
        b.iter(|| fit_seasonal_shift(black_box(&long), 2000, false).unwrap())
    });
}

criterion_group!(benches, shift_tests);
criterion_main!(benches);
