use criterion::{criterion_group, criterion_main, Criterion};
use echoform::inversion::{detect_tangent_default, indicator_i, indicator_t, Calibration, GridSpec};
use echoform_bench::disk_dataset;

fn indicators(c: &mut Criterion) {
    let data = disk_dataset(64, (20.0, 50.0, 0.1));
    let cal = Calibration::default();
    let grid = GridSpec::new(-3.0, 3.0, -3.0, 3.0, 0.02).expect("grid");
    let gamma = vec![1.0; 64];
    let mut group = c.benchmark_group("indicators");
    group.sample_size(10);
    group.bench_function("I 301x301", |b| b.iter(|| indicator_i(&data, &gamma, &grid, &cal).expect("I")));
    group.bench_function("T 301x301", |b| b.iter(|| indicator_t(&data, &grid, &cal).expect("T")));
    group.finish();
}

fn detection(c: &mut Criterion) {
    let data = disk_dataset(4, (20.0, 50.0, 0.1));
    let series = data.backscatter(-data.base_directions()[0]).expect("series");
    c.bench_function("detect_tangent", |b| b.iter(|| detect_tangent_default(&series, 6.0).expect("detect")));
}

criterion_group!(benches, indicators, detection);
criterion_main!(benches);
