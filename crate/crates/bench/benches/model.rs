use criterion::{criterion_group, criterion_main, Criterion};
use folded_simplex::{fold_log_density, log_density, outside_probability};
use folded_simplex_bench::{three_part, three_part_data};
use std::hint::black_box;

fn densities(c: &mut Criterion) {
    let theta = three_part(0.5);
    let data = three_part_data(0.5, 1000);
    let xs: Vec<_> = data.compositions().collect();
    c.bench_function("log_density/1000", |b| {
        b.iter(|| xs.iter().map(|x| log_density(black_box(x), &theta).unwrap()).sum::<f64>())
    });
    c.bench_function("fold_log_density/1000", |b| {
        b.iter(|| xs.iter().map(|x| fold_log_density(black_box(x), &theta).unwrap()).sum::<f64>())
    });
}

fn outside(c: &mut Criterion) {
    let theta = three_part(1.0);
    let mut group = c.benchmark_group("outside_probability");
    group.sample_size(10);
    group.bench_function("1e6 draws", |b| b.iter(|| outside_probability(&theta, 1_000_000, black_box(3)).unwrap()));
    group.finish();
}

criterion_group!(benches, densities, outside);
criterion_main!(benches);
