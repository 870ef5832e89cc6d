use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mmisq_bench::birth_death_model;
use mmisq_core::{
    deviation_matrix, mgf_curve, simulate_path, stationary_distribution, ModelSpec, ScalingSpec,
    TimeGrid,
};

fn deviation(c: &mut Criterion) {
    let mut group = c.benchmark_group("deviation_matrix");
    for d in [2usize, 8, 32] {
        let m = birth_death_model(d);
        let law = stationary_distribution(m.generator()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| {
            b.iter(|| deviation_matrix(black_box(m.generator()), &law).unwrap())
        });
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let m = ModelSpec::two_state_example();
    let grid = TimeGrid::uniform(1.0, 0.1).unwrap();
    let mut group = c.benchmark_group("simulate_path");
    for alpha in [0.5, 1.0, 1.5] {
        let s = ScalingSpec::new(1000, alpha).unwrap();
        let mut seed = 0u64;
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &s, |b, s| {
            b.iter(|| {
                seed += 1;
                simulate_path(&m, s, 1.0, &grid, seed).unwrap()
            })
        });
    }
    group.finish();
}

fn mgf(c: &mut Criterion) {
    let m = ModelSpec::two_state_example();
    let grid = TimeGrid::uniform(10.0, 0.01).unwrap();
    let mut group = c.benchmark_group("mgf_curve");
    group.sample_size(10);
    for n in [16u64, 256] {
        let s = ScalingSpec::new(n, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| mgf_curve(&m, s, black_box(0.5), &grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, deviation, simulation, mgf);
criterion_main!(benches);
