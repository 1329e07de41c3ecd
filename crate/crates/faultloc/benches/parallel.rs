//! Compares the rayon data-parallel entry points against their sequential
//! reference implementations on generation and sweep workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use faultloc::dataset::{
    generate_synthetic, generate_synthetic_serial, Channel, SynthConfig,
};
use faultloc::search::{run_search, run_search_serial, SearchSpace};
use std::hint::black_box;

fn scenario_grid(n: usize) -> Vec<(f64, f64, f64)> {
    (0..n)
        .map(|i| {
            (
                25.0 * ((i % 39) + 1) as f64,
                [0.01, 50.0, 200.0][i % 3],
                [1.0, 200.0][i % 2],
            )
        })
        .collect()
}

fn bench_generate(c: &mut Criterion) {
    let cfg = SynthConfig {
        noise_snr_db: Some(40.0),
        random_seed: 7,
        ..SynthConfig::default()
    };
    let mut group = c.benchmark_group("generate");
    for n in [234usize, 936] {
        let grid = scenario_grid(n);
        group.bench_with_input(BenchmarkId::new("serial", n), &grid, |b, grid| {
            b.iter(|| generate_synthetic_serial(&cfg, black_box(grid), Channel::Current).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &grid, |b, grid| {
            b.iter(|| generate_synthetic(&cfg, black_box(grid), Channel::Current).unwrap())
        });
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let cfg = SynthConfig::default();
    let grid = scenario_grid(78);
    let current = generate_synthetic(&cfg, &grid, Channel::Current).unwrap();
    let voltage = generate_synthetic(&cfg, &grid, Channel::Voltage).unwrap();
    let space = SearchSpace {
        lpf_options: vec![None, Some(150.0)],
        ds_options: vec![1, 5],
        fft_options: vec![true, false],
        l2norm_options: vec![true],
        sqrt_options: vec![false],
        scaler_options: vec![false],
        pca_options: vec![Some(8)],
        models: vec!["brr".into(), "knn".into()],
        seed: 7,
    };

    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("serial", |b| {
        b.iter(|| run_search_serial(black_box(&current), black_box(&voltage), &space, 4).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| run_search(black_box(&current), black_box(&voltage), &space, 4).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_generate, bench_sweep);
criterion_main!(benches);
