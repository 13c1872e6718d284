use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use condpath::factorize::factorized_partial_covariance;
use condpath::gaussian::implied_covariance;
use condpath::harness::{self, GeneratorConfig};
use condpath::separation::m_separated;

fn config(n: usize) -> GeneratorConfig {
    GeneratorConfig { node_count: n, edge_density: 0.3, seed: 7, ..Default::default() }
}

fn covariance(c: &mut Criterion) {
    let mut g = c.benchmark_group("implied_covariance");
    for n in [5, 10, 20] {
        let d = harness::random_diagram(&config(n)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| b.iter(|| implied_covariance(black_box(d)).unwrap()));
    }
    g.finish();
}

fn separation(c: &mut Criterion) {
    let mut g = c.benchmark_group("m_separated");
    for n in [5, 10, 20] {
        let d = harness::random_diagram(&config(n)).unwrap();
        let z: Vec<usize> = (1..n - 1).step_by(2).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| b.iter(|| m_separated(d, 0, n - 1, black_box(&z)).unwrap()));
    }
    g.finish();
}

fn factorization(c: &mut Criterion) {
    let mut g = c.benchmark_group("factorize");
    for n in [5, 8, 10] {
        let cfg = GeneratorConfig { node_count: n, singly_connected: true, ..config(n) };
        let (d, x, y, s) = harness::random_instance(&cfg, 3).unwrap();
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| factorized_partial_covariance(&d, x.as_str(), y.as_str(), &s).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep_soundness");
    g.sample_size(10);
    g.bench_function("100 trials", |b| b.iter(|| harness::sweep_soundness(&config(6), 100).unwrap()));
    g.finish();
}

criterion_group!(benches, covariance, separation, factorization, sweep);
criterion_main!(benches);
