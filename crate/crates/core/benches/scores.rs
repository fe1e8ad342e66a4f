//! Compare builds: `cargo bench -p vendi-core` (rayon) against
//! `cargo bench -p vendi-core --no-default-features` (sequential).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vendi_core::bandwidth::{select_bandwidth, BandwidthConfig};
use vendi_core::ingest::{pair, EmbeddingSet};
use vendi_core::kernel::gaussian_kernel;
use vendi_core::{par, score_report};

fn gaussian(seed: u64, n: usize, d: usize) -> EmbeddingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    EmbeddingSet::new(n, d, v).unwrap()
}

fn mode() -> &'static str {
    if par::is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("gaussian_kernel/{}", mode()));
    for n in [256, 1024] {
        let x = gaussian(0, n, 128);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| gaussian_kernel(x, 16.0).unwrap())
        });
    }
    group.finish();
}

fn reports(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("score_report/{}", mode()));
    group.sample_size(10);
    for n in [128, 512] {
        let d = pair(gaussian(1, n, 64), gaussian(2, n, 32), None).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| {
            b.iter(|| score_report(d, 11.0, 8.0, 1.0).unwrap())
        });
    }
    group.finish();
}

fn bandwidth(c: &mut Criterion) {
    let x = gaussian(3, 2000, 16);
    let config = BandwidthConfig {
        alpha: 2.0,
        subsample_size: Some(200),
        ..Default::default()
    };
    let mut group = c.benchmark_group(format!("select_bandwidth/{}", mode()));
    group.sample_size(10);
    group.bench_function("n2000", |b| {
        b.iter(|| select_bandwidth(&x, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, kernels, reports, bandwidth);
criterion_main!(benches);
