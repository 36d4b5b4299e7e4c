use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use spinnoise::oracle::{crosscheck, CrosscheckOptions};
use spinnoise::{ChainModel, MeasurementKernel, TransitionKernel};
use spinnoise_bench::appendix_config;

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel");
    for n in [100usize, 400, 1000] {
        group.bench_with_input(BenchmarkId::new("gaussian", n), &n, |b, &n| {
            b.iter(|| MeasurementKernel::gaussian(black_box(n), 5.0).unwrap())
        });
    }
    for n in [100usize, 200, 400] {
        group.bench_with_input(BenchmarkId::new("product", n), &n, |b, &n| {
            b.iter(|| TransitionKernel::product(black_box(n), 0.058, 0.058).unwrap())
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_joint");
    for n in [20usize, 100, 200] {
        let model = ChainModel::new(&appendix_config(n, 5.0, 2)).unwrap();
        group.bench_with_input(BenchmarkId::new("lag4", n), &model, |b, m| {
            b.iter(|| m.exact_joint(5, 1).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let model = ChainModel::new(&appendix_config(100, 5.0, 10)).unwrap();
    let mut group = c.benchmark_group("sample");
    group.sample_size(20);
    group.bench_function("n100_k10_x1000", |b| {
        b.iter(|| model.sample(black_box(7), 1000, 10, None).unwrap())
    });
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let options = CrosscheckOptions {
        rounds: 2,
        ..CrosscheckOptions::default()
    };
    let mut group = c.benchmark_group("crosscheck");
    group.sample_size(10);
    for n in [4usize, 6] {
        let config = appendix_config(n, 1.0, 2);
        group.bench_with_input(BenchmarkId::new("two_rounds", n), &config, |b, cfg| {
            b.iter(|| crosscheck(cfg, options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, exact, sampling, oracle);
criterion_main!(benches);
