//! One-thread pool against the full rayon pool on the heavy loops.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kscale::oracle::{sample_wk_cloud, MatrixKind, RandomSpec};
use kscale::range::trace_boundary;
use kscale::scale::build_scale;
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let full = rayon::current_num_threads();
    let mut out = vec![("1 thread".to_string(), ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if full > 1 {
        out.push((format!("{full} threads"), ThreadPoolBuilder::new().num_threads(full).build().unwrap()));
    }
    out
}

fn bench(c: &mut Criterion) {
    let op = RandomSpec::new(6, MatrixKind::Ginibre, 11).operator().unwrap();
    let mut group = c.benchmark_group("parallel");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("trace_boundary", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| trace_boundary(&op, 3, 3600, 1e-9).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("build_scale", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| build_scale(&op, 2000, 1e-9).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("sample_wk_cloud", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| sample_wk_cloud(&op, 3, 10_000, 5).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
