use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

use shocklab::hj::{hopf_lax, reconstruct_potential, sup_convolution, BoundaryData};
use shocklab::runner::builtin;
use shocklab::{GridSpec, Rect};

/// A one-thread pool and the default pool. Built without the `parallel` feature the
/// kernels never touch rayon, so both labels measure the sequential fallback.
fn pools() -> Vec<(String, ThreadPool)> {
    let build = if cfg!(feature = "parallel") { "rayon" } else { "sequential" };
    let default = rayon::current_num_threads();
    let mut sizes = vec![1];
    if default > 1 {
        sizes.push(default);
    }
    sizes
        .into_iter()
        .map(|n| (format!("{build}-{n}"), rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()))
        .collect()
}

fn kernels(c: &mut Criterion) {
    let spec = GridSpec::unit(256).unwrap();
    let sol = builtin("mixed-fronts").unwrap().solution(Rect::unit()).unwrap();
    let u = sol.sample(&spec).unwrap();
    let p = reconstruct_potential(&u).unwrap();
    let boundary = BoundaryData::from_field(&p.h);

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new("sample", &label), |b| {
            b.iter(|| pool.install(|| sol.sample(&spec).unwrap()))
        });
        group.bench_function(BenchmarkId::new("hopf_lax", &label), |b| {
            b.iter(|| pool.install(|| hopf_lax(&boundary, &spec).unwrap()))
        });
        group.bench_function(BenchmarkId::new("sup_convolution", &label), |b| {
            b.iter(|| pool.install(|| sup_convolution(&p.h, 0.05).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
