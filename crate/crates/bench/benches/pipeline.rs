use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use arsel::*;

fn bench_levinson(c: &mut Criterion) {
    let spec = ProcessSpec::ma1(0.8, 1.0).unwrap();
    let gamma = spec.autocovariances(64).unwrap();
    c.bench_function("levinson_k32", |b| {
        b.iter(|| yule_walker_sequence(std::hint::black_box(&gamma), 32).unwrap())
    });
}

fn bench_fit_all_orders(c: &mut Criterion) {
    let spec = ProcessSpec::ma1(0.8, 1.0).unwrap();
    let mut group = c.benchmark_group("fit_all_orders");
    for (n, k_n) in [(60usize, 7usize), (1000, 31)] {
        let path = spec.simulate(n, StreamId::from_master(1), spec.default_burnin());
        group.bench_with_input(BenchmarkId::from_parameter(n), &path.x, |b, x| {
            b.iter(|| {
                let design = design_summary(std::hint::black_box(x), k_n).unwrap();
                fit_all_orders(&design).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_run_cell(c: &mut Criterion) {
    let spec = ProcessSpec::ma1(0.8, 1.0).unwrap();
    let mut cfg = ExperimentConfig::new(spec);
    cfg.reps = 200;
    c.bench_function("run_cell_200reps_60_7", |b| {
        b.iter(|| run_cell(std::hint::black_box(&cfg), Cell::new(60, 7), 0).unwrap())
    });
}

criterion_group!(benches, bench_levinson, bench_fit_all_orders, bench_run_cell);
criterion_main!(benches);
