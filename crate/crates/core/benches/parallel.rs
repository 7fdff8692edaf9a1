use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use resonance_core::coefficients::{build_table, build_table_with, ExactPolicy};
use resonance_core::evolve::scaling_study;
use resonance_core::resonant::ResonantSystem;
use resonance_core::spectrum::ModelConfig;
use resonance_core::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn table_build(c: &mut Criterion) {
    let cfg = ModelConfig::kg(3).unwrap();
    let mut group = c.benchmark_group("table_build");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, 16), &exec, |b, &exec| {
            b.iter(|| build_table_with(black_box(&cfg), 16, ExactPolicy::None, exec).unwrap())
        });
    }
    group.finish();
}

fn coercivity_sampling(c: &mut Criterion) {
    let cfg = ModelConfig::kg(2).unwrap();
    let table = build_table(&cfg, 16, ExactPolicy::None).unwrap();
    let system = ResonantSystem::new(&table, 16).unwrap();
    let mut group = c.benchmark_group("coercivity_sampling");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, 1000), &exec, |b, &exec| {
            b.iter(|| system.coercivity_check_with(1000, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn amplitude_sweep(c: &mut Criterion) {
    let cfg = ModelConfig::kg(2).unwrap();
    let table = build_table(&cfg, 8, ExactPolicy::None).unwrap();
    let eps = [0.02, 0.04, 0.08, 0.16];
    let mut group = c.benchmark_group("amplitude_sweep");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, eps.len()), &exec, |b, &exec| {
            b.iter(|| scaling_study(&table, 8, black_box(&eps), 2, 16, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, table_build, coercivity_sampling, amplitude_sweep);
criterion_main!(benches);
