use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use meanvalue_core::dynamics::builtins::{rotation_controlled, stable_point};
use meanvalue_core::measures::ltc_diagnostic_with;
use meanvalue_core::values::{value, vstar_estimate, EvaluationCatalog, SearchConfig, SearchMethod};
use meanvalue_core::{Evaluation, Execution, State};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ltc(c: &mut Criterion) {
    let family: Vec<(f64, Evaluation)> =
        (1..=16).map(|k| (k as f64, Evaluation::folded_normal(0.5, k as f64).unwrap())).collect();
    let mut group = c.benchmark_group("ltc_diagnostic");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| ltc_diagnostic_with(black_box(&family), 1.0, 65, mode).unwrap())
        });
    }
    group.finish();
}

fn exhaustive_search(c: &mut Criterion) {
    let sys = stable_point();
    let theta = Evaluation::uniform(0.0, 4.0).unwrap();
    let mut group = c.benchmark_group("exhaustive_search");
    group.sample_size(10);
    for (name, mode) in MODES {
        let search = SearchConfig {
            method: SearchMethod::Exhaustive { segments: 3 },
            use_oracles: false,
            execution: mode,
            ..SearchConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &search, |b, search| {
            b.iter(|| value(&sys, black_box(&State::scalar(0.3)), &theta, search).unwrap())
        });
    }
    group.finish();
}

fn vstar(c: &mut Criterion) {
    let sys = rotation_controlled();
    let catalog = EvaluationCatalog::default();
    let t_grid = [0.0, 1.0, 2.0, 4.0];
    let mut group = c.benchmark_group("vstar_estimate");
    group.sample_size(10);
    for (name, mode) in MODES {
        let search = SearchConfig {
            method: SearchMethod::Exhaustive { segments: 2 },
            execution: mode,
            ..SearchConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &search, |b, search| {
            b.iter(|| vstar_estimate(&sys, black_box(&State::planar(1.0, 0.0)), &catalog, &t_grid, search).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ltc, exhaustive_search, vstar);
criterion_main!(benches);
