use std::hint::black_box;

use bt_arc::cocycle::WordPolicy;
use bt_arc::dimension::{gamma0_series, PartitionTable};
use bt_arc::gasket::{render, Chart, RenderConfig, RenderMode};
use bt_arc::spectrum::{lyapunov_estimate, LyapunovConfig};
use bt_arc::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn lyapunov(c: &mut Criterion) {
    let cfg = LyapunovConfig {
        policy: WordPolicy::UniformEdges,
        steps: 100_000,
        trials: 16,
        seed: 1,
        cadence: 8,
    };
    let mut g = c.benchmark_group("lyapunov");
    g.sample_size(10);
    for exec in MODES {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| b.iter(|| lyapunov_estimate(black_box(&cfg), exec).unwrap()),
        );
    }
    g.finish();
}

fn pressure_table(c: &mut Criterion) {
    let mut g = c.benchmark_group("pressure_table");
    g.sample_size(10);
    for exec in MODES {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| b.iter(|| PartitionTable::build(black_box(16), exec).unwrap()),
        );
    }
    g.finish();
}

fn gamma0(c: &mut Criterion) {
    let mut g = c.benchmark_group("gamma0_series");
    g.sample_size(10);
    for exec in MODES {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| b.iter(|| gamma0_series(black_box(13), exec).unwrap()),
        );
    }
    g.finish();
}

fn gasket(c: &mut Criterion) {
    let mut g = c.benchmark_group("render");
    g.sample_size(10);
    for mode in [RenderMode::Fill, RenderMode::Carve] {
        let cfg = RenderConfig {
            depth: 14,
            resolution: 1024,
            chart: Chart::Simplex,
            mode,
        };
        for exec in MODES {
            g.bench_with_input(
                BenchmarkId::new(format!("{mode:?}"), format!("{exec:?}")),
                &exec,
                |b, &exec| b.iter(|| render(black_box(&cfg), exec).unwrap()),
            );
        }
    }
    g.finish();
}

criterion_group!(benches, lyapunov, pressure_table, gamma0, gasket);
criterion_main!(benches);
