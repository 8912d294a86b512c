use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vrpl_core::resource::{self, ChannelConfig};
use vrpl_core::sphere::{self, CapRadius};
use vrpl_core::trace::{self, Predictor, SyntheticModel, WindowingConfig};
use vrpl_core::Exec;

fn executors() -> Vec<(&'static str, Exec)> {
    let mut v = vec![("sequential", Exec::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Exec::Parallel));
    v
}

fn mc_overlap(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc_cap_overlap");
    let (a, b) = (CapRadius::new(0.873).unwrap(), CapRadius::new(0.9).unwrap());
    for (name, exec) in executors() {
        g.bench_function(BenchmarkId::new(name, "1e6"), |bench| {
            bench.iter(|| {
                sphere::mc_cap_overlap_with(exec, a, b, black_box(0.5), 1_000_000, 3).unwrap()
            })
        });
    }
    g.finish();
}

fn mc_rate(c: &mut Criterion) {
    let ch = ChannelConfig {
        bandwidth: 20e6,
        tx_power: 0.2,
        distance: 100.0,
        pathloss_exp: 3.0,
        noise_power: 1e-9,
        antennas: 16,
        users: 8,
    };
    let mut g = c.benchmark_group("mc_avg_rate");
    for (name, exec) in executors() {
        g.bench_function(BenchmarkId::new(name, "1e6"), |bench| {
            bench.iter(|| resource::mc_avg_rate_with(exec, black_box(&ch), 1_000_000, 3).unwrap())
        });
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let win = WindowingConfig::default();
    let traces = trace::generate_synthetic_traces(
        SyntheticModel::RandomWalk { kappa: 3000.0 },
        30,
        60.0,
        5.0,
        11,
    )
    .unwrap();
    let errs: Vec<f64> =
        trace::predict_all(Exec::Sequential, &traces, &win, Predictor::LastPosition)
            .unwrap()
            .iter()
            .map(|s| s.e)
            .collect();
    let grid: Vec<f64> = (0..=200)
        .map(|k| k as f64 * std::f64::consts::PI / 200.0)
        .collect();
    let r_fov = CapRadius::new(0.873).unwrap();

    let mut g = c.benchmark_group("trace");
    g.sample_size(20);
    for (name, exec) in executors() {
        g.bench_function(BenchmarkId::new("predict_all", name), |bench| {
            bench.iter(|| {
                trace::predict_all(
                    exec,
                    black_box(&traces),
                    &win,
                    Predictor::GreatCircleExtrapolation,
                )
                .unwrap()
            })
        });
        g.bench_function(BenchmarkId::new("average_leakage_sweep", name), |bench| {
            bench.iter(|| {
                trace::average_leakage_sweep(exec, black_box(&errs), r_fov, 0.349, &grid).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, mc_overlap, mc_rate, pipeline);
criterion_main!(benches);
