use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sbs_core::dynamics::{integrate_batch, DriveSignal, IntegrationOptions, LangevinModel, Port};
use sbs_core::scattering::{smatrix_for_coupling, sweep, DetuningConfig, ResonatorSpec, SweepPolicy};
use sbs_core::{Complex64, Execution};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn bench_sweep(c: &mut Criterion) {
    let spec = ResonatorSpec::from_rates(1.0, 0.05, 0.5, 0.01).unwrap();
    let mut group = c.benchmark_group("sweep_100k");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sweep(black_box(&spec), SweepPolicy::CommonDetuning, 0.0, 10.0, 100_000, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_unitarity_batch(c: &mut Criterion) {
    let cases: Vec<(ResonatorSpec, DetuningConfig, Complex64)> = (0..50_000)
        .map(|k| {
            let x = k as f64 * 1e-4;
            (
                ResonatorSpec::from_rates(1.0 + x, 0.0, 0.5 + 0.5 * x, 0.0).unwrap(),
                DetuningConfig::from_signal(x.sin(), x.cos()).unwrap(),
                Complex64::from_polar(1.0 + x, x),
            )
        })
        .collect();
    let mut group = c.benchmark_group("unitarity_50k");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| exec.map(&cases, |(s, d, g)| smatrix_for_coupling(s, d, *g).unwrap().unitarity_defect()))
        });
    }
    group.finish();
}

fn bench_langevin_batch(c: &mut Criterion) {
    let spec = ResonatorSpec::from_rates(1.0, 0.1, 0.5, 0.05).unwrap();
    let mut group = c.benchmark_group("langevin_batch");
    group.sample_size(10);
    for runs in [8usize, 64] {
        let batch: Vec<_> = (0..runs)
            .map(|k| {
                let det = DetuningConfig::from_signal(0.1 * k as f64, 0.0).unwrap();
                let model = LangevinModel::new(&spec, &det, 0.8, 1.0).unwrap();
                let opts = IntegrationOptions::new(50.0, 0.01).with_record_every(100);
                (model, vec![DriveSignal::constant(Port::OpticalIn, 1.0)], opts)
            })
            .collect();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, runs), &batch, |b, batch| {
                b.iter(|| integrate_batch(batch, exec))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_unitarity_batch, bench_langevin_batch);
criterion_main!(benches);
