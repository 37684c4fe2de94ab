//! Sequential vs pixel-parallel reconstruction on a camera-sized volume.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use spikerec::{
    reconstruct_with, simulate_scene, Execution, InitialResidual, NoiseSpec, ReconMethod, SceneKind, SceneSpec,
    SimConfig,
};

fn volume() -> spikerec::SpikeVolume {
    let scene = SceneSpec::new(
        400,
        250,
        SceneKind::RotatingWedge {
            background: 0.15,
            wedge: 0.7,
            half_angle: 0.4,
            radians_per_frame: 0.01,
        },
    )
    .unwrap();
    let config = SimConfig {
        initial_residual: InitialResidual::Uniform { seed: 3 },
        noise: Some(NoiseSpec {
            flip_probability: 0.005,
            rate_jitter: 0.05,
            seed: 11,
        }),
        ..SimConfig::default()
    };
    simulate_scene(&scene, 64, &config).unwrap()
}

fn bench_methods(c: &mut Criterion) {
    let v = volume();
    let mut group = c.benchmark_group("reconstruct_400x250x64");
    group.sample_size(10);
    group.throughput(Throughput::Elements(v.frames() as u64));
    for method in [
        ReconMethod::Fsr,
        ReconMethod::Ssr,
        ReconMethod::Tfi,
        ReconMethod::Tfp { window: 32 },
    ] {
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(method.to_string(), label), &exec, |b, &exec| {
                b.iter(|| reconstruct_with(&v, method, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_methods);
criterion_main!(benches);
