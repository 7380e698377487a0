use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spraylab_core::coords::{sample_grid, Chart, GridSpec};
use spraylab_core::finsler::{self, builtin};
use spraylab_core::{par, spraycalc};

fn jacobi_grid(c: &mut Criterion) {
    let chart = Chart::unit_ball(3).unwrap();
    let metric = builtin::poincare(&chart, -1.0).unwrap();
    let spray = finsler::geodesic_spray(&metric);
    let samples = sample_grid(&chart, &GridSpec::random_ball(256, 0.8, 1)).unwrap();
    let kappa = |p: &_| finsler::scalar_flag_decompose(&spray, &metric, p).unwrap().kappa;

    let mut group = c.benchmark_group("hyperbolic3_scalar_flag_256");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| black_box(par::map(&samples, kappa))));
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(par::map_sequential(&samples, kappa)))
    });
    group.finish();

    let mut group = c.benchmark_group("hyperbolic3_jacobi_256");
    group.sample_size(10);
    let phi = |p: &_| spraycalc::jacobi_endomorphism(&spray, p).unwrap();
    group.bench_function("parallel", |b| b.iter(|| black_box(par::map(&samples, phi))));
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(par::map_sequential(&samples, phi)))
    });
    group.finish();
}

criterion_group!(benches, jacobi_grid);
criterion_main!(benches);
