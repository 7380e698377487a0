//! Independent oracles shared by the integration tests.
//!
//! Nothing here goes through the bracket machinery: the coordinate Jacobi
//! formula reads plain partial derivatives of the spray coefficients, and the
//! finite-difference helpers only ever call value-level evaluations.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use spraylab_core::coords::{Chart, GridSpec, Jet, ScalarField, TangentSample};
use spraylab_core::finsler::{self, builtin, FinslerFunction};
use spraylab_core::spraycalc::{self, FlatSpray, Spray, SprayField};

pub const FD_STEP: f64 = 1e-5;

pub fn sample(x: &[f64], y: &[f64]) -> TangentSample {
    TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
}

pub fn grid(chart: &Chart, count: usize, max_norm: f64, seed: u64) -> Vec<TangentSample> {
    spraylab_core::coords::sample_grid(chart, &GridSpec::random_ball(count, max_norm, seed)).unwrap()
}

/// Shifts coordinate `var` of the `2n` ordering `(x, y)` by `delta`.
pub fn shifted(p: &TangentSample, var: usize, delta: f64) -> TangentSample {
    let n = p.dim();
    let (mut x, mut y) = (p.x.clone(), p.y.clone());
    if var < n {
        x[var] += delta;
    } else {
        y[var - n] += delta;
    }
    TangentSample::new(x, y).unwrap()
}

/// Central difference of `f` along coordinate `var`.
pub fn central<F: Fn(&TangentSample) -> f64>(f: F, p: &TangentSample, var: usize) -> f64 {
    (f(&shifted(p, var, FD_STEP)) - f(&shifted(p, var, -FD_STEP))) / (2.0 * FD_STEP)
}

/// `|a − b| ≤ rel · max(|a|, |b|) + abs`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

/// `max |a − b|` over entries, divided by the largest entry magnitude plus
/// the floor.
pub fn entrywise_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / (a.amax().max(b.amax()) + 1e-10)
}

/// `Φⁱⱼ = 2∂Gⁱ/∂xʲ − S(Nⁱⱼ) − Nⁱₘ Nᵐⱼ` with `S(f) = yᵏ∂f/∂xᵏ − 2Gᵏ∂f/∂yᵏ`,
/// read directly off the second-order coefficient jets.
pub fn coordinate_jacobi(spray: &dyn SprayField, p: &TangentSample) -> DMatrix<f64> {
    let g = spray.coefficients(p, 2).unwrap();
    coordinate_jacobi_from(p, &g)
}

pub fn coordinate_jacobi_from(p: &TangentSample, g: &[Jet]) -> DMatrix<f64> {
    let n = p.dim();
    let (x, y) = (|i: usize| i, |i: usize| n + i);
    let conn = DMatrix::from_fn(n, n, |i, j| g[i].partial(&[y(j)]));
    DMatrix::from_fn(n, n, |i, j| {
        let s_of_n: f64 = (0..n)
            .map(|k| p.y[k] * g[i].partial(&[y(j), x(k)]) - 2.0 * g[k].value() * g[i].partial(&[y(j), y(k)]))
            .sum();
        let nn: f64 = (0..n).map(|m| conn[(i, m)] * conn[(m, j)]).sum();
        2.0 * g[i].partial(&[x(j)]) - s_of_n - nn
    })
}

/// The same coordinate formula with every second derivative replaced by a
/// central difference of exact first derivatives.
pub fn fd_jacobi(spray: &dyn SprayField, p: &TangentSample) -> DMatrix<f64> {
    let n = p.dim();
    let first = |q: &TangentSample, i: usize, var: usize| spray.coefficients(q, 1).unwrap()[i].partial(&[var]);
    let g = spray.coefficients(p, 1).unwrap();
    let conn = DMatrix::from_fn(n, n, |i, j| g[i].partial(&[n + j]));
    DMatrix::from_fn(n, n, |i, j| {
        let s_of_n: f64 = (0..n)
            .map(|k| {
                let dx = central(|q| first(q, i, n + j), p, k);
                let dy = central(|q| first(q, i, n + j), p, n + k);
                p.y[k] * dx - 2.0 * g[k].value() * dy
            })
            .sum();
        let nn: f64 = (0..n).map(|m| conn[(i, m)] * conn[(m, j)]).sum();
        2.0 * g[i].partial(&[j]) - s_of_n - nn
    })
}

/// `Nⁱⱼ` by central differences of the coefficient values.
pub fn fd_connection(spray: &dyn SprayField, p: &TangentSample) -> DMatrix<f64> {
    let n = p.dim();
    DMatrix::from_fn(n, n, |i, j| {
        central(|q| spray.coefficients(q, 0).unwrap()[i].value(), p, n + j)
    })
}

/// `(d_h f)ⱼ = ∂f/∂xʲ − Nⁱⱼ ∂f/∂yⁱ` from finite differences only.
pub fn fd_horizontal(spray: &dyn SprayField, f: &dyn ScalarField, p: &TangentSample) -> Vec<f64> {
    let n = p.dim();
    let conn = fd_connection(spray, p);
    let value = |q: &TangentSample| f.value(q).unwrap();
    let dy: Vec<f64> = (0..n).map(|i| central(value, p, n + i)).collect();
    (0..n)
        .map(|j| central(value, p, j) - (0..n).map(|i| conn[(i, j)] * dy[i]).sum::<f64>())
        .collect()
}

pub fn fd_vertical(f: &dyn ScalarField, p: &TangentSample) -> Vec<f64> {
    let n = p.dim();
    (0..n).map(|i| central(|q| f.value(q).unwrap(), p, n + i)).collect()
}

/// Built-in Finsler functions on the unit ball of dimension `n`.
pub fn builtin_metrics(n: usize) -> Vec<FinslerFunction> {
    let chart = Chart::unit_ball(n).unwrap();
    let mut g0 = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 + i as f64 } else { 0.3 });
    g0 = (&g0 + g0.transpose()) * 0.5;
    vec![
        builtin::euclidean(&chart).unwrap(),
        builtin::constant(&chart, &g0).unwrap(),
        builtin::poincare(&chart, -1.0).unwrap(),
        builtin::poincare(&chart, -4.0).unwrap(),
        builtin::funk(&chart).unwrap(),
    ]
}

/// Named sprays used by the dual-path tests.
pub fn builtin_sprays() -> Vec<(&'static str, Spray)> {
    let ball2 = Chart::unit_ball(2).unwrap();
    let ball3 = Chart::unit_ball(3).unwrap();
    vec![
        ("flat", Arc::new(FlatSpray::new(2)) as Spray),
        (
            "poincare2",
            Arc::new(finsler::geodesic_spray(&builtin::poincare(&ball2, -1.0).unwrap())),
        ),
        (
            "hyperbolic3",
            Arc::new(finsler::geodesic_spray(&builtin::poincare(&ball3, -1.0).unwrap())),
        ),
        (
            "funk2",
            Arc::new(finsler::geodesic_spray(&builtin::funk(&ball2).unwrap())),
        ),
        (
            "polynomial3",
            Arc::new(spraycalc::random_polynomial_spray(&ball3, 11, 2, 1.0).unwrap()),
        ),
    ]
}
