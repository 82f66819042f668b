use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use fedlat_bench::default_scenario;
use fedlat_core::numerics::lambert_w_m1;
use fedlat_core::optimizer::{Scheme, SolverOptions, check_feasible, minimize_delay, solve};

fn lambert(c: &mut Criterion) {
    let xs: Vec<f64> = (0..1000)
        .map(|i| {
            let w = -1.0 - 49.0 * i as f64 / 999.0;
            w * w.exp()
        })
        .collect();
    c.bench_function("lambert_w_m1/1000", |b| {
        b.iter(|| xs.iter().map(|&x| lambert_w_m1(black_box(x)).unwrap()).sum::<f64>())
    });
}

fn feasibility(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("check_feasible");
    for k in [10usize, 50, 200] {
        let sc = default_scenario(k);
        let t = minimize_delay(&sc, &opts).unwrap().total_delay * 1.1;
        group.bench_with_input(BenchmarkId::from_parameter(k), &sc, |b, sc| {
            b.iter(|| check_feasible(black_box(t), sc, &opts))
        });
    }
    group.finish();
}

fn schemes(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let sc = default_scenario(50);
    let mut group = c.benchmark_group("solve_k50");
    for scheme in Scheme::ALL {
        group.bench_function(scheme.label(), |b| {
            b.iter(|| solve(black_box(&sc), scheme, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, lambert, feasibility, schemes);
criterion_main!(benches);
