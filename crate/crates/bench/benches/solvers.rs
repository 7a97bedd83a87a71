use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pr3bp_bench::{drag_system, near_l4};
use pr3bp_core::{
    analytic_triangular_point, integrate, refine_equilibrium, zero_velocity_curve, Branch,
    IntegratorConfig, Window,
};

fn equilibria(c: &mut Criterion) {
    let p = drag_system();
    c.bench_function("analytic_l4", |b| {
        b.iter(|| analytic_triangular_point(black_box(&p), Branch::L4).unwrap())
    });
    let seed = analytic_triangular_point(&p, Branch::L4).unwrap();
    c.bench_function("refine_l4", |b| {
        b.iter(|| refine_equilibrium(black_box(&p), (seed.x, seed.y), 1e-12, 50).unwrap())
    });
}

fn trajectory(c: &mut Criterion) {
    let p = drag_system();
    let s0 = near_l4(&p);
    let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-12, 1e-2);
    c.bench_function("integrate_10_time_units", |b| {
        b.iter(|| integrate(black_box(&p), &s0, 10.0, &cfg).unwrap())
    });
}

fn contour(c: &mut Criterion) {
    let p = drag_system();
    let window = Window::new(-1.5, 1.5, -1.5, 1.5).unwrap();
    c.bench_function("zvc_200", |b| {
        b.iter(|| zero_velocity_curve(black_box(&p), 3.2, window, 200).unwrap())
    });
}

criterion_group!(benches, equilibria, trajectory, contour);
criterion_main!(benches);
