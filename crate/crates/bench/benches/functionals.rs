use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use widthlab_bench::{ball, mixture, polytope_3d, square};
use widthlab_core::{
    build_rule, default_resolution, orlicz_mixed_width, orlicz_width_sum, solve_lambda,
    width_integral, OrliczFunction, OrliczFunctionM, Term,
};

fn rules(c: &mut Criterion) {
    c.bench_function("build_rule/3d_default", |b| {
        b.iter(|| build_rule(3, black_box(default_resolution(3)), None).unwrap())
    });
}

fn integrals(c: &mut Criterion) {
    let r2 = build_rule(2, default_resolution(2), None).unwrap();
    let r3 = build_rule(3, default_resolution(3), None).unwrap();
    // samples are memoized per rule, so these time the integration itself
    let (sq, disk) = (square(), ball(2, 1.0));
    let poly = polytope_3d();
    let phi = mixture();
    c.bench_function("width_integral/2d_square", |b| {
        b.iter(|| width_integral(&sq, black_box(0), &r2).unwrap())
    });
    c.bench_function("orlicz_mixed_width/2d_square_disk", |b| {
        b.iter(|| orlicz_mixed_width(&phi, &sq, &disk, black_box(0), &r2).unwrap())
    });
    c.bench_function("width_integral/3d_polytope", |b| {
        b.iter(|| width_integral(&poly, black_box(1), &r3).unwrap())
    });
}

fn solver(c: &mut Criterion) {
    let (p2, mix) = (OrliczFunction::power(2.0).unwrap(), mixture());
    c.bench_function("solve_lambda/power_mixture", |b| {
        b.iter(|| {
            solve_lambda(&[
                Term::new(&p2, 1.0, black_box(1.3)),
                Term::new(&mix, 1.0, black_box(0.4)),
            ])
            .unwrap()
        })
    });
    let r2 = build_rule(2, default_resolution(2), None).unwrap();
    let phi = OrliczFunctionM::sum_of(vec![p2, mixture()]).unwrap();
    let (sq, disk) = (square(), ball(2, 1.0));
    sq.sample(&r2).unwrap();
    disk.sample(&r2).unwrap();
    let mut group = c.benchmark_group("orlicz_width_sum");
    group.sample_size(20);
    group.bench_function("2d_default_rule", |b| {
        b.iter(|| {
            // a fresh profile each time, so nothing is served from the cache
            let sum = orlicz_width_sum(&phi, &[sq.clone(), disk.clone()]).unwrap();
            sum.sample(&r2).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, rules, integrals, solver);
criterion_main!(benches);
