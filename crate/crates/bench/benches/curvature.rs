use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use subriemann_core::curvature::{gauss_curvature_l, gauss_curvature_limit};
use subriemann_core::measures::{gauss_bonnet_residual, integrate_k_l_dsigma_l};
use subriemann_core::{load_scene, Jet, QuadratureSpec};

fn jets(c: &mut Criterion) {
    let x = Jet::variable(0.3, 0, 3, 4).sin() + Jet::variable(0.7, 1, 3, 4);
    let y = Jet::variable(-0.2, 2, 3, 4).exp() * Jet::variable(0.3, 0, 3, 4);
    c.bench_function("jet_mul_order4_3vars", |b| b.iter(|| black_box(x) * black_box(y)));
}

fn pointwise(c: &mut Criterion) {
    let (scene, _) = load_scene("rt_disk").unwrap();
    let (m, s) = (&scene.model, &scene.surface);
    c.bench_function("gauss_curvature_l", |b| {
        b.iter(|| gauss_curvature_l(m, s, black_box([0.2, 1.3]), 100.0).unwrap())
    });
    c.bench_function("gauss_curvature_limit", |b| {
        b.iter(|| gauss_curvature_limit(m, s, black_box([0.2, 1.3])).unwrap())
    });
}

fn integrals(c: &mut Criterion) {
    let (mut scene, _) = load_scene("rt_disk").unwrap();
    scene.quadrature = QuadratureSpec {
        order: 8,
        cells: [4, 4],
        segments: 16,
        max_refinements: 0,
        ..scene.quadrature
    };
    let mut g = c.benchmark_group("rt_disk_coarse");
    g.sample_size(10);
    g.bench_function("gauss_bonnet_residual", |b| {
        b.iter(|| gauss_bonnet_residual(&scene).unwrap().residual)
    });
    g.bench_function("finite_l_area_term", |b| {
        b.iter(|| integrate_k_l_dsigma_l(&scene, 100.0).unwrap().value)
    });
    g.finish();
}

criterion_group!(benches, jets, pointwise, integrals);
criterion_main!(benches);
