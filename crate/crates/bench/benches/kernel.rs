use criterion::{black_box, criterion_group, criterion_main, Criterion};

use tpagerank::graph::generators;
use tpagerank::oracle::{mtt_invariant_with, MttBackend};
use tpagerank::rng::{random_simplex, seeded};
use tpagerank::{
    Graph, IterOptions, Kernel, KernelConfig, Personalization, RankVector, Temperature,
    WeightFunction,
};

fn apply_kernel(c: &mut Criterion) {
    let mut rng = seeded(1);
    let n = 10_000;
    let g = generators::random(n, 10.0 / n as f64, &mut rng).normalize_dangling();
    let w = WeightFunction::exp_identity();
    let cfg = KernelConfig::damped(
        Temperature::new(0.1).unwrap(),
        Temperature::INFINITE,
        0.85,
        Personalization::Uniform,
    );
    let kernel = Kernel::new(&g, &w, cfg).unwrap();
    let x = random_simplex(&mut rng, n);
    c.bench_function("apply_kernel_1e4", |b| {
        b.iter(|| kernel.f_map(black_box(&x)).unwrap())
    });
}

fn iterate_small(c: &mut Criterion) {
    let g = Graph::from_dense(&[[0.0, 1.0, 1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]).unwrap();
    let w = WeightFunction::exp_identity();
    let kernel = Kernel::new(&g, &w, KernelConfig::plain(Temperature::new(0.25).unwrap())).unwrap();
    let x0 = RankVector::new(vec![1.0 / 3.0, 1.0 / 3.0 + 1e-3, 1.0 / 3.0 - 1e-3]).unwrap();
    let opts = IterOptions::for_size(3);
    c.bench_function("iterate_f_three_nodes", |b| {
        b.iter(|| kernel.iterate_f(black_box(&x0), &opts).unwrap())
    });
}

fn mtt_backends(c: &mut Criterion) {
    let mut rng = seeded(2);
    let g = generators::random_irreducible(7, 0.5, &mut rng);
    let w = WeightFunction::exp_identity();
    let kernel = Kernel::new(&g, &w, KernelConfig::plain(Temperature::new(1.0).unwrap())).unwrap();
    let m = kernel
        .transition_matrix(&random_simplex(&mut rng, 7))
        .unwrap();
    c.bench_function("mtt_enumeration_n7", |b| {
        b.iter(|| mtt_invariant_with(black_box(&m), MttBackend::Enumeration).unwrap())
    });
    c.bench_function("mtt_laplacian_n7", |b| {
        b.iter(|| mtt_invariant_with(black_box(&m), MttBackend::Laplacian).unwrap())
    });
}

criterion_group!(benches, apply_kernel, iterate_small, mtt_backends);
criterion_main!(benches);
