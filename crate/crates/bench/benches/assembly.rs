use std::hint::black_box;

use bergman_bench::{ball_symbol, product_symbol};
use bergman_core::toeplitz::{SymbolProfile, GAMMA_ORDER};
use bergman_core::{enumerate_basis, toeplitz_matrix, Assembly, BoundSymbol, Domain, GammaSequence, QuadratureSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn gamma(c: &mut Criterion) {
    let profile = SymbolProfile::new(&BoundSymbol::parse("r1^2 * (1 - r2)", Domain::Reinhardt(vec![1, 1])).unwrap()).unwrap();
    c.bench_function("gamma_sequence_k11_rho20", |b| {
        b.iter(|| GammaSequence::compute(&profile, black_box(&[1, 1]), 0.5, 20, GAMMA_ORDER).unwrap())
    });
}

fn disk_assembly(c: &mut Criterion) {
    let f = ball_symbol("(1 - abs2(z)) * re(z1)", 1).unwrap();
    let mut group = c.benchmark_group("disk_assembly");
    for cutoff in [16u32, 32, 64] {
        let basis = enumerate_basis(1, cutoff, 0.0).unwrap();
        let spec = QuadratureSpec::for_cutoff(cutoff);
        group.bench_with_input(BenchmarkId::new("closed_form", cutoff), &basis, |b, basis| {
            b.iter(|| toeplitz_matrix(&f, basis, &spec, Assembly::Auto).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quadrature", cutoff), &basis, |b, basis| {
            b.iter(|| toeplitz_matrix(&f, basis, &spec, Assembly::Quadrature).unwrap())
        });
    }
    group.finish();
}

fn product_assembly(c: &mut Criterion) {
    let (f, g) = product_symbol("r1^2", "re(zc1) + abs2(zc)", 3, 1, vec![1]).unwrap();
    let basis = enumerate_basis(g.n(), 5, 0.0).unwrap();
    let spec = QuadratureSpec::for_cutoff(5);
    c.bench_function("product_n3_D5_quadrature", |b| b.iter(|| toeplitz_matrix(&f, &basis, &spec, Assembly::Quadrature).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = gamma, disk_assembly, product_assembly
}
criterion_main!(benches);
