use bergman_bench::{ball_symbol, product_symbol};
use bergman_core::decomposition::extract_all_blocks;
use bergman_core::linalg;
use bergman_core::spectral::{essential_spectrum_sample, BoundarySchedule};
use bergman_core::{enumerate_basis, toeplitz_matrix, Assembly, MatrixSymbol, QuadratureSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn operator_norm(c: &mut Criterion) {
    let f = ball_symbol("re(z1)^2 + abs2(z2)", 2).unwrap();
    let mut group = c.benchmark_group("operator_norm");
    for cutoff in [6u32, 10, 14] {
        let m = toeplitz_matrix(&f, &enumerate_basis(2, cutoff, 0.0).unwrap(), &QuadratureSpec::for_cutoff(cutoff), Assembly::Auto).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m.entries.nrows()), &m.entries, |b, e| b.iter(|| linalg::operator_norm(e)));
    }
    group.finish();
}

fn block_extraction(c: &mut Criterion) {
    let (f, g) = product_symbol("r1^2", "1 - abs2(zc)", 3, 1, vec![1]).unwrap();
    let m = toeplitz_matrix(&f, &enumerate_basis(3, 8, 0.0).unwrap(), &QuadratureSpec::for_cutoff(8), Assembly::Auto).unwrap();
    c.bench_function("extract_blocks_n3_D8", |b| b.iter(|| extract_all_blocks(&m, &g, 1e-8).unwrap()));
}

fn spectrum_sample(c: &mut Criterion) {
    let sym = MatrixSymbol::parse("2 - abs2(z), zc1; 0, 3 - abs2(z)", 2).unwrap();
    let schedule = BoundarySchedule::new(2, 64, 6, 0);
    c.bench_function("essential_spectrum_2x2", |b| b.iter(|| essential_spectrum_sample(&sym, None, &schedule, 1e-6).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = operator_norm, block_extraction, spectrum_sample
}
criterion_main!(benches);
