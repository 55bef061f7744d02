use covmetric::spectra::{cov_sequence, DEFAULT_GRID};
use covmetric::symmat::{log_frechet_adjoint, matrix_log, psd_project, sym_eig};
use covmetric::{SpectralMeasure, SymMatrix};
use covmetric_bench::symmetric;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("psd_project");
    for n in [5, 16, 48] {
        let m = symmetric(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |bench, m| bench.iter(|| psd_project(black_box(m))));
    }
    group.finish();

    let m = symmetric(16);
    c.bench_function("sym_eig_16", |bench| bench.iter(|| sym_eig(black_box(&m))));
}

fn bench_log(c: &mut Criterion) {
    let n = 8;
    let m = &symmetric(n) + &SymMatrix::identity(n).scale(2.0 * n as f64);
    let w = symmetric(n);
    c.bench_function("matrix_log_8", |bench| bench.iter(|| matrix_log(black_box(&m))));
    c.bench_function("log_frechet_adjoint_8", |bench| bench.iter(|| log_frechet_adjoint(black_box(&m), black_box(&w))));
}

fn bench_quadrature(c: &mut Criterion) {
    let f =
        SpectralMeasure::from_fn(DEFAULT_GRID, |t| 3.0 + 4.0 * t.cos() + 2.0 * (2.0 * t).cos()).expect("valid density");
    c.bench_function("cov_sequence_48_lags", |bench| bench.iter(|| cov_sequence(black_box(&f), 48)));
}

criterion_group!(benches, bench_eig, bench_log, bench_quadrature);
criterion_main!(benches);
