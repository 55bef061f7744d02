//! Benchmark inputs shared by the criterion suites.

use covmetric::spectra::{cov_sequence, DEFAULT_GRID};
use covmetric::{SpectralMeasure, SymMatrix};

/// `n × n` Toeplitz covariances of a spectral line at 0 and of a half line over a flat floor.
pub fn dirac_pair(n: usize) -> (SymMatrix, SymMatrix) {
    let f = SpectralMeasure::zero(DEFAULT_GRID).and_then(|m| m.with_atom(0.0, 1.0)).expect("valid measure");
    let g = SpectralMeasure::constant(DEFAULT_GRID, 0.5).and_then(|m| m.with_atom(0.0, 0.5)).expect("valid measure");
    let a = cov_sequence(&f, n).and_then(|r| r.toeplitz()).expect("valid lags");
    let b = cov_sequence(&g, n).and_then(|r| r.toeplitz()).expect("valid lags");
    (a, b)
}

/// Deterministic dense symmetric matrix with entries in `[-1, 1]`.
pub fn symmetric(n: usize) -> SymMatrix {
    let entries: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = ((k / n) as f64, (k % n) as f64);
            (0.37 * (i + j) + 0.11 * i * j).sin()
        })
        .collect();
    SymMatrix::from_row_slice(n, &entries).expect("finite entries")
}
