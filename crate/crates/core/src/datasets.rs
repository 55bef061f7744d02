//! Worked-example matrices and sequences used by the reproduction checks.

use crate::symmat::SymMatrix;

/// All-ones 3×3: covariance of a single spectral line at θ = 0.
pub fn ones3() -> SymMatrix {
    SymMatrix::toeplitz(&[1.0, 1.0, 1.0]).expect("finite")
}

/// Unit diagonal, off-diagonal 1/2.
pub fn half_offdiag3() -> SymMatrix {
    SymMatrix::toeplitz(&[1.0, 0.5, 0.5]).expect("finite")
}

/// Non-Toeplitz positive definite 3×3 estimate used for the von Neumann comparison.
pub fn estimate3() -> SymMatrix {
    SymMatrix::from_rows(&[vec![1.1, 0.9, 1.05], vec![0.9, 0.8, 0.9], vec![1.05, 0.9, 1.1]])
        .expect("finite")
        .scale(1.0 / 3.0)
}

/// Reference von Neumann-optimal Toeplitz approximant of [`estimate3`].
pub fn estimate3_vn() -> SymMatrix {
    SymMatrix::toeplitz(&[1.0 / 3.0, 0.942 / 3.0, 0.957 / 3.0]).expect("finite")
}

/// δ-optimal approximant of [`estimate3`] obtained by raising the middle diagonal entry.
pub fn estimate3_delta() -> SymMatrix {
    SymMatrix::toeplitz(&[1.1 / 3.0, 0.9 / 3.0, 1.05 / 3.0]).expect("finite")
}

/// 5×5 sample covariance of a simulated MA(2) realization `y_k = w_k + w_{k-1} + w_{k-2}`.
pub fn sample_cov5() -> SymMatrix {
    SymMatrix::from_rows(&[
        vec![4.0362, 2.9053, 1.8043, 0.4042, 0.1718],
        vec![2.9053, 4.0547, 2.9268, 1.7945, 0.3800],
        vec![1.8043, 2.9268, 4.0792, 2.9143, 1.7733],
        vec![0.4042, 1.7945, 2.9143, 4.0819, 2.9421],
        vec![0.1718, 0.3800, 1.7733, 2.9421, 4.0237],
    ])
    .expect("finite")
}

/// First row of the reference δ-nearest Toeplitz approximant of [`sample_cov5`].
pub const SAMPLE_COV5_TOEPLITZ_ROW: [f64; 5] = [4.0677, 2.9237, 1.7912, 0.3979, 0.1822];
/// Reference δ for [`SAMPLE_COV5_TOEPLITZ_ROW`].
pub const SAMPLE_COV5_TOEPLITZ_DELTA: f64 = 0.0308;

/// First row of the reference δ-nearest MA(2) approximant of [`sample_cov5`].
pub const SAMPLE_COV5_MA2_ROW: [f64; 5] = [3.9945, 2.1588, 0.5693, 0.0, 0.0];
/// Reference δ for [`SAMPLE_COV5_MA2_ROW`].
pub const SAMPLE_COV5_MA2_DELTA: f64 = 1.2161;

/// Autocorrelation of `y_k = w_k + w_{k-1} + w_{k-2}` with unit-variance white `w`.
pub const MA2_UNIT_AUTOCORRELATION: [f64; 5] = [3.0, 2.0, 1.0, 0.0, 0.0];
