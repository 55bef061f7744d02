//! Dense real symmetric matrices and the spectral kernels built on them:
//! eigendecomposition, PSD-cone projection, Toeplitz projection, the matrix
//! logarithm and the adjoint of its Fréchet derivative.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Result};

/// Relative asymmetry above which construction logs a warning before symmetrizing.
pub const ASYMMETRY_WARN: f64 = 1e-8;
/// Positive-definiteness guard for the logarithm, relative to the spectral norm.
pub const PD_THRESHOLD: f64 = 1e-12;
/// Relative gap below which two eigenvalues are treated as equal in divided differences.
pub const DIVIDED_DIFF_GAP: f64 = 1e-12;

/// A dense real symmetric `n × n` matrix, `n ≥ 1`.
///
/// Symmetry is exact: every constructor replaces the input by `(A + Aᵀ)/2`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}", self.data)
    }
}

impl SymMatrix {
    /// Builds a symmetric matrix from a square, finite matrix.
    ///
    /// Asymmetry is removed by averaging with the transpose; a warning is
    /// logged when it exceeds `1e-8` relative to the largest entry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 {
            return input("matrix must be at least 1x1");
        }
        if m.nrows() != m.ncols() {
            return input(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return input("matrix has non-finite entries");
        }
        let asym = relative_asymmetry(&m);
        if asym > ASYMMETRY_WARN {
            log::warn!("symmetrizing matrix with relative asymmetry {asym:.3e}");
        }
        Ok(Self::symmetrized(m))
    }

    /// Internal constructor for results that are symmetric up to rounding.
    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let data = (&m + m.transpose()) * 0.5;
        Self { data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return input(format!("row of length {} in a {n}-row matrix", bad.len()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return input(format!("{} entries for a {n}x{n} matrix", entries.len()));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        Self { data: DMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        Self { data: DMatrix::zeros(n, n) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return input("empty diagonal");
        }
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Symmetric Toeplitz matrix whose first row is `first_row`.
    pub fn toeplitz(first_row: &[f64]) -> Result<Self> {
        let n = first_row.len();
        if n == 0 {
            return input("empty Toeplitz generator");
        }
        if first_row.iter().any(|v| !v.is_finite()) {
            return input("Toeplitz generator has non-finite entries");
        }
        Ok(Self { data: DMatrix::from_fn(n, n, |i, j| first_row[i.abs_diff(j)]) })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.data.row(i).iter().copied().collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let eig = sym_eig(self);
        eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }

    /// Mean of each superdiagonal `k = 0..n`; the first row of the nearest Toeplitz matrix.
    pub fn diagonal_means(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|k| (0..n - k).map(|i| self.data[(i, i + k)]).sum::<f64>() / (n - k) as f64).collect()
    }

    /// Whether every diagonal is constant within `tol` relative to the largest entry.
    pub fn is_toeplitz(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        let n = self.n();
        (0..n).all(|k| (1..n - k).all(|i| (self.data[(i, i + k)] - self.data[(0, k)]).abs() <= tol * scale))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { data: &self.data * c }
    }

    /// Upper-triangular entries, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(self.n(), other.n(), "dimension mismatch");
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = crate::Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.check_same_dim(rhs);
        SymMatrix { data: &self.data + &rhs.data }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.check_same_dim(rhs);
        SymMatrix { data: &self.data - &rhs.data }
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix { data: -&self.data }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

/// Largest `|a_ij - a_ji|` relative to the largest entry.
pub fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigDecomposition {
    /// `V diag(g(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> SymMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let w = g(lam);
            scaled.column_mut(j).scale_mut(w);
        }
        SymMatrix::symmetrized(&scaled * self.vectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eig(a: &SymMatrix) -> EigDecomposition {
    let eig = SymmetricEigen::new(a.data.clone());
    let mut order: Vec<usize> = (0..a.n()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.n(), a.n(), |r, c| eig.eigenvectors[(r, order[c])]);
    EigDecomposition { values, vectors }
}

pub fn min_eig(a: &SymMatrix) -> f64 {
    sym_eig(a).values[0]
}

/// Frobenius-nearest positive semidefinite matrix (negative eigenvalues clipped to zero).
pub fn psd_project(a: &SymMatrix) -> SymMatrix {
    let eig = sym_eig(a);
    if eig.values[0] >= 0.0 {
        return a.clone();
    }
    eig.reconstruct_with(|l| l.max(0.0))
}

/// Frobenius-nearest symmetric Toeplitz matrix: each diagonal replaced by its mean.
pub fn toeplitz_project(a: &SymMatrix) -> SymMatrix {
    SymMatrix::toeplitz(&a.diagonal_means()).expect("diagonal means of a finite matrix are finite")
}

fn require_pd(eig: &EigDecomposition, what: &str) -> Result<()> {
    let norm = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let lo = eig.values[0];
    if lo <= PD_THRESHOLD * norm || lo <= 0.0 {
        return domain(format!("{what} requires a positive definite matrix (min eigenvalue {lo:.3e})"));
    }
    Ok(())
}

/// Principal matrix logarithm of a positive definite matrix.
pub fn matrix_log(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eig(a);
    require_pd(&eig, "matrix logarithm")?;
    Ok(eig.reconstruct_with(f64::ln))
}

/// Matrix exponential by eigen-exponentiation.
pub fn matrix_exp(a: &SymMatrix) -> SymMatrix {
    sym_eig(a).reconstruct_with(f64::exp)
}

/// Gradient of `R ↦ trace(W log R)` at `R = A`.
///
/// In the eigenbasis of `A` this is `V (Vᵀ W V ∘ Φ) Vᵀ`, with `Φ` the first divided
/// differences of `log` at the eigenvalues of `A`.
pub fn log_frechet_adjoint(a: &SymMatrix, w: &SymMatrix) -> Result<SymMatrix> {
    if a.n() != w.n() {
        return input(format!("dimension mismatch: {} vs {}", a.n(), w.n()));
    }
    let eig = sym_eig(a);
    require_pd(&eig, "logarithm derivative")?;
    let v = &eig.vectors;
    let lam = &eig.values;
    let mut g = v.transpose() * &w.data * v;
    let n = a.n();
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] *= log_divided_difference(lam[i], lam[j]);
        }
    }
    Ok(SymMatrix::symmetrized(v * g * v.transpose()))
}

fn log_divided_difference(a: f64, b: f64) -> f64 {
    if (a - b).abs() < DIVIDED_DIFF_GAP * a.max(b) {
        // Removable singularity: use the midpoint derivative.
        2.0 / (a + b)
    } else {
        (a.ln() - b.ln()) / (a - b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ones3() -> SymMatrix {
        SymMatrix::toeplitz(&[1.0, 1.0, 1.0]).unwrap()
    }

    fn assert_close(a: &SymMatrix, b: &SymMatrix, tol: f64) {
        let d = (a - b).max_abs();
        assert!(d <= tol, "matrices differ by {d:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn construction_symmetrizes() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![4.0, 1.0]]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(SymMatrix::from_rows(&[]).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(SymMatrix::from_row_slice(2, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn eigenvalues_of_all_ones() {
        let eig = sym_eig(&ones3());
        assert_abs_diff_eq!(eig.values[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_of_half_offdiagonal() {
        let eig = sym_eig(&SymMatrix::toeplitz(&[1.0, 0.5, 0.5]).unwrap());
        let expected = [0.5, 0.5, 2.0];
        for (v, e) in eig.values.iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = sym_eig(&SymMatrix::identity(3));
        assert!(eig.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn eigen_contract_holds() {
        let a = SymMatrix::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, 3.0, 0.0, 1.0],
            vec![-2.0, 0.0, 1.0, 0.3],
            vec![0.5, 1.0, 0.3, -2.0],
        ])
        .unwrap();
        let eig = sym_eig(&a);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let err = (eig.reconstruct().as_matrix() - a.as_matrix()).norm();
        assert!(err <= 1e-10 * a.frobenius_norm().max(1.0));
        let gram = eig.vectors.transpose() * &eig.vectors - DMatrix::identity(4, 4);
        assert!(gram.norm() <= 1e-10 * 4.0);
    }

    #[test]
    fn psd_project_clips() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        assert_close(&psd_project(&a), &SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap(), 1e-15);
        let p = ones3();
        assert_close(&psd_project(&p), &p, 1e-12);
    }

    #[test]
    fn psd_project_least_squares_toeplitz_example() {
        // Diagonal-averaged 3x3 example: eigenvalue a - c = -0.05/3 on (1, 0, -1)/sqrt(2).
        let t = SymMatrix::toeplitz(&[1.0 / 3.0, 0.9 / 3.0, 1.05 / 3.0]).unwrap();
        let lam = -0.05 / 3.0;
        let u = nalgebra::DVector::from_column_slice(&[1.0, 0.0, -1.0]) / 2f64.sqrt();
        let removed = &u * u.transpose() * lam;
        let expected = SymMatrix::symmetrized(t.as_matrix() - removed);
        let p = psd_project(&t);
        assert_close(&p, &expected, 1e-12);
        assert!(min_eig(&p) >= -1e-12 * t.spectral_norm());
    }

    #[test]
    fn min_eig_examples() {
        assert_abs_diff_eq!(min_eig(&SymMatrix::identity(4)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(min_eig(&ones3()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(min_eig(&SymMatrix::from_diagonal(&[2.0, -3.0]).unwrap()), -3.0, epsilon = 1e-14);
    }

    #[test]
    fn toeplitz_projection_examples() {
        let a = SymMatrix::from_rows(&[vec![1.1, 0.9, 1.05], vec![0.9, 0.8, 0.9], vec![1.05, 0.9, 1.1]]).unwrap();
        let expected = SymMatrix::toeplitz(&[1.0, 0.9, 1.05]).unwrap();
        assert_close(&toeplitz_project(&a), &expected, 1e-15);
        assert_close(&toeplitz_project(&expected), &expected, 1e-15);

        let b = SymMatrix::from_rows(&[vec![1.0, 0.25], vec![0.25, 4.0]]).unwrap();
        let expected = SymMatrix::from_rows(&[vec![2.5, 0.25], vec![0.25, 2.5]]).unwrap();
        assert_close(&toeplitz_project(&b), &expected, 1e-15);
    }

    #[test]
    fn is_toeplitz_detects_structure() {
        assert!(ones3().is_toeplitz(1e-12));
        assert!(!SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap().is_toeplitz(1e-8));
    }

    #[test]
    fn log_examples() {
        assert!(matrix_log(&SymMatrix::identity(3)).unwrap().max_abs() < 1e-15);
        let d = SymMatrix::from_diagonal(&[1f64.exp(), 2f64.exp()]).unwrap();
        assert_close(&matrix_log(&d).unwrap(), &SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap(), 1e-14);

        // [[2,1],[1,2]] has eigenpairs 3 on (1,1)/sqrt2 and 1 on (1,-1)/sqrt2.
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let h = 3f64.ln() / 2.0;
        let expected = SymMatrix::from_rows(&[vec![h, h], vec![h, h]]).unwrap();
        assert_close(&matrix_log(&a).unwrap(), &expected, 1e-14);
    }

    #[test]
    fn log_rejects_singular() {
        assert!(matches!(matrix_log(&ones3()), Err(crate::Error::Domain(_))));
        assert!(matrix_log(&SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap()).is_err());
    }

    #[test]
    fn frechet_adjoint_examples() {
        let w = SymMatrix::from_rows(&[vec![0.3, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_close(&log_frechet_adjoint(&SymMatrix::identity(2), &w).unwrap(), &w, 1e-15);
        let a = SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let got = log_frechet_adjoint(&a, &SymMatrix::identity(2)).unwrap();
        assert_close(&got, &SymMatrix::from_diagonal(&[1.0, 0.5]).unwrap(), 1e-15);
        assert!(log_frechet_adjoint(&SymMatrix::zeros(2), &w).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let a = SymMatrix::toeplitz(&[2.0, -0.5, 0.125]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let back: SymMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }
}
