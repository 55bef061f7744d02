use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::symmat::{toeplitz_project, SymMatrix};

/// Linear structure imposed on a matrix variable.
///
/// Each structure is a subspace of the symmetric matrices, parameterized by a
/// coefficient vector:
/// - `Full`: the upper triangle, row by row (`n(n+1)/2` coefficients);
/// - `Toeplitz`: the first row `r_0..r_{n-1}`;
/// - `BandedToeplitz(q)`: the first row truncated to `r_0..r_q`, zero beyond lag `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureTag {
    Full,
    Toeplitz,
    BandedToeplitz(usize),
}

impl StructureTag {
    pub fn validate(self, n: usize) -> Result<()> {
        if n == 0 {
            return input("dimension must be positive");
        }
        if let StructureTag::BandedToeplitz(q) = self {
            if q >= n {
                return input(format!("bandwidth {q} must be smaller than dimension {n}"));
            }
        }
        Ok(())
    }

    pub fn n_coeffs(self, n: usize) -> usize {
        match self {
            StructureTag::Full => n * (n + 1) / 2,
            StructureTag::Toeplitz => n,
            StructureTag::BandedToeplitz(q) => q + 1,
        }
    }

    /// Matrix with coefficients `coeffs`.
    pub fn embed(self, n: usize, coeffs: &[f64]) -> DMatrix<f64> {
        debug_assert_eq!(coeffs.len(), self.n_coeffs(n));
        match self {
            StructureTag::Full => {
                let mut m = DMatrix::zeros(n, n);
                let mut idx = 0;
                for i in 0..n {
                    for j in i..n {
                        m[(i, j)] = coeffs[idx];
                        m[(j, i)] = coeffs[idx];
                        idx += 1;
                    }
                }
                m
            }
            StructureTag::Toeplitz | StructureTag::BandedToeplitz(_) => {
                DMatrix::from_fn(n, n, |i, j| coeffs.get(i.abs_diff(j)).copied().unwrap_or(0.0))
            }
        }
    }

    /// Adjoint of `embed` under the Frobenius inner product: `⟨G, embed(e_k)⟩` for every `k`.
    pub fn adjoint(self, n: usize, g: &DMatrix<f64>) -> Vec<f64> {
        match self {
            StructureTag::Full => {
                let mut out = Vec::with_capacity(self.n_coeffs(n));
                for i in 0..n {
                    out.push(g[(i, i)]);
                    for j in (i + 1)..n {
                        out.push(g[(i, j)] + g[(j, i)]);
                    }
                }
                out
            }
            StructureTag::Toeplitz | StructureTag::BandedToeplitz(_) => (0..self.n_coeffs(n))
                .map(|k| {
                    if k == 0 {
                        (0..n).map(|i| g[(i, i)]).sum()
                    } else {
                        (0..n - k).map(|i| g[(i, i + k)] + g[(i + k, i)]).sum()
                    }
                })
                .collect(),
        }
    }

    /// Coefficients of a matrix that already lies in the structure.
    pub fn coeffs_of(self, a: &SymMatrix) -> Vec<f64> {
        match self {
            StructureTag::Full => a.upper_triangle(),
            _ => {
                let mut r = a.diagonal_means();
                r.truncate(self.n_coeffs(a.n()));
                r
            }
        }
    }

    /// Frobenius-nearest matrix in the structure.
    pub fn project(self, a: &SymMatrix) -> SymMatrix {
        match self {
            StructureTag::Full => a.clone(),
            StructureTag::Toeplitz => toeplitz_project(a),
            StructureTag::BandedToeplitz(q) => {
                let mut r = a.diagonal_means();
                r.iter_mut().skip(q + 1).for_each(|v| *v = 0.0);
                SymMatrix::toeplitz(&r).expect("finite diagonal means")
            }
        }
    }

    /// Index of entry `(i, j)`, `i ≤ j`, in the `Full` coefficient vector.
    pub(crate) fn full_index(n: usize, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < n);
        i * (2 * n - i + 1) / 2 + j - i
    }
}

impl fmt::Display for StructureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureTag::Full => write!(f, "full"),
            StructureTag::Toeplitz => write!(f, "toeplitz"),
            StructureTag::BandedToeplitz(q) => write!(f, "banded:{q}"),
        }
    }
}

impl FromStr for StructureTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(StructureTag::Full),
            "toeplitz" => Ok(StructureTag::Toeplitz),
            other => match other.split_once(':') {
                Some(("banded", q)) => q
                    .parse()
                    .map(StructureTag::BandedToeplitz)
                    .map_err(|_| Error::Input(format!("bad bandwidth in {s:?}"))),
                _ => input(format!("unknown structure {s:?}")),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TAGS: [StructureTag; 4] =
        [StructureTag::Full, StructureTag::Toeplitz, StructureTag::BandedToeplitz(0), StructureTag::BandedToeplitz(2)];

    #[test]
    fn full_index_matches_embedding_order() {
        for n in 1..7 {
            let mut idx = 0;
            for i in 0..n {
                for j in i..n {
                    assert_eq!(StructureTag::full_index(n, i, j), idx, "n={n} ({i},{j})");
                    idx += 1;
                }
            }
        }
    }

    #[test]
    fn banded_requires_small_bandwidth() {
        assert!(StructureTag::BandedToeplitz(3).validate(3).is_err());
        assert!(StructureTag::BandedToeplitz(2).validate(3).is_ok());
    }

    #[test]
    fn parse_and_display() {
        for tag in TAGS {
            assert_eq!(tag.to_string().parse::<StructureTag>().unwrap(), tag);
        }
        assert!("banded:x".parse::<StructureTag>().is_err());
        assert!("circulant".parse::<StructureTag>().is_err());
    }

    proptest! {
        #[test]
        fn adjoint_is_adjoint(seed in proptest::collection::vec(-3.0f64..3.0, 64)) {
            let n = 4;
            let g = DMatrix::from_fn(n, n, |i, j| seed[i * n + j]);
            for tag in TAGS {
                let c: Vec<f64> = seed[16..16 + tag.n_coeffs(n)].to_vec();
                let lhs = tag.embed(n, &c).dot(&g);
                let rhs: f64 = tag.adjoint(n, &g).iter().zip(&c).map(|(a, b)| a * b).sum();
                prop_assert!((lhs - rhs).abs() < 1e-10);
            }
        }

        #[test]
        fn projection_is_idempotent(seed in proptest::collection::vec(-3.0f64..3.0, 25)) {
            let a = SymMatrix::from_row_slice(5, &seed).unwrap();
            for tag in TAGS {
                let p = tag.project(&a);
                let pp = tag.project(&p);
                prop_assert!((&p - &pp).max_abs() < 1e-12);
                let back = SymMatrix::new(tag.embed(5, &tag.coeffs_of(&p))).unwrap();
                prop_assert!((&p - &back).max_abs() < 1e-12);
            }
        }
    }
}
