//! Trace-minimization distances between covariance matrices.
//!
//! Two stationary processes are reconciled by adding perturbation processes of
//! minimal total variance. For power spectra this minimal variance is the L1
//! distance between the spectral measures ([`spectra`]); for finite covariance
//! matrices it is the metric δ, or δ_T when the dominating matrix is Toeplitz
//! ([`metrics`]). Both are computed from semidefinite programs solved by a small
//! deterministic ADMM ([`conesolver`]), which also drives structured (Toeplitz,
//! moving-average) approximation of sample covariances ([`approx`]).

pub use nalgebra;

pub mod approx;
pub mod conesolver;
pub mod datasets;
mod error;
pub mod metrics;
pub mod spectra;
pub mod symmat;

pub use approx::{
    nearest_ma_delta, nearest_toeplitz_delta, nearest_toeplitz_ls, sequence_is_ma, vn_nearest_toeplitz, ApproxResult,
    DeltaApproxOptions, GramCertificate, MaVerdict, VnOptions,
};
pub use conesolver::{SolveReport, SolveStatus, SolverOptions, StructureTag};
pub use error::{Error, Result};
pub use metrics::{delta, vn_divergence, DeltaReport};
pub use spectra::{CovarianceSequence, MaModel, SpectralMeasure, TimeSeries};
pub use symmat::{EigDecomposition, SymMatrix};
