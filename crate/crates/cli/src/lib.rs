//! Command-line front end for `covmetric`.
//!
//! Matrices are read from headerless CSV, spectral measures from JSON. Every
//! command emits one JSON [`report::RunReport`] and exits with
//! 0 (success), 1 (a reproduction check failed), 2 (invalid input),
//! 3 (solver did not converge) or 4 (input not positive semidefinite).

pub mod commands;
pub mod error;
pub mod io;
pub mod report;
pub mod reproduce;

pub use error::{CliError, Status};
