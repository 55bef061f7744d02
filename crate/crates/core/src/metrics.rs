//! Distances between covariance matrices.
//!
//! `δ(A, B) = 2τ(A, B) − (1/n)trace(A) − (1/n)trace(B)`, where `τ` is the minimal
//! normalized trace of a matrix dominating both arguments in the PSD order. The
//! Toeplitz variant `δ_T` restricts the dominating matrix to be Toeplitz. The
//! optimizer `M*` yields the perturbations `Q_A = M* − A` and `Q_B = M* − B`
//! with `A + Q_A = B + Q_B`, so `δ = (1/n)(trace Q_A + trace Q_B)`.

use serde::Serialize;

use crate::conesolver::{solve_trace_min, SolveReport, SolveStatus, SolverOptions, StructureTag, TraceMinProblem};
use crate::error::{domain, input, Result};
use crate::symmat::{matrix_log, psd_project, sym_eig, SymMatrix, PD_THRESHOLD};

/// Negative eigenvalues down to `-PSD_CLIP_TOL · max(1, ‖A‖₂)` are clipped to zero.
pub const PSD_CLIP_TOL: f64 = 1e-8;
/// Tolerance for the structural check on inputs of the structured metric.
pub const STRUCTURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSummary {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl From<&SolveReport> for SolverSummary {
    fn from(r: &SolveReport) -> Self {
        Self {
            status: r.status,
            iterations: r.iterations,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub tau: f64,
    pub delta: f64,
    pub m_star: SymMatrix,
    pub q_a: SymMatrix,
    pub q_b: SymMatrix,
    pub structure: StructureTag,
    pub solver: SolverSummary,
}

impl DeltaReport {
    pub fn converged(&self) -> bool {
        self.solver.status == SolveStatus::Converged
    }
}

/// Checks that `a` is PSD up to the clipping tolerance and clips tiny negative eigenvalues.
pub fn clip_psd(a: &SymMatrix, what: &str) -> Result<SymMatrix> {
    let eig = sym_eig(a);
    let norm = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let lo = eig.values[0];
    if lo >= 0.0 {
        return Ok(a.clone());
    }
    if lo < -PSD_CLIP_TOL * norm.max(1.0) {
        return domain(format!("{what} is not positive semidefinite (min eigenvalue {lo:.3e})"));
    }
    Ok(psd_project(a))
}

/// δ (structure `Full`) or δ_T (structure `Toeplitz`) between two PSD matrices.
///
/// A solver that stops at the iteration cap is not an error; the status is carried
/// in the report.
pub fn delta(a: &SymMatrix, b: &SymMatrix, structure: StructureTag, opts: &SolverOptions) -> Result<DeltaReport> {
    if a.n() != b.n() {
        return input(format!("dimension mismatch: {} vs {}", a.n(), b.n()));
    }
    let n = a.n();
    structure.validate(n)?;
    let prepare = |m: &SymMatrix, what: &str| -> Result<SymMatrix> {
        if structure != StructureTag::Full {
            let off = (&structure.project(m) - m).max_abs();
            if off > STRUCTURE_TOL * m.max_abs().max(1.0) {
                return input(format!("{what} is not {structure} (deviation {off:.3e})"));
            }
        }
        let clipped = clip_psd(m, what)?;
        Ok(structure.project(&clipped))
    };
    let a = prepare(a, "first matrix")?;
    let b = prepare(b, "second matrix")?;

    let problem = TraceMinProblem { shifts: vec![a.clone(), b.clone()], m_structure: structure };
    let rep = solve_trace_min(&problem, opts)?;
    let nf = n as f64;
    let q_a = &rep.m_star - &a;
    let q_b = &rep.m_star - &b;
    Ok(DeltaReport {
        tau: rep.m_star.trace() / nf,
        delta: (q_a.trace() + q_b.trace()) / nf,
        m_star: rep.m_star.clone(),
        q_a,
        q_b,
        structure,
        solver: SolverSummary::from(&rep),
    })
}

/// Von Neumann divergence `trace(A (log A − log B))`, with `0·log 0 = 0`.
pub fn vn_divergence(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return input(format!("dimension mismatch: {} vs {}", a.n(), b.n()));
    }
    let a = clip_psd(a, "first argument")?;
    let log_b = matrix_log(b)?;
    let eig = sym_eig(&a);
    let norm = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let entropy_term: f64 =
        eig.values.iter().filter(|&&l| l > PD_THRESHOLD * norm && l > 0.0).map(|&l| l * l.ln()).sum();
    let cross_term = a.as_matrix().dot(log_b.as_matrix());
    Ok(entropy_term - cross_term)
}
