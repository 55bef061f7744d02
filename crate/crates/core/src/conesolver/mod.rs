//! Deterministic ADMM solver for the trace-minimization problem family.
//!
//! Rather than a modeling language, the solver exposes fixed templates:
//! [`solve_trace_min`] for the minimal-trace common upper bound of a list of
//! matrices, and [`solve_nearest_structured`] for the δ-nearest structured
//! covariance. Both build a [`admm::ConeProgram`] over coefficient vectors of
//! structured matrix variables.

mod admm;
mod structure;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::approx::GramCertificate;
use crate::error::{input, Result};
use crate::symmat::SymMatrix;
use admm::ConeProgram;

pub use structure::StructureTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative stopping tolerance on the primal and dual residuals.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial penalty; adapted by residual balancing.
    pub rho: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iters: 100_000, rho: 1.0 }
    }
}

/// `min (1/n) trace(M)` subject to `M ⪰ A_i` for every shift, `M` in `m_structure`.
#[derive(Debug, Clone)]
pub struct TraceMinProblem {
    pub shifts: Vec<SymMatrix>,
    pub m_structure: StructureTag,
}

/// δ-nearest structured covariance to `target`.
///
/// Jointly minimizes `2(1/n)trace(M) − (1/n)trace(target) − (1/n)trace(R)` over
/// `(M, R)` with `M ⪰ target`, `M ⪰ R`, `R ⪰ 0`, `R` in `r_structure` and `M` in
/// `m_structure`. With `ma_gram`, `R` must be banded with bandwidth `q` and its
/// lags are tied to a `(q+1)×(q+1)` PSD Gram matrix whose `k`-th superdiagonal
/// sums to `r_k`.
#[derive(Debug, Clone)]
pub struct NearestStructuredProblem {
    pub target: SymMatrix,
    pub r_structure: StructureTag,
    pub ma_gram: bool,
    pub match_trace: bool,
    pub m_structure: StructureTag,
}

impl NearestStructuredProblem {
    pub fn new(target: SymMatrix, r_structure: StructureTag) -> Self {
        Self { target, r_structure, ma_gram: false, match_trace: false, m_structure: StructureTag::Full }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: f64,
    pub m_star: SymMatrix,
    pub r_star: Option<SymMatrix>,
    pub gram: Option<GramCertificate>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

pub fn solve_trace_min(p: &TraceMinProblem, opts: &SolverOptions) -> Result<SolveReport> {
    let Some(first) = p.shifts.first() else {
        return input("trace minimization needs at least one shift");
    };
    let n = first.n();
    if let Some(bad) = p.shifts.iter().find(|a| a.n() != n) {
        return input(format!("dimension mismatch: {} vs {n}", bad.n()));
    }
    p.m_structure.validate(n)?;

    let mut prog = ConeProgram::default();
    let m = prog.add_var(p.m_structure, n);
    for a in &p.shifts {
        prog.add_psd(&[(m, 1.0)], Some(&-a));
    }
    prog.add_cost(m, &DMatrix::identity(n, n), 1.0 / n as f64);

    let out = prog.solve(opts)?;
    Ok(SolveReport {
        status: out.status,
        objective: prog.objective(&out.x),
        m_star: SymMatrix::symmetrized(prog.var_matrix(&out.x, m)),
        r_star: None,
        gram: None,
        iterations: out.iterations,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
    })
}

pub fn solve_nearest_structured(p: &NearestStructuredProblem, opts: &SolverOptions) -> Result<SolveReport> {
    let n = p.target.n();
    p.r_structure.validate(n)?;
    p.m_structure.validate(n)?;
    let bandwidth = match (p.ma_gram, p.r_structure) {
        (false, _) => None,
        (true, StructureTag::BandedToeplitz(q)) => Some(q),
        (true, other) => return input(format!("Gram coupling needs a banded Toeplitz R, got {other}")),
    };
    let nf = n as f64;
    let eye = DMatrix::identity(n, n);

    let mut prog = ConeProgram::default();
    let m = prog.add_var(p.m_structure, n);
    let r = prog.add_var(p.r_structure, n);
    prog.add_psd(&[(m, 1.0)], Some(&-&p.target));
    prog.add_psd(&[(m, 1.0), (r, -1.0)], None);
    prog.add_psd(&[(r, 1.0)], None);
    prog.add_cost(m, &eye, 2.0 / nf);
    prog.add_cost(r, &eye, -1.0 / nf);

    let gram = bandwidth.map(|q| {
        let g = prog.add_var(StructureTag::Full, q + 1);
        prog.add_psd(&[(g, 1.0)], None);
        for k in 0..=q {
            let mut row = vec![(r, k, 1.0)];
            row.extend((0..=q - k).map(|i| (g, StructureTag::full_index(q + 1, i, i + k), -1.0)));
            prog.add_eq(&row, 0.0);
        }
        g
    });
    if p.match_trace {
        let weights = p.r_structure.adjoint(n, &eye);
        let row: Vec<_> = weights.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(k, w)| (r, k, *w)).collect();
        prog.add_eq(&row, p.target.trace());
    }

    let out = prog.solve(opts)?;
    Ok(SolveReport {
        status: out.status,
        objective: prog.objective(&out.x) - p.target.trace() / nf,
        m_star: SymMatrix::symmetrized(prog.var_matrix(&out.x, m)),
        r_star: Some(SymMatrix::symmetrized(prog.var_matrix(&out.x, r))),
        gram: gram.map(|g| GramCertificate::from_raw(SymMatrix::symmetrized(prog.var_matrix(&out.x, g)))),
        iterations: out.iterations,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
    })
}

/// Result of the Gram margin problem for a lag sequence `r_0..r_q`.
#[derive(Debug, Clone)]
pub(crate) struct GramMargin {
    /// Largest `λ` with `Q − λI ⪰ 0` over Gram matrices `Q` reproducing the sequence.
    pub margin: f64,
    /// The maximizing Gram matrix.
    pub gram: SymMatrix,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Solves `min trace(P)` over `P ⪰ 0` whose `k`-th superdiagonal sums to `r_k`
/// for `k = 1..=q`. The margin is `(r_0 − trace P*)/(q+1)` and the Gram matrix
/// is `P* + margin·I`; the sequence admits a PSD Gram matrix iff the margin is
/// nonnegative.
pub(crate) fn solve_gram_margin(r: &[f64], opts: &SolverOptions) -> Result<GramMargin> {
    if r.is_empty() {
        return input("empty lag sequence");
    }
    let d = r.len();
    let q = d - 1;
    let mut prog = ConeProgram::default();
    let pv = prog.add_var(StructureTag::Full, d);
    prog.add_psd(&[(pv, 1.0)], None);
    prog.add_cost(pv, &DMatrix::identity(d, d), 1.0);
    for (k, &rk) in r.iter().enumerate().skip(1) {
        let row: Vec<_> = (0..=q - k).map(|i| (pv, StructureTag::full_index(d, i, i + k), 1.0)).collect();
        prog.add_eq(&row, rk);
    }
    let out = prog.solve(opts)?;
    let pm = prog.var_matrix(&out.x, pv);
    let margin = (r[0] - pm.trace()) / d as f64;
    let gram = SymMatrix::symmetrized(pm + DMatrix::identity(d, d) * margin);
    debug_assert_eq!(prog.var(pv).dim, d);
    Ok(GramMargin { margin, gram, status: out.status, iterations: out.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    fn tm(shifts: Vec<SymMatrix>, tag: StructureTag) -> SolveReport {
        let rep = solve_trace_min(&TraceMinProblem { shifts, m_structure: tag }, &SolverOptions::default()).unwrap();
        assert!(rep.converged(), "{rep:?}");
        rep
    }

    #[test]
    fn worked_toeplitz_pair() {
        let rep = tm(vec![datasets::ones3(), datasets::half_offdiag3()], StructureTag::Toeplitz);
        assert!((rep.objective - 4.0 / 3.0).abs() < 1e-7, "{}", rep.objective);
        assert!(rep.m_star.is_toeplitz(1e-14));
        // Diagonal of M* is 1 + x with x = 1/3.
        assert!((rep.m_star.get(0, 0) - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn identical_shifts() {
        let a = SymMatrix::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.5, 1.0, 0.2], vec![0.0, 0.2, 3.0]]).unwrap();
        let rep = tm(vec![a.clone(), a.clone()], StructureTag::Full);
        assert!((rep.objective - a.trace() / 3.0).abs() < 1e-7);
        assert!((&rep.m_star - &a).max_abs() < 1e-6);
    }

    #[test]
    fn diagonal_shifts() {
        let a = SymMatrix::from_diagonal(&[1.0, 3.0]).unwrap();
        let b = SymMatrix::from_diagonal(&[2.0, 1.0]).unwrap();
        let rep = tm(vec![a, b], StructureTag::Full);
        assert!((rep.objective - 2.5).abs() < 1e-7);
        assert!((&rep.m_star - &SymMatrix::from_diagonal(&[2.0, 3.0]).unwrap()).max_abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        let opts = SolverOptions::default();
        let p = TraceMinProblem { shifts: vec![], m_structure: StructureTag::Full };
        assert!(solve_trace_min(&p, &opts).is_err());
        let p = TraceMinProblem {
            shifts: vec![SymMatrix::identity(2), SymMatrix::identity(3)],
            m_structure: StructureTag::Full,
        };
        assert!(solve_trace_min(&p, &opts).is_err());
        let mut p = NearestStructuredProblem::new(SymMatrix::identity(3), StructureTag::BandedToeplitz(3));
        assert!(solve_nearest_structured(&p, &opts).is_err());
        p.r_structure = StructureTag::Toeplitz;
        p.ma_gram = true;
        assert!(solve_nearest_structured(&p, &opts).is_err());
    }

    #[test]
    fn max_iters_is_reported() {
        let opts = SolverOptions { max_iters: 3, ..Default::default() };
        let p = TraceMinProblem {
            shifts: vec![datasets::ones3(), datasets::half_offdiag3()],
            m_structure: StructureTag::Toeplitz,
        };
        let rep = solve_trace_min(&p, &opts).unwrap();
        assert_eq!(rep.status, SolveStatus::MaxIters);
        assert_eq!(rep.iterations, 3);
    }

    #[test]
    fn self_approximation_of_toeplitz_target() {
        let a = SymMatrix::toeplitz(&[3.0, 2.0, 1.0, 0.0, 0.0]).unwrap();
        let p = NearestStructuredProblem::new(a.clone(), StructureTag::Toeplitz);
        let rep = solve_nearest_structured(&p, &SolverOptions::default()).unwrap();
        assert!(rep.converged());
        assert!(rep.objective.abs() < 1e-7, "{}", rep.objective);
        assert!((rep.r_star.as_ref().unwrap() - &a).max_abs() < 1e-5);
    }

    #[test]
    fn gram_margin_matches_polynomial_minimum() {
        // 3 + 4cosθ + 2cos2θ = (1 + 2cosθ)², minimum 0.
        let g = solve_gram_margin(&[3.0, 2.0, 1.0], &SolverOptions::default()).unwrap();
        assert!(g.margin.abs() < 1e-7, "{}", g.margin);
        // 1 + cosθ has minimum 0 as well; 2 + cosθ has minimum 1 → margin 1/2.
        let g = solve_gram_margin(&[2.0, 0.5], &SolverOptions::default()).unwrap();
        assert!((g.margin - 0.5).abs() < 1e-7, "{}", g.margin);
        let g = solve_gram_margin(&[1.0], &SolverOptions::default()).unwrap();
        assert!((g.margin - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_reports() {
        let p = NearestStructuredProblem::new(datasets::sample_cov5(), StructureTag::Toeplitz);
        let a = solve_nearest_structured(&p, &SolverOptions::default()).unwrap();
        let b = solve_nearest_structured(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.r_star, b.r_star);
    }
}
