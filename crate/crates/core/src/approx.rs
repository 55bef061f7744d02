//! Structured approximation of sample covariances.
//!
//! Four approximants of a (generally non-Toeplitz) covariance estimate:
//! δ-nearest Toeplitz, δ-nearest MA(q), the least-squares Toeplitz projection,
//! and the trace-matched Toeplitz minimizer of the von Neumann divergence.
//! MA(q) membership is certified by a PSD Gram matrix whose superdiagonal sums
//! reproduce the lags.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conesolver::{
    solve_gram_margin, solve_nearest_structured, NearestStructuredProblem, SolveStatus, SolverOptions, StructureTag,
};
use crate::error::{domain, input, Error, Result};
use crate::metrics::{clip_psd, vn_divergence};
use crate::spectra::{trig_poly_grid_min, CovarianceSequence, DEFAULT_GRID};
use crate::symmat::{log_frechet_adjoint, min_eig, psd_project, toeplitz_project, SymMatrix};

/// PSD Gram matrix `Q` certifying that `r_k = Σ_i Q_{i,i+k}` is an MA(q) autocorrelation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramCertificate {
    pub q: SymMatrix,
}

impl GramCertificate {
    pub(crate) fn from_raw(q: SymMatrix) -> Self {
        Self { q }
    }

    /// Moving-average order certified (`dim − 1`).
    pub fn order(&self) -> usize {
        self.q.n() - 1
    }

    /// Superdiagonal sums `Σ_i Q_{i,i+k}`, `k = 0..=order`.
    pub fn lag_sums(&self) -> Vec<f64> {
        let d = self.q.n();
        (0..d).map(|k| (0..d - k).map(|i| self.q.get(i, i + k)).sum()).collect()
    }

    /// PSD within `1e-8·trace(Q)` and reproduces `r` within `1e-7`.
    pub fn certifies(&self, r: &[f64]) -> bool {
        let psd = min_eig(&self.q) >= -1e-8 * self.q.trace().abs().max(f64::MIN_POSITIVE);
        let sums = self.lag_sums();
        let lags_match = r.len() >= sums.len()
            && sums.iter().zip(r).all(|(s, v)| (s - v).abs() <= 1e-7)
            && r[sums.len()..].iter().all(|v| v.abs() <= 1e-7);
        psd && lags_match
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub status: Option<SolveStatus>,
    pub iterations: usize,
    pub primal_residual: Option<f64>,
    pub dual_residual: Option<f64>,
    /// Smallest eigenvalue of the approximant.
    pub min_eig: f64,
    pub gradient_norm: Option<f64>,
    /// Objective value after each accepted iterate (descent methods only).
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxResult {
    pub r: SymMatrix,
    /// δ for the δ modes, Frobenius error for least squares, divergence for von Neumann.
    pub distance: f64,
    pub certificate: Option<GramCertificate>,
    pub diagnostics: Diagnostics,
}

impl ApproxResult {
    pub fn converged(&self) -> bool {
        self.diagnostics.status != Some(SolveStatus::MaxIters)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeltaApproxOptions {
    /// Impose `trace(R) = trace(A)`.
    pub match_trace: bool,
    /// Constrain the dominating matrix to be Toeplitz (the δ_T variant).
    pub toeplitz_bound: bool,
    pub solver: SolverOptions,
}

fn delta_approx(
    a: &SymMatrix,
    r_structure: StructureTag,
    ma_gram: bool,
    opts: &DeltaApproxOptions,
) -> Result<ApproxResult> {
    let a = clip_psd(a, "covariance estimate")?;
    let problem = NearestStructuredProblem {
        target: a,
        r_structure,
        ma_gram,
        match_trace: opts.match_trace,
        m_structure: if opts.toeplitz_bound { StructureTag::Toeplitz } else { StructureTag::Full },
    };
    let rep = solve_nearest_structured(&problem, &opts.solver)?;
    let r = rep.r_star.clone().expect("nearest-structured reports carry R");
    let certificate =
        rep.gram.clone().map(|g| if min_eig(&g.q) < 0.0 { GramCertificate::from_raw(psd_project(&g.q)) } else { g });
    Ok(ApproxResult {
        diagnostics: Diagnostics {
            status: Some(rep.status),
            iterations: rep.iterations,
            primal_residual: Some(rep.primal_residual),
            dual_residual: Some(rep.dual_residual),
            min_eig: min_eig(&r),
            ..Default::default()
        },
        r,
        distance: rep.objective,
        certificate,
    })
}

/// Toeplitz PSD matrix minimizing `δ(A, R)`.
pub fn nearest_toeplitz_delta(a: &SymMatrix, opts: &DeltaApproxOptions) -> Result<ApproxResult> {
    delta_approx(a, StructureTag::Toeplitz, false, opts)
}

/// Autocorrelation matrix of an MA(q) process minimizing `δ(A, R)`, with its Gram certificate.
pub fn nearest_ma_delta(a: &SymMatrix, q: usize, opts: &DeltaApproxOptions) -> Result<ApproxResult> {
    if q >= a.n() {
        return input(format!("order {q} must be smaller than dimension {}", a.n()));
    }
    delta_approx(a, StructureTag::BandedToeplitz(q), true, opts)
}

/// Least-squares Toeplitz approximant (diagonal averaging). May be indefinite.
pub fn nearest_toeplitz_ls(a: &SymMatrix) -> ApproxResult {
    let r = toeplitz_project(a);
    ApproxResult {
        distance: (a - &r).frobenius_norm(),
        diagnostics: Diagnostics { min_eig: min_eig(&r), ..Default::default() },
        r,
        certificate: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VnOptions {
    /// Stopping threshold on the Euclidean norm of the gradient in lag coordinates.
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for VnOptions {
    fn default() -> Self {
        Self { grad_tol: 1e-8, max_iters: 10_000 }
    }
}

/// Smallest eigenvalue of the starting point, relative to `trace/n`.
const VN_START_MARGIN: f64 = 1e-2;
const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Differencing step for the Hessian, relative to the smallest eigenvalue of the iterate.
const HESSIAN_STEP: f64 = 1e-4;

/// Trace-matched positive definite Toeplitz matrix minimizing `trace(A (log A − log R))`.
///
/// Descent on the lags `r_1..r_{n-1}` (the lag `r_0 = trace(A)/n` is fixed by the
/// trace constraint). Steps follow the Newton direction, with the Hessian
/// obtained by differencing the analytic gradient, and fall back to steepest
/// descent when that Hessian is not positive definite. Armijo backtracking
/// rejects indefinite trial points, so the objective decreases monotonically.
pub fn vn_nearest_toeplitz(a: &SymMatrix, opts: &VnOptions) -> Result<ApproxResult> {
    let a = clip_psd(a, "covariance estimate")?;
    let n = a.n();
    let r0 = a.trace() / n as f64;
    if r0 <= 0.0 {
        return domain("covariance estimate must have positive trace");
    }
    if n == 1 {
        return Ok(ApproxResult {
            r: a.clone(),
            distance: 0.0,
            certificate: None,
            diagnostics: Diagnostics { min_eig: a.get(0, 0), gradient_norm: Some(0.0), ..Default::default() },
        });
    }

    let mut start = toeplitz_project(&a);
    let lo = min_eig(&start);
    let target = VN_START_MARGIN * r0;
    if lo < target {
        let s = (target - lo) / (r0 - lo);
        start = &start.scale(1.0 - s) + &SymMatrix::identity(n).scale(s * r0);
    }
    let build = |lags: &[f64]| -> SymMatrix {
        let mut row = Vec::with_capacity(n);
        row.push(r0);
        row.extend_from_slice(lags);
        SymMatrix::toeplitz(&row).expect("finite lags")
    };
    let objective = |r: &SymMatrix| -> Option<f64> { vn_divergence(&a, r).ok() };
    let gradient = |r: &SymMatrix| -> Result<Vec<f64>> {
        let g = log_frechet_adjoint(r, &a)?;
        Ok(StructureTag::Toeplitz.adjoint(n, g.as_matrix())[1..].iter().map(|v| -v).collect())
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();

    // Newton direction, or None when the differenced Hessian is not usable.
    let newton = |lags: &[f64], g: &[f64], r: &SymMatrix| -> Option<Vec<f64>> {
        let p = lags.len();
        let h = HESSIAN_STEP * r0.min(min_eig(r));
        let mut hess = DMatrix::zeros(p, p);
        let mut probe = lags.to_vec();
        for j in 0..p {
            probe[j] = lags[j] + h;
            let gp = gradient(&build(&probe)).ok()?;
            probe[j] = lags[j] - h;
            let gm = gradient(&build(&probe)).ok()?;
            probe[j] = lags[j];
            for i in 0..p {
                hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let d = hess.cholesky()?.solve(&DVector::from_column_slice(g));
        let d: Vec<f64> = d.iter().map(|v| -v).collect();
        (dot(&d, g) < 0.0).then_some(d)
    };

    let mut lags: Vec<f64> = start.diagonal_means()[1..].to_vec();
    let mut r = build(&lags);
    let mut f = objective(&r).ok_or_else(|| Error::Domain("starting point is not positive definite".into()))?;
    let mut g = gradient(&r)?;
    let mut history = vec![f];

    for iter in 0..opts.max_iters {
        let gnorm = norm(&g);
        if gnorm <= opts.grad_tol {
            return Ok(ApproxResult {
                diagnostics: Diagnostics {
                    status: Some(SolveStatus::Converged),
                    iterations: iter,
                    min_eig: min_eig(&r),
                    gradient_norm: Some(gnorm),
                    history,
                    ..Default::default()
                },
                r,
                distance: f,
                certificate: None,
            });
        }

        let (dir, mut t) = match newton(&lags, &g, &r) {
            Some(d) => (d, 1.0),
            None => (g.iter().map(|v| -v).collect::<Vec<_>>(), r0 / gnorm),
        };
        let slope = dot(&dir, &g);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = lags.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
            let trial_r = build(&trial);
            if let Some(ft) = objective(&trial_r) {
                if ft <= f + ARMIJO_C * t * slope {
                    accepted = Some((trial, trial_r, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((new_lags, new_r, new_f)) = accepted else {
            return Err(Error::NotConverged {
                iterations: iter,
                detail: format!("line search failed (gradient norm {gnorm:.3e}, divergence {f:.6e})"),
            });
        };
        g = gradient(&new_r)?;
        lags = new_lags;
        r = new_r;
        f = new_f;
        history.push(f);
    }
    Err(Error::NotConverged {
        iterations: opts.max_iters,
        detail: format!("gradient norm {:.3e} above {:.1e}", norm(&g), opts.grad_tol),
    })
}

/// Verdict on MA(q) membership of a lag sequence.
#[derive(Debug, Clone, Serialize)]
pub struct MaVerdict {
    pub feasible: bool,
    pub certificate: Option<GramCertificate>,
    /// `min_θ p(θ) / (q+1)` from the Gram problem, `p(θ) = r_0 + 2Σ r_k cos kθ`.
    pub gram_margin: f64,
    /// Minimum of `p` over the midpoint grid.
    pub grid_min: f64,
}

/// Relative slack on the Gram margin below which a sequence is declared MA(q).
pub const MA_MARGIN_TOL: f64 = 1e-8;
/// Relative slack on the grid minimum for the cross-check.
pub const MA_GRID_TOL: f64 = 1e-9;

/// Whether `r` is the autocorrelation of an MA(q) process, i.e. whether the
/// trigonometric polynomial `r_0 + 2Σ_{k≤q} r_k cos kθ` is nonnegative and all
/// lags beyond `q` vanish.
pub fn sequence_is_ma(r: &CovarianceSequence, q: usize, opts: &SolverOptions) -> Result<MaVerdict> {
    let lags = r.lags();
    if lags.len() < q + 1 {
        return input(format!("sequence of length {} is too short for order {q}", lags.len()));
    }
    let scale = lags[0].abs().max(f64::MIN_POSITIVE);
    let head = &lags[..=q];
    let grid_min = trig_poly_grid_min(head, DEFAULT_GRID);
    let tail_vanishes = lags[q + 1..].iter().all(|v| v.abs() <= 1e-12 * scale);

    let gm = solve_gram_margin(head, opts)?;
    let gram_ok = gm.margin >= -MA_MARGIN_TOL * scale;
    let grid_ok = grid_min >= -MA_GRID_TOL * scale;
    if gram_ok != grid_ok {
        log::warn!("Gram margin {:.3e} and grid minimum {grid_min:.3e} disagree", gm.margin);
    }
    if gm.status != SolveStatus::Converged {
        log::warn!("Gram problem stopped after {} iterations", gm.iterations);
    }
    let feasible = gram_ok && tail_vanishes;
    let certificate = feasible.then(|| {
        let q = if min_eig(&gm.gram) < 0.0 { psd_project(&gm.gram) } else { gm.gram.clone() };
        GramCertificate::from_raw(q)
    });
    Ok(MaVerdict { feasible, certificate, gram_margin: gm.margin, grid_min })
}
