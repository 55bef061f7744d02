//! Subcommand arguments and implementations.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, ValueEnum};
use covmetric::approx::Diagnostics;
use covmetric::metrics::SolverSummary;
use covmetric::spectra::{
    convergence_experiment, convergence_is_monotone, cov_sequence, l1_distance, normalized_ratios, sample_covariance,
    simulate_ma,
};
use covmetric::symmat::min_eig;
use covmetric::{
    delta, nearest_ma_delta, nearest_toeplitz_delta, nearest_toeplitz_ls, vn_nearest_toeplitz, ApproxResult,
    DeltaApproxOptions, MaModel, SolveStatus, SolverOptions, StructureTag, TimeSeries, VnOptions,
};
use serde_json::{json, Value};

use crate::error::{CliError, Result, Status};
use crate::io::{matrix_rows, read_matrix, read_measure, read_series, round12, round_vec};
use crate::report::{Outcome, RunReport};

/// Slack used when judging the convergence table monotone.
pub const MONOTONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Args)]
pub struct SolverArgs {
    /// Relative stopping tolerance of the conic solver.
    #[arg(long, default_value_t = SolverOptions::default().tol)]
    pub tol: f64,
    /// Iteration cap of the conic solver.
    #[arg(long, default_value_t = SolverOptions::default().max_iters)]
    pub max_iters: usize,
}

impl SolverArgs {
    fn options(&self) -> Result<SolverOptions> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::input(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(CliError::input("--max-iters must be positive"));
        }
        Ok(SolverOptions { tol: self.tol, max_iters: self.max_iters, ..Default::default() })
    }
}

fn solver_json(s: &SolverSummary) -> Value {
    json!({
        "status": s.status,
        "iterations": s.iterations,
        "primal_residual": s.primal_residual,
        "dual_residual": s.dual_residual,
    })
}

fn status_of(converged: bool) -> Status {
    if converged {
        Status::Ok
    } else {
        Status::NotConverged
    }
}

#[derive(Debug, Clone, Args)]
pub struct DeltaArgs {
    /// First matrix (CSV, no header).
    pub a: PathBuf,
    /// Second matrix (CSV, no header).
    pub b: PathBuf,
    /// Constrain the dominating matrix to be Toeplitz; both inputs must be Toeplitz.
    #[arg(long)]
    pub toeplitz: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_delta(args: &DeltaArgs) -> Result<Outcome> {
    let opts = args.solver.options()?;
    let (a, da) = read_matrix(&args.a)?;
    let (b, db) = read_matrix(&args.b)?;
    let structure = if args.toeplitz { StructureTag::Toeplitz } else { StructureTag::Full };
    let rep = delta(&a, &b, structure, &opts)?;
    let result = json!({
        "structure": structure.to_string(),
        "n": a.n(),
        "tau": rep.tau,
        "delta": rep.delta,
        "m_star": matrix_rows(&rep.m_star),
        "q_a": matrix_rows(&rep.q_a),
        "q_b": matrix_rows(&rep.q_b),
    });
    Ok(Outcome {
        report: RunReport::new("delta", vec![da, db], result, solver_json(&rep.solver)),
        out: args.out.clone(),
        status: status_of(rep.converged()),
    })
}

/// Target structure of `approx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxStructure {
    Toeplitz,
    Ma(usize),
    LeastSquares,
}

impl FromStr for ApproxStructure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "toeplitz" => Ok(Self::Toeplitz),
            "ls" => Ok(Self::LeastSquares),
            other => match other.strip_prefix("ma:").map(str::parse::<usize>) {
                Some(Ok(q)) => Ok(Self::Ma(q)),
                _ => Err(format!("unknown structure '{s}' (expected toeplitz, ls or ma:<order>)")),
            },
        }
    }
}

impl fmt::Display for ApproxStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Toeplitz => f.write_str("toeplitz"),
            Self::Ma(q) => write!(f, "ma:{q}"),
            Self::LeastSquares => f.write_str("ls"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Delta,
    Vn,
}

#[derive(Debug, Clone, Args)]
pub struct ApproxArgs {
    /// Covariance estimate (CSV, no header).
    pub matrix: PathBuf,
    /// toeplitz, ma:<order>, or ls (least-squares diagonal averaging).
    #[arg(long, value_parser = ApproxStructure::from_str)]
    pub structure: ApproxStructure,
    /// Require trace(R) = trace(A). Always on for the von Neumann metric.
    #[arg(long)]
    pub match_trace: bool,
    #[arg(long, value_enum, default_value_t = Metric::Delta)]
    pub metric: Metric,
    /// Constrain the dominating matrix of δ to be Toeplitz.
    #[arg(long)]
    pub toeplitz_bound: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Gradient-norm stopping threshold for the von Neumann descent.
    #[arg(long, default_value_t = VnOptions::default().grad_tol)]
    pub grad_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn diagnostics_json(d: &Diagnostics) -> Value {
    json!({
        "status": d.status,
        "iterations": d.iterations,
        "primal_residual": d.primal_residual,
        "dual_residual": d.dual_residual,
        "gradient_norm": d.gradient_norm,
    })
}

pub fn cmd_approx(args: &ApproxArgs) -> Result<Outcome> {
    let opts = args.solver.options()?;
    let (a, digest) = read_matrix(&args.matrix)?;
    let res: ApproxResult = match (args.structure, args.metric) {
        (ApproxStructure::LeastSquares, Metric::Delta) => nearest_toeplitz_ls(&a),
        (ApproxStructure::Toeplitz, Metric::Vn) => {
            if !(args.grad_tol.is_finite() && args.grad_tol > 0.0) {
                return Err(CliError::input(format!("--grad-tol must be positive, got {}", args.grad_tol)));
            }
            vn_nearest_toeplitz(&a, &VnOptions { grad_tol: args.grad_tol, ..Default::default() })?
        }
        (s, Metric::Vn) => return Err(CliError::input(format!("--metric vn requires --structure toeplitz, got {s}"))),
        (s, Metric::Delta) => {
            let dopts =
                DeltaApproxOptions { match_trace: args.match_trace, toeplitz_bound: args.toeplitz_bound, solver: opts };
            match s {
                ApproxStructure::Toeplitz => nearest_toeplitz_delta(&a, &dopts)?,
                ApproxStructure::Ma(q) => nearest_ma_delta(&a, q, &dopts)?,
                ApproxStructure::LeastSquares => unreachable!("handled above"),
            }
        }
    };
    let first_row: Vec<f64> = res.r.to_rows()[0].clone();
    let certificate = res.certificate.as_ref().map(|c| {
        json!({
            "q": matrix_rows(&c.q),
            "lag_sums": round_vec(&c.lag_sums()),
            "min_eig": min_eig(&c.q),
            "valid": c.certifies(&first_row),
        })
    });
    let distance_kind = match (args.structure, args.metric) {
        (ApproxStructure::LeastSquares, _) => "frobenius",
        (_, Metric::Vn) => "von_neumann",
        _ => "delta",
    };
    let result = json!({
        "structure": args.structure.to_string(),
        "metric": distance_kind,
        "match_trace": args.match_trace || args.metric == Metric::Vn,
        "r": matrix_rows(&res.r),
        "first_row": round_vec(&first_row),
        "distance": res.distance,
        "min_eig": res.diagnostics.min_eig,
        "trace_target": a.trace(),
        "trace": res.r.trace(),
        "certificate": certificate,
        "history": res.diagnostics.history,
    });
    Ok(Outcome {
        report: RunReport::new("approx", vec![digest], result, diagnostics_json(&res.diagnostics)),
        out: args.out.clone(),
        status: status_of(res.converged()),
    })
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["l1", "ratios", "cov"])))]
pub struct SpectralArgs {
    /// Spectral measure (JSON).
    pub f: PathBuf,
    /// Second spectral measure (JSON), required by --l1 and --ratios.
    pub g: Option<PathBuf>,
    /// L1 distance between the two measures.
    #[arg(long, requires = "g")]
    pub l1: bool,
    /// Normalized ratios of the optimal perturbation to the common envelope.
    #[arg(long, requires = "g")]
    pub ratios: bool,
    /// First N autocorrelation lags of each measure.
    #[arg(long, value_name = "N")]
    pub cov: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_spectral(args: &SpectralArgs) -> Result<Outcome> {
    let (f, df) = read_measure(&args.f)?;
    let mut inputs = vec![df];
    let g = match &args.g {
        Some(p) => {
            let (g, dg) = read_measure(p)?;
            inputs.push(dg);
            Some(g)
        }
        None => None,
    };
    let result = if let Some(n) = args.cov {
        let rf = cov_sequence(&f, n)?;
        let rg = g.as_ref().map(|g| cov_sequence(g, n)).transpose()?;
        json!({
            "cov_f": round_vec(rf.lags()),
            "cov_g": rg.map(|r| round_vec(r.lags())),
        })
    } else {
        let g = g.as_ref().ok_or_else(|| CliError::input("a second measure is required"))?;
        if args.l1 {
            json!({ "l1": l1_distance(&f, g)? })
        } else {
            let r = normalized_ratios(&f, g)?;
            json!({
                "l1": l1_distance(&f, g)?,
                "ratio_total": r.ratio_total,
                "ratio_pointwise": r.ratio_pointwise,
            })
        }
    };
    Ok(Outcome {
        report: RunReport::new("spectral", inputs, result, Value::Null),
        out: args.out.clone(),
        status: Status::Ok,
    })
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    pub f: PathBuf,
    pub g: PathBuf,
    /// Matrix sizes, strictly ascending.
    #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16, 32, 48])]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<Outcome> {
    let opts = args.solver.options()?;
    let (f, df) = read_measure(&args.f)?;
    let (g, dg) = read_measure(&args.g)?;
    let rows = convergence_experiment(&f, &g, &args.n, &opts)?;
    for r in &rows {
        match r.delta_t {
            Some(d) => log::info!("n = {:3}  delta_T = {d:.9}  l1 = {:.9}", r.n, r.l1),
            None => log::warn!("n = {:3}  failed: {}", r.n, r.error.as_deref().unwrap_or("unknown")),
        }
    }
    let all_converged = rows.iter().all(|r| r.status == Some(SolveStatus::Converged));
    let l1 = rows.first().map_or(0.0, |r| r.l1);
    let result = json!({
        "l1": l1,
        "rows": rows,
        "monotone": convergence_is_monotone(&rows, MONOTONE_TOL),
    });
    let solver = json!({
        "status": if all_converged { "CONVERGED" } else { "MAX_ITERS" },
        "iterations": rows.iter().map(|r| r.iterations).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        report: RunReport::new("convergence", vec![df, dg], result, solver),
        out: args.out.clone(),
        status: status_of(all_converged),
    })
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Moving-average coefficients b0,b1,...
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_unless_present = "input",
        conflicts_with = "input"
    )]
    pub coeffs: Option<Vec<f64>>,
    /// Series length T.
    #[arg(long, required_unless_present = "input")]
    pub length: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Window length n of the sample covariance.
    #[arg(long)]
    pub dim: usize,
    /// Use the series in this file instead of simulating one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome> {
    let (series, inputs, model) = match (&args.input, &args.coeffs) {
        (Some(path), _) => {
            let (values, digest) = read_series(path)?;
            (TimeSeries::new(values)?, vec![digest], None)
        }
        (None, Some(coeffs)) => {
            let model = MaModel::new(coeffs.clone())?;
            let length = args.length.ok_or_else(|| CliError::input("--length is required"))?;
            (simulate_ma(&model, length, args.seed)?, Vec::new(), Some(model))
        }
        (None, None) => return Err(CliError::input("either --coeffs or --input is required")),
    };
    if series.len() < args.dim {
        return Err(CliError::input(format!("length {} is shorter than --dim {}", series.len(), args.dim)));
    }
    let cov = sample_covariance(&series, args.dim)?;
    let result = json!({
        "coeffs": model.as_ref().map(|m| m.coeffs().to_vec()),
        "seed": series.seed,
        "length": series.len(),
        "series": round_vec(&series.samples),
        "sample_covariance": matrix_rows(&cov),
        "min_eig": round12(min_eig(&cov)),
        "diagonal_means": round_vec(&cov.diagonal_means()),
    });
    Ok(Outcome {
        report: RunReport::new("simulate", inputs, result, Value::Null),
        out: args.out.clone(),
        status: Status::Ok,
    })
}
