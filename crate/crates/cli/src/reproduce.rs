//! Re-runs every worked example and compares against its reference values.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use covmetric::datasets::{self, MA2_UNIT_AUTOCORRELATION, SAMPLE_COV5_MA2_DELTA, SAMPLE_COV5_MA2_ROW};
use covmetric::datasets::{SAMPLE_COV5_TOEPLITZ_DELTA, SAMPLE_COV5_TOEPLITZ_ROW};
use covmetric::spectra::{
    cov_sequence, l1_distance, ma_autocovariance, optimal_perturbations, sample_covariance, simulate_ma, DEFAULT_GRID,
};
use covmetric::symmat::{min_eig, sym_eig};
use covmetric::{
    delta, nearest_ma_delta, nearest_toeplitz_delta, nearest_toeplitz_ls, sequence_is_ma, vn_nearest_toeplitz,
    CovarianceSequence, DeltaApproxOptions, MaModel, SolverOptions, SpectralMeasure, StructureTag, SymMatrix,
    VnOptions,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result, Status};
use crate::report::{write_file, Outcome, RunReport};

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// Directory receiving one JSON file per check.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Multiplies every check tolerance; 0 turns the run into a negative control.
    #[arg(long, default_value_t = 1.0)]
    pub tol_scale: f64,
}

/// What a check measured: the reference value, the computed value, and the deviation.
struct Measured {
    expected: Value,
    actual: Value,
    error: f64,
}

/// Verdict-style checks report deviation 0 when the claim holds and 1 otherwise.
fn verdict(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

type CheckFn = fn() -> covmetric::Result<Measured>;

struct Check {
    name: &'static str,
    claim: &'static str,
    tolerance: f64,
    run: CheckFn,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub claim: String,
    pub tolerance: f64,
    pub error: f64,
    pub passed: bool,
    pub expected: Value,
    pub actual: Value,
    pub seconds: f64,
}

fn spectrum(m: &SymMatrix) -> Vec<f64> {
    sym_eig(m).values
}

fn dirac_pair() -> covmetric::Result<(SpectralMeasure, SpectralMeasure)> {
    let f = SpectralMeasure::zero(DEFAULT_GRID)?.with_atom(0.0, 1.0)?;
    let g = SpectralMeasure::constant(DEFAULT_GRID, 0.5)?.with_atom(0.0, 0.5)?;
    Ok((f, g))
}

fn toeplitz_pair_delta() -> covmetric::Result<Measured> {
    let rep = delta(&datasets::ones3(), &datasets::half_offdiag3(), StructureTag::Toeplitz, &SolverOptions::default())?;
    Ok(Measured {
        expected: json!(2.0 / 3.0),
        actual: json!({ "delta": rep.delta, "tau": rep.tau, "status": rep.solver.status }),
        error: (rep.delta - 2.0 / 3.0).abs(),
    })
}

fn toeplitz_pair_shift() -> covmetric::Result<Measured> {
    let rep = delta(&datasets::ones3(), &datasets::half_offdiag3(), StructureTag::Toeplitz, &SolverOptions::default())?;
    let x = rep.m_star.get(0, 0) - 1.0;
    Ok(Measured { expected: json!(1.0 / 3.0), actual: json!(x), error: (x - 1.0 / 3.0).abs() })
}

fn ones3_spectrum() -> covmetric::Result<Measured> {
    let got = spectrum(&datasets::ones3());
    let want = [0.0, 0.0, 3.0];
    Ok(Measured { expected: json!(want), actual: json!(got), error: max_diff(&got, &want) })
}

fn half_offdiag3_spectrum() -> covmetric::Result<Measured> {
    let got = spectrum(&datasets::half_offdiag3());
    let want = [0.5, 1.0, 1.0];
    Ok(Measured { expected: json!(want), actual: json!(got), error: max_diff(&got, &want) })
}

fn dirac_perturbations() -> covmetric::Result<Measured> {
    let (f, g) = dirac_pair()?;
    let p = optimal_perturbations(&f, &g)?;
    let psi_density = p.psi.values().iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let psi_atoms: f64 = p.psi.atoms().iter().map(|a| a.mass).sum();
    let hat_density = p.psi_hat.values().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let hat_atom = p.psi_hat.atoms().iter().filter(|a| a.theta.abs() < 1e-12).map(|a| a.mass).sum::<f64>();
    let hat_other = p.psi_hat.total_mass() - p.psi_hat.values().iter().sum::<f64>() / DEFAULT_GRID as f64 - hat_atom;
    Ok(Measured {
        expected: json!({ "psi_density": 0.5, "psi_atoms": 0.0, "psi_hat_density": 0.0, "psi_hat_atom_at_0": 0.5 }),
        actual: json!({
            "psi_density_max_dev": psi_density,
            "psi_atoms": psi_atoms,
            "psi_hat_density_max": hat_density,
            "psi_hat_atom_at_0": hat_atom,
        }),
        error: psi_density.max(psi_atoms.abs()).max(hat_density).max((hat_atom - 0.5).abs()).max(hat_other.abs()),
    })
}

fn dirac_l1() -> covmetric::Result<Measured> {
    let (f, g) = dirac_pair()?;
    let d = l1_distance(&f, &g)?;
    Ok(Measured { expected: json!(1.0), actual: json!(d), error: (d - 1.0).abs() })
}

fn dirac_lags() -> covmetric::Result<Measured> {
    let (f, _) = dirac_pair()?;
    let r = cov_sequence(&f, 5)?;
    Ok(Measured { expected: json!(vec![1.0; 5]), actual: json!(r.lags()), error: max_diff(r.lags(), &[1.0; 5]) })
}

fn ma2_density_lags() -> covmetric::Result<Measured> {
    let f = SpectralMeasure::from_fn(DEFAULT_GRID, |t| 3.0 + 4.0 * t.cos() + 2.0 * (2.0 * t).cos())?;
    let r = cov_sequence(&f, 5)?;
    Ok(Measured {
        expected: json!(MA2_UNIT_AUTOCORRELATION),
        actual: json!(r.lags()),
        error: max_diff(r.lags(), &MA2_UNIT_AUTOCORRELATION),
    })
}

fn ma2_autocovariance() -> covmetric::Result<Measured> {
    let r = ma_autocovariance(&MaModel::new(vec![1.0, 1.0, 1.0])?, 5);
    Ok(Measured {
        expected: json!(MA2_UNIT_AUTOCORRELATION),
        actual: json!(r.lags()),
        error: max_diff(r.lags(), &MA2_UNIT_AUTOCORRELATION),
    })
}

fn dirac_delta_t_trend() -> covmetric::Result<Measured> {
    let sizes = [4, 8, 16, 32];
    let mut values = Vec::new();
    for n in sizes {
        let a = CovarianceSequence::new(vec![1.0; n]).toeplitz()?;
        let mut row = vec![0.5; n];
        row[0] = 1.0;
        let b = SymMatrix::toeplitz(&row)?;
        values.push(delta(&a, &b, StructureTag::Toeplitz, &SolverOptions::default())?.delta);
    }
    let decrease = values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    let overshoot = values.iter().map(|v| v - 1.0).fold(0.0, f64::max);
    let grows = values[values.len() - 1] > values[0];
    Ok(Measured {
        expected: json!("nondecreasing in n, bounded by 1"),
        actual: json!({ "n": sizes, "delta_t": values }),
        error: decrease.max(overshoot).max(verdict(grows)),
    })
}

fn sample_cov5_toeplitz_delta() -> covmetric::Result<Measured> {
    let res = nearest_toeplitz_delta(&datasets::sample_cov5(), &DeltaApproxOptions::default())?;
    Ok(Measured {
        expected: json!(SAMPLE_COV5_TOEPLITZ_DELTA),
        actual: json!(res.distance),
        error: (res.distance - SAMPLE_COV5_TOEPLITZ_DELTA).abs(),
    })
}

fn sample_cov5_toeplitz_approximant() -> covmetric::Result<Measured> {
    let res = nearest_toeplitz_delta(&datasets::sample_cov5(), &DeltaApproxOptions::default())?;
    let reference = SymMatrix::toeplitz(&SAMPLE_COV5_TOEPLITZ_ROW)?;
    Ok(Measured {
        expected: json!(SAMPLE_COV5_TOEPLITZ_ROW),
        actual: json!(res.r.to_rows()[0]),
        error: (&res.r - &reference).max_abs(),
    })
}

fn sample_cov5_ma2_delta() -> covmetric::Result<Measured> {
    let res = nearest_ma_delta(&datasets::sample_cov5(), 2, &DeltaApproxOptions::default())?;
    Ok(Measured {
        expected: json!(SAMPLE_COV5_MA2_DELTA),
        actual: json!(res.distance),
        error: (res.distance - SAMPLE_COV5_MA2_DELTA).abs(),
    })
}

fn sample_cov5_ma2_row() -> covmetric::Result<Measured> {
    let res = nearest_ma_delta(&datasets::sample_cov5(), 2, &DeltaApproxOptions::default())?;
    let row = res.r.to_rows()[0].clone();
    Ok(Measured {
        expected: json!(SAMPLE_COV5_MA2_ROW),
        actual: json!(row),
        error: max_diff(&row, &SAMPLE_COV5_MA2_ROW),
    })
}

fn sample_cov5_ma2_certificate() -> covmetric::Result<Measured> {
    let res = nearest_ma_delta(&datasets::sample_cov5(), 2, &DeltaApproxOptions::default())?;
    let row = res.r.to_rows()[0].clone();
    let valid = res.certificate.as_ref().is_some_and(|c| c.certifies(&row));
    Ok(Measured { expected: json!(true), actual: json!(valid), error: verdict(valid) })
}

fn estimate3_vn_approximant() -> covmetric::Result<Measured> {
    let res = vn_nearest_toeplitz(&datasets::estimate3(), &VnOptions::default())?;
    let reference = datasets::estimate3_vn();
    Ok(Measured {
        expected: json!(reference.to_rows()[0]),
        actual: json!(res.r.to_rows()[0]),
        error: (&res.r - &reference).max_abs(),
    })
}

fn estimate3_vn_trace() -> covmetric::Result<Measured> {
    let a = datasets::estimate3();
    let res = vn_nearest_toeplitz(&a, &VnOptions::default())?;
    Ok(Measured { expected: json!(a.trace()), actual: json!(res.r.trace()), error: (res.r.trace() - a.trace()).abs() })
}

fn estimate3_ls_min_eig() -> covmetric::Result<Measured> {
    let res = nearest_toeplitz_ls(&datasets::estimate3());
    let want = -0.05 / 3.0;
    Ok(Measured {
        expected: json!(want),
        actual: json!(res.diagnostics.min_eig),
        error: (res.diagnostics.min_eig - want).abs(),
    })
}

fn ma2_sequence_certificate() -> covmetric::Result<Measured> {
    let v = sequence_is_ma(&CovarianceSequence::new(vec![3.0, 2.0, 1.0]), 2, &SolverOptions::default())?;
    let ones = SymMatrix::toeplitz(&[1.0, 1.0, 1.0])?;
    let dev = v.certificate.as_ref().map_or(f64::INFINITY, |c| (&c.q - &ones).max_abs());
    Ok(Measured {
        expected: json!({ "feasible": true, "certificate": ones.to_rows() }),
        actual: json!({ "feasible": v.feasible, "certificate": v.certificate.map(|c| c.q.to_rows()) }),
        error: if v.feasible { dev } else { f64::INFINITY },
    })
}

fn toeplitz_row_not_ma() -> covmetric::Result<Measured> {
    let r = CovarianceSequence::new(SAMPLE_COV5_TOEPLITZ_ROW.to_vec());
    let v = sequence_is_ma(&r, 4, &SolverOptions::default())?;
    Ok(Measured {
        expected: json!({ "feasible": false, "grid_min": "< 0" }),
        actual: json!({ "feasible": v.feasible, "grid_min": v.grid_min, "gram_margin": v.gram_margin }),
        error: verdict(!v.feasible && v.grid_min < 0.0),
    })
}

fn simulated_sample_covariance() -> covmetric::Result<Measured> {
    let y = simulate_ma(&MaModel::new(vec![1.0, 1.0, 1.0])?, 101, 0)?;
    let c = sample_covariance(&y, 5)?;
    let lo = min_eig(&c);
    let non_toeplitz = !c.is_toeplitz(1e-6);
    Ok(Measured {
        expected: json!({ "psd": true, "toeplitz": false }),
        actual: json!({ "min_eig": lo, "toeplitz": !non_toeplitz }),
        error: verdict(lo >= -1e-12 * c.spectral_norm() && non_toeplitz),
    })
}

fn checks() -> Vec<Check> {
    vec![
        Check {
            name: "ones3_spectrum",
            claim: "spec(all-ones 3x3) = {3, 0, 0}",
            tolerance: 1e-12,
            run: ones3_spectrum,
        },
        Check {
            name: "half_offdiag3_spectrum",
            claim: "spec(Toeplitz(1, 1/2, 1/2)) = {1, 1, 1/2} (reference)",
            tolerance: 1e-12,
            run: half_offdiag3_spectrum,
        },
        Check {
            name: "toeplitz_pair_delta",
            claim: "delta_T(all-ones, Toeplitz(1, 1/2, 1/2)) = 2/3",
            tolerance: 1e-6,
            run: toeplitz_pair_delta,
        },
        Check {
            name: "toeplitz_pair_shift",
            claim: "optimal diagonal shift x = 1/3",
            tolerance: 1e-6,
            run: toeplitz_pair_shift,
        },
        Check {
            name: "dirac_perturbations",
            claim: "optimal perturbations: uniform density 1/2 and an atom of mass 1/2 at 0",
            tolerance: 1e-12,
            run: dirac_perturbations,
        },
        Check {
            name: "dirac_l1",
            claim: "L1 distance of the Dirac pair = 1/2 + 1/2 = 1",
            tolerance: 1e-12,
            run: dirac_l1,
        },
        Check { name: "dirac_lags", claim: "unit atom at 0 has r_k = 1 for all k", tolerance: 1e-12, run: dirac_lags },
        Check {
            name: "ma2_density_lags",
            claim: "|1 + e^{jt} + e^{2jt}|^2 has lags (3, 2, 1, 0, 0)",
            tolerance: 1e-12,
            run: ma2_density_lags,
        },
        Check {
            name: "ma2_autocovariance",
            claim: "MA(1, 1, 1) autocorrelation (3, 2, 1, 0, 0)",
            tolerance: 1e-15,
            run: ma2_autocovariance,
        },
        Check {
            name: "dirac_delta_t_trend",
            claim: "delta_T(R_n, R^_n) nondecreasing toward 1 for n = 4, 8, 16, 32",
            tolerance: 1e-6,
            run: dirac_delta_t_trend,
        },
        Check {
            name: "sample_cov5_toeplitz_delta",
            claim: "delta(R^_5, R_5,Toeplitz) = 0.0308",
            tolerance: 1e-3,
            run: sample_cov5_toeplitz_delta,
        },
        Check {
            name: "sample_cov5_toeplitz_approximant",
            claim: "nearest Toeplitz approximant matches the reference matrix",
            tolerance: 5e-3,
            run: sample_cov5_toeplitz_approximant,
        },
        Check {
            name: "sample_cov5_ma2_delta",
            claim: "delta(R^_5, R_5,MA(2)) = 1.2161",
            tolerance: 1e-2,
            run: sample_cov5_ma2_delta,
        },
        Check {
            name: "sample_cov5_ma2_first_row",
            claim: "nearest MA(2) approximant has first row (3.9945, 2.1588, 0.5693, 0, 0)",
            tolerance: 1e-2,
            run: sample_cov5_ma2_row,
        },
        Check {
            name: "sample_cov5_ma2_certificate",
            claim: "nearest MA(2) approximant carries a valid PSD Gram certificate",
            tolerance: 0.0,
            run: sample_cov5_ma2_certificate,
        },
        Check {
            name: "estimate3_vn_approximant",
            claim: "von Neumann approximant = (1/3) Toeplitz(1, .942, .957)",
            tolerance: 1e-3,
            run: estimate3_vn_approximant,
        },
        Check {
            name: "estimate3_vn_trace",
            claim: "von Neumann approximant preserves the trace",
            tolerance: 1e-7,
            run: estimate3_vn_trace,
        },
        Check {
            name: "estimate3_ls_min_eig",
            claim: "least-squares Toeplitz approximant is indefinite with eigenvalue -0.05/3",
            tolerance: 1e-9,
            run: estimate3_ls_min_eig,
        },
        Check {
            name: "ma2_sequence_certificate",
            claim: "(3, 2, 1) is MA(2) with Gram certificate (1,1,1)(1,1,1)^T",
            tolerance: 1e-6,
            run: ma2_sequence_certificate,
        },
        Check {
            name: "toeplitz_row_not_ma",
            claim: "the Toeplitz approximant's lags are not MA(4); the polynomial takes negative values",
            tolerance: 0.0,
            run: toeplitz_row_not_ma,
        },
        Check {
            name: "simulated_sample_covariance",
            claim: "MA(1, 1, 1), T = 101, n = 5 gives a PSD, non-Toeplitz sample covariance",
            tolerance: 0.0,
            run: simulated_sample_covariance,
        },
    ]
}

/// Runs every check with tolerances multiplied by `tol_scale`.
pub fn run_checks(tol_scale: f64) -> Vec<CheckResult> {
    checks()
        .into_iter()
        .map(|c| {
            let started = Instant::now();
            let tolerance = c.tolerance * tol_scale;
            let (expected, actual, error) = match (c.run)() {
                Ok(m) => (m.expected, m.actual, m.error),
                Err(e) => (Value::Null, json!({ "error": e.to_string() }), f64::INFINITY),
            };
            CheckResult {
                name: c.name.to_string(),
                claim: c.claim.to_string(),
                tolerance,
                error,
                passed: error <= tolerance,
                expected,
                actual,
                seconds: started.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn cmd_reproduce(args: &ReproduceArgs) -> Result<Outcome> {
    if !(args.tol_scale.is_finite() && args.tol_scale >= 0.0) {
        return Err(CliError::input(format!("--tol-scale must be nonnegative, got {}", args.tol_scale)));
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    }
    let results = run_checks(args.tol_scale);
    for r in &results {
        eprintln!(
            "{}  {:<34} error {:<10.3e} tol {:<8.1e} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.error,
            r.tolerance,
            r.claim
        );
        if let Some(dir) = &args.out {
            let text = serde_json::to_string_pretty(r).expect("check serializes") + "\n";
            write_file(&dir.join(format!("{}.json", r.name)), &text)?;
        }
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let result = json!({
        "tol_scale": args.tol_scale,
        "passed": results.len() - failed.len(),
        "failed": failed,
        "checks": results,
    });
    let status = if failed.is_empty() { Status::Ok } else { Status::CheckFailed };
    Ok(Outcome { report: RunReport::new("reproduce", Vec::new(), result, Value::Null), out: None, status })
}
