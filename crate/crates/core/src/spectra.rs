//! Spectral measures on `[−π, π]` and the statistics derived from them.
//!
//! A [`SpectralMeasure`] is a nonnegative density sampled on a uniform midpoint
//! grid plus a finite list of atoms (spectral lines). Integrals are normalized
//! by `1/2π`, so an atom of mass `w` at `θ` contributes `w·cos(kθ)` to lag `k`
//! and a density `f` contributes the grid mean of `f·cos(kθ)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conesolver::{SolveStatus, SolverOptions, StructureTag};
use crate::error::{domain, input, Error, Result};
use crate::metrics::delta;
use crate::symmat::{min_eig, SymMatrix};

pub const DEFAULT_GRID: usize = 4096;
/// Two atoms closer than this (in radians) occupy the same location.
pub const ATOM_TOL: f64 = 1e-9;
const EVENNESS_WARN: f64 = 1e-12;

/// `θ_j = −π + 2π(j + ½)/m`.
pub fn grid_theta(j: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * (j as f64 + 0.5) / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: f64,
    pub mass: f64,
}

#[derive(Debug, Deserialize)]
struct RawMeasure {
    grid_size: usize,
    values: Vec<f64>,
    #[serde(default)]
    atoms: Vec<Atom>,
}

/// Nonnegative, even spectral measure: midpoint-grid density plus atoms.
///
/// JSON form: `{"grid_size": m, "values": [...], "atoms": [{"theta": t, "mass": w}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct SpectralMeasure {
    grid_size: usize,
    values: Vec<f64>,
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for SpectralMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        if raw.values.len() != raw.grid_size {
            return input(format!("grid_size {} but {} values", raw.grid_size, raw.values.len()));
        }
        Self::new(raw.values, raw.atoms)
    }
}

impl SpectralMeasure {
    /// Validates and symmetrizes a measure. The grid size is `values.len()`.
    pub fn new(mut values: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        let m = values.len();
        if !m.is_power_of_two() {
            return input(format!("grid size {m} is not a power of two"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return input("density values must be finite and nonnegative");
        }
        for a in &atoms {
            if !a.mass.is_finite() || a.mass < 0.0 {
                return input(format!("atom mass {} must be finite and nonnegative", a.mass));
            }
            if !a.theta.is_finite() || !(-PI - ATOM_TOL..PI).contains(&a.theta) {
                return input(format!("atom location {} outside [-pi, pi)", a.theta));
            }
        }

        let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(*v));
        let mut worst = 0.0_f64;
        for j in 0..m / 2 {
            let (a, b) = (values[j], values[m - 1 - j]);
            worst = worst.max((a - b).abs());
            let avg = 0.5 * (a + b);
            values[j] = avg;
            values[m - 1 - j] = avg;
        }
        if worst > EVENNESS_WARN * scale.max(f64::MIN_POSITIVE) {
            log::warn!("symmetrizing spectral density with asymmetry {worst:.3e}");
        }
        Ok(Self { grid_size: m, values, atoms: symmetrize_atoms(atoms) })
    }

    pub fn zero(m: usize) -> Result<Self> {
        Self::new(vec![0.0; m], Vec::new())
    }

    pub fn constant(m: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; m], Vec::new())
    }

    /// Density sampled from `f` at the grid midpoints.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..m).map(|j| f(grid_theta(j, m))).collect(), Vec::new())
    }

    /// Adds an atom (and its mirror image when `θ ≠ 0, −π`, splitting the mass).
    pub fn with_atom(self, theta: f64, mass: f64) -> Result<Self> {
        let mut atoms = self.atoms;
        atoms.push(Atom { theta, mass });
        Self::new(self.values, atoms)
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `(1/2π)∫ dμ`.
    pub fn total_mass(&self) -> f64 {
        self.density_mass() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    fn density_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid_size as f64
    }

    fn mass_at(&self, theta: f64) -> f64 {
        self.atoms.iter().filter(|a| (a.theta - theta).abs() <= ATOM_TOL).map(|a| a.mass).sum()
    }
}

fn canonical_theta(theta: f64) -> f64 {
    if (theta + PI).abs() <= ATOM_TOL {
        -PI
    } else {
        theta
    }
}

fn symmetrize_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut merged: Vec<Atom> = Vec::new();
    for a in atoms {
        let theta = canonical_theta(a.theta);
        match merged.iter_mut().find(|m| (m.theta - theta).abs() <= ATOM_TOL) {
            Some(m) => m.mass += a.mass,
            None => merged.push(Atom { theta, mass: a.mass }),
        }
    }
    let mut used = vec![false; merged.len()];
    let mut out = Vec::with_capacity(merged.len() + 1);
    for i in 0..merged.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let a = merged[i];
        if a.theta.abs() <= ATOM_TOL || a.theta == -PI {
            out.push(a);
            continue;
        }
        let partner = (0..merged.len()).find(|&j| !used[j] && (merged[j].theta + a.theta).abs() <= ATOM_TOL);
        let mirror_mass = partner.map_or(0.0, |j| {
            used[j] = true;
            merged[j].mass
        });
        if (a.mass - mirror_mass).abs() > EVENNESS_WARN * a.mass.max(mirror_mass) {
            log::warn!("symmetrizing atom pair at ±{:.6} ({} vs {mirror_mass})", a.theta.abs(), a.mass);
        }
        let avg = 0.5 * (a.mass + mirror_mass);
        out.push(Atom { theta: -a.theta.abs(), mass: avg });
        out.push(Atom { theta: a.theta.abs(), mass: avg });
    }
    out.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    out
}

fn check_grids(f: &SpectralMeasure, g: &SpectralMeasure) -> Result<()> {
    if f.grid_size != g.grid_size {
        return input(format!("grid sizes differ: {} vs {}", f.grid_size, g.grid_size));
    }
    Ok(())
}

/// Union of atom locations of two measures with their masses in each.
fn matched_atoms(f: &SpectralMeasure, g: &SpectralMeasure) -> Vec<(f64, f64, f64)> {
    let mut locs: Vec<f64> = Vec::new();
    for a in f.atoms.iter().chain(&g.atoms) {
        if !locs.iter().any(|t| (t - a.theta).abs() <= ATOM_TOL) {
            locs.push(a.theta);
        }
    }
    locs.sort_by(f64::total_cmp);
    locs.into_iter().map(|t| (t, f.mass_at(t), g.mass_at(t))).collect()
}

/// Minimal-variance reconciling perturbations of two spectra and their common envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Perturbations {
    /// `max(g − f, 0)`, added to `f`.
    pub psi: SpectralMeasure,
    /// `max(f − g, 0)`, added to `g`.
    pub psi_hat: SpectralMeasure,
    /// `max(f, g)` = `f + psi` = `g + psi_hat`.
    pub envelope: SpectralMeasure,
}

pub fn optimal_perturbations(f: &SpectralMeasure, g: &SpectralMeasure) -> Result<Perturbations> {
    check_grids(f, g)?;
    let pointwise =
        |op: fn(f64, f64) -> f64| -> Vec<f64> { f.values.iter().zip(&g.values).map(|(&a, &b)| op(a, b)).collect() };
    let atoms = matched_atoms(f, g);
    let atoms_with = |op: fn(f64, f64) -> f64| -> Vec<Atom> {
        atoms.iter().map(|&(theta, a, b)| Atom { theta, mass: op(a, b) }).filter(|a| a.mass > 0.0).collect()
    };
    let up = |a: f64, b: f64| (b - a).max(0.0);
    let down = |a: f64, b: f64| (a - b).max(0.0);
    let build = |values, atoms| SpectralMeasure { grid_size: f.grid_size, values, atoms };
    Ok(Perturbations {
        psi: build(pointwise(up), atoms_with(up)),
        psi_hat: build(pointwise(down), atoms_with(down)),
        envelope: build(pointwise(f64::max), atoms_with(f64::max)),
    })
}

/// `(1/2π)∫|f − g| dθ` plus the total discrepancy of the atoms.
pub fn l1_distance(f: &SpectralMeasure, g: &SpectralMeasure) -> Result<f64> {
    check_grids(f, g)?;
    let density = f.values.iter().zip(&g.values).map(|(a, b)| (a - b).abs()).sum::<f64>() / f.grid_size as f64;
    let atoms: f64 = matched_atoms(f, g).iter().map(|(_, a, b)| (a - b).abs()).sum();
    Ok(density + atoms)
}

/// Normalized alternatives to the L1 distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedRatios {
    /// `∫(ψ + ψ̂) / ∫f_z`, atoms included in both integrals.
    pub ratio_total: f64,
    /// `(1/2π)∫(ψ + ψ̂)/f_z dθ` over the density, `0/0 := 0`.
    pub ratio_pointwise: f64,
}

pub fn normalized_ratios(f: &SpectralMeasure, g: &SpectralMeasure) -> Result<NormalizedRatios> {
    let p = optimal_perturbations(f, g)?;
    let env_mass = p.envelope.total_mass();
    if env_mass <= 0.0 {
        return domain("both measures are identically zero");
    }
    let pointwise = p
        .psi
        .values
        .iter()
        .zip(&p.psi_hat.values)
        .zip(&p.envelope.values)
        .map(|((a, b), z)| if *z > 0.0 { (a + b) / z } else { 0.0 })
        .sum::<f64>()
        / f.grid_size as f64;
    Ok(NormalizedRatios {
        ratio_total: (p.psi.total_mass() + p.psi_hat.total_mass()) / env_mass,
        ratio_pointwise: pointwise,
    })
}

/// Autocorrelation lags `r_0..r_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CovarianceSequence {
    r: Vec<f64>,
}

impl CovarianceSequence {
    pub fn new(r: Vec<f64>) -> Self {
        Self { r }
    }

    pub fn lags(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn toeplitz(&self) -> Result<SymMatrix> {
        SymMatrix::toeplitz(&self.r)
    }

    /// Whether the induced Toeplitz matrix is PSD within `1e-8·|r_0|`.
    pub fn is_valid(&self) -> bool {
        match self.toeplitz() {
            Ok(t) => min_eig(&t) >= -1e-8 * self.r[0].abs().max(f64::MIN_POSITIVE),
            Err(_) => false,
        }
    }
}

/// Lags `r_0..r_{n-1}` of a spectral measure by midpoint quadrature.
pub fn cov_sequence(f: &SpectralMeasure, n: usize) -> Result<CovarianceSequence> {
    if n == 0 {
        return input("number of lags must be positive");
    }
    let m = f.grid_size;
    let r = (0..n)
        .map(|k| {
            let kf = k as f64;
            let density: f64 =
                f.values.iter().enumerate().map(|(j, v)| v * (kf * grid_theta(j, m)).cos()).sum::<f64>() / m as f64;
            let lines: f64 = f.atoms.iter().map(|a| a.mass * (kf * a.theta).cos()).sum();
            density + lines
        })
        .collect();
    Ok(CovarianceSequence { r })
}

/// Minimum of `r_0 + 2Σ_k r_k cos kθ` over the `m`-point midpoint grid and `θ ∈ {0, π}`.
pub fn trig_poly_grid_min(r: &[f64], m: usize) -> f64 {
    let eval = |theta: f64| -> f64 {
        r.iter().enumerate().map(|(k, &v)| if k == 0 { v } else { 2.0 * v * (k as f64 * theta).cos() }).sum()
    };
    (0..m).map(|j| grid_theta(j, m)).chain([0.0, PI]).map(eval).fold(f64::INFINITY, f64::min)
}

/// Moving-average filter `y_k = Σ_j b_j w_{k-j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaModel {
    b: Vec<f64>,
}

impl MaModel {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return input("moving-average model needs at least one coefficient");
        }
        if b.iter().any(|v| !v.is_finite()) {
            return input("moving-average coefficients must be finite");
        }
        Ok(Self { b })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.b
    }

    pub fn order(&self) -> usize {
        self.b.len() - 1
    }
}

/// Lags of the MA process driven by unit-variance white noise.
pub fn ma_autocovariance(model: &MaModel, n: usize) -> CovarianceSequence {
    let b = &model.b;
    let r = (0..n).map(|k| if k < b.len() { b.iter().zip(&b[k..]).map(|(x, y)| x * y).sum() } else { 0.0 }).collect();
    CovarianceSequence { r }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<f64>,
    /// Seed of the generator that produced the series, if simulated.
    pub seed: Option<u64>,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return input("time series must have at least one sample");
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return input("time series has non-finite samples");
        }
        Ok(Self { samples, seed: None })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Standard normal draws from ChaCha8 seeded with `seed`, by Box–Muller.
pub fn white_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        // 1 − U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        out.push(radius * angle.cos());
        out.push(radius * angle.sin());
    }
    out.truncate(len);
    out
}

/// Realization of length `length` of the MA process, with `q` pre-sample noise values.
pub fn simulate_ma(model: &MaModel, length: usize, seed: u64) -> Result<TimeSeries> {
    if length == 0 {
        return input("series length must be positive");
    }
    let q = model.order();
    let w = white_noise(length + q, seed);
    let samples = (0..length).map(|k| model.b.iter().enumerate().map(|(j, bj)| bj * w[k + q - j]).sum()).collect();
    Ok(TimeSeries { samples, seed: Some(seed) })
}

/// Average of the outer products of the `T − n + 1` sliding windows of length `n`.
pub fn sample_covariance(y: &TimeSeries, n: usize) -> Result<SymMatrix> {
    if n == 0 {
        return input("window length must be positive");
    }
    if y.len() < n {
        return input(format!("series of length {} is shorter than the window {n}", y.len()));
    }
    let windows = y.len() - n + 1;
    let mut acc = nalgebra::DMatrix::zeros(n, n);
    for w in y.samples.windows(n) {
        let v = nalgebra::DVector::from_column_slice(w);
        acc += &v * v.transpose();
    }
    Ok(SymMatrix::symmetrized(acc / windows as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub delta_t: Option<f64>,
    pub l1: f64,
    pub status: Option<SolveStatus>,
    pub iterations: usize,
    pub error: Option<String>,
}

/// `δ_T` between the `n × n` Toeplitz covariances of `f` and `g` for each `n`,
/// alongside the L1 distance of the spectra.
pub fn convergence_experiment(
    f: &SpectralMeasure,
    g: &SpectralMeasure,
    n_list: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() || n_list.contains(&0) {
        return input("sizes must be a nonempty list of positive integers");
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return input("sizes must be strictly ascending");
    }
    let l1 = l1_distance(f, g)?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let solved = cov_sequence(f, n)
                .and_then(|rf| rf.toeplitz())
                .and_then(|a| Ok((a, cov_sequence(g, n)?.toeplitz()?)))
                .and_then(|(a, b)| delta(&a, &b, StructureTag::Toeplitz, opts));
            match solved {
                Ok(rep) => ConvergenceRow {
                    n,
                    delta_t: Some(rep.delta),
                    l1,
                    status: Some(rep.solver.status),
                    iterations: rep.solver.iterations,
                    error: None,
                },
                Err(e) => {
                    ConvergenceRow { n, delta_t: None, l1, status: None, iterations: 0, error: Some(e.to_string()) }
                }
            }
        })
        .collect();
    Ok(rows)
}

/// Whether the `δ_T` column is nondecreasing (slack `tol`) and bounded by `l1 + tol`.
pub fn convergence_is_monotone(rows: &[ConvergenceRow], tol: f64) -> bool {
    let values: Option<Vec<f64>> = rows.iter().map(|r| r.delta_t).collect();
    let Some(values) = values else { return false };
    values.windows(2).all(|w| w[1] >= w[0] - tol) && rows.iter().zip(&values).all(|(r, v)| *v <= r.l1 + tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: usize = DEFAULT_GRID;

    fn dirac_pair() -> (SpectralMeasure, SpectralMeasure) {
        let f = SpectralMeasure::zero(M).unwrap().with_atom(0.0, 1.0).unwrap();
        let g = SpectralMeasure::constant(M, 0.5).unwrap().with_atom(0.0, 0.5).unwrap();
        (f, g)
    }

    #[test]
    fn rejects_invalid_measures() {
        assert!(SpectralMeasure::new(vec![1.0; 3], vec![]).is_err());
        assert!(SpectralMeasure::new(vec![-1.0; 4], vec![]).is_err());
        assert!(SpectralMeasure::new(vec![1.0; 4], vec![Atom { theta: 0.0, mass: -1.0 }]).is_err());
        assert!(SpectralMeasure::new(vec![1.0; 4], vec![Atom { theta: 4.0, mass: 1.0 }]).is_err());
        let bad: std::result::Result<SpectralMeasure, _> =
            serde_json::from_str(r#"{"grid_size": 8, "values": [1, 1, 1, 1], "atoms": []}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let (_, g) = dirac_pair();
        let json = serde_json::to_string(&g).unwrap();
        let back: SpectralMeasure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        let parsed: SpectralMeasure =
            serde_json::from_str(r#"{"grid_size": 4, "values": [1, 2, 3, 4], "atoms": [{"theta": 0.5, "mass": 1}]}"#)
                .unwrap();
        assert_eq!(parsed.values(), &[2.5, 2.5, 2.5, 2.5]);
        assert_eq!(parsed.atoms(), &[Atom { theta: -0.5, mass: 0.5 }, Atom { theta: 0.5, mass: 0.5 }]);
    }

    #[test]
    fn perturbation_examples() {
        let f = SpectralMeasure::constant(M, 1.0).unwrap();
        let p = optimal_perturbations(&f, &f).unwrap();
        assert_eq!(p.psi.total_mass(), 0.0);
        assert_eq!(p.psi_hat.total_mass(), 0.0);
        assert_eq!(p.envelope, f);

        let g = SpectralMeasure::constant(M, 2.0).unwrap();
        let p = optimal_perturbations(&f, &g).unwrap();
        assert!(p.psi.values().iter().all(|v| *v == 1.0));
        assert!(p.psi_hat.values().iter().all(|v| *v == 0.0));

        let (f, g) = dirac_pair();
        let p = optimal_perturbations(&f, &g).unwrap();
        assert!(p.psi.values().iter().all(|v| *v == 0.5));
        assert!(p.psi.atoms().is_empty());
        assert!(p.psi_hat.values().iter().all(|v| *v == 0.0));
        assert_eq!(p.psi_hat.atoms(), &[Atom { theta: 0.0, mass: 0.5 }]);
    }

    #[test]
    fn l1_examples() {
        let f = SpectralMeasure::constant(M, 1.0).unwrap();
        let g = SpectralMeasure::constant(M, 2.0).unwrap();
        assert_eq!(l1_distance(&f, &f).unwrap(), 0.0);
        assert!((l1_distance(&f, &g).unwrap() - 1.0).abs() < 1e-14);
        let (f, g) = dirac_pair();
        assert!((l1_distance(&f, &g).unwrap() - 1.0).abs() < 1e-14);
        assert!(l1_distance(&f, &SpectralMeasure::zero(8).unwrap()).is_err());
    }

    #[test]
    fn unmatched_atoms_count_fully() {
        let f = SpectralMeasure::zero(8).unwrap().with_atom(0.3, 2.0).unwrap();
        let g = SpectralMeasure::zero(8).unwrap().with_atom(-PI, 0.5).unwrap();
        assert!((l1_distance(&f, &g).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn ratio_examples() {
        let one = SpectralMeasure::constant(M, 1.0).unwrap();
        let two = SpectralMeasure::constant(M, 2.0).unwrap();
        let zero = SpectralMeasure::zero(M).unwrap();
        let r = normalized_ratios(&one, &one).unwrap();
        assert_eq!((r.ratio_total, r.ratio_pointwise), (0.0, 0.0));
        let r = normalized_ratios(&one, &two).unwrap();
        assert!((r.ratio_total - 0.5).abs() < 1e-14 && (r.ratio_pointwise - 0.5).abs() < 1e-14);
        let r = normalized_ratios(&zero, &one).unwrap();
        assert!((r.ratio_total - 1.0).abs() < 1e-14 && (r.ratio_pointwise - 1.0).abs() < 1e-14);
        assert!(matches!(normalized_ratios(&zero, &zero), Err(Error::Domain(_))));
    }

    #[test]
    fn covariance_examples() {
        let white = cov_sequence(&SpectralMeasure::constant(M, 1.0).unwrap(), 4).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0];
        assert!(white.lags().iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-14));

        let ma = SpectralMeasure::from_fn(M, |t| 3.0 + 4.0 * t.cos() + 2.0 * (2.0 * t).cos()).unwrap();
        let r = cov_sequence(&ma, 5).unwrap();
        assert!(r.lags().iter().zip([3.0, 2.0, 1.0, 0.0, 0.0]).all(|(a, b)| (a - b).abs() < 1e-12), "{r:?}");

        let line = SpectralMeasure::zero(M).unwrap().with_atom(0.0, 1.0).unwrap();
        let r = cov_sequence(&line, 6).unwrap();
        assert!(r.lags().iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!(cov_sequence(&line, 0).is_err());
    }

    #[test]
    fn ma_autocovariance_examples() {
        let r = ma_autocovariance(&MaModel::new(vec![1.0, 1.0, 1.0]).unwrap(), 5);
        assert_eq!(r.lags(), &[3.0, 2.0, 1.0, 0.0, 0.0]);
        assert_eq!(ma_autocovariance(&MaModel::new(vec![1.0]).unwrap(), 3).lags(), &[1.0, 0.0, 0.0]);
        assert_eq!(ma_autocovariance(&MaModel::new(vec![1.0, -1.0]).unwrap(), 3).lags(), &[2.0, -1.0, 0.0]);
        assert!(MaModel::new(vec![]).is_err());
    }

    #[test]
    fn simulation_examples() {
        let white = MaModel::new(vec![1.0]).unwrap();
        let y = simulate_ma(&white, 10, 7).unwrap();
        assert_eq!(y.samples, white_noise(10, 7));
        assert_eq!(simulate_ma(&white, 5, 1).unwrap().len(), 5);
        assert_eq!(simulate_ma(&white, 10, 7).unwrap(), y);
        assert_ne!(simulate_ma(&white, 10, 8).unwrap(), y);
        assert!(simulate_ma(&white, 0, 1).is_err());

        // Sample variance of MA(1,1,1) within 3 standard errors of 3.
        let model = MaModel::new(vec![1.0, 1.0, 1.0]).unwrap();
        let t = 10_000;
        let y = simulate_ma(&model, t, 2024).unwrap();
        let var = y.samples.iter().map(|v| v * v).sum::<f64>() / t as f64;
        // Var of the sample second moment: Σ_k 2 r_k² over all lags = 2(9 + 2·4 + 2·1) = 38.
        let se = (38.0 / t as f64).sqrt();
        assert!((var - 3.0).abs() < 3.0 * se, "variance {var}, se {se}");
    }

    #[test]
    fn sample_covariance_examples() {
        let ones = TimeSeries::new(vec![1.0; 12]).unwrap();
        let c = sample_covariance(&ones, 4).unwrap();
        assert!(c.as_matrix().iter().all(|v| *v == 1.0));

        let y = TimeSeries::new(vec![1.0, 2.0, 3.0]).unwrap();
        let c = sample_covariance(&y, 3).unwrap();
        assert!((crate::symmat::sym_eig(&c).values[1]).abs() < 1e-12, "rank one");
        assert!(sample_covariance(&y, 4).is_err());

        let model = MaModel::new(vec![1.0, 1.0, 1.0]).unwrap();
        let c = sample_covariance(&simulate_ma(&model, 101, 11).unwrap(), 5).unwrap();
        for (got, want) in c.diagonal_means().iter().zip([3.0, 2.0, 1.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 0.5, "{got} vs {want}");
        }
        assert!(min_eig(&c) >= -1e-12);
    }

    #[test]
    fn convergence_identical_spectra() {
        let f = SpectralMeasure::constant(M, 1.0).unwrap();
        let rows = convergence_experiment(&f, &f, &[2, 4], &SolverOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.delta_t.unwrap().abs() < 1e-7 && r.l1 == 0.0));
        assert!(convergence_experiment(&f, &f, &[4, 2], &SolverOptions::default()).is_err());
    }

    #[test]
    fn grid_minimum() {
        assert!(trig_poly_grid_min(&[3.0, 2.0, 1.0], M).abs() < 1e-5);
        assert!(trig_poly_grid_min(&[1.0, 1.0], M) < 0.0);
    }
}
