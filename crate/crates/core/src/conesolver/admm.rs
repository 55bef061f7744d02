//! Consensus ADMM for linear objectives over structured matrix variables
//! coupled by PSD constraints and linear equalities:
//!
//! ```text
//! minimize    cᵀx
//! subject to  L_b(x) + C_b ⪰ 0     for every block b
//!             E x = e
//! ```
//!
//! Each block gets a splitting variable `Z_b` and a scaled dual `U_b`. The
//! x-update is an equality-constrained least-squares problem whose KKT matrix
//! does not depend on the penalty, so it is factored once.

use nalgebra::{DMatrix, DVector, LU};

use super::structure::StructureTag;
use super::{SolveStatus, SolverOptions};
use crate::error::{input, Result};
use crate::symmat::{psd_project, SymMatrix};

/// Residual ratio that triggers a penalty update.
const BALANCE_RATIO: f64 = 10.0;
/// Penalty multiplier used by residual balancing.
const BALANCE_FACTOR: f64 = 2.0;
/// Iterations between penalty updates.
const BALANCE_EVERY: usize = 25;

#[derive(Debug, Clone)]
pub(crate) struct Variable {
    pub tag: StructureTag,
    pub dim: usize,
    pub offset: usize,
}

impl Variable {
    fn len(&self) -> usize {
        self.tag.n_coeffs(self.dim)
    }
}

#[derive(Debug, Clone)]
struct Block {
    dim: usize,
    terms: Vec<(usize, f64)>,
    constant: DMatrix<f64>,
}

#[derive(Debug, Clone)]
struct Equality {
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ConeProgram {
    vars: Vec<Variable>,
    blocks: Vec<Block>,
    eqs: Vec<Equality>,
    cost: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct AdmmOutcome {
    pub x: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl ConeProgram {
    pub fn add_var(&mut self, tag: StructureTag, dim: usize) -> usize {
        let offset = self.cost.len();
        let var = Variable { tag, dim, offset };
        self.cost.resize(offset + var.len(), 0.0);
        self.vars.push(var);
        self.vars.len() - 1
    }

    pub fn var(&self, id: usize) -> &Variable {
        &self.vars[id]
    }

    /// Adds `Σ sign·var + constant ⪰ 0`.
    pub fn add_psd(&mut self, terms: &[(usize, f64)], constant: Option<&SymMatrix>) {
        let dim = self.vars[terms[0].0].dim;
        debug_assert!(terms.iter().all(|&(v, _)| self.vars[v].dim == dim));
        let constant = constant.map_or_else(|| DMatrix::zeros(dim, dim), |c| c.as_matrix().clone());
        self.blocks.push(Block { dim, terms: terms.to_vec(), constant });
    }

    /// Adds `Σ coeff·x[var.offset + k] = rhs` for `(var, k, coeff)` triples.
    pub fn add_eq(&mut self, coeffs: &[(usize, usize, f64)], rhs: f64) {
        let coeffs = coeffs.iter().map(|&(v, k, c)| (self.vars[v].offset + k, c)).collect();
        self.eqs.push(Equality { coeffs, rhs });
    }

    /// Adds `weight · ⟨G, var⟩` to the objective.
    pub fn add_cost(&mut self, var: usize, g: &DMatrix<f64>, weight: f64) {
        let v = &self.vars[var];
        for (k, a) in v.tag.adjoint(v.dim, g).into_iter().enumerate() {
            self.cost[v.offset + k] += weight * a;
        }
    }

    pub fn n_coeffs(&self) -> usize {
        self.cost.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn var_matrix(&self, x: &[f64], id: usize) -> DMatrix<f64> {
        let v = &self.vars[id];
        v.tag.embed(v.dim, &x[v.offset..v.offset + v.len()])
    }

    fn apply_block(&self, b: &Block, x: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(b.dim, b.dim);
        for &(id, sign) in &b.terms {
            out += self.var_matrix(x, id) * sign;
        }
        out
    }

    fn adjoint_block_into(&self, b: &Block, g: &DMatrix<f64>, acc: &mut [f64]) {
        for &(id, sign) in &b.terms {
            let v = &self.vars[id];
            for (k, a) in v.tag.adjoint(v.dim, g).into_iter().enumerate() {
                acc[v.offset + k] += sign * a;
            }
        }
    }

    /// Factored KKT matrix `[H Eᵀ; E 0]` with `H = Σ_b L_bᵀ L_b`.
    fn factor_kkt(&self) -> Result<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        let p = self.n_coeffs();
        let m = self.eqs.len();
        let mut kkt = DMatrix::zeros(p + m, p + m);
        let mut unit = vec![0.0; p];
        for j in 0..p {
            unit[j] = 1.0;
            let mut col = vec![0.0; p];
            for b in &self.blocks {
                let lx = self.apply_block(b, &unit);
                self.adjoint_block_into(b, &lx, &mut col);
            }
            for (i, v) in col.into_iter().enumerate() {
                kkt[(i, j)] = v;
            }
            unit[j] = 0.0;
        }
        for (r, eq) in self.eqs.iter().enumerate() {
            for &(j, c) in &eq.coeffs {
                kkt[(p + r, j)] += c;
                kkt[(j, p + r)] += c;
            }
        }
        let lu = kkt.lu();
        if !lu.is_invertible() {
            return input("degenerate problem: the structured least-squares system is singular");
        }
        Ok(lu)
    }

    /// Magnitude of the problem data, used to scale the stopping tolerance.
    fn data_scale(&self) -> f64 {
        let blocks = self.blocks.iter().map(|b| b.constant.norm());
        let rhs = self.eqs.iter().map(|e| e.rhs.abs());
        blocks.chain(rhs).fold(0.0, f64::max)
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<AdmmOutcome> {
        let p = self.n_coeffs();
        let m = self.eqs.len();
        let lu = self.factor_kkt()?;
        let threshold = opts.tol * (1.0 + self.data_scale());

        let mut rho = opts.rho;
        let mut x = vec![0.0; p];
        let mut z: Vec<DMatrix<f64>> = self
            .blocks
            .iter()
            .map(|b| psd_project(&SymMatrix::symmetrized(b.constant.clone())).into_matrix())
            .collect();
        let mut u: Vec<DMatrix<f64>> = self.blocks.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect();
        let mut rhs = DVector::zeros(p + m);
        for (r, eq) in self.eqs.iter().enumerate() {
            rhs[p + r] = eq.rhs;
        }

        let mut primal = f64::INFINITY;
        let mut dual = f64::INFINITY;
        for iter in 1..=opts.max_iters {
            // x-update: minimize cᵀx/ρ + ½ Σ ‖L_b x − (Z_b − C_b − U_b)‖² subject to E x = e.
            let mut top = vec![0.0; p];
            for (k, b) in self.blocks.iter().enumerate() {
                let target = &z[k] - &b.constant - &u[k];
                self.adjoint_block_into(b, &target, &mut top);
            }
            for j in 0..p {
                rhs[j] = top[j] - self.cost[j] / rho;
            }
            let sol = lu.solve(&rhs).expect("KKT matrix was checked invertible");
            x.copy_from_slice(&sol.as_slice()[..p]);

            // Z- and U-updates.
            let mut primal_sq = 0.0;
            let mut dual_acc = vec![0.0; p];
            for (k, b) in self.blocks.iter().enumerate() {
                let affine = self.apply_block(b, &x) + &b.constant;
                let z_new = psd_project(&SymMatrix::symmetrized(&affine + &u[k])).into_matrix();
                let gap = &affine - &z_new;
                primal_sq += gap.norm_squared();
                u[k] += &gap;
                let dz = &z_new - &z[k];
                self.adjoint_block_into(b, &dz, &mut dual_acc);
                z[k] = z_new;
            }
            primal = primal_sq.sqrt();
            dual = rho * dual_acc.iter().map(|v| v * v).sum::<f64>().sqrt();

            if primal.max(dual) <= threshold {
                return Ok(AdmmOutcome {
                    x,
                    status: SolveStatus::Converged,
                    iterations: iter,
                    primal_residual: primal,
                    dual_residual: dual,
                });
            }

            let factor = if iter % BALANCE_EVERY != 0 {
                1.0
            } else if primal > BALANCE_RATIO * dual {
                BALANCE_FACTOR
            } else if dual > BALANCE_RATIO * primal {
                1.0 / BALANCE_FACTOR
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                for uk in &mut u {
                    *uk /= factor;
                }
            }
        }
        log::debug!("ADMM hit {} iterations (primal {primal:.3e}, dual {dual:.3e})", opts.max_iters);
        Ok(AdmmOutcome {
            x,
            status: SolveStatus::MaxIters,
            iterations: opts.max_iters,
            primal_residual: primal,
            dual_residual: dual,
        })
    }
}
