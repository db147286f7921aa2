//! Exact spectral gaps and the quadratic functionals of a reversible
//! generator.
//!
//! `-L` is similar to the symmetric matrix `A = D^{1/2} (-L) D^{-1/2}` with
//! `D = diag(nu)`; its null vector `nu^{1/2}` is known exactly and is
//! deflated explicitly in both solvers.

mod lanczos;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generators::{check_detailed_balance, ReversibleGenerator};
use crate::random::gaussian_function;
use crate::{Error, Result};

pub use lanczos::{lanczos_smallest, LanczosSettings};

/// Detailed-balance residual above which symmetrization is refused.
pub const SYMMETRIZE_DB_TOL: f64 = 1e-9;
/// Largest state space the dense solver accepts by default.
pub const DEFAULT_DENSE_CAP: usize = 4000;
/// Above this size `Method::Auto` prefers the iterative solver; the dense
/// decomposition is cubic and already takes seconds at this size.
pub const DEFAULT_AUTO_DENSE_LIMIT: usize = 1000;

/// Symmetrized `-L` in CSR form, with the unit null vector `nu^{1/2}`.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    sqrt_nu: Vec<f64>,
    defect: f64,
}

impl SymmetricOperator {
    pub fn len(&self) -> usize {
        self.sqrt_nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sqrt_nu.is_empty()
    }

    pub fn sqrt_nu(&self) -> &[f64] {
        &self.sqrt_nu
    }

    /// Largest `|A_ij - A_ji|` before the explicit symmetrization.
    pub fn symmetry_defect(&self) -> f64 {
        self.defect
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let body = |(i, yi): (usize, &mut f64)| {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *yi = self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&j, &v)| v * x[j]).sum();
        };
        if x.len() > 4096 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] = self.vals[k];
            }
        }
        m
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.len())
            .map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `A = D^{1/2} (-L) D^{-1/2}`, explicitly symmetrized.
pub fn symmetrize(gen: &ReversibleGenerator) -> Result<SymmetricOperator> {
    let residual = check_detailed_balance(gen);
    if residual > SYMMETRIZE_DB_TOL {
        return Err(Error::DetailedBalance {
            residual,
            tolerance: SYMMETRIZE_DB_TOL,
        });
    }
    let nu = gen.nu();
    let sqrt_nu: Vec<f64> = nu.iter().map(|p| p.sqrt()).collect();
    let l = gen.matrix();
    let n = gen.len();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(l.cols.len());
    let mut vals = Vec::with_capacity(l.vals.len());
    row_ptr.push(0);
    let mut defect = 0.0f64;
    for i in 0..n {
        for (j, v) in l.row(i) {
            let a_ij = -v * sqrt_nu[i] / sqrt_nu[j];
            let a_ji = -l.get(j, i) * sqrt_nu[j] / sqrt_nu[i];
            defect = defect.max((a_ij - a_ji).abs());
            cols.push(j);
            vals.push(0.5 * (a_ij + a_ji));
        }
        row_ptr.push(cols.len());
    }
    Ok(SymmetricOperator {
        row_ptr,
        cols,
        vals,
        sqrt_nu,
        defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dense,
    Iterative,
    /// dense up to the dense cap, iterative beyond
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub method: Method,
    pub dense_cap: usize,
    /// largest size `Method::Auto` sends to the dense solver
    pub auto_dense_limit: usize,
    /// residual tolerance of the iterative solver
    pub tol: f64,
    /// number of smallest eigenvalues reported
    pub head: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            dense_cap: DEFAULT_DENSE_CAP,
            auto_dense_limit: DEFAULT_AUTO_DENSE_LIMIT,
            tol: 1e-10,
            head: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub gap: f64,
    /// gap eigenfunction in `L^2(nu)`: `nu[f] = 0`, `nu[f^2] = 1`
    pub gap_eigenvector: Vec<f64>,
    /// smallest eigenvalues of `-L`, starting with the exact 0
    pub spectrum_head: Vec<f64>,
    pub method: Method,
    /// `||A v - gap v||` for the unit gap vector
    pub residual: f64,
    /// `||A nu^{1/2}||`
    pub null_residual: f64,
}

/// Second-smallest eigenvalue of `-L`.
pub fn spectral_gap(gen: &ReversibleGenerator, settings: &SolverSettings) -> Result<SpectralResult> {
    let op = symmetrize(gen)?;
    let n = op.len();
    if n < 2 {
        return Err(Error::InvalidArgument("the gap needs at least two states".into()));
    }
    let method = match settings.method {
        Method::Auto if n <= settings.dense_cap.min(settings.auto_dense_limit) => Method::Dense,
        Method::Auto => Method::Iterative,
        Method::Dense if n > settings.dense_cap => {
            return Err(Error::Capacity {
                what: "dense eigensolver",
                needed: n,
                cap: settings.dense_cap,
            });
        }
        m => m,
    };
    let (gap, v, head) = match method {
        Method::Dense => dense_smallest(&op, settings.head.max(2)),
        _ => {
            let lz = LanczosSettings {
                tol: settings.tol,
                ..LanczosSettings::default()
            };
            let (theta, v, ritz) = lanczos_smallest(&op, &lz)?;
            let mut head = vec![0.0];
            head.extend(ritz.into_iter().take(settings.head.max(2) - 1));
            (theta, v, head)
        }
    };
    let av = op.apply(&v);
    let residual = av.iter().zip(&v).map(|(a, x)| (a - gap * x).powi(2)).sum::<f64>().sqrt();
    let null_residual = op.apply(op.sqrt_nu()).iter().map(|x| x * x).sum::<f64>().sqrt();
    let f: Vec<f64> = v.iter().zip(op.sqrt_nu()).map(|(x, s)| x / s).collect();
    Ok(SpectralResult {
        gap,
        gap_eigenvector: f,
        spectrum_head: head,
        method,
        residual,
        null_residual,
    })
}

/// Full spectrum of `-L` in increasing order (dense; small instances).
pub fn full_spectrum(gen: &ReversibleGenerator) -> Result<(Vec<f64>, DMatrix<f64>, Vec<f64>)> {
    let op = symmetrize(gen)?;
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..op.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(op.len(), op.len(), |i, c| eig.eigenvectors[(i, order[c])]);
    Ok((values, vectors, op.sqrt_nu().to_vec()))
}

fn dense_smallest(op: &SymmetricOperator, head: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let n = op.len();
    let u = op.sqrt_nu();
    // shift the known null vector above the rest of the spectrum
    let shift = 1.0 + 2.0 * op.norm_bound();
    let mut m = op.to_dense();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += shift * u[i] * u[j];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[0];
    let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    // remove any residual null component and fix the sign
    let c: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
    v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
    normalize_sign(&mut v);
    let mut head_vals = vec![0.0];
    head_vals.extend(order.iter().take(head.min(n) - 1).map(|&k| eig.eigenvalues[k]));
    (eig.eigenvalues[k], v, head_vals)
}

pub(crate) fn normalize_sign(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let s = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
    v.iter_mut().for_each(|x| *x *= s);
}

/// `nu[f]`
pub fn expectation(gen: &ReversibleGenerator, f: &[f64]) -> f64 {
    gen.nu().iter().zip(f).map(|(p, x)| p * x).sum()
}

/// `nu[f; f] = nu[f^2] - nu[f]^2`
pub fn variance(gen: &ReversibleGenerator, f: &[f64]) -> f64 {
    let m = expectation(gen, f);
    gen.nu().iter().zip(f).map(|(p, x)| p * (x - m) * (x - m)).sum()
}

/// `E(f, f) = nu[f (-L f)]`
pub fn dirichlet_form(gen: &ReversibleGenerator, f: &[f64]) -> f64 {
    let lf = gen.apply(f);
    -gen.nu().iter().zip(f).zip(&lf).map(|((p, x), y)| p * x * y).sum::<f64>()
}

/// `(1/2) nu[ sum_gamma c(eta, gamma) (grad_gamma f)^2 ]`
pub fn dirichlet_half_sum(gen: &ReversibleGenerator, f: &[f64]) -> f64 {
    let m = gen.n_labels();
    let nu = gen.nu();
    0.5 * (0..gen.len())
        .map(|i| {
            nu[i] * (0..m).map(|l| gen.rate(i, l) * gen.grad(f, i, l).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
}

/// `nu[(L f)^2]`
pub fn generator_square(gen: &ReversibleGenerator, f: &[f64]) -> f64 {
    let lf = gen.apply(f);
    gen.nu().iter().zip(&lf).map(|(p, y)| p * y * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BakryEmeryReport {
    /// `max_f (gap E(f,f) - nu[(Lf)^2]) / (nu[(Lf)^2] + E(f,f))`, clipped at 0
    pub max_violation: f64,
    /// `|nu[(Lf)^2] - gap E(f,f)| / scale` at the gap eigenfunction
    pub eigenvector_defect: f64,
    pub n_functions: usize,
    pub seed: u64,
}

/// Checks `nu[(Lf)^2] >= gap E(f,f)` on seeded random functions and
/// equality at the gap eigenfunction.
pub fn bakry_emery_check(
    gen: &ReversibleGenerator,
    result: &SpectralResult,
    n_random_f: usize,
    seed: u64,
) -> BakryEmeryReport {
    let gap = result.gap;
    let relative = |f: &[f64]| {
        let q = generator_square(gen, f);
        let e = dirichlet_form(gen, f);
        let scale = q + e;
        if scale == 0.0 {
            0.0
        } else {
            (gap * e - q) / scale
        }
    };
    let max_violation = (0..n_random_f)
        .into_par_iter()
        .map(|k| relative(&gaussian_function(gen.len(), seed.wrapping_add(k as u64))))
        .reduce(|| 0.0, f64::max)
        .max(0.0);
    BakryEmeryReport {
        max_violation,
        eigenvector_defect: relative(&result.gap_eigenvector).abs(),
        n_functions: n_random_f,
        seed,
    }
}

#[cfg(test)]
mod tests;
