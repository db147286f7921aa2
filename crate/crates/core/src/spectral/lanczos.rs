use nalgebra::{DMatrix, SymmetricEigen};

use super::{normalize_sign, SymmetricOperator};
use crate::random::gaussian_function;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosSettings {
    /// Krylov dimension per cycle
    pub krylov: usize,
    pub max_restarts: usize,
    /// stop when `||A x - theta x|| <= tol * max(1, |theta|)`
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosSettings {
    fn default() -> Self {
        Self {
            krylov: 120,
            max_restarts: 300,
            tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(b, a)| *b += alpha * a);
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], u: &[f64]) {
    // two passes of classical Gram-Schmidt keep the basis orthogonal to
    // working precision
    for _ in 0..2 {
        let c = dot(w, u);
        axpy(-c, u, w);
        for q in basis {
            let c = dot(w, q);
            axpy(-c, q, w);
        }
    }
}

/// Smallest eigenpair of `A` on the orthogonal complement of `nu^{1/2}`,
/// by explicitly restarted Lanczos with full reorthogonalization. Returns
/// `(theta, unit eigenvector, sorted Ritz values of the last cycle)`.
pub fn lanczos_smallest(op: &SymmetricOperator, settings: &LanczosSettings) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let n = op.len();
    let u = op.sqrt_nu().to_vec();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two states".into()));
    }
    let m = settings.krylov.min(n - 1).max(1);
    let mut start = gaussian_function(n, settings.seed);
    orthogonalize(&mut start, &[], &u);
    let mut last_residual = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..settings.max_restarts.max(1) {
        let norm = dot(&start, &start).sqrt();
        if norm == 0.0 {
            return Err(Error::NoConvergence {
                iterations,
                residual: last_residual,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / norm).collect()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![0.0; n];
        loop {
            let j = basis.len() - 1;
            op.apply_into(&basis[j], &mut w);
            iterations += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            orthogonalize(&mut w, &basis, &u);
            let b = dot(&w, &w).sqrt();
            if basis.len() == m || b <= 1e-13 * (1.0 + a.abs()) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let best = order[0];
        let theta = eig.eigenvalues[best];
        let mut x = vec![0.0; n];
        for (c, q) in eig.eigenvectors.column(best).iter().zip(&basis) {
            axpy(*c, q, &mut x);
        }
        orthogonalize(&mut x, &[], &u);
        normalize_sign(&mut x);
        let ax = op.apply(&x);
        let residual = ax.iter().zip(&x).map(|(a, v)| (a - theta * v).powi(2)).sum::<f64>().sqrt();
        last_residual = residual;
        if residual <= settings.tol * theta.abs().max(1.0) {
            let ritz = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            return Ok((theta, x, ritz));
        }
        // restart from the Ritz vector, nudged by the next one so a
        // near-degenerate partner is not lost
        start = x;
        if order.len() > 1 {
            let mut second = vec![0.0; n];
            for (c, q) in eig.eigenvectors.column(order[1]).iter().zip(&basis) {
                axpy(*c, q, &mut second);
            }
            axpy(0.1, &second, &mut start);
        }
        orthogonalize(&mut start, &[], &u);
    }
    Err(Error::NoConvergence {
        iterations,
        residual: last_residual,
    })
}
