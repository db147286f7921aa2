use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::RKernel;
use crate::generators::ReversibleGenerator;
use crate::{Error, Result};

/// Largest state space for the dense comparison problem.
pub const CERTIFIED_DENSE_CAP: usize = 4000;

/// Relative asymmetry of the assembled forms tolerated before the kernel
/// is declared broken.
const ASYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedK {
    /// largest `k` with `Q(f) >= k D(f)` for all `f`
    pub k_star: f64,
    /// exact gap, read off the same `D` form
    pub exact_gap: f64,
    pub states: usize,
}

impl CertifiedK {
    /// Gap lower bound `2 k*`.
    pub fn bound(&self) -> f64 {
        2.0 * self.k_star
    }
}

/// Accumulates `sum_{l,m} a_lm (e_{t_l} - e_i)(e_{t_m} - e_i)^T` into `q`.
fn add_rank_terms(q: &mut DMatrix<f64>, i: usize, terms: &[(usize, usize, f64)]) {
    for &(tl, tm, a) in terms {
        q[(tl, tm)] += a;
        q[(tl, i)] -= a;
        q[(i, tm)] -= a;
        q[(i, i)] += a;
    }
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).amax() / scale
}

/// Orthonormal basis of the complement of the unit vector `u`, from the
/// Householder reflection sending `u` to a coordinate axis.
fn complement_basis(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut w: Vec<f64> = u.to_vec();
    w[0] += if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let ww: f64 = w.iter().map(|x| x * x).sum();
    DMatrix::from_fn(n, n - 1, |r, c| {
        let col = c + 1;
        let id = if r == col { 1.0 } else { 0.0 };
        id - 2.0 * w[r] * w[col] / ww
    })
}

/// Smallest generalized eigenvalue of the pair
/// `Q(f) = sum nu c c (1 - r) nabla f nabla f`, `D(f) = sum nu c (nabla f)^2`
/// on functions orthogonal to constants in `L^2(nu)`.
pub fn certified_k(gen: &ReversibleGenerator, kernel: &RKernel) -> Result<CertifiedK> {
    let n = gen.len();
    if n > CERTIFIED_DENSE_CAP {
        return Err(Error::Capacity {
            what: "dense comparison form",
            needed: n,
            cap: CERTIFIED_DENSE_CAP,
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two states".into()));
    }
    let m = gen.n_labels();
    let nu = gen.nu();
    let mut q = DMatrix::<f64>::zeros(n, n);
    let mut d = DMatrix::<f64>::zeros(n, n);
    let mut terms = Vec::with_capacity(m * m);
    for i in 0..n {
        terms.clear();
        for l in 0..m {
            let cl = gen.rate(i, l);
            let Some(tl) = gen.target(i, l).filter(|_| cl > 0.0) else {
                continue;
            };
            d[(tl, tl)] += nu[i] * cl;
            d[(tl, i)] -= nu[i] * cl;
            d[(i, tl)] -= nu[i] * cl;
            d[(i, i)] += nu[i] * cl;
            for k in 0..m {
                let ck = gen.rate(i, k);
                let Some(tk) = gen.target(i, k).filter(|_| ck > 0.0) else {
                    continue;
                };
                let a = nu[i] * cl * ck * (1.0 - kernel.r(gen, i, l, k));
                if a != 0.0 {
                    terms.push((tl, tk, a));
                }
            }
        }
        add_rank_terms(&mut q, i, &terms);
    }
    // move to the nu-symmetrized basis g = nu^{1/2} f
    let s: Vec<f64> = nu.iter().map(|v| 1.0 / v.sqrt()).collect();
    for r in 0..n {
        for c in 0..n {
            q[(r, c)] *= s[r] * s[c];
            d[(r, c)] *= s[r] * s[c];
        }
    }
    let defect = asymmetry(&q).max(asymmetry(&d));
    if defect > ASYMMETRY_TOL {
        return Err(Error::Asymmetric(defect));
    }
    let q = (&q + q.transpose()) * 0.5;
    let d = (&d + d.transpose()) * 0.5;
    let u: Vec<f64> = nu.iter().map(|v| v.sqrt()).collect();
    let p = complement_basis(&u);
    let a = p.transpose() * q * &p;
    let b = p.transpose() * d * &p;
    let b_min = SymmetricEigen::new(b.clone()).eigenvalues.min();
    if b_min <= 1e-12 * b.amax() {
        return Err(Error::Reducible("Dirichlet form is singular beyond constants".into()));
    }
    let chol = Cholesky::new(b).ok_or_else(|| Error::Reducible("Dirichlet form is not positive".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::Reducible("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Reducible("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let k_star = SymmetricEigen::new(c).eigenvalues.min();
    let exact_gap = 0.5 * b_min;
    if k_star > 0.0 && 2.0 * k_star > exact_gap + 1e-8 {
        return Err(Error::BoundViolated(format!(
            "certified 2k = {} exceeds the exact gap {exact_gap}",
            2.0 * k_star
        )));
    }
    Ok(CertifiedK {
        k_star,
        exact_gap,
        states: n,
    })
}
