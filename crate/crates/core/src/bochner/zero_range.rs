use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::axioms::{describe, IdentityReport};
use crate::generators::{zero_range_rate, Model, RateFunction, ReversibleGenerator};
use crate::potentials::QuadraticEnergy;
use crate::spectral::dirichlet_form;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MMatrixBound {
    /// min over states of the smallest eigenvalue of `M(eta)` on occupied sites
    pub teom_delta: f64,
    /// min over states and occupied `x` of `n c_x (1 - c_x(eta^{x-}) / c_x - eps_x)`
    pub cobound_value: f64,
    pub teom_vacuous: bool,
    pub cobound_vacuous: bool,
}

fn zero_range_parts(gen: &ReversibleGenerator) -> Result<(&[RateFunction], &QuadraticEnergy)> {
    match gen.model() {
        Model::ZeroRange { rates, energy } => Ok((rates, energy)),
        other => Err(Error::ModelMismatch {
            expected: "zero-range",
            got: other.tag(),
        }),
    }
}

/// Pointwise M-matrix criterion and its diagonally dominated relaxation.
pub fn m_matrix_bound(gen: &ReversibleGenerator) -> Result<MMatrixBound> {
    let (rates, energy) = zero_range_parts(gen)?;
    let n = rates.len();
    let nf = n as f64;
    let (teom, co) = (0..gen.len())
        .into_par_iter()
        .map(|i| {
            let eta = gen.config(i);
            let occupied: Vec<usize> = (0..n).filter(|&x| eta.get(x) > 0).collect();
            let c: Vec<f64> = occupied.iter().map(|&x| zero_range_rate(rates, energy, eta, x)).collect();
            let k = occupied.len();
            let mut mat = DMatrix::zeros(k, k);
            let mut co = f64::INFINITY;
            for (a, &x) in occupied.iter().enumerate() {
                let removed = eta.apply_death(x);
                for (b, &y) in occupied.iter().enumerate() {
                    let r = zero_range_rate(rates, energy, &removed, y) / c[b];
                    mat[(a, b)] = nf * (c[a] * c[b]).sqrt() * (1.0 - r);
                }
                let eps: f64 = (0..n)
                    .filter(|&y| y != x)
                    .map(|y| (1.0 - (-energy.grad2_death(eta, x, y)).exp()).abs())
                    .sum();
                let own = zero_range_rate(rates, energy, &removed, x);
                co = co.min(nf * c[a] * (1.0 - own / c[a] - eps));
            }
            let sym = (&mat + mat.transpose()) * 0.5;
            (SymmetricEigen::new(sym).eigenvalues.min(), co)
        })
        .reduce(|| (f64::INFINITY, f64::INFINITY), |a, b| (a.0.min(b.0), a.1.min(b.1)));
    Ok(MMatrixBound {
        teom_delta: teom,
        cobound_value: co,
        teom_vacuous: teom <= 0.0,
        cobound_vacuous: co <= 0.0,
    })
}

/// `sum_x nu[(sum_z sqrt(c_x) nabla_{xz} f)^2] = n nu[f(-L f)]`.
pub fn medie_identity(gen: &ReversibleGenerator, f: &[f64]) -> Result<IdentityReport> {
    let (rates, energy) = zero_range_parts(gen)?;
    let n = rates.len();
    let nu = gen.nu();
    let lhs: f64 = (0..gen.len())
        .into_par_iter()
        .map(|i| {
            let eta = gen.config(i);
            (0..n)
                .map(|x| {
                    let cx = zero_range_rate(rates, energy, eta, x);
                    let u: f64 = (0..n).map(|z| cx.sqrt() * gen.grad(f, i, x * n + z)).sum();
                    nu[i] * u * u
                })
                .sum::<f64>()
        })
        .sum();
    Ok(IdentityReport::new(lhs, n as f64 * dirichlet_form(gen, f), describe(gen)))
}

/// `nu[c_x phi] = nu[c_z phi^{zx}]` for `x != z`, where `phi^{zx}` is `phi`
/// after moving a particle from `z` to `x`.
pub fn transport_identity(gen: &ReversibleGenerator, phi: &[f64], x: usize, z: usize) -> Result<IdentityReport> {
    let (rates, energy) = zero_range_parts(gen)?;
    let n = rates.len();
    if x == z || x >= n || z >= n {
        return Err(Error::InvalidArgument(format!("need distinct sites below {n}, got {x} and {z}")));
    }
    let nu = gen.nu();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for i in 0..gen.len() {
        let eta = gen.config(i);
        lhs += nu[i] * zero_range_rate(rates, energy, eta, x) * phi[i];
        let moved = gen.target(i, z * n + x).expect("particle moves are always defined");
        rhs += nu[i] * zero_range_rate(rates, energy, eta, z) * phi[moved];
    }
    Ok(IdentityReport::new(lhs, rhs, describe(gen)))
}
