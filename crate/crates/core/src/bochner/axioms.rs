use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{commutes, exchanges_overlap, RKernel};
use crate::generators::{Model, ReversibleGenerator};
use crate::random::HashedFunction;
use crate::spectral::generator_square;
use crate::{Error, Result};

/// Cap on `states x labels^2` for exhaustive triple sums.
pub const TRIPLE_CAP: usize = 50_000_000;

const FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    /// triples with positive weight on which the moves do not commute
    pub a2_violations: usize,
    /// their share of the total `R` mass
    pub a2_residual: f64,
    pub a3_residual: f64,
    pub a4_residual: f64,
    pub n_functions: usize,
    pub seed: u64,
}

impl AxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.a2_residual.max(self.a3_residual).max(self.a4_residual)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub instance: String,
    pub seed: Option<u64>,
}

impl IdentityReport {
    pub fn new(lhs: f64, rhs: f64, instance: String) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(FLOOR);
        Self {
            lhs,
            rhs,
            relative_error: (lhs - rhs).abs() / scale,
            instance,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub(crate) fn describe(gen: &ReversibleGenerator) -> String {
    format!("{} ({} states, {} moves)", gen.model().tag(), gen.len(), gen.n_labels())
}

fn check_capacity(gen: &ReversibleGenerator) -> Result<()> {
    let m = gen.n_labels();
    let needed = gen.len().saturating_mul(m).saturating_mul(m);
    if needed > TRIPLE_CAP {
        return Err(Error::Capacity {
            what: "triple sum",
            needed,
            cap: TRIPLE_CAP,
        });
    }
    Ok(())
}

fn add_into(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Checks (A2) exactly on the support of `R`, and (A3), (A4) as equality
/// of `int F dR` with `int Theta F dR` and `int T F dR` for `n_functions`
/// hashed bounded functions `F` (seeds `seed, seed + 1, ...`).
pub fn verify_axioms(gen: &ReversibleGenerator, kernel: &RKernel, n_functions: usize, seed: u64) -> Result<AxiomReport> {
    check_capacity(gen)?;
    let m = gen.n_labels();
    let inverse = gen.inverse();
    let fs: Vec<HashedFunction> = (0..n_functions as u64).map(|k| HashedFunction::new(seed.wrapping_add(k))).collect();
    // per function: plain, swapped, transported, scale; then violations,
    // violating mass, total mass
    let width = 4 * n_functions + 3;
    let sums = (0..gen.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; width];
            for l in 0..m {
                for d in 0..m {
                    let w = kernel.weight(gen, i, l, d);
                    if w == 0.0 {
                        continue;
                    }
                    acc[width - 1] += w;
                    if !commutes(gen, i, l, d) {
                        acc[width - 3] += 1.0;
                        acc[width - 2] += w;
                    }
                    let t = gen.target(i, l).unwrap_or(i);
                    for (k, f) in fs.iter().enumerate() {
                        let v = f.eval(i, l, d);
                        acc[4 * k] += w * v;
                        acc[4 * k + 1] += w * f.eval(i, d, l);
                        acc[4 * k + 2] += w * f.eval(t, inverse[l], d);
                        acc[4 * k + 3] += w * v.abs();
                    }
                }
            }
            acc
        })
        .reduce(|| vec![0.0; width], add_into);
    let mut a3 = 0.0f64;
    let mut a4 = 0.0f64;
    for k in 0..n_functions {
        let scale = sums[4 * k + 3].max(FLOOR);
        a3 = a3.max((sums[4 * k] - sums[4 * k + 1]).abs() / scale);
        a4 = a4.max((sums[4 * k] - sums[4 * k + 2]).abs() / scale);
    }
    Ok(AxiomReport {
        a2_violations: sums[width - 3] as usize,
        a2_residual: sums[width - 2] / sums[width - 1].max(FLOOR),
        a3_residual: a3,
        a4_residual: a4,
        n_functions,
        seed,
    })
}

/// `nabla_gamma nabla_delta f (eta_i) = nabla_delta f(gamma eta) - nabla_delta f(eta)`
fn second_difference(gen: &ReversibleGenerator, f: &[f64], i: usize, l: usize, d: usize) -> f64 {
    let outer = match gen.target(i, l) {
        Some(t) => gen.grad(f, t, d),
        None => 0.0,
    };
    outer - gen.grad(f, i, d)
}

/// Both sides of `int [nabla_gamma nabla_delta f]^2 dR = 4 int nabla_gamma f nabla_delta f dR`.
pub fn check_bochner_identity(gen: &ReversibleGenerator, kernel: &RKernel, f: &[f64]) -> Result<IdentityReport> {
    check_capacity(gen)?;
    let m = gen.n_labels();
    let (lhs, rhs) = (0..gen.len())
        .into_par_iter()
        .map(|i| {
            let (mut a, mut b) = (0.0, 0.0);
            for l in 0..m {
                for d in 0..m {
                    let w = kernel.weight(gen, i, l, d);
                    if w == 0.0 {
                        continue;
                    }
                    let dd = second_difference(gen, f, i, l, d);
                    a += w * dd * dd;
                    b += 4.0 * w * gen.grad(f, i, l) * gen.grad(f, i, d);
                }
            }
            (a, b)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(IdentityReport::new(lhs, rhs, describe(gen)))
}

/// Both sides of
/// `nu[(L f)^2] - (1/4) int [nabla nabla f]^2 dR = sum nu c c (1 - r) nabla f nabla f`,
/// with `nu[(L f)^2]` taken from the assembled matrix.
pub fn check_corollary1(gen: &ReversibleGenerator, kernel: &RKernel, f: &[f64]) -> Result<IdentityReport> {
    check_capacity(gen)?;
    let m = gen.n_labels();
    let nu = gen.nu();
    let (second, rhs) = (0..gen.len())
        .into_par_iter()
        .map(|i| {
            let (mut a, mut b) = (0.0, 0.0);
            for l in 0..m {
                let cl = gen.rate(i, l);
                if cl == 0.0 {
                    continue;
                }
                let gl = gen.grad(f, i, l);
                for d in 0..m {
                    let cd = gen.rate(i, d);
                    if cd == 0.0 {
                        continue;
                    }
                    let r = kernel.r(gen, i, l, d);
                    if r != 0.0 {
                        let dd = second_difference(gen, f, i, l, d);
                        a += nu[i] * cl * cd * r * dd * dd;
                    }
                    b += nu[i] * cl * cd * (1.0 - r) * gl * gen.grad(f, i, d);
                }
            }
            (a, b)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let lhs = generator_square(gen, f) - 0.25 * second;
    Ok(IdentityReport::new(lhs, rhs, describe(gen)))
}

/// Complete-graph exchange identity: the sum over pairs of exchanges
/// sharing a site of `nu[c(eta, delta) nabla_gamma f nabla_delta f]` equals
/// `|Lambda| / 2` times `sum_delta nu[c(eta, delta) (nabla_delta f)^2]`.
pub fn kawasaki_overlap_identity(gen: &ReversibleGenerator, f: &[f64]) -> Result<IdentityReport> {
    let sites = match gen.model() {
        Model::KawasakiComplete { sites, .. } => *sites,
        other => {
            return Err(Error::ModelMismatch {
                expected: "kawasaki-complete",
                got: other.tag(),
            })
        }
    };
    let m = gen.n_labels();
    let nu = gen.nu();
    let (lhs, diag) = (0..gen.len())
        .into_par_iter()
        .map(|i| {
            let (mut a, mut b) = (0.0, 0.0);
            for d in 0..m {
                let c = gen.rate(i, d);
                let gd = gen.grad(f, i, d);
                b += nu[i] * c * gd * gd;
                for l in 0..m {
                    if exchanges_overlap(gen, l, d) {
                        a += nu[i] * c * gen.grad(f, i, l) * gd;
                    }
                }
            }
            (a, b)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(IdentityReport::new(lhs, 0.5 * sites as f64 * diag, describe(gen)))
}
