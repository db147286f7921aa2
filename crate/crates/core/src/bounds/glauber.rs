use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundReport, GLAUBER};
use crate::generators::ReversibleGenerator;
use crate::potentials::{LatticeKernel, OccupationPairPotential};
use crate::statespace::{Configuration, SpaceKind, StateSpace};
use crate::{Error, Result};

/// Most lattice points summed directly for a power-law kernel.
pub const LATTICE_SUM_BUDGET: usize = 20_000_000;

/// Target for the power-law tail estimate.
const TAIL_TOL: f64 = 1e-12;

pub enum GlauberInteraction<'a> {
    /// translation-invariant kernel on `Z^d`
    Lattice(&'a LatticeKernel),
    /// a concrete finite-volume interaction
    Pair(&'a OccupationPairPotential),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlauberEps {
    /// upper bound on `eps(beta)`, tail included
    pub value: f64,
    /// part of `value` that bounds lattice points not summed
    pub tail: f64,
    /// occupations searched for the sup, when one was needed
    pub occupancy_cap: Option<u32>,
}

/// `eps(beta) = sup_{eta, x} sum_z |1 - exp(-beta grad_x^+ grad_z^+ H)|`.
///
/// For a lattice kernel this is `sum_{z != 0} (1 - e^{-beta K(z)})`; for
/// a kernel matrix it is the largest row sum, the on-site term included;
/// for a pair table the sup runs over the occupation box
/// `{0..occupancy_cap}^sites`, skipping second differences that leave the
/// table.
pub fn glauber_eps(interaction: GlauberInteraction<'_>, beta: f64, occupancy_cap: u32) -> Result<GlauberEps> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("inverse temperature {beta} must be finite and >= 0")));
    }
    match interaction {
        GlauberInteraction::Lattice(kernel) => lattice_eps(kernel, beta),
        GlauberInteraction::Pair(OccupationPairPotential::Kernel { sites, coupling, .. }) => {
            let n = *sites;
            let value = (0..n)
                .map(|x| {
                    coupling[x * n..(x + 1) * n]
                        .iter()
                        .map(|k| (-beta * k).exp_m1().abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            Ok(GlauberEps {
                value,
                tail: 0.0,
                occupancy_cap: None,
            })
        }
        GlauberInteraction::Pair(potential @ OccupationPairPotential::Table(table)) => {
            let top = table.cap();
            let box_cap = occupancy_cap.min(top.saturating_sub(1));
            let n = potential.sites();
            let space = StateSpace::enumerate(SpaceKind::TruncatedProduct { sites: n, cap: box_cap })?;
            let value = space
                .configs()
                .par_iter()
                .map(|eta| table_row_max(potential, eta, beta, top))
                .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
            Ok(GlauberEps {
                value,
                tail: 0.0,
                occupancy_cap: Some(box_cap),
            })
        }
    }
}

fn table_row_max(potential: &OccupationPairPotential, eta: &Configuration, beta: f64, top: u32) -> Result<f64> {
    let n = eta.len();
    let mut best = 0.0f64;
    for x in 0..n {
        let mut row = 0.0;
        for z in 0..n {
            let reach_x = eta.get(x) + 1 + u32::from(z == x);
            if reach_x > top || eta.get(z) + 1 > top {
                continue;
            }
            row += (-beta * potential.grad2_birth(eta, x, z)?).exp_m1().abs();
        }
        best = best.max(row);
    }
    Ok(best)
}

fn lattice_eps(kernel: &LatticeKernel, beta: f64) -> Result<GlauberEps> {
    kernel.validate()?;
    let exact = |value| GlauberEps {
        value,
        tail: 0.0,
        occupancy_cap: None,
    };
    match kernel {
        LatticeKernel::Finite(entries) => Ok(exact(entries.iter().map(|(_, v)| -(-beta * v).exp_m1()).sum())),
        LatticeKernel::PowerLaw {
            dimension,
            amplitude,
            exponent,
        } => {
            let (d, ba, p) = (*dimension, beta * amplitude, *exponent);
            if ba == 0.0 {
                return Ok(exact(0.0));
            }
            if p <= d as f64 {
                return Err(Error::Divergence(format!(
                    "kernel |z|^-{p} is not summable on Z^{d}"
                )));
            }
            // points with |z|_inf = s number at most 2d (3s)^{d-1}, and
            // 1 - e^{-u} <= u, so the tail beyond R is at most
            // beta A 2d 3^{d-1} R^{d-p} / (p - d)
            let gap = p - d as f64;
            let c = ba * 2.0 * d as f64 * 3f64.powi(d as i32 - 1) / gap;
            let tail_at = |r: f64| c * r.powf(-gap);
            let wanted = (c / TAIL_TOL).powf(1.0 / gap).ceil();
            let affordable = ((LATTICE_SUM_BUDGET as f64).powf(1.0 / d as f64) - 1.0) / 2.0;
            let radius = wanted.min(affordable.floor()).max(1.0) as i64;
            let side = (2 * radius + 1) as usize;
            let total = side.pow(d as u32);
            let direct: f64 = (0..total)
                .into_par_iter()
                .map(|idx| {
                    let mut rest = idx;
                    let mut r2 = 0i64;
                    for _ in 0..d {
                        let c = (rest % side) as i64 - radius;
                        rest /= side;
                        r2 += c * c;
                    }
                    if r2 == 0 {
                        0.0
                    } else {
                        -(-ba * (r2 as f64).powf(-p / 2.0)).exp_m1()
                    }
                })
                .sum();
            let tail = tail_at(radius as f64);
            Ok(GlauberEps {
                value: direct + tail,
                tail,
                occupancy_cap: None,
            })
        }
    }
}

/// `1 - lambda eps(beta)` for a birth-death generator, with `eps` taken
/// over the model's occupation cap.
pub fn glauber_bounds(gen: &ReversibleGenerator) -> Result<Vec<BoundReport>> {
    let (lambda, potential, beta, cap) = gen.model().glauber_view().ok_or(Error::ModelMismatch {
        expected: "glauber",
        got: gen.model().tag(),
    })?;
    let eps = glauber_eps(GlauberInteraction::Pair(potential), beta, cap)?;
    let mut inputs = vec![("lambda", lambda), ("beta", beta), ("eps", eps.value)];
    if let Some(c) = eps.occupancy_cap {
        inputs.push(("occupancy_cap", c as f64));
    }
    Ok(vec![BoundReport::new(
        GLAUBER,
        1.0 - lambda * eps.value,
        &inputs,
        "1 - lambda eps(beta), eps = sup_{eta, x} sum_z |1 - e^{-beta grad_x^+ grad_z^+ H}|",
    )])
}
