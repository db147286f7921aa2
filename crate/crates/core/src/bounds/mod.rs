//! Closed-form lower bounds on spectral gaps, and the interaction integrals
//! `eps(beta)` they are expressed in.
//!
//! Every bound is returned as a [`BoundReport`]. Values at or below zero
//! are kept as they are and flagged vacuous.

mod glauber;
mod quadrature;
mod zero_range;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::generators::{Model, ReversibleGenerator};
use crate::{Error, Result};

pub use glauber::{glauber_bounds, glauber_eps, GlauberEps, GlauberInteraction, LATTICE_SUM_BUDGET};
pub use quadrature::{
    continuum_eps, discrete_eps, sphere_surface, ContinuumEps, Cutoff, QuadratureSpec,
};
pub use zero_range::zero_range_bounds;

pub const KAWASAKI: &str = "kawasaki";
pub const ZR_INCREMENT: &str = "zr-increment";
pub const ZR_POINTWISE: &str = "zr-pointwise";
pub const ZR_UNIFORM: &str = "zr-uniform";
pub const ZR_TORUS: &str = "zr-torus";
pub const ZR_RELATIVE_INCREMENT: &str = "zr-relative-increment";
pub const GLAUBER: &str = "glauber";
pub const CONTINUUM_KAWASAKI: &str = "continuum-kawasaki";
pub const CONTINUUM_KAWASAKI_SPLIT: &str = "continuum-kawasaki-split";
pub const CONTINUUM_GLAUBER: &str = "continuum-glauber";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    /// parameters the value was computed from
    pub inputs: BTreeMap<String, f64>,
    /// `value <= 0`
    pub vacuous: bool,
    /// the formula that was evaluated
    pub anchor: String,
}

impl BoundReport {
    /// Overflowing values saturate at the largest finite magnitude.
    pub fn new(name: &str, value: f64, inputs: &[(&str, f64)], anchor: &str) -> Self {
        debug_assert!(!value.is_nan(), "{name} evaluated to NaN");
        let value = value.clamp(f64::MIN, f64::MAX);
        Self {
            name: name.to_string(),
            value,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            vacuous: value <= 0.0,
            anchor: anchor.to_string(),
        }
    }
}

/// A bound together with the reason it could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum BoundEntry {
    Applicable(BoundReport),
    NotApplicable { name: String, reason: String },
}

impl BoundEntry {
    pub fn name(&self) -> &str {
        match self {
            BoundEntry::Applicable(r) => &r.name,
            BoundEntry::NotApplicable { name, .. } => name,
        }
    }

    pub fn report(&self) -> Option<&BoundReport> {
        match self {
            BoundEntry::Applicable(r) => Some(r),
            BoundEntry::NotApplicable { .. } => None,
        }
    }

    pub(crate) fn not_applicable(name: &str, reason: impl Into<String>) -> Self {
        BoundEntry::NotApplicable {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

/// `k(beta) = 1/2 - e^eps (e^eps - 1) - 4 beta e^{5 eps} |||Phi|||` with
/// `eps = beta ||Phi||`. The last term is formed in log space so that a
/// huge exponent shows up as a hugely negative `k` instead of `NaN`.
pub fn kawasaki_k(beta: f64, sup: f64, weighted: f64) -> f64 {
    let eps = beta * sup;
    let first = eps.exp() * eps.exp_m1();
    let prod = 4.0 * beta * weighted;
    let second = if prod > 0.0 {
        (prod.ln() + 5.0 * eps).exp()
    } else {
        0.0
    };
    0.5 - first - second
}

/// Gap lower bound `2 k(beta)` for exchange dynamics on the complete graph.
pub fn kawasaki_bound(beta: f64, sup: f64, weighted: f64) -> BoundReport {
    BoundReport::new(
        KAWASAKI,
        2.0 * kawasaki_k(beta, sup, weighted),
        &[("beta", beta), ("sup_norm", sup), ("weighted_norm", weighted)],
        "2 [1/2 - e^eps (e^eps - 1) - 4 beta e^{5 eps} |||Phi|||], eps = beta ||Phi||",
    )
}

/// Largest `beta` with `2 k(beta) >= target`, by bisection to `1e-8`.
/// Returns infinity when both norms vanish.
pub fn beta_lambda(target: f64, sup: f64, weighted: f64) -> Result<f64> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidArgument(format!("target gap {target} must be positive")));
    }
    if target >= 1.0 {
        return Err(Error::Infeasible(format!("the bound never exceeds 1, target is {target}")));
    }
    if !(sup.is_finite() && sup >= 0.0 && weighted.is_finite() && weighted >= 0.0) {
        return Err(Error::InvalidArgument("potential norms must be finite and >= 0".into()));
    }
    if sup == 0.0 && weighted == 0.0 {
        return Ok(f64::INFINITY);
    }
    let bound = |b: f64| 2.0 * kawasaki_k(b, sup, weighted);
    let mut hi = 1.0;
    while bound(hi) >= target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    let (mut v_lo, mut v_hi) = (bound(lo), bound(hi));
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        let v = bound(mid);
        if !(v <= v_lo && v >= v_hi) {
            return Err(Error::InvalidArgument(format!("bound is not monotone in beta near {mid}")));
        }
        if v >= target {
            lo = mid;
            v_lo = v;
        } else {
            hi = mid;
            v_hi = v;
        }
    }
    Ok(lo)
}

/// The Kawasaki bound for a complete-graph exchange generator, built from
/// the norms of its potential.
pub fn kawasaki_bounds(gen: &ReversibleGenerator) -> Result<Vec<BoundReport>> {
    match gen.model() {
        Model::KawasakiComplete { potential, beta, .. } => {
            let norms = potential.norms();
            Ok(vec![kawasaki_bound(*beta, norms.sup, norms.weighted)])
        }
        other => Err(Error::ModelMismatch {
            expected: "kawasaki-complete",
            got: other.tag(),
        }),
    }
}

/// Parameters of a continuum model entering its closed-form bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContinuumModel {
    /// `particles` points exchanging positions in a region of `volume`
    Kawasaki { particles: usize, volume: f64 },
    /// birth-death with activity `z`
    Glauber { activity: f64 },
}

/// Bounds in terms of `eps = int (1 - e^{-beta phi})`.
///
/// Exchange dynamics: `1 - 3 (N - 1) eps / |Lambda|`, and the same value
/// written as `1 - eps1 - eps2` with `eps1 = (N - 1) eps / |Lambda|`,
/// `eps2 = 2 (N - 1) eps / |Lambda|`. Birth-death: `1 - z eps`.
pub fn continuum_bounds(model: &ContinuumModel, eps: f64) -> Vec<BoundReport> {
    match *model {
        ContinuumModel::Kawasaki { particles, volume } => {
            let pairs = particles.saturating_sub(1) as f64;
            let eps1 = pairs * eps / volume;
            let eps2 = 2.0 * pairs * eps / volume;
            let inputs = [("particles", particles as f64), ("volume", volume), ("eps", eps)];
            let mut split_inputs = inputs.to_vec();
            split_inputs.extend([("eps1", eps1), ("eps2", eps2)]);
            vec![
                BoundReport::new(
                    CONTINUUM_KAWASAKI,
                    1.0 - 3.0 * pairs * eps / volume,
                    &inputs,
                    "1 - 3 (N - 1) eps / |Lambda|",
                ),
                BoundReport::new(
                    CONTINUUM_KAWASAKI_SPLIT,
                    1.0 - eps1 - eps2,
                    &split_inputs,
                    "1 - eps1 - eps2, eps1 <= (N - 1) eps / |Lambda|, eps2 <= 2 (N - 1) eps / |Lambda|",
                ),
            ]
        }
        ContinuumModel::Glauber { activity } => vec![BoundReport::new(
            CONTINUUM_GLAUBER,
            1.0 - activity * eps,
            &[("activity", activity), ("eps", eps)],
            "1 - z eps",
        )],
    }
}

/// How far a grid model's own bound may fall below the continuum one:
/// the continuum bound with `eps` replaced by the grid value `eps_h`,
/// minus the continuum bound. Zero when the grid interacts less.
pub fn discretization_slack(model: &ContinuumModel, eps_h: f64, eps: f64) -> f64 {
    let excess = (eps_h - eps).max(0.0);
    match *model {
        ContinuumModel::Kawasaki { particles, volume } => 3.0 * particles.saturating_sub(1) as f64 * excess / volume,
        ContinuumModel::Glauber { activity } => activity * excess,
    }
}

/// All closed-form bounds that apply to the model of `gen`.
pub fn applicable_bounds(gen: &ReversibleGenerator) -> Result<Vec<BoundEntry>> {
    Ok(match gen.model() {
        Model::KawasakiComplete { .. } => kawasaki_bounds(gen)?.into_iter().map(BoundEntry::Applicable).collect(),
        Model::KawasakiNn { .. } => vec![BoundEntry::not_applicable(
            KAWASAKI,
            "nearest-neighbour dynamics has no size-independent bound",
        )],
        Model::ZeroRange { .. } => zero_range_bounds(gen)?,
        Model::Glauber { .. } | Model::ContinuumGlauber { .. } => {
            glauber_bounds(gen)?.into_iter().map(BoundEntry::Applicable).collect()
        }
        Model::ContinuumKawasaki { grid, potential, beta, .. } => {
            let particles = gen.config(0).total() as usize;
            let eps_h = discrete_eps(grid, potential, *beta);
            let model = ContinuumModel::Kawasaki {
                particles,
                volume: grid.volume(),
            };
            continuum_bounds(&model, eps_h)
                .into_iter()
                .map(|mut r| {
                    r.anchor.push_str(" (grid eps)");
                    BoundEntry::Applicable(r)
                })
                .collect()
        }
    })
}
