//! The comparison measure `R(eta, gamma, delta) = nu c c r` of the
//! second-difference argument, the checks of its invariance axioms and the
//! gap constants it certifies.
//!
//! `R` is never stored: every triple weight is evaluated on demand from the
//! generator tables and the density `r` of an [`RKernel`].

mod axioms;
mod certify;
mod zero_range;

use crate::generators::{zero_range_rate, Direction, Model, MoveKind, RateFunction, ReversibleGenerator};
use crate::potentials::QuadraticEnergy;
use crate::{Error, Result};

pub use axioms::{
    check_bochner_identity, check_corollary1, kawasaki_overlap_identity, verify_axioms, AxiomReport,
    IdentityReport, TRIPLE_CAP,
};
pub use certify::{certified_k, CertifiedK, CERTIFIED_DENSE_CAP};
pub use zero_range::{m_matrix_bound, medie_identity, transport_identity, MMatrixBound};

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    /// `(1 + c(eta^gamma, delta) / c(eta, delta)) / 2` on disjoint exchanges
    Kawasaki,
    /// `c_y(eta^{x-}) / c_y(eta)`, independent of the target sites
    ZeroRange {
        rates: Vec<RateFunction>,
        energy: QuadraticEnergy,
    },
    /// `exp(-beta phi(z, v))`, times `(eta_u - 1) / eta_u` when both moves
    /// start from the same cell
    ContinuumKawasaki { beta: f64, cell_potential: Vec<f64> },
    /// the generic recipe driven by the `J` / `J^{-1}` membership of labels
    DirectionTagged,
}

/// Density `r(eta, gamma, delta)` of `R` with respect to
/// `nu(d eta) c(eta, d gamma) c(eta, d delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RKernel {
    rule: Rule,
    model_tag: &'static str,
    skew: Option<Skew>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Skew {
    factor: f64,
    state: Option<usize>,
}

fn mismatch(expected: &'static str, gen: &ReversibleGenerator) -> Error {
    Error::ModelMismatch {
        expected,
        got: gen.model().tag(),
    }
}

/// Kernel for exchange dynamics (complete graph or nearest neighbour).
pub fn r_kawasaki(gen: &ReversibleGenerator) -> Result<RKernel> {
    match gen.model() {
        Model::KawasakiComplete { .. } | Model::KawasakiNn { .. } => Ok(RKernel::new(Rule::Kawasaki, gen)),
        _ => Err(mismatch("kawasaki-complete", gen)),
    }
}

pub fn r_zero_range(gen: &ReversibleGenerator) -> Result<RKernel> {
    match gen.model() {
        Model::ZeroRange { rates, energy } => Ok(RKernel::new(
            Rule::ZeroRange {
                rates: rates.clone(),
                energy: energy.clone(),
            },
            gen,
        )),
        _ => Err(mismatch("zero-range", gen)),
    }
}

/// Birth-death kernel: births form `J`, deaths `J^{-1}`.
pub fn r_glauber(gen: &ReversibleGenerator) -> Result<RKernel> {
    match gen.model() {
        Model::Glauber { .. } | Model::ContinuumGlauber { .. } => Ok(RKernel::new(Rule::DirectionTagged, gen)),
        _ => Err(mismatch("glauber", gen)),
    }
}

pub fn r_continuum_kawasaki(gen: &ReversibleGenerator) -> Result<RKernel> {
    match gen.model() {
        Model::ContinuumKawasaki {
            beta, cell_potential, ..
        } => Ok(RKernel::new(
            Rule::ContinuumKawasaki {
                beta: *beta,
                cell_potential: cell_potential.clone(),
            },
            gen,
        )),
        _ => Err(mismatch("continuum-kawasaki", gen)),
    }
}

/// The generic kernel built from the direction tags of the labels. Works
/// for any generator; (A3) then depends on the rates.
pub fn r_direction_tagged(gen: &ReversibleGenerator) -> RKernel {
    RKernel::new(Rule::DirectionTagged, gen)
}

/// The kernel shipped with each model family.
pub fn default_kernel(gen: &ReversibleGenerator) -> RKernel {
    match gen.model() {
        Model::KawasakiComplete { .. } | Model::KawasakiNn { .. } => r_kawasaki(gen),
        Model::ZeroRange { .. } => r_zero_range(gen),
        Model::Glauber { .. } | Model::ContinuumGlauber { .. } => r_glauber(gen),
        Model::ContinuumKawasaki { .. } => r_continuum_kawasaki(gen),
    }
    .expect("dispatch matches the model")
}

/// `gamma(delta(eta)) = delta(gamma(eta))` at state `i`, both sides defined.
pub fn commutes(gen: &ReversibleGenerator, i: usize, l: usize, m: usize) -> bool {
    match (gen.target(i, l), gen.target(i, m)) {
        (Some(a), Some(b)) => match (gen.target(a, m), gen.target(b, l)) {
            (Some(p), Some(q)) => p == q,
            _ => false,
        },
        _ => false,
    }
}

/// `c(gamma(eta), delta) / c(eta, delta)`, zero where the denominator is.
fn rate_ratio(gen: &ReversibleGenerator, i: usize, l: usize, m: usize) -> f64 {
    let c = gen.rate(i, m);
    match gen.target(i, l) {
        Some(t) if c > 0.0 => gen.rate(t, m) / c,
        _ => 0.0,
    }
}

impl RKernel {
    fn new(rule: Rule, gen: &ReversibleGenerator) -> Self {
        Self {
            rule,
            model_tag: gen.model().tag(),
            skew: None,
        }
    }

    pub fn model_tag(&self) -> &'static str {
        self.model_tag
    }

    /// A copy whose density is multiplied by `factor` whenever the first
    /// label index is below the second. Breaks (A3) on purpose.
    pub fn skewed(&self, factor: f64) -> Self {
        Self {
            skew: Some(Skew { factor, state: None }),
            ..self.clone()
        }
    }

    /// As [`RKernel::skewed`], restricted to one state.
    pub fn skewed_at(&self, state: usize, factor: f64) -> Self {
        Self {
            skew: Some(Skew {
                factor,
                state: Some(state),
            }),
            ..self.clone()
        }
    }

    /// `r(eta_i, gamma_l, delta_m)`
    pub fn r(&self, gen: &ReversibleGenerator, i: usize, l: usize, m: usize) -> f64 {
        let value = self.raw(gen, i, l, m);
        match self.skew {
            Some(s) if l < m && s.state.is_none_or(|j| j == i) => value * s.factor,
            _ => value,
        }
    }

    fn raw(&self, gen: &ReversibleGenerator, i: usize, l: usize, m: usize) -> f64 {
        let labels = gen.labels();
        let (a, b) = (&labels[l], &labels[m]);
        match &self.rule {
            Rule::Kawasaki => {
                if a.x == b.x || a.x == b.z || a.z == b.x || a.z == b.z {
                    0.0
                } else if gen.rate(i, m) > 0.0 {
                    0.5 * (1.0 + rate_ratio(gen, i, l, m))
                } else {
                    0.0
                }
            }
            Rule::ZeroRange { rates, energy } => {
                let c = gen.rate(i, m);
                if c <= 0.0 {
                    return 0.0;
                }
                let removed = gen.config(i).apply_death(a.x);
                zero_range_rate(rates, energy, &removed, b.x) / c
            }
            Rule::ContinuumKawasaki { beta, cell_potential } => {
                let eta = gen.config(i);
                let (ku, kw) = (eta.get(a.x), eta.get(b.x));
                if ku == 0 || kw == 0 {
                    return 0.0;
                }
                let same = if a.x == b.x { (kw - 1) as f64 / kw as f64 } else { 1.0 };
                same * (-beta * cell_potential[a.z * gen.model().sites() + b.z]).exp()
            }
            Rule::DirectionTagged => {
                if !commutes(gen, i, l, m) {
                    return 0.0;
                }
                match (a.direction, b.direction) {
                    (Direction::Both, Direction::Both) => {
                        if gen.rate(i, m) > 0.0 {
                            0.5 * (1.0 + rate_ratio(gen, i, l, m))
                        } else {
                            0.0
                        }
                    }
                    (Direction::Forward, Direction::Forward) | (Direction::Backward, Direction::Backward) => {
                        if gen.rate(i, l) > 0.0 {
                            rate_ratio(gen, i, l, m)
                        } else {
                            0.0
                        }
                    }
                    (Direction::Forward, Direction::Backward) | (Direction::Backward, Direction::Forward) => 1.0,
                    _ => 0.0,
                }
            }
        }
    }

    /// Triple weight `nu(eta_i) c(eta_i, gamma_l) c(eta_i, delta_m) r`.
    pub fn weight(&self, gen: &ReversibleGenerator, i: usize, l: usize, m: usize) -> f64 {
        let c = gen.rate(i, l) * gen.rate(i, m);
        if c == 0.0 {
            return 0.0;
        }
        gen.nu()[i] * c * self.r(gen, i, l, m)
    }
}

/// Whether a label pair is an exchange sharing a site (used by the
/// complete-graph identity).
pub(crate) fn exchanges_overlap(gen: &ReversibleGenerator, l: usize, m: usize) -> bool {
    let (a, b) = (&gen.labels()[l], &gen.labels()[m]);
    a.kind == MoveKind::Exchange && (a.x == b.x || a.x == b.z || a.z == b.x || a.z == b.z)
}
