//! Interaction energies of the supported models.
//!
//! * [`LatticePotential`] – finite list of set potentials `Phi_A` on
//!   `{0,1}`-valued configurations (exclusion models).
//! * [`QuadraticEnergy`] – `H(eta) = sum_{x,y} J_{xy} eta_x eta_y` for
//!   zero-range type models.
//! * [`OccupationPairPotential`] – pair interactions depending on the
//!   occupation numbers of two sites (birth-death models).
//! * [`RadialPairPotential`] – nonnegative even pair potentials in `R^d`.

mod lattice;
mod occupation;
mod quadratic;
mod radial;

pub use lattice::{LatticePotential, PotentialTerm, SiteRef};
pub use occupation::{LatticeKernel, OccupationPairPotential, PairTable};
pub use quadratic::QuadraticEnergy;
pub use radial::{RadialPairPotential, RadialProfile};

/// Sup-norms of a set potential.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PotentialNorms {
    /// `sup_x sum_{A ∋ x} sup |Phi_A|`
    pub sup: f64,
    /// `sup_x sum_{A ∋ x} |A| sup |Phi_A|`
    pub weighted: f64,
}
