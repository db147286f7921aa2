//! Exact-arithmetic laboratory for spectral gaps of reversible interacting
//! particle systems.
//!
//! The crate builds finite (or finitely truncated / discretized) versions of
//! conservative and non-conservative particle dynamics, assembles their
//! reversible generators together with the stationary Gibbs weights, and
//! then checks, on the exact finite state space:
//!
//! * the integral identities behind the second-difference (Bochner-type)
//!   argument and the invariance axioms of the comparison measure `R`,
//! * the exact spectral gap (dense or Lanczos) and the Bakry-Emery
//!   characterization of it,
//! * every closed-form lower bound on the gap, against the exact value.
//!
//! Modules:
//!
//! * [`statespace`] – configuration enumeration and elementary moves
//! * [`potentials`] – interaction energies and their discrete gradients
//! * [`generators`] – reversible generator assembly per model family
//! * [`bochner`] – `R`-kernels, axiom checks, certified comparison constants
//! * [`spectral`] – gaps, Dirichlet forms, Bakry-Emery checks
//! * [`bounds`] – closed-form gap lower bounds and continuum quadrature

pub mod bochner;
pub mod bounds;
pub mod error;
pub mod generators;
pub mod potentials;
pub mod random;
pub mod spectral;
pub mod statespace;

pub use error::{Error, Result};
pub use generators::{Model, MoveKind, MoveLabel, ReversibleGenerator};
pub use statespace::{Configuration, SiteSet, SpaceKind, StateSpace};
