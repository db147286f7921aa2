use super::model::{CellGrid, Model, RateFunction};
use super::ReversibleGenerator;
use crate::potentials::{LatticePotential, OccupationPairPotential, QuadraticEnergy, RadialPairPotential};
use crate::statespace::{SiteSet, SpaceKind, StateSpace};
use crate::{Error, Result};

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("inverse temperature {beta} must be finite and >= 0")));
    }
    Ok(())
}

fn check_sites(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidArgument(format!(
            "potential is defined on {got} sites, site set has {expected}"
        )));
    }
    Ok(())
}

/// Exchange dynamics on the complete graph with rates
/// `(1/n) exp(-beta grad_xz H / 2)`.
pub fn build_kawasaki_complete(
    site_set: &SiteSet,
    potential: &LatticePotential,
    beta: f64,
    particles: usize,
) -> Result<ReversibleGenerator> {
    check_beta(beta)?;
    check_sites(site_set.len(), potential.sites())?;
    let space = StateSpace::enumerate(SpaceKind::FixedNBinary {
        sites: site_set.len(),
        particles,
    })?;
    ReversibleGenerator::assemble(
        space,
        Model::KawasakiComplete {
            sites: site_set.len(),
            potential: potential.clone(),
            beta,
        },
    )
}

/// Exchange dynamics along the edges of the site set with rates
/// `exp(-beta grad_xz H / 2)`.
pub fn build_kawasaki_nn(
    site_set: &SiteSet,
    potential: &LatticePotential,
    beta: f64,
    particles: usize,
) -> Result<ReversibleGenerator> {
    check_beta(beta)?;
    check_sites(site_set.len(), potential.sites())?;
    if site_set.adjacency().is_none() {
        return Err(Error::InvalidArgument("nearest-neighbour dynamics needs an adjacency relation".into()));
    }
    if !site_set.is_connected() {
        return Err(Error::Reducible("adjacency graph is disconnected".into()));
    }
    let space = StateSpace::enumerate(SpaceKind::FixedNBinary {
        sites: site_set.len(),
        particles,
    })?;
    ReversibleGenerator::assemble(
        space,
        Model::KawasakiNn {
            sites: site_set.len(),
            edges: site_set.edges(),
            potential: potential.clone(),
            beta,
        },
    )
}

/// Random walks on the complete graph with departure rates
/// `c_x = (1/n) g_x(eta_x) exp(-grad_x^- H)`. A single rate function is
/// applied to every site.
pub fn build_zero_range(
    site_set: &SiteSet,
    rates: &[RateFunction],
    energy: &QuadraticEnergy,
    particles: usize,
) -> Result<ReversibleGenerator> {
    let n = site_set.len();
    check_sites(n, energy.sites())?;
    let rates: Vec<RateFunction> = match rates.len() {
        1 => vec![rates[0].clone(); n],
        k if k == n => rates.to_vec(),
        k => {
            return Err(Error::InvalidRates(format!("{k} rate functions for {n} sites")));
        }
    };
    for g in &rates {
        g.check(particles as u32)?;
    }
    let space = StateSpace::enumerate(SpaceKind::FixedNComposition { sites: n, particles })?;
    ReversibleGenerator::assemble(
        space,
        Model::ZeroRange {
            rates,
            energy: energy.clone(),
        },
    )
}

/// Birth-death dynamics on `{0..cap}^sites` reversible for the
/// Poisson(`lambda`) field tilted by `exp(-beta H)`. Births at the cap are
/// suppressed.
pub fn build_glauber_discrete(
    site_set: &SiteSet,
    lambda: f64,
    potential: &OccupationPairPotential,
    beta: f64,
    cap: u32,
) -> Result<ReversibleGenerator> {
    check_beta(beta)?;
    check_sites(site_set.len(), potential.sites())?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("activity {lambda} must be positive")));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("occupation cap must be at least 1".into()));
    }
    let space = StateSpace::enumerate(SpaceKind::TruncatedProduct {
        sites: site_set.len(),
        cap,
    })?;
    ReversibleGenerator::assemble(
        space,
        Model::Glauber {
            lambda,
            potential: potential.clone(),
            beta,
            cap,
        },
    )
}

/// Continuum exchange dynamics with particles restricted to cell centres:
/// one particle moves from cell `u` to cell `v` at rate
/// `eta_u (1/n) exp(-beta sum_{other particles} phi_h(., v))`.
pub fn build_continuum_kawasaki_discretized(
    grid: &CellGrid,
    potential: &RadialPairPotential,
    beta: f64,
    particles: usize,
) -> Result<ReversibleGenerator> {
    check_beta(beta)?;
    if potential.dimension() != grid.dimension() {
        return Err(Error::InvalidArgument("potential and box dimensions differ".into()));
    }
    let space = StateSpace::enumerate(SpaceKind::FixedNComposition {
        sites: grid.cells(),
        particles,
    })?;
    ReversibleGenerator::assemble(
        space,
        Model::ContinuumKawasaki {
            grid: grid.clone(),
            potential: potential.clone(),
            beta,
            cell_potential: grid.sample(potential),
        },
    )
}

/// Continuum birth-death dynamics on cell centres: the discrete Glauber
/// dynamics with `lambda = z h^d` and kernel `phi_h`, same-cell pairs
/// included.
pub fn build_continuum_glauber_discretized(
    grid: &CellGrid,
    potential: &RadialPairPotential,
    beta: f64,
    activity: f64,
    cap: u32,
) -> Result<ReversibleGenerator> {
    check_beta(beta)?;
    if potential.dimension() != grid.dimension() {
        return Err(Error::InvalidArgument("potential and box dimensions differ".into()));
    }
    if !(activity.is_finite() && activity > 0.0) {
        return Err(Error::InvalidArgument(format!("activity {activity} must be positive")));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("occupation cap must be at least 1".into()));
    }
    let n = grid.cells();
    let lattice = OccupationPairPotential::kernel(n, grid.sample(potential), vec![0.0; n])?;
    let space = StateSpace::enumerate(SpaceKind::TruncatedProduct { sites: n, cap })?;
    ReversibleGenerator::assemble(
        space,
        Model::ContinuumGlauber {
            grid: grid.clone(),
            potential: potential.clone(),
            beta,
            activity,
            cap,
            lattice,
        },
    )
}
