//! Turning a resolved point config into a generator.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};
use gaplab::generators::{
    build_continuum_glauber_discretized, build_continuum_kawasaki_discretized, build_glauber_discrete,
    build_kawasaki_complete, build_kawasaki_nn, build_zero_range, CellGrid, RateFunction,
};
use gaplab::potentials::{
    LatticeKernel, LatticePotential, OccupationPairPotential, PairTable, QuadraticEnergy, RadialPairPotential,
};
use gaplab::{ReversibleGenerator, SiteSet, SpaceKind};
use serde::{Deserialize, Serialize};

use crate::config::{Geometry, ModelKind, PointConfig, PotentialSpec};

/// What was built, in a form that survives serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub kind: String,
    pub sites: usize,
    pub states: usize,
    pub potential: String,
    pub parameters: BTreeMap<String, f64>,
}

pub fn site_set(geometry: &Geometry) -> Result<SiteSet> {
    Ok(match geometry {
        Geometry::Complete { sites } => SiteSet::complete(*sites),
        Geometry::Segment { length } => SiteSet::segment(*length),
        Geometry::Box { lengths } => SiteSet::lattice_box(lengths),
        Geometry::Torus { length, dimension } => SiteSet::torus(*length, *dimension),
        Geometry::Cells { .. } => cell_grid(geometry)?.site_set(),
    })
}

pub fn cell_grid(geometry: &Geometry) -> Result<CellGrid> {
    match geometry {
        Geometry::Cells { lengths, step } => Ok(CellGrid::new(lengths.clone(), *step)?),
        _ => bail!("model.geometry: not a cell geometry"),
    }
}

fn sites_of(p: &PointConfig) -> Result<usize> {
    Ok(match &p.model.geometry {
        g @ Geometry::Cells { .. } => cell_grid(g)?.cells(),
        g => site_set(g)?.len(),
    })
}

pub fn particles(p: &PointConfig) -> Result<usize> {
    let m = &p.model;
    match (m.particles, m.particle_fraction) {
        (Some(n), _) => Ok(n),
        (None, Some(f)) => Ok((f * sites_of(p)? as f64).floor() as usize),
        (None, None) => bail!("model.particles: not set"),
    }
}

fn cap(p: &PointConfig) -> Result<u32> {
    p.model.cap.ok_or_else(|| anyhow!("model.cap: not set"))
}

fn space_kind(p: &PointConfig) -> Result<SpaceKind> {
    let sites = sites_of(p)?;
    Ok(match p.model.kind {
        ModelKind::KawasakiComplete | ModelKind::KawasakiNn => SpaceKind::FixedNBinary {
            sites,
            particles: particles(p)?,
        },
        ModelKind::ZeroRange | ModelKind::ContinuumKawasaki => SpaceKind::FixedNComposition {
            sites,
            particles: particles(p)?,
        },
        ModelKind::Glauber | ModelKind::ContinuumGlauber => SpaceKind::TruncatedProduct { sites, cap: cap(p)? },
    })
}

/// Size of the state space, without building it.
pub fn estimate_states(p: &PointConfig) -> Result<usize> {
    space_kind(p)?
        .size()
        .ok_or_else(|| anyhow!("state space of {:?} overflows", p.model.kind))
}

fn lattice_potential(p: &PointConfig, sites: &SiteSet) -> Result<LatticePotential> {
    Ok(match &p.potential {
        PotentialSpec::Zero => LatticePotential::empty(sites.len()),
        PotentialSpec::NearestNeighbour { coupling, geometry } => match geometry {
            Some(g) => LatticePotential::nearest_neighbour_pairs(&site_set(g)?, *coupling)?,
            None => LatticePotential::nearest_neighbour_pairs(sites, *coupling)?,
        },
        PotentialSpec::Terms { terms } => LatticePotential::new(
            sites,
            terms.iter().map(|t| (t.points.clone(), t.table.clone())).collect(),
        )?,
        other => bail!("model.potential: {} is not a lattice potential", other.name()),
    })
}

fn quadratic_energy(p: &PointConfig, sites: &SiteSet) -> Result<QuadraticEnergy> {
    Ok(match &p.potential {
        PotentialSpec::Zero => QuadraticEnergy::zero(sites.len()),
        PotentialSpec::Quadratic { diagonal, off_diagonal } => {
            QuadraticEnergy::from_adjacency(sites, *diagonal, *off_diagonal)?
        }
        PotentialSpec::QuadraticMatrix { j } => QuadraticEnergy::new(sites.len(), j.clone())?,
        other => bail!("model.potential: {} is not a quadratic energy", other.name()),
    })
}

fn occupation_potential(p: &PointConfig, sites: &SiteSet) -> Result<OccupationPairPotential> {
    let n = sites.len();
    Ok(match &p.potential {
        PotentialSpec::Zero => OccupationPairPotential::zero(n),
        PotentialSpec::OccupationKernel { coupling, field } => {
            OccupationPairPotential::kernel(n, coupling.clone(), field.clone().unwrap_or_else(|| vec![0.0; n]))?
        }
        PotentialSpec::LatticeKernel { entries } => OccupationPairPotential::from_lattice_kernel(
            sites,
            &LatticeKernel::Finite(entries.iter().map(|e| (e.displacement.clone(), e.value)).collect()),
        )?,
        PotentialSpec::PowerLawKernel { amplitude, exponent } => OccupationPairPotential::from_lattice_kernel(
            sites,
            &LatticeKernel::PowerLaw {
                dimension: sites.dimension(),
                amplitude: *amplitude,
                exponent: *exponent,
            },
        )?,
        PotentialSpec::PairTable { cap, pairs } => OccupationPairPotential::Table(PairTable::new(
            n,
            *cap,
            pairs.iter().map(|e| ((e.sites[0], e.sites[1]), e.table.clone())).collect(),
        )?),
        other => bail!("model.potential: {} is not an occupation potential", other.name()),
    })
}

pub fn radial_potential(p: &PointConfig) -> Result<RadialPairPotential> {
    let grid = cell_grid(&p.model.geometry)?;
    match &p.potential {
        PotentialSpec::Radial { shape } => Ok(RadialPairPotential::new(grid.dimension(), shape.clone())?),
        other => bail!("model.potential: {} is not a radial potential", other.name()),
    }
}

pub fn build(p: &PointConfig) -> Result<ReversibleGenerator> {
    let m = &p.model;
    let mut gen = match m.kind {
        ModelKind::KawasakiComplete => {
            let sites = site_set(&m.geometry)?;
            build_kawasaki_complete(&sites, &lattice_potential(p, &sites)?, m.beta, particles(p)?)?
        }
        ModelKind::KawasakiNn => {
            let sites = site_set(&m.geometry)?;
            build_kawasaki_nn(&sites, &lattice_potential(p, &sites)?, m.beta, particles(p)?)?
        }
        ModelKind::ZeroRange => {
            let sites = site_set(&m.geometry)?;
            let rates = m.rates.clone().unwrap_or(RateFunction::Linear);
            build_zero_range(&sites, &[rates], &quadratic_energy(p, &sites)?, particles(p)?)?
        }
        ModelKind::Glauber => {
            let sites = site_set(&m.geometry)?;
            let lambda = m.lambda.ok_or_else(|| anyhow!("model.lambda: not set"))?;
            build_glauber_discrete(&sites, lambda, &occupation_potential(p, &sites)?, m.beta, cap(p)?)?
        }
        ModelKind::ContinuumKawasaki => build_continuum_kawasaki_discretized(
            &cell_grid(&m.geometry)?,
            &radial_potential(p)?,
            m.beta,
            particles(p)?,
        )?,
        ModelKind::ContinuumGlauber => {
            let activity = m.activity.ok_or_else(|| anyhow!("model.activity: not set"))?;
            build_continuum_glauber_discretized(
                &cell_grid(&m.geometry)?,
                &radial_potential(p)?,
                m.beta,
                activity,
                cap(p)?,
            )?
        }
    };
    if let Some(f) = &m.fault {
        gen.corrupt_rate(f.state, f.label, f.factor)?;
    }
    Ok(gen)
}

pub fn describe(p: &PointConfig, gen: &ReversibleGenerator) -> Result<ModelDescriptor> {
    let m = &p.model;
    let mut parameters = BTreeMap::new();
    parameters.insert("beta".to_string(), m.beta);
    if m.kind.conserves_particles() {
        parameters.insert("particles".to_string(), particles(p)? as f64);
    }
    if let Some(l) = m.lambda {
        parameters.insert("lambda".to_string(), l);
    }
    if let Some(z) = m.activity {
        parameters.insert("activity".to_string(), z);
    }
    if let Some(c) = m.cap {
        parameters.insert("cap".to_string(), f64::from(c));
    }
    if let Geometry::Cells { step, .. } = &m.geometry {
        let grid = cell_grid(&m.geometry)?;
        parameters.insert("step".to_string(), *step);
        parameters.insert("volume".to_string(), grid.volume());
    }
    Ok(ModelDescriptor {
        kind: gen.model().tag().to_string(),
        sites: gen.model().sites(),
        states: gen.len(),
        potential: p.potential.name().to_string(),
        parameters,
    })
}
