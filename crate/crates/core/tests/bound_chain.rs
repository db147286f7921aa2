use gaplab::bochner::{certified_k, default_kernel, m_matrix_bound};
use gaplab::bounds::{
    applicable_bounds, continuum_bounds, continuum_eps, discrete_eps, discretization_slack, kawasaki_bounds,
    zero_range_bounds, ContinuumModel, QuadratureSpec, ZR_POINTWISE, ZR_UNIFORM,
};
use gaplab::generators::{
    build_continuum_glauber_discretized, build_continuum_kawasaki_discretized, build_glauber_discrete,
    build_kawasaki_complete, build_zero_range, CellGrid, RateFunction,
};
use gaplab::potentials::{LatticePotential, OccupationPairPotential, QuadraticEnergy, RadialPairPotential, RadialProfile};
use gaplab::spectral::{spectral_gap, SolverSettings};
use gaplab::{ReversibleGenerator, SiteSet};
use proptest::prelude::*;

fn gap(gen: &ReversibleGenerator) -> f64 {
    spectral_gap(gen, &SolverSettings::default()).unwrap().gap
}

fn assert_bounds_below_gap(gen: &ReversibleGenerator, slack: f64) {
    let exact = gap(gen);
    for entry in applicable_bounds(gen).unwrap() {
        if let Some(r) = entry.report() {
            assert!(
                r.vacuous || r.value <= exact + slack,
                "{} = {} above gap {exact} on {}",
                r.name,
                r.value,
                gen.model().tag()
            );
        }
    }
}

#[test]
fn kawasaki_closed_form_below_certified_below_gap() {
    let sites = SiteSet::lattice_box(&[2, 3]);
    let pot = LatticePotential::nearest_neighbour_pairs(&sites, 0.1).unwrap();
    for beta in [0.0, 0.01, 0.05, 0.1] {
        let gen = build_kawasaki_complete(&sites, &pot, beta, 3).unwrap();
        let closed = kawasaki_bounds(&gen).unwrap()[0].value;
        let cert = certified_k(&gen, &default_kernel(&gen)).unwrap();
        assert!(closed <= cert.bound() + 1e-10, "beta {beta}: {closed} > {}", cert.bound());
        assert!(cert.bound() <= cert.exact_gap + 1e-8);
        assert!((cert.exact_gap - gap(&gen)).abs() < 1e-8);
        if beta == 0.0 {
            assert!((closed - 1.0).abs() < 1e-15 && (cert.bound() - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn every_family_respects_its_bounds() {
    let sites = SiteSet::complete(5);
    let pot = LatticePotential::nearest_neighbour_pairs(&SiteSet::segment(5), 0.2).unwrap();
    assert_bounds_below_gap(&build_kawasaki_complete(&sites, &pot, 0.05, 2).unwrap(), 1e-8);

    let ring = SiteSet::torus(3, 1);
    let energy = QuadraticEnergy::from_adjacency(&ring, 0.8, 0.03).unwrap();
    assert_bounds_below_gap(&build_zero_range(&ring, &[RateFunction::Constant], &energy, 5).unwrap(), 1e-8);

    let k = OccupationPairPotential::kernel(2, vec![0.0, 0.2, 0.2, 0.0], vec![0.0; 2]).unwrap();
    assert_bounds_below_gap(&build_glauber_discrete(&SiteSet::complete(2), 0.5, &k, 0.3, 14).unwrap(), 1e-6);

    let phi = RadialPairPotential::new(1, RadialProfile::Indicator { height: 1.0, radius: 0.3 }).unwrap();
    let grid = CellGrid::new(vec![1.0], 0.25).unwrap();
    assert_bounds_below_gap(&build_continuum_kawasaki_discretized(&grid, &phi, 0.1, 2).unwrap(), 1e-8);
    assert_bounds_below_gap(&build_continuum_glauber_discretized(&grid, &phi, 0.1, 0.5, 6).unwrap(), 1e-4);
}

#[test]
fn continuum_glauber_grid_gap_against_continuum_bound() {
    let phi = RadialPairPotential::new(1, RadialProfile::Indicator { height: 1.0, radius: 0.25 }).unwrap();
    let (beta, z) = (0.1, 0.5);
    let eps = continuum_eps(&QuadratureSpec::new(&phi, 1e-12), beta).unwrap().value;
    let model = ContinuumModel::Glauber { activity: z };
    let bound = continuum_bounds(&model, eps)[0].value;
    for h in [0.25, 0.125] {
        let grid = CellGrid::new(vec![1.0], h).unwrap();
        let gen = build_continuum_glauber_discretized(&grid, &phi, beta, z, 2).unwrap();
        let slack = discretization_slack(&model, discrete_eps(&grid, &phi, beta), eps);
        assert!(gap(&gen) >= bound - slack - 1e-4, "h = {h}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_range_chain_is_ordered(
        a in 0.05f64..1.0,
        b in 0.0f64..0.2,
        n in 3usize..5,
        particles in 2usize..5,
        alpha in 0.0f64..0.5,
    ) {
        let ring = SiteSet::torus(n, 1);
        let energy = QuadraticEnergy::from_adjacency(&ring, a, b).unwrap();
        let rates = if alpha == 0.0 { RateFunction::Linear } else { RateFunction::Exponential { alpha } };
        let gen = build_zero_range(&ring, &[rates], &energy, particles).unwrap();
        let bounds = zero_range_bounds(&gen).unwrap();
        let get = |name: &str| bounds.iter().find(|e| e.name() == name).and_then(|e| e.report()).map(|r| r.value);
        let pointwise = get(ZR_POINTWISE).unwrap();
        let m = m_matrix_bound(&gen).unwrap();
        let exact = gap(&gen);
        if let Some(uniform) = get(ZR_UNIFORM) {
            if uniform > 0.0 {
                prop_assert!(uniform <= pointwise + 1e-12);
            }
        }
        prop_assert!(pointwise <= m.cobound_value + 1e-12);
        prop_assert!(m.cobound_value <= m.teom_delta + 1e-8);
        prop_assert!(m.teom_delta <= exact + 1e-8);
    }

    #[test]
    fn kawasaki_bound_never_exceeds_gap(beta in 0.0f64..0.3, coupling in -0.3f64..0.3, particles in 1usize..4) {
        let sites = SiteSet::segment(5);
        let pot = LatticePotential::nearest_neighbour_pairs(&sites, coupling).unwrap();
        let gen = build_kawasaki_complete(&SiteSet::complete(5), &pot, beta, particles).unwrap();
        let r = &kawasaki_bounds(&gen).unwrap()[0];
        prop_assert!(r.vacuous || r.value <= gap(&gen) + 1e-8);
    }
}
