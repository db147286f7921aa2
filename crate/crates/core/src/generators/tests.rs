use super::*;
use crate::potentials::{LatticeKernel, LatticePotential, OccupationPairPotential, QuadraticEnergy, RadialPairPotential, RadialProfile};
use crate::statespace::SiteSet;

fn max_row_sum(gen: &ReversibleGenerator) -> f64 {
    (0..gen.len())
        .map(|i| gen.matrix().row(i).map(|(_, v)| v).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

fn max_adjoint(gen: &ReversibleGenerator) -> f64 {
    let n = gen.len();
    let mut acc = vec![0.0; n];
    for i in 0..n {
        for (j, v) in gen.matrix().row(i) {
            acc[j] += gen.nu()[i] * v;
        }
    }
    acc.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn assert_structural(gen: &ReversibleGenerator) {
    assert!(max_row_sum(gen) <= 1e-12, "row sums");
    assert!(max_adjoint(gen) <= 1e-10, "stationarity");
    assert!((gen.nu().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(gen.nu().iter().all(|&p| p > 0.0));
    for i in 0..gen.len() {
        for (j, v) in gen.matrix().row(i) {
            if j != i {
                assert!(v >= 0.0);
            }
        }
    }
}

fn nn_glauber(n: usize, kappa: f64) -> OccupationPairPotential {
    let kernel = LatticeKernel::Finite(vec![(vec![1], kappa), (vec![-1], kappa)]);
    OccupationPairPotential::from_lattice_kernel(&SiteSet::segment(n), &kernel).unwrap()
}

#[test]
fn kawasaki_beta_zero_rates_and_measure() {
    let s = SiteSet::complete(4);
    let gen = build_kawasaki_complete(&s, &LatticePotential::empty(4), 0.0, 2).unwrap();
    assert_eq!(gen.len(), 6);
    for i in 0..6 {
        for l in 0..gen.n_labels() {
            assert_eq!(gen.rate(i, l), 0.25);
        }
        assert!((gen.nu()[i] - 1.0 / 6.0).abs() < 1e-15);
    }
    assert_eq!(check_detailed_balance(&gen), 0.0);
    assert_structural(&gen);
}

#[test]
fn kawasaki_interacting_is_reversible() {
    let s = SiteSet::lattice_box(&[2, 3]);
    let pot = LatticePotential::nearest_neighbour_pairs(&s, 0.1).unwrap();
    let gen = build_kawasaki_complete(&s, &pot, 0.2, 3).unwrap();
    assert!(check_detailed_balance(&gen) <= 1e-12);
    assert_structural(&gen);
    for i in 0..gen.len() {
        for (j, v) in gen.matrix().row(i) {
            if j != i && v > 0.0 {
                assert_eq!(gen.config(i).total(), gen.config(j).total());
            }
        }
    }
}

#[test]
fn nn_segment_is_simple_exclusion() {
    let s = SiteSet::segment(4);
    let gen = build_kawasaki_nn(&s, &LatticePotential::empty(4), 0.0, 2).unwrap();
    assert_eq!(gen.n_labels(), 3);
    for i in 0..gen.len() {
        for l in 0..3 {
            assert_eq!(gen.rate(i, l), 1.0);
        }
    }
    assert_structural(&gen);
    let disconnected = SiteSet::new(1, vec![vec![0], vec![5]], Some(vec![vec![], vec![]])).unwrap();
    assert!(matches!(
        build_kawasaki_nn(&disconnected, &LatticePotential::empty(2), 0.0, 1),
        Err(Error::Reducible(_))
    ));
}

#[test]
fn zero_range_single_particle() {
    let s = SiteSet::complete(3);
    let gen = build_zero_range(&s, &[RateFunction::Constant], &QuadraticEnergy::zero(3), 1).unwrap();
    let a = gen.dense();
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { -2.0 / 3.0 } else { 1.0 / 3.0 };
            assert!((a[i * 3 + j] - expected).abs() < 1e-15);
        }
    }
}

#[test]
fn zero_range_product_measure() {
    let s = SiteSet::complete(3);
    let gen = build_zero_range(&s, &[RateFunction::Linear], &QuadraticEnergy::zero(3), 2).unwrap();
    assert!(check_detailed_balance(&gen) <= 1e-12);
    assert_structural(&gen);
    let ring = SiteSet::torus(4, 1);
    let q = QuadraticEnergy::from_adjacency(&ring, 0.5, 0.05).unwrap();
    let gen = build_zero_range(&ring, &[RateFunction::Constant], &q, 4).unwrap();
    assert!(check_detailed_balance(&gen) <= 1e-12);
    assert_structural(&gen);
    assert!(matches!(
        build_zero_range(&s, &[RateFunction::Table { values: vec![0.0, 0.5] }], &QuadraticEnergy::zero(3), 2),
        Err(Error::InvalidRates(_))
    ));
}

#[test]
fn glauber_single_site_rates() {
    let s = SiteSet::segment(1);
    let gen = build_glauber_discrete(&s, 1.0, &OccupationPairPotential::zero(1), 0.0, 8).unwrap();
    let zero = gen.space().index(&Configuration::new(vec![0])).unwrap();
    assert_eq!(gen.rate(zero, 0), 1.0);
    let top = gen.space().index(&Configuration::new(vec![8])).unwrap();
    assert_eq!(gen.rate(top, 0), 0.0);
    assert_eq!(gen.target(top, 0), None);
    assert_eq!(gen.rate(top, 1), 8.0);
    assert_structural(&gen);
}

#[test]
fn glauber_two_sites_reversible() {
    let s = SiteSet::segment(2);
    let gen = build_glauber_discrete(&s, 0.7, &nn_glauber(2, 0.8), 0.5, 5).unwrap();
    assert!(check_detailed_balance(&gen) <= 1e-12);
    assert_structural(&gen);
}

#[test]
fn continuum_kawasaki_beta_zero_is_free_zero_range() {
    let grid = CellGrid::new(vec![1.0], 0.25).unwrap();
    let phi = RadialPairPotential::new(1, RadialProfile::Indicator { height: 1.0, radius: 0.25 }).unwrap();
    let a = build_continuum_kawasaki_discretized(&grid, &phi, 0.0, 3).unwrap();
    let b = build_zero_range(&grid.site_set(), &[RateFunction::Linear], &QuadraticEnergy::zero(4), 3).unwrap();
    let (da, db) = (a.dense(), b.dense());
    assert!(da.iter().zip(&db).all(|(x, y)| (x - y).abs() < 1e-15));
    let interacting = build_continuum_kawasaki_discretized(&grid, &phi, 0.7, 3).unwrap();
    assert!(check_detailed_balance(&interacting) <= 1e-12);
    assert_structural(&interacting);
}

#[test]
fn continuum_glauber_matches_discrete() {
    let grid = CellGrid::new(vec![1.0], 0.25).unwrap();
    let phi = RadialPairPotential::new(1, RadialProfile::ExponentialDecay { amplitude: 1.0, length: 0.2 }).unwrap();
    let cont = build_continuum_glauber_discretized(&grid, &phi, 0.5, 2.0, 2).unwrap();
    let lattice = OccupationPairPotential::kernel(4, grid.sample(&phi), vec![0.0; 4]).unwrap();
    let disc = build_glauber_discrete(&grid.site_set(), 2.0 * 0.25, &lattice, 0.5, 2).unwrap();
    assert_eq!(cont.dense(), disc.dense());
    assert_eq!(cont.nu(), disc.nu());
    assert!(check_detailed_balance(&cont) <= 1e-12);
}

#[test]
fn corrupted_rate_is_detected() {
    let s = SiteSet::lattice_box(&[2, 2]);
    let pot = LatticePotential::nearest_neighbour_pairs(&s, 0.3).unwrap();
    let mut gen = build_kawasaki_complete(&s, &pot, 0.5, 2).unwrap();
    let l = (0..gen.n_labels()).find(|&l| gen.target(0, l) != Some(0)).unwrap();
    gen.corrupt_rate(0, l, 1.01).unwrap();
    let r = check_detailed_balance(&gen);
    assert!((r - 0.01 / 1.01).abs() < 1e-12, "residual {r}");
}

#[test]
fn generating_moves_cover_matrix() {
    let s = SiteSet::complete(3);
    let gen = build_zero_range(&s, &[RateFunction::Linear], &QuadraticEnergy::zero(3), 2).unwrap();
    for i in 0..gen.len() {
        for (j, v) in gen.matrix().row(i) {
            if j != i {
                let total: f64 = gen.generating_moves(i, j).iter().map(|m| m.1).sum();
                assert!((total - v).abs() < 1e-15);
            }
        }
    }
}
