use super::*;
use crate::generators::{
    build_glauber_discrete, build_kawasaki_complete, build_kawasaki_nn, build_zero_range, RateFunction,
};
use crate::potentials::{LatticeKernel, LatticePotential, OccupationPairPotential, QuadraticEnergy};
use crate::statespace::SiteSet;

fn dense() -> SolverSettings {
    SolverSettings {
        method: Method::Dense,
        ..SolverSettings::default()
    }
}

fn iterative() -> SolverSettings {
    SolverSettings {
        method: Method::Iterative,
        ..SolverSettings::default()
    }
}

fn interacting_kawasaki() -> ReversibleGenerator {
    let s = SiteSet::lattice_box(&[2, 3]);
    let pot = LatticePotential::nearest_neighbour_pairs(&s, 0.4).unwrap();
    build_kawasaki_complete(&s, &pot, 0.7, 3).unwrap()
}

fn glauber_pair() -> ReversibleGenerator {
    let kernel = LatticeKernel::Finite(vec![(vec![1], 0.6), (vec![-1], 0.6)]);
    let s = SiteSet::segment(2);
    let pot = OccupationPairPotential::from_lattice_kernel(&s, &kernel).unwrap();
    build_glauber_discrete(&s, 0.8, &pot, 0.5, 6).unwrap()
}

/// Eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence
/// bisection (independent of the library solvers).
fn sturm_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
            d = diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bound = diag.iter().map(|d| d.abs()).sum::<f64>() + 2.0 * off.iter().map(|o| o.abs()).sum::<f64>();
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

#[test]
fn two_state_chain() {
    let s = SiteSet::segment(1);
    let gen = build_glauber_discrete(&s, 0.3, &OccupationPairPotential::zero(1), 0.0, 1).unwrap();
    let r = spectral_gap(&gen, &dense()).unwrap();
    assert!((r.gap - 1.3).abs() < 1e-13);
    assert!(r.null_residual < 1e-14);
}

#[test]
fn kawasaki_beta_zero_symmetric_and_gap_one() {
    let gen = build_kawasaki_complete(&SiteSet::complete(6), &LatticePotential::empty(6), 0.0, 3).unwrap();
    let op = symmetrize(&gen).unwrap();
    assert_eq!(op.symmetry_defect(), 0.0);
    let r = spectral_gap(&gen, &dense()).unwrap();
    assert!((r.gap - 1.0).abs() < 1e-9);
    assert!(r.residual < 1e-8);
}

#[test]
fn zero_range_single_particle_gap() {
    let gen = build_zero_range(&SiteSet::complete(5), &[RateFunction::Constant], &QuadraticEnergy::zero(5), 1).unwrap();
    let r = spectral_gap(&gen, &dense()).unwrap();
    assert!((r.gap - 1.0).abs() < 1e-12);
}

#[test]
fn glauber_single_site_against_sturm_oracle() {
    // M/M/infinity chain truncated at 12: birth 1, death k
    let m = 12usize;
    let gen = build_glauber_discrete(&SiteSet::segment(1), 1.0, &OccupationPairPotential::zero(1), 0.0, m as u32).unwrap();
    let r = spectral_gap(&gen, &dense()).unwrap();
    // symmetrized tridiagonal: diag = birth + death, off = -sqrt(birth_k death_{k+1})
    let diag: Vec<f64> = (0..=m).map(|k| if k < m { 1.0 } else { 0.0 } + k as f64).collect();
    let off: Vec<f64> = (0..m).map(|k| -((k + 1) as f64).sqrt()).collect();
    let ev = sturm_eigenvalues(&diag, &off);
    assert!(ev[0].abs() < 1e-10);
    assert!((r.gap - ev[1]).abs() < 1e-10, "{} vs {}", r.gap, ev[1]);
    assert!((r.gap - GLAUBER_M12_GAP).abs() < 1e-12);
}

// frozen from the Sturm-bisection oracle above
const GLAUBER_M12_GAP: f64 = 1.000_000_008_369_510_2;

#[test]
fn dense_and_lanczos_agree() {
    for gen in [interacting_kawasaki(), glauber_pair()] {
        let d = spectral_gap(&gen, &dense()).unwrap();
        let it = spectral_gap(&gen, &iterative()).unwrap();
        assert!((d.gap - it.gap).abs() <= 1e-8 * d.gap, "{} vs {}", d.gap, it.gap);
        assert!(it.residual < 1e-8);
        assert!(d.residual < 1e-8);
    }
}

#[test]
fn refuses_non_reversible_input() {
    let mut gen = interacting_kawasaki();
    let l = (0..gen.n_labels()).find(|&l| gen.target(0, l) != Some(0)).unwrap();
    gen.corrupt_rate(0, l, 1.01).unwrap();
    assert!(matches!(symmetrize(&gen), Err(Error::DetailedBalance { .. })));
}

#[test]
fn dirichlet_forms_and_poincare() {
    for gen in [interacting_kawasaki(), glauber_pair()] {
        let one = vec![1.0; gen.len()];
        assert!(dirichlet_form(&gen, &one).abs() < 1e-14);
        assert!(variance(&gen, &one).abs() < 1e-14);
        let r = spectral_gap(&gen, &dense()).unwrap();
        let f = &r.gap_eigenvector;
        let ratio = dirichlet_form(&gen, f) / variance(&gen, f);
        assert!((ratio - r.gap).abs() < 1e-8);
        // Poincare is sharp at the eigenfunction
        assert!(dirichlet_form(&gen, f) < r.gap * (1.0 + 1e-3) * variance(&gen, f));
        for seed in 0..100 {
            let f = gaussian_function(gen.len(), seed);
            let e = dirichlet_form(&gen, &f);
            assert!((e - dirichlet_half_sum(&gen, &f)).abs() <= 1e-10 * e.max(1.0));
            assert!(e >= r.gap * variance(&gen, &f) * (1.0 - 1e-10));
        }
    }
}

#[test]
fn spectral_decomposition_of_generator_square() {
    let gen = glauber_pair();
    let (values, vectors, sqrt_nu) = full_spectrum(&gen).unwrap();
    for seed in 0..10 {
        let f = gaussian_function(gen.len(), 100 + seed);
        let g: Vec<f64> = f.iter().zip(&sqrt_nu).map(|(a, b)| a * b).collect();
        let mut acc = 0.0;
        for (k, lam) in values.iter().enumerate() {
            let c: f64 = vectors.column(k).iter().zip(&g).map(|(a, b)| a * b).sum();
            acc += lam * lam * c * c;
        }
        let direct = generator_square(&gen, &f);
        assert!((acc - direct).abs() <= 1e-8 * direct.max(1.0));
    }
}

#[test]
fn bakry_emery_holds() {
    for gen in [interacting_kawasaki(), glauber_pair()] {
        let r = spectral_gap(&gen, &dense()).unwrap();
        let be = bakry_emery_check(&gen, &r, 100, 7);
        assert!(be.max_violation <= 1e-8);
        assert!(be.eigenvector_defect <= 1e-8);
    }
}

#[test]
fn nn_segment_gap_matches_closed_form() {
    // a single particle on a segment of L sites: gap = 2(1 - cos(pi/L))
    for l in 3..8 {
        let gen = build_kawasaki_nn(&SiteSet::segment(l), &LatticePotential::empty(l), 0.0, 1).unwrap();
        let r = spectral_gap(&gen, &dense()).unwrap();
        let exact = 2.0 * (1.0 - (std::f64::consts::PI / l as f64).cos());
        assert!((r.gap - exact).abs() < 1e-12);
    }
}
