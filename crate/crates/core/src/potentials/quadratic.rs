use serde::{Deserialize, Serialize};

use crate::statespace::{Configuration, SiteSet};
use crate::{Error, Result};

/// `H(eta) = sum_{x,y} J_{xy} eta_x eta_y` with a symmetric coupling matrix
/// (the double sum runs over ordered pairs, diagonal included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticEnergy {
    n: usize,
    j: Vec<f64>,
}

impl QuadraticEnergy {
    pub fn zero(n: usize) -> Self {
        Self { n, j: vec![0.0; n * n] }
    }

    /// Row-major `n x n` coupling matrix; must be symmetric.
    pub fn new(n: usize, j: Vec<f64>) -> Result<Self> {
        if j.len() != n * n {
            return Err(Error::InvalidPotential(format!("coupling matrix needs {} entries", n * n)));
        }
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite coupling".into()));
        }
        for x in 0..n {
            for y in 0..x {
                if j[x * n + y] != j[y * n + x] {
                    return Err(Error::InvalidPotential(format!("J is not symmetric at ({x},{y})")));
                }
            }
        }
        Ok(Self { n, j })
    }

    /// `J_xx = diagonal`, `J_xy = off_diagonal` for adjacent `x ~ y`, zero
    /// otherwise.
    pub fn from_adjacency(site_set: &SiteSet, diagonal: f64, off_diagonal: f64) -> Result<Self> {
        let n = site_set.len();
        let mut j = vec![0.0; n * n];
        for x in 0..n {
            j[x * n + x] = diagonal;
        }
        for (x, y) in site_set.edges() {
            j[x * n + y] = off_diagonal;
            j[y * n + x] = off_diagonal;
        }
        Self::new(n, j)
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, x: usize, y: usize) -> f64 {
        self.j[x * self.n + y]
    }

    pub fn is_zero(&self) -> bool {
        self.j.iter().all(|&v| v == 0.0)
    }

    pub fn energy(&self, eta: &Configuration) -> f64 {
        let e = eta.occupations();
        let mut acc = 0.0;
        for x in 0..self.n {
            if e[x] == 0 {
                continue;
            }
            let row = &self.j[x * self.n..(x + 1) * self.n];
            let s: f64 = row.iter().zip(e).map(|(&jv, &k)| jv * k as f64).sum();
            acc += e[x] as f64 * s;
        }
        acc
    }

    /// `H(eta + e_x) - H(eta) = 2 sum_{z != x} J_xz eta_z + J_xx (2 eta_x + 1)`.
    pub fn grad_birth(&self, eta: &Configuration, x: usize) -> f64 {
        let k = eta.get(x) as f64;
        2.0 * self.off_diagonal_field(eta, x) + self.coupling(x, x) * (2.0 * k + 1.0)
    }

    /// `H(eta^{x-}) - H(eta)`; zero when `eta_x = 0`.
    pub fn grad_death(&self, eta: &Configuration, x: usize) -> f64 {
        let k = eta.get(x);
        if k == 0 {
            return 0.0;
        }
        -2.0 * self.off_diagonal_field(eta, x) - self.coupling(x, x) * (2.0 * k as f64 - 1.0)
    }

    /// `grad_death(eta^{x-}, y) - grad_death(eta, y)`.
    pub fn grad2_death(&self, eta: &Configuration, x: usize, y: usize) -> f64 {
        let lowered = eta.apply_death(x);
        self.grad_death(&lowered, y) - self.grad_death(eta, y)
    }

    fn off_diagonal_field(&self, eta: &Configuration, x: usize) -> f64 {
        let row = &self.j[x * self.n..(x + 1) * self.n];
        row.iter()
            .zip(eta.occupations())
            .enumerate()
            .filter(|(z, _)| *z != x)
            .map(|(_, (&jv, &k))| jv * k as f64)
            .sum()
    }

    /// `(a, b, K)`: smallest diagonal entry, largest off-diagonal entry, and
    /// the largest number of nonzero off-diagonal entries in a row.
    pub fn shape(&self) -> (f64, f64, usize) {
        let mut a = f64::INFINITY;
        let mut b = 0.0f64;
        let mut k = 0usize;
        for x in 0..self.n {
            a = a.min(self.coupling(x, x));
            let mut count = 0;
            for y in 0..self.n {
                if y != x {
                    let v = self.coupling(x, y);
                    b = b.max(v);
                    if v != 0.0 {
                        count += 1;
                    }
                }
            }
            k = k.max(count);
        }
        if self.n == 0 {
            a = 0.0;
        }
        (a, b, k)
    }

    pub fn has_nonnegative_couplings(&self) -> bool {
        self.j.iter().all(|&v| v >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::{SpaceKind, StateSpace};

    fn random_j(n: usize, seed: u64) -> QuadraticEnergy {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut j = vec![0.0; n * n];
        for x in 0..n {
            for y in x..n {
                let v = next();
                j[x * n + y] = v;
                j[y * n + x] = v;
            }
        }
        QuadraticEnergy::new(n, j).unwrap()
    }

    #[test]
    fn diagonal_birth_example() {
        let mut j = vec![0.0; 4];
        j[0] = 0.7;
        let q = QuadraticEnergy::new(2, j).unwrap();
        assert_eq!(q.grad_birth(&Configuration::new(vec![0, 3]), 0), 0.7);
    }

    #[test]
    fn gradients_match_energy_differences() {
        let q = random_j(4, 7);
        let space = StateSpace::enumerate(SpaceKind::FixedNComposition { sites: 4, particles: 4 }).unwrap();
        for eta in space.configs() {
            for x in 0..4 {
                let up = Configuration::new({
                    let mut v = eta.occupations().to_vec();
                    v[x] += 1;
                    v
                });
                let gb = q.energy(&up) - q.energy(eta);
                assert!((q.grad_birth(eta, x) - gb).abs() < 1e-12);
                let gd = q.energy(&eta.apply_death(x)) - q.energy(eta);
                assert!((q.grad_death(eta, x) - gd).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_birth_difference_is_constant() {
        let q = random_j(3, 11);
        let space = StateSpace::enumerate(SpaceKind::TruncatedProduct { sites: 3, cap: 3 }).unwrap();
        for eta in space.configs() {
            for x in 0..3 {
                for z in 0..3 {
                    if x == z {
                        continue;
                    }
                    let ex = eta.apply_birth(x, u32::MAX).unwrap();
                    let d = q.grad_birth(&ex, z) - q.grad_birth(eta, z);
                    assert!((d - 2.0 * q.coupling(x, z)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn grad2_death_is_symmetric() {
        let q = random_j(3, 3);
        let space = StateSpace::enumerate(SpaceKind::FixedNComposition { sites: 3, particles: 4 }).unwrap();
        for eta in space.configs() {
            for x in 0..3 {
                for y in 0..3 {
                    assert!((q.grad2_death(eta, x, y) - q.grad2_death(eta, y, x)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shape_of_ring() {
        let ring = SiteSet::torus(4, 1);
        let q = QuadraticEnergy::from_adjacency(&ring, 0.5, 0.05).unwrap();
        assert_eq!(q.shape(), (0.5, 0.05, 2));
        assert!(QuadraticEnergy::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    }
}
