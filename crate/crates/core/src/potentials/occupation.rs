use serde::{Deserialize, Serialize};

use crate::statespace::{Configuration, Point, SiteSet};
use crate::{Error, Result};

/// Translation-invariant kernel `K : Z^d -> [0, inf)` with `K(0) = 0` and
/// `K(-x) = K(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LatticeKernel {
    /// Finitely many nonzero values, listed by displacement.
    Finite(Vec<(Point, f64)>),
    /// `K(x) = amplitude * |x|^{-exponent}` for `x != 0`.
    PowerLaw { dimension: usize, amplitude: f64, exponent: f64 },
}

impl LatticeKernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            LatticeKernel::Finite(entries) => {
                for (p, v) in entries {
                    if !(v.is_finite() && *v >= 0.0) {
                        return Err(Error::InvalidPotential(format!("kernel value {v} at {p:?} must be finite and >= 0")));
                    }
                    if p.iter().all(|&c| c == 0) && *v != 0.0 {
                        return Err(Error::InvalidPotential("kernel must vanish at the origin".into()));
                    }
                    let neg: Point = p.iter().map(|c| -c).collect();
                    if self.value(&neg) != *v {
                        return Err(Error::InvalidPotential(format!("kernel is not even at {p:?}")));
                    }
                    let mut seen = 0;
                    for (q, _) in entries {
                        if q == p {
                            seen += 1;
                        }
                    }
                    if seen > 1 {
                        return Err(Error::InvalidPotential(format!("displacement {p:?} listed twice")));
                    }
                }
                Ok(())
            }
            LatticeKernel::PowerLaw { amplitude, exponent, dimension } => {
                if *dimension == 0 || !(amplitude.is_finite() && *amplitude >= 0.0) || !exponent.is_finite() {
                    return Err(Error::InvalidPotential("bad power-law kernel parameters".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, displacement: &[i64]) -> f64 {
        match self {
            LatticeKernel::Finite(entries) => entries
                .iter()
                .find(|(p, _)| p.as_slice() == displacement)
                .map_or(0.0, |(_, v)| *v),
            LatticeKernel::PowerLaw { amplitude, exponent, .. } => {
                let r2: i64 = displacement.iter().map(|c| c * c).sum();
                if r2 == 0 {
                    0.0
                } else {
                    amplitude * (r2 as f64).powf(-exponent / 2.0)
                }
            }
        }
    }
}

/// General pair table `phi(x, y, m, k)` for `x < y`, indexed by occupations
/// `m, k <= cap`. Pairs not listed do not interact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    sites: usize,
    cap: u32,
    pairs: Vec<((usize, usize), Vec<f64>)>,
}

impl PairTable {
    /// Each table has `(cap + 1)^2` entries, row index = occupation of the
    /// first site. Entries for `(y, x)` are read through the symmetry
    /// `phi(x,y,m,k) = phi(y,x,k,m)`.
    pub fn new(sites: usize, cap: u32, pairs: Vec<((usize, usize), Vec<f64>)>) -> Result<Self> {
        let width = (cap as usize + 1) * (cap as usize + 1);
        let mut seen = std::collections::HashSet::new();
        for ((x, y), table) in &pairs {
            if x == y {
                return Err(Error::InvalidPotential("pair table on the diagonal must vanish".into()));
            }
            if *x >= sites || *y >= sites {
                return Err(Error::InvalidPotential(format!("pair ({x},{y}) outside the volume")));
            }
            if !seen.insert((*x.min(y), *x.max(y))) {
                return Err(Error::InvalidPotential(format!("pair ({x},{y}) listed twice")));
            }
            if table.len() != width || table.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPotential(format!("pair ({x},{y}) needs {width} finite entries")));
            }
        }
        let pairs = pairs
            .into_iter()
            .map(|((x, y), t)| {
                if x < y {
                    ((x, y), t)
                } else {
                    // store with the smaller site first by transposing
                    let w = cap as usize + 1;
                    let mut tt = vec![0.0; t.len()];
                    for m in 0..w {
                        for k in 0..w {
                            tt[k * w + m] = t[m * w + k];
                        }
                    }
                    ((y, x), tt)
                }
            })
            .collect();
        Ok(Self { sites, cap, pairs })
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    fn value(&self, table: &[f64], m: u32, k: u32) -> Result<f64> {
        if m > self.cap || k > self.cap {
            return Err(Error::InvalidPotential(format!(
                "occupation ({m},{k}) beyond pair-table cap {}",
                self.cap
            )));
        }
        Ok(table[m as usize * (self.cap as usize + 1) + k as usize])
    }
}

/// Interaction of birth-death models, depending on the occupation numbers
/// of pairs of sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OccupationPairPotential {
    /// `H = sum_{x<y} K_xy eta_x eta_y + sum_x K_xx C(eta_x, 2) + sum_x h_x eta_x`.
    /// The diagonal couples particles sharing a site; `h` is the linear field
    /// produced by a boundary configuration.
    Kernel { sites: usize, coupling: Vec<f64>, field: Vec<f64> },
    Table(PairTable),
}

impl OccupationPairPotential {
    pub fn zero(sites: usize) -> Self {
        Self::Kernel {
            sites,
            coupling: vec![0.0; sites * sites],
            field: vec![0.0; sites],
        }
    }

    /// Kernel form from an explicit symmetric matrix (diagonal allowed).
    pub fn kernel(sites: usize, coupling: Vec<f64>, field: Vec<f64>) -> Result<Self> {
        if coupling.len() != sites * sites || field.len() != sites {
            return Err(Error::InvalidPotential("kernel matrix or field has the wrong size".into()));
        }
        if coupling.iter().chain(&field).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite kernel entry".into()));
        }
        for x in 0..sites {
            for y in 0..x {
                if coupling[x * sites + y] != coupling[y * sites + x] {
                    return Err(Error::InvalidPotential(format!("kernel matrix not symmetric at ({x},{y})")));
                }
            }
        }
        Ok(Self::Kernel { sites, coupling, field })
    }

    /// Samples a lattice kernel on the site set; boundary occupations
    /// outside the volume enter as the linear field `h_x = sum_p K(x-p) tau_p`.
    pub fn from_lattice_kernel(site_set: &SiteSet, kernel: &LatticeKernel) -> Result<Self> {
        kernel.validate()?;
        let pts = site_set.sites();
        let n = pts.len();
        let diff = |a: &Point, b: &Point| -> Point { a.iter().zip(b).map(|(u, v)| u - v).collect() };
        let mut coupling = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    coupling[x * n + y] = kernel.value(&diff(&pts[x], &pts[y]));
                }
            }
        }
        let field = pts
            .iter()
            .map(|p| {
                site_set
                    .boundary()
                    .iter()
                    .map(|(q, tau)| kernel.value(&diff(p, q)) * *tau as f64)
                    .sum()
            })
            .collect();
        Self::kernel(n, coupling, field)
    }

    pub fn sites(&self) -> usize {
        match self {
            Self::Kernel { sites, .. } => *sites,
            Self::Table(t) => t.sites,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Kernel { coupling, field, .. } => coupling.iter().chain(field).all(|&v| v == 0.0),
            Self::Table(t) => t.pairs.iter().all(|(_, v)| v.iter().all(|&e| e == 0.0)),
        }
    }

    /// Kernel matrix entry, `None` for the table form.
    pub fn coupling(&self, x: usize, y: usize) -> Option<f64> {
        match self {
            Self::Kernel { sites, coupling, .. } => Some(coupling[x * sites + y]),
            Self::Table(_) => None,
        }
    }

    pub fn energy(&self, eta: &Configuration) -> Result<f64> {
        let e = eta.occupations();
        match self {
            Self::Kernel { sites, coupling, field } => {
                let n = *sites;
                let mut acc = 0.0;
                for x in 0..n {
                    let kx = e[x] as f64;
                    if kx == 0.0 {
                        continue;
                    }
                    acc += field[x] * kx + coupling[x * n + x] * kx * (kx - 1.0) / 2.0;
                    for y in x + 1..n {
                        acc += coupling[x * n + y] * kx * e[y] as f64;
                    }
                }
                Ok(acc)
            }
            Self::Table(t) => {
                let mut acc = 0.0;
                for ((x, y), table) in &t.pairs {
                    acc += t.value(table, e[*x], e[*y])?;
                }
                Ok(acc)
            }
        }
    }

    /// `H(eta + e_x) - H(eta)`.
    pub fn grad_birth(&self, eta: &Configuration, x: usize) -> Result<f64> {
        let e = eta.occupations();
        match self {
            Self::Kernel { sites, coupling, field } => {
                let n = *sites;
                let row = &coupling[x * n..(x + 1) * n];
                let mut acc = field[x] + row[x] * e[x] as f64;
                for (y, (&k, &occ)) in row.iter().zip(e).enumerate() {
                    if y != x {
                        acc += k * occ as f64;
                    }
                }
                Ok(acc)
            }
            Self::Table(t) => {
                let mut acc = 0.0;
                for ((a, b), table) in &t.pairs {
                    if *a == x {
                        acc += t.value(table, e[x] + 1, e[*b])? - t.value(table, e[x], e[*b])?;
                    } else if *b == x {
                        acc += t.value(table, e[*a], e[x] + 1)? - t.value(table, e[*a], e[x])?;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// `H(eta^{x-}) - H(eta)`; zero when `eta_x = 0`.
    pub fn grad_death(&self, eta: &Configuration, x: usize) -> Result<f64> {
        if eta.get(x) == 0 {
            return Ok(0.0);
        }
        let lowered = eta.apply_death(x);
        Ok(-self.grad_birth(&lowered, x)?)
    }

    /// `grad_birth(eta + e_x, z) - grad_birth(eta, z)`.
    pub fn grad2_birth(&self, eta: &Configuration, x: usize, z: usize) -> Result<f64> {
        if let Self::Kernel { sites, coupling, .. } = self {
            return Ok(coupling[x * sites + z]);
        }
        let raised = eta.apply_birth(x, u32::MAX).expect("no cap");
        Ok(self.grad_birth(&raised, z)? - self.grad_birth(eta, z)?)
    }
}
