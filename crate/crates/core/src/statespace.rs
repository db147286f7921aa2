//! Finite configuration spaces and the elementary moves acting on them.
//!
//! Three kinds of spaces are supported:
//!
//! * fixed particle number with exclusion (`{0,1}`-valued occupations),
//! * fixed particle number without exclusion (compositions of `N` into `n`
//!   parts),
//! * the product box `{0..M}^n` used to truncate birth-death dynamics.
//!
//! Configurations are always listed in increasing lexicographic order of the
//! occupation vector, so matrix indices are reproducible across runs.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default cap on the number of enumerated states.
pub const DEFAULT_STATE_CAP: usize = 200_000;

/// A lattice point in `Z^d` (or an abstract label stored as a 1-vector).
pub type Point = Vec<i64>;

/// Finite set of sites with optional nearest-neighbour structure and an
/// optional boundary configuration outside the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSet {
    dimension: usize,
    sites: Vec<Point>,
    adjacency: Option<Vec<Vec<usize>>>,
    boundary: Vec<(Point, u32)>,
}

impl SiteSet {
    /// Builds a site set from explicit points. Adjacency, if given, must be
    /// symmetric and irreflexive.
    pub fn new(dimension: usize, sites: Vec<Point>, adjacency: Option<Vec<Vec<usize>>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for (i, p) in sites.iter().enumerate() {
            if p.len() != dimension {
                return Err(Error::InvalidArgument(format!("site {i} has wrong dimension")));
            }
            if sites[..i].contains(p) {
                return Err(Error::InvalidArgument(format!("duplicate site {p:?}")));
            }
        }
        if let Some(adj) = &adjacency {
            if adj.len() != sites.len() {
                return Err(Error::InvalidArgument("adjacency size mismatch".into()));
            }
            for (x, nbrs) in adj.iter().enumerate() {
                for &y in nbrs {
                    if y == x {
                        return Err(Error::InvalidArgument(format!("self-loop at {x}")));
                    }
                    if y >= sites.len() || !adj[y].contains(&x) {
                        return Err(Error::InvalidArgument(format!("adjacency not symmetric at ({x},{y})")));
                    }
                }
            }
        }
        Ok(Self {
            dimension,
            sites,
            adjacency,
            boundary: Vec::new(),
        })
    }

    /// `n` abstract labels with no geometry (the complete graph `V_n`).
    pub fn complete(n: usize) -> Self {
        Self {
            dimension: 1,
            sites: (0..n as i64).map(|i| vec![i]).collect(),
            adjacency: None,
            boundary: Vec::new(),
        }
    }

    /// Segment `{0, .., len-1}` of `Z` with nearest-neighbour adjacency.
    pub fn segment(len: usize) -> Self {
        Self::lattice_box(&[len])
    }

    /// Box `[0, L_1) x .. x [0, L_d)` of `Z^d` with free-boundary
    /// nearest-neighbour adjacency. Sites are listed in row-major order.
    pub fn lattice_box(lengths: &[usize]) -> Self {
        let sites = box_points(lengths);
        let index: HashMap<&Point, usize> = sites.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let adjacency = sites
            .iter()
            .map(|p| {
                let mut nbrs = Vec::new();
                for k in 0..p.len() {
                    for step in [-1i64, 1] {
                        let mut q = p.clone();
                        q[k] += step;
                        if let Some(&j) = index.get(&q) {
                            nbrs.push(j);
                        }
                    }
                }
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        Self {
            dimension: lengths.len(),
            sites,
            adjacency: Some(adjacency),
            boundary: Vec::new(),
        }
    }

    /// Discrete torus `(Z / L Z)^d`. For `L <= 2` some neighbours coincide;
    /// they are recorded once.
    pub fn torus(len: usize, dimension: usize) -> Self {
        let lengths = vec![len; dimension];
        let sites = box_points(&lengths);
        let index: HashMap<&Point, usize> = sites.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let adjacency = sites
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut nbrs = Vec::new();
                for k in 0..dimension {
                    for step in [len as i64 - 1, 1] {
                        let mut q = p.clone();
                        q[k] = (q[k] + step).rem_euclid(len as i64);
                        let j = index[&q];
                        if j != i && !nbrs.contains(&j) {
                            nbrs.push(j);
                        }
                    }
                }
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        Self {
            dimension,
            sites,
            adjacency: Some(adjacency),
            boundary: Vec::new(),
        }
    }

    /// Attaches a boundary configuration. Every boundary point must lie
    /// outside the set.
    pub fn with_boundary(mut self, boundary: Vec<(Point, u32)>) -> Result<Self> {
        for (p, _) in &boundary {
            if p.len() != self.dimension {
                return Err(Error::InvalidArgument(format!("boundary point {p:?} has wrong dimension")));
            }
            if self.sites.contains(p) {
                return Err(Error::InvalidArgument(format!("boundary point {p:?} lies inside the volume")));
            }
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn adjacency(&self) -> Option<&[Vec<usize>]> {
        self.adjacency.as_deref()
    }

    pub fn boundary(&self) -> &[(Point, u32)] {
        &self.boundary
    }

    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        self.sites.iter().position(|q| q.as_slice() == p)
    }

    /// Unordered adjacent pairs `(x, z)` with `x < z`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if let Some(adj) = &self.adjacency {
            for (x, nbrs) in adj.iter().enumerate() {
                for &z in nbrs {
                    if x < z {
                        out.push((x, z));
                    }
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let Some(adj) = &self.adjacency else {
            return true;
        };
        if self.sites.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.sites.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Largest Euclidean distance between two sites.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.sites.iter().enumerate() {
            for q in &self.sites[i + 1..] {
                let d2: i64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.max((d2 as f64).sqrt());
            }
        }
        best
    }
}

fn box_points(lengths: &[usize]) -> Vec<Point> {
    let mut out = vec![Vec::new()];
    for &len in lengths {
        let mut next = Vec::with_capacity(out.len() * len);
        for p in &out {
            for c in 0..len as i64 {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        out = next;
    }
    if lengths.is_empty() {
        Vec::new()
    } else {
        out
    }
}

/// Value range allowed for a single occupation number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Binary,
    Truncated(u32),
    Counts,
}

/// Occupation-number vector indexed by site.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration(Vec<u32>);

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for Configuration {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl Configuration {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, x: usize) -> u32 {
        self.0[x]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&k| k as u64).sum()
    }

    pub fn satisfies(&self, domain: Domain) -> bool {
        match domain {
            Domain::Binary => self.0.iter().all(|&k| k <= 1),
            Domain::Truncated(m) => self.0.iter().all(|&k| k <= m),
            Domain::Counts => true,
        }
    }

    /// `eta^{xz}`: occupations at `x` and `z` swapped.
    pub fn apply_exchange(&self, x: usize, z: usize) -> Result<Self> {
        if x == z {
            return Err(Error::InvalidMove(format!("exchange needs two distinct sites, got {x} twice")));
        }
        let mut out = self.clone();
        out.0.swap(x, z);
        Ok(out)
    }

    /// `eta^{xz}` for particle moves: one particle from `x` to `z`; the
    /// identity when `eta_x = 0` or `x = z`.
    pub fn apply_move(&self, x: usize, z: usize) -> Self {
        let mut out = self.clone();
        if x != z && out.0[x] > 0 {
            out.0[x] -= 1;
            out.0[z] += 1;
        }
        out
    }

    /// Creation at `x`. Returns `None` (saturated) when `eta_x` is already at
    /// the cap.
    pub fn apply_birth(&self, x: usize, cap: u32) -> Option<Self> {
        if self.0[x] >= cap {
            return None;
        }
        let mut out = self.clone();
        out.0[x] += 1;
        Some(out)
    }

    /// Annihilation at `x`; the identity when `eta_x = 0`.
    pub fn apply_death(&self, x: usize) -> Self {
        let mut out = self.clone();
        if out.0[x] > 0 {
            out.0[x] -= 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// `{0,1}`-valued occupations with exactly `particles` ones.
    FixedNBinary { sites: usize, particles: usize },
    /// Nonnegative occupations summing to `particles`.
    FixedNComposition { sites: usize, particles: usize },
    /// `{0..cap}^sites`.
    TruncatedProduct { sites: usize, cap: u32 },
}

impl SpaceKind {
    pub fn sites(&self) -> usize {
        match *self {
            SpaceKind::FixedNBinary { sites, .. }
            | SpaceKind::FixedNComposition { sites, .. }
            | SpaceKind::TruncatedProduct { sites, .. } => sites,
        }
    }

    pub fn domain(&self) -> Domain {
        match *self {
            SpaceKind::FixedNBinary { .. } => Domain::Binary,
            SpaceKind::FixedNComposition { .. } => Domain::Counts,
            SpaceKind::TruncatedProduct { cap, .. } => Domain::Truncated(cap),
        }
    }

    pub fn fixed_particles(&self) -> Option<usize> {
        match *self {
            SpaceKind::FixedNBinary { particles, .. } | SpaceKind::FixedNComposition { particles, .. } => Some(particles),
            SpaceKind::TruncatedProduct { .. } => None,
        }
    }

    /// Number of configurations, `None` on overflow.
    pub fn size(&self) -> Option<usize> {
        let size = match *self {
            SpaceKind::FixedNBinary { sites, particles } => binomial(sites as u64, particles as u64)?,
            SpaceKind::FixedNComposition { sites, particles } => {
                if sites == 0 {
                    u128::from(particles == 0)
                } else {
                    binomial((particles + sites - 1) as u64, (sites - 1) as u64)?
                }
            }
            SpaceKind::TruncatedProduct { sites, cap } => {
                let mut acc: u128 = 1;
                for _ in 0..sites {
                    acc = acc.checked_mul(cap as u128 + 1)?;
                }
                acc
            }
        };
        usize::try_from(size).ok()
    }
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Ordered enumeration of a configuration space with O(1) reverse lookup.
#[derive(Debug, Clone)]
pub struct StateSpace {
    kind: SpaceKind,
    configs: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
}

impl StateSpace {
    pub fn enumerate(kind: SpaceKind) -> Result<Self> {
        Self::enumerate_with_cap(kind, DEFAULT_STATE_CAP)
    }

    pub fn enumerate_with_cap(kind: SpaceKind, cap: usize) -> Result<Self> {
        if let SpaceKind::FixedNBinary { sites, particles } = kind {
            if particles > sites {
                return Err(Error::InfeasibleStateSpace(format!(
                    "{particles} particles do not fit on {sites} sites with exclusion"
                )));
            }
        }
        let size = kind.size().unwrap_or(usize::MAX);
        if size > cap {
            return Err(Error::Capacity {
                what: "state space",
                needed: size,
                cap,
            });
        }
        let n = kind.sites();
        let (site_max, total) = match kind {
            SpaceKind::FixedNBinary { particles, .. } => (1u32, Some(particles as u32)),
            SpaceKind::FixedNComposition { particles, .. } => (particles as u32, Some(particles as u32)),
            SpaceKind::TruncatedProduct { cap, .. } => (cap, None),
        };
        let mut configs = Vec::with_capacity(size);
        let mut current = vec![0u32; n];
        fill(&mut current, 0, site_max, total, 0, &mut configs);
        let index = configs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Ok(Self { kind, configs, index })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.kind.sites()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn config(&self, i: usize) -> &Configuration {
        &self.configs[i]
    }

    pub fn index(&self, c: &Configuration) -> Option<usize> {
        self.index.get(c).copied()
    }
}

// Depth-first fill in increasing value order, which yields lexicographic
// order of the occupation vectors.
fn fill(
    current: &mut Vec<u32>,
    pos: usize,
    site_max: u32,
    total: Option<u32>,
    used: u32,
    out: &mut Vec<Configuration>,
) {
    let n = current.len();
    if pos == n {
        if total.is_none_or(|t| t == used) {
            out.push(Configuration(current.clone()));
        }
        return;
    }
    let remaining_sites = (n - pos - 1) as u32;
    let (lo, hi) = match total {
        Some(t) => {
            let left = t - used;
            // the sites after `pos` can absorb at most remaining_sites * site_max
            let lo = left.saturating_sub(remaining_sites.saturating_mul(site_max));
            (lo, left.min(site_max))
        }
        None => (0, site_max),
    };
    if lo > hi {
        return;
    }
    for v in lo..=hi {
        current[pos] = v;
        fill(current, pos + 1, site_max, total, used + v, out);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_sizes() {
        let s = StateSpace::enumerate(SpaceKind::FixedNBinary { sites: 4, particles: 2 }).unwrap();
        assert_eq!(s.len(), 6);
        let s = StateSpace::enumerate(SpaceKind::FixedNComposition { sites: 3, particles: 2 }).unwrap();
        assert_eq!(s.len(), 6);
        let s = StateSpace::enumerate(SpaceKind::TruncatedProduct { sites: 2, cap: 3 }).unwrap();
        assert_eq!(s.len(), 16);
    }

    #[test]
    fn binary_sizes_match_binomials() {
        for n in 0..=12usize {
            for k in 0..=n {
                let s = StateSpace::enumerate(SpaceKind::FixedNBinary { sites: n, particles: k }).unwrap();
                assert_eq!(s.len() as u128, binomial(n as u64, k as u64).unwrap(), "n={n} N={k}");
                assert!(s.configs().iter().all(|c| c.total() == k as u64 && c.satisfies(Domain::Binary)));
            }
        }
    }

    #[test]
    fn ordering_is_lexicographic_and_indexed() {
        let s = StateSpace::enumerate(SpaceKind::FixedNComposition { sites: 4, particles: 3 }).unwrap();
        for w in s.configs().windows(2) {
            assert!(w[0] < w[1]);
        }
        for (i, c) in s.configs().iter().enumerate() {
            assert_eq!(s.index(c), Some(i));
        }
        assert_eq!(s.config(0).occupations(), &[0, 0, 0, 3]);
    }

    #[test]
    fn infeasible_and_capacity_errors() {
        assert!(matches!(
            StateSpace::enumerate(SpaceKind::FixedNBinary { sites: 3, particles: 4 }),
            Err(Error::InfeasibleStateSpace(_))
        ));
        assert!(matches!(
            StateSpace::enumerate_with_cap(SpaceKind::TruncatedProduct { sites: 10, cap: 9 }, 1000),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn exchange_examples() {
        let c = Configuration::new(vec![1, 0]);
        assert_eq!(c.apply_exchange(0, 1).unwrap().occupations(), &[0, 1]);
        let c = Configuration::new(vec![1, 1]);
        assert_eq!(c.apply_exchange(0, 1).unwrap().occupations(), &[1, 1]);
        let c = Configuration::new(vec![1, 0, 1, 0]);
        assert_eq!(c.apply_exchange(1, 2).unwrap().occupations(), &[1, 1, 0, 0]);
        assert!(matches!(c.apply_exchange(2, 2), Err(Error::InvalidMove(_))));
    }

    #[test]
    fn move_examples() {
        assert_eq!(Configuration::new(vec![2, 0]).apply_move(0, 1).occupations(), &[1, 1]);
        assert_eq!(Configuration::new(vec![0, 3]).apply_move(0, 1).occupations(), &[0, 3]);
        assert_eq!(Configuration::new(vec![1, 1]).apply_move(0, 0).occupations(), &[1, 1]);
    }

    #[test]
    fn birth_death_examples() {
        assert_eq!(Configuration::new(vec![0, 2]).apply_birth(0, 5).unwrap().occupations(), &[1, 2]);
        assert!(Configuration::new(vec![5, 0]).apply_birth(0, 5).is_none());
        assert!(Configuration::new(vec![1]).apply_birth(0, 1).is_none());
        assert_eq!(Configuration::new(vec![3]).apply_death(0).occupations(), &[2]);
        assert_eq!(Configuration::new(vec![0, 1]).apply_death(0).occupations(), &[0, 1]);
        assert_eq!(Configuration::new(vec![1, 0]).apply_death(0).occupations(), &[0, 0]);
    }

    #[test]
    fn geometry() {
        let seg = SiteSet::segment(4);
        assert_eq!(seg.edges(), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(seg.diameter(), 3.0);
        let b = SiteSet::lattice_box(&[2, 3]);
        assert_eq!(b.len(), 6);
        assert_eq!(b.edges().len(), 7);
        let t = SiteSet::torus(4, 2);
        assert!(t.adjacency().unwrap().iter().all(|n| n.len() == 4));
        assert!(SiteSet::new(1, vec![vec![0], vec![2]], Some(vec![vec![], vec![]])).unwrap().edges().is_empty());
        let disconnected = SiteSet::new(1, vec![vec![0], vec![2]], Some(vec![vec![], vec![]])).unwrap();
        assert!(!disconnected.is_connected());
        assert!(SiteSet::segment(3).with_boundary(vec![(vec![1], 1)]).is_err());
        assert!(SiteSet::segment(3).with_boundary(vec![(vec![3], 1)]).is_ok());
    }
}
