use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::PotentialNorms;
use crate::statespace::{Configuration, Point, SiteSet};
use crate::{Error, Result};

/// A site referenced by a potential term: inside the volume (by site index)
/// or outside it, with the boundary occupation if one was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SiteRef {
    Inside(usize),
    Outside { point: Point, value: Option<u32> },
}

/// One set potential `Phi_A : {0,1}^A -> R`. The table is indexed by the
/// bitmask whose bit `k` is the occupation of `support[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialTerm {
    points: Vec<Point>,
    support: Vec<SiteRef>,
    table: Vec<f64>,
    sup_abs: f64,
}

impl PotentialTerm {
    pub fn support(&self) -> &[SiteRef] {
        &self.support
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    fn touches_inside(&self) -> bool {
        self.support.iter().any(|s| matches!(s, SiteRef::Inside(_)))
    }

    fn eval(&self, eta: &Configuration, term_index: usize) -> Result<f64> {
        let mut mask = 0usize;
        for (k, s) in self.support.iter().enumerate() {
            let occ = match s {
                SiteRef::Inside(x) => eta.get(*x),
                SiteRef::Outside { value: Some(v), .. } => *v,
                SiteRef::Outside { value: None, .. } => return Err(Error::MissingBoundary(term_index)),
            };
            if occ > 1 {
                return Err(Error::InvalidPotential(format!(
                    "set potentials act on {{0,1}} occupations, got {occ}"
                )));
            }
            mask |= (occ as usize) << k;
        }
        Ok(self.table[mask])
    }
}

/// Finite-range set potential on exclusion configurations, stored as an
/// explicit term list (no translation invariance is assumed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePotential {
    sites: usize,
    terms: Vec<PotentialTerm>,
    incident: Vec<Vec<usize>>,
}

impl LatticePotential {
    pub fn empty(sites: usize) -> Self {
        Self {
            sites,
            terms: Vec::new(),
            incident: vec![Vec::new(); sites],
        }
    }

    /// Builds the potential from `(support points, table)` pairs. Points
    /// outside `site_set` take their occupation from its boundary
    /// configuration, when one is present.
    pub fn new(site_set: &SiteSet, terms: Vec<(Vec<Point>, Vec<f64>)>) -> Result<Self> {
        let boundary: HashMap<&Point, u32> = site_set.boundary().iter().map(|(p, v)| (p, *v)).collect();
        let mut out = Self::empty(site_set.len());
        for (points, table) in terms {
            if points.is_empty() {
                return Err(Error::InvalidPotential("empty support set".into()));
            }
            if table.len() != 1usize << points.len() {
                return Err(Error::InvalidPotential(format!(
                    "table for a support of size {} must have {} entries, got {}",
                    points.len(),
                    1usize << points.len(),
                    table.len()
                )));
            }
            if table.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPotential("non-finite table entry".into()));
            }
            for (i, p) in points.iter().enumerate() {
                if points[..i].contains(p) {
                    return Err(Error::InvalidPotential(format!("repeated point {p:?} in support")));
                }
            }
            let support = points
                .iter()
                .map(|p| match site_set.index_of(p) {
                    Some(i) => SiteRef::Inside(i),
                    None => SiteRef::Outside {
                        point: p.clone(),
                        value: boundary.get(p).copied(),
                    },
                })
                .collect();
            let sup_abs = table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            out.push(PotentialTerm {
                points,
                support,
                table,
                sup_abs,
            });
        }
        Ok(out)
    }

    /// Nearest-neighbour pair potential `Phi_{x,y}(eta) = J eta_x eta_y` on
    /// every edge of the site set.
    pub fn nearest_neighbour_pairs(site_set: &SiteSet, coupling: f64) -> Result<Self> {
        let sites = site_set.sites();
        let terms = site_set
            .edges()
            .into_iter()
            .map(|(x, y)| (vec![sites[x].clone(), sites[y].clone()], vec![0.0, 0.0, 0.0, coupling]))
            .collect();
        Self::new(site_set, terms)
    }

    fn push(&mut self, term: PotentialTerm) {
        let idx = self.terms.len();
        for s in &term.support {
            if let SiteRef::Inside(x) = s {
                self.incident[*x].push(idx);
            }
        }
        self.terms.push(term);
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.sup_abs == 0.0)
    }

    /// Largest Euclidean diameter of a support set.
    pub fn range(&self) -> f64 {
        let mut best = 0.0f64;
        for t in &self.terms {
            for (i, p) in t.points.iter().enumerate() {
                for q in &t.points[i + 1..] {
                    let d2: i64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                    best = best.max((d2 as f64).sqrt());
                }
            }
        }
        best
    }

    /// `H(eta) = sum_{A ∩ Λ ≠ ∅} Phi_A(eta tau)`.
    pub fn energy(&self, eta: &Configuration) -> Result<f64> {
        let mut acc = 0.0;
        for (i, t) in self.terms.iter().enumerate() {
            if t.touches_inside() {
                acc += t.eval(eta, i)?;
            }
        }
        Ok(acc)
    }

    /// `H(eta^{xz}) - H(eta)`, summing only the terms that meet `{x, z}`.
    pub fn grad_exchange(&self, eta: &Configuration, x: usize, z: usize) -> Result<f64> {
        if eta.get(x) == eta.get(z) {
            return Ok(0.0);
        }
        let swapped = eta.apply_exchange(x, z)?;
        let mut acc = 0.0;
        let (a, b) = (&self.incident[x], &self.incident[z]);
        let (mut i, mut j) = (0, 0);
        // merge of two sorted incidence lists, each term visited once
        while i < a.len() || j < b.len() {
            let t = match (a.get(i), b.get(j)) {
                (Some(&u), Some(&v)) if u == v => {
                    i += 1;
                    j += 1;
                    u
                }
                (Some(&u), Some(&v)) if u < v => {
                    i += 1;
                    u
                }
                (Some(_), Some(&v)) => {
                    j += 1;
                    v
                }
                (Some(&u), None) => {
                    i += 1;
                    u
                }
                (None, Some(&v)) => {
                    j += 1;
                    v
                }
                (None, None) => unreachable!(),
            };
            let term = &self.terms[t];
            acc += term.eval(&swapped, t)? - term.eval(eta, t)?;
        }
        Ok(acc)
    }

    /// `(||Phi||, |||Phi|||)` with the sup over all points appearing in some
    /// support.
    pub fn norms(&self) -> PotentialNorms {
        let mut per_point: HashMap<&Point, (f64, f64)> = HashMap::new();
        for t in &self.terms {
            let size = t.points.len() as f64;
            for p in &t.points {
                let e = per_point.entry(p).or_insert((0.0, 0.0));
                e.0 += t.sup_abs;
                e.1 += size * t.sup_abs;
            }
        }
        per_point.values().fold(PotentialNorms { sup: 0.0, weighted: 0.0 }, |acc, &(s, w)| PotentialNorms {
            sup: acc.sup.max(s),
            weighted: acc.weighted.max(w),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_potential() {
        let p = LatticePotential::empty(3);
        assert_eq!(p.energy(&Configuration::new(vec![1, 0, 1])).unwrap(), 0.0);
        assert_eq!(p.norms(), PotentialNorms { sup: 0.0, weighted: 0.0 });
        assert_eq!(p.grad_exchange(&Configuration::new(vec![1, 0, 1]), 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn single_pair_term() {
        let s = SiteSet::segment(2);
        let p = LatticePotential::nearest_neighbour_pairs(&s, 1.0).unwrap();
        assert_eq!(p.energy(&Configuration::new(vec![1, 1])).unwrap(), 1.0);
        let n = LatticePotential::nearest_neighbour_pairs(&s, 0.7).unwrap().norms();
        assert_eq!(n.sup, 0.7);
        assert_eq!(n.weighted, 1.4);
    }

    #[test]
    fn ising_segment_energy() {
        let s = SiteSet::segment(3);
        let p = LatticePotential::nearest_neighbour_pairs(&s, 1.0).unwrap();
        assert_eq!(p.energy(&Configuration::new(vec![1, 1, 1])).unwrap(), 2.0);
    }

    #[test]
    fn interior_norms_on_zd() {
        // 5x5 box: the centre has all 2d = 4 incident edges
        let s = SiteSet::lattice_box(&[5, 5]);
        let n = LatticePotential::nearest_neighbour_pairs(&s, 0.3).unwrap().norms();
        assert!((n.sup - 4.0 * 0.3).abs() < 1e-15);
        assert!((n.weighted - 8.0 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn boundary_terms() {
        let s = SiteSet::segment(2).with_boundary(vec![(vec![2], 1)]).unwrap();
        let p = LatticePotential::new(
            &s,
            vec![
                (vec![vec![1], vec![2]], vec![0.0, 0.0, 0.0, 2.0]),
                (vec![vec![5], vec![6]], vec![0.0, 0.0, 0.0, 9.0]),
            ],
        )
        .unwrap();
        // the term fully outside the volume is ignored
        assert_eq!(p.energy(&Configuration::new(vec![0, 1])).unwrap(), 2.0);
        let free = SiteSet::segment(2);
        let q = LatticePotential::new(&free, vec![(vec![vec![1], vec![2]], vec![0.0, 0.0, 0.0, 2.0])]).unwrap();
        assert_eq!(q.energy(&Configuration::new(vec![0, 1])), Err(Error::MissingBoundary(0)));
    }

    #[test]
    fn rejects_bad_tables() {
        let s = SiteSet::segment(2);
        assert!(LatticePotential::new(&s, vec![(vec![vec![0], vec![1]], vec![0.0; 3])]).is_err());
        assert!(LatticePotential::new(&s, vec![(vec![], vec![0.0])]).is_err());
    }
}
