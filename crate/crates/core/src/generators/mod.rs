//! Reversible generators of the supported particle systems.
//!
//! A [`ReversibleGenerator`] keeps, for every state and every move label,
//! the image state and the individual rate `c(eta, gamma)`; the aggregated
//! rate matrix (identity moves dropped) is stored in CSR form. Stationary
//! weights are the exact Gibbs weights of the model, normalized by direct
//! summation.

mod build;
mod model;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use build::{
    build_continuum_glauber_discretized, build_continuum_kawasaki_discretized, build_glauber_discrete,
    build_kawasaki_complete, build_kawasaki_nn, build_zero_range,
};
pub use model::{CellGrid, Model, RateFunction};
pub(crate) use model::zero_range_rate;

use crate::statespace::{Configuration, StateSpace};
use crate::{Error, Result};

/// Cap on `states x labels` for the per-move tables.
pub const DEFAULT_TABLE_CAP: usize = 30_000_000;

/// Marker for a move with no image (birth at the occupation cap).
pub const NO_TARGET: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    /// exchange of occupations, unordered pair `x < z`
    Exchange,
    /// one particle from `x` to `z`, ordered pair (`x = z` allowed)
    Move,
    Birth,
    Death,
}

/// Membership of a label in `J` and `J^{-1}` of the decomposition
/// `G = J ∪ J^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// in `J ∩ J^{-1}`
    Both,
    /// in `J` only
    Forward,
    /// in `J^{-1}` only
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveLabel {
    pub kind: MoveKind,
    pub x: usize,
    pub z: usize,
    pub direction: Direction,
}

impl MoveLabel {
    pub fn new(kind: MoveKind, x: usize, z: usize, direction: Direction) -> Self {
        Self { kind, x, z, direction }
    }
}

/// Aggregated rate matrix in compressed sparse row form, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl RateMatrix {
    pub fn len(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(k) => self.vals[a + k],
            Err(_) => 0.0,
        }
    }

    /// `y = L f`
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.row(i).map(|(j, v)| v * f[j]).sum())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReversibleGenerator {
    space: StateSpace,
    model: Model,
    labels: Vec<MoveLabel>,
    inverse: Vec<usize>,
    targets: Vec<u32>,
    rates: Vec<f64>,
    nu: Vec<f64>,
    matrix: RateMatrix,
}

impl ReversibleGenerator {
    /// Assembles the generator of `model` on `space`: move tables, Gibbs
    /// weights and the aggregated rate matrix.
    pub fn assemble(space: StateSpace, model: Model) -> Result<Self> {
        Self::assemble_with_cap(space, model, DEFAULT_TABLE_CAP)
    }

    pub fn assemble_with_cap(space: StateSpace, model: Model, cap: usize) -> Result<Self> {
        let labels = model.labels();
        let inverse = model.inverse_labels(&labels);
        let m = labels.len();
        let states = space.len();
        let needed = states.saturating_mul(m);
        if needed > cap {
            return Err(Error::Capacity {
                what: "move table",
                needed,
                cap,
            });
        }
        let rows: Vec<(Vec<u32>, Vec<f64>)> = (0..states)
            .into_par_iter()
            .map(|i| {
                let eta = space.config(i);
                let mut t = Vec::with_capacity(m);
                let mut r = Vec::with_capacity(m);
                for label in &labels {
                    let rate = model.rate(eta, label)?;
                    if !(rate.is_finite() && rate >= 0.0) {
                        return Err(Error::InvalidRates(format!("rate {rate} at state {i} for {label:?}")));
                    }
                    match model.apply(eta, label) {
                        Some(img) => {
                            let j = space.index(&img).ok_or_else(|| {
                                Error::InvalidMove(format!("{label:?} maps {eta:?} outside the state space"))
                            })?;
                            t.push(j as u32);
                        }
                        None => {
                            if rate != 0.0 {
                                return Err(Error::InvalidRates(format!("suppressed move {label:?} has positive rate")));
                            }
                            t.push(NO_TARGET);
                        }
                    }
                    r.push(rate);
                }
                Ok((t, r))
            })
            .collect::<Result<_>>()?;
        let mut targets = Vec::with_capacity(needed);
        let mut rates = Vec::with_capacity(needed);
        for (t, r) in rows {
            targets.extend(t);
            rates.extend(r);
        }
        let log_w: Vec<f64> = space
            .configs()
            .par_iter()
            .map(|c| model.log_weight(c))
            .collect::<Result<_>>()?;
        let nu = normalize_log_weights(&log_w);
        let mut gen = Self {
            space,
            model,
            labels,
            inverse,
            targets,
            rates,
            nu,
            matrix: RateMatrix {
                row_ptr: vec![0],
                cols: Vec::new(),
                vals: Vec::new(),
            },
        };
        gen.rebuild_matrix();
        if !gen.is_irreducible() {
            return Err(Error::Reducible(format!("{} chain is not irreducible", gen.model.tag())));
        }
        Ok(gen)
    }

    fn rebuild_matrix(&mut self) {
        let m = self.labels.len();
        let states = self.space.len();
        let mut row_ptr = Vec::with_capacity(states + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(m + 1);
        for i in 0..states {
            entries.clear();
            let mut out = 0.0;
            for l in 0..m {
                let t = self.targets[i * m + l];
                let r = self.rates[i * m + l];
                if t == NO_TARGET || t as usize == i || r == 0.0 {
                    continue;
                }
                entries.push((t as usize, r));
                out += r;
            }
            entries.push((i, -out));
            entries.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < entries.len() {
                let (j, mut v) = entries[k];
                k += 1;
                while k < entries.len() && entries[k].0 == j {
                    v += entries[k].1;
                    k += 1;
                }
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        self.matrix = RateMatrix { row_ptr, cols, vals };
    }

    fn is_irreducible(&self) -> bool {
        let n = self.space.len();
        if n <= 1 {
            return true;
        }
        // forward reachability from state 0; with detailed balance the
        // positive-rate graph is symmetric
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, v) in self.matrix.row(i) {
                if j != i && v > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn labels(&self) -> &[MoveLabel] {
        &self.labels
    }

    /// `inverse()[l]` is the label of `gamma_l^{-1}`.
    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn matrix(&self) -> &RateMatrix {
        &self.matrix
    }

    /// Image state of `label` at state `i`, `None` if suppressed.
    pub fn target(&self, i: usize, label: usize) -> Option<usize> {
        let t = self.targets[i * self.labels.len() + label];
        (t != NO_TARGET).then_some(t as usize)
    }

    pub fn rate(&self, i: usize, label: usize) -> f64 {
        self.rates[i * self.labels.len() + label]
    }

    pub fn config(&self, i: usize) -> &Configuration {
        self.space.config(i)
    }

    /// Labels whose move takes state `i` to state `j`, with their rates.
    pub fn generating_moves(&self, i: usize, j: usize) -> Vec<(usize, f64)> {
        (0..self.labels.len())
            .filter(|&l| self.target(i, l) == Some(j) && self.rate(i, l) > 0.0)
            .map(|l| (l, self.rate(i, l)))
            .collect()
    }

    /// `nabla_gamma f(eta_i)`, zero for suppressed moves.
    pub fn grad(&self, f: &[f64], i: usize, label: usize) -> f64 {
        match self.target(i, label) {
            Some(j) => f[j] - f[i],
            None => 0.0,
        }
    }

    /// `L f`
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.matrix.apply(f)
    }

    /// Dense copy of the rate matrix (row-major), for small instances.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in self.matrix.row(i) {
                out[i * n + j] = v;
            }
        }
        out
    }

    /// Multiplies one individual rate by `factor` and rebuilds the
    /// aggregated matrix. Used to inject faults into otherwise exact
    /// generators.
    pub fn corrupt_rate(&mut self, state: usize, label: usize, factor: f64) -> Result<()> {
        if state >= self.len() || label >= self.labels.len() {
            return Err(Error::InvalidArgument(format!("no move {label} at state {state}")));
        }
        self.rates[state * self.labels.len() + label] *= factor;
        self.rebuild_matrix();
        Ok(())
    }
}

fn normalize_log_weights(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// Largest relative detailed-balance defect
/// `|nu_i a_ij - nu_j a_ji| / max(nu_i a_ij, nu_j a_ji, floor)` over pairs.
pub fn check_detailed_balance(gen: &ReversibleGenerator) -> f64 {
    const FLOOR: f64 = 1e-300;
    let a = gen.matrix();
    let nu = gen.nu();
    (0..gen.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            for (j, v) in a.row(i) {
                if j == i {
                    continue;
                }
                let fwd = nu[i] * v;
                let bwd = nu[j] * a.get(j, i);
                let scale = fwd.max(bwd).max(FLOOR);
                worst = worst.max((fwd - bwd).abs() / scale);
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests;
