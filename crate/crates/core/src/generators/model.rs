use serde::{Deserialize, Serialize};

use super::{Direction, MoveKind, MoveLabel};
use crate::potentials::{LatticePotential, OccupationPairPotential, QuadraticEnergy, RadialPairPotential};
use crate::statespace::{Configuration, SiteSet};
use crate::{Error, Result};

/// Jump-rate function `g_x` of a zero-range type model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateFunction {
    /// `g(k) = k`
    Linear,
    /// `g(0) = 0`, `g(k) = 1` for `k >= 1`
    Constant,
    /// `g(0) = 0`, `g(k) = exp(alpha k)` for `k >= 1`
    Exponential { alpha: f64 },
    /// `g(k) = values[k]`, extended by the last entry.
    Table { values: Vec<f64> },
}

impl RateFunction {
    pub fn eval(&self, k: u32) -> f64 {
        match self {
            RateFunction::Linear => k as f64,
            RateFunction::Constant => f64::from(u8::from(k > 0)),
            RateFunction::Exponential { alpha } => {
                if k == 0 {
                    0.0
                } else {
                    (alpha * k as f64).exp()
                }
            }
            RateFunction::Table { values } => match values.get(k as usize) {
                Some(v) => *v,
                None => values.last().copied().unwrap_or(0.0),
            },
        }
    }

    /// `g(0) = 0` and `g(k) >= 1` for `1 <= k <= up_to`.
    pub fn check(&self, up_to: u32) -> Result<()> {
        if self.eval(0) != 0.0 {
            return Err(Error::InvalidRates("g(0) must vanish".into()));
        }
        for k in 1..=up_to {
            let g = self.eval(k);
            if !(g.is_finite() && g >= 1.0) {
                return Err(Error::InvalidRates(format!("g({k}) = {g} violates inf g >= 1")));
            }
        }
        Ok(())
    }

    /// `ln g(1) + .. + ln g(k)`.
    pub fn log_factorial(&self, k: u32) -> f64 {
        (1..=k).map(|j| self.eval(j).ln()).sum()
    }
}

/// Uniform grid of cubic cells of side `step` covering the box
/// `[0, L_1) x .. x [0, L_d)`; particles sit at cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    lengths: Vec<f64>,
    step: f64,
    counts: Vec<usize>,
}

impl CellGrid {
    pub fn new(lengths: Vec<f64>, step: f64) -> Result<Self> {
        if lengths.is_empty() || lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidArgument("box side lengths must be positive".into()));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument("grid step must be positive".into()));
        }
        let counts = lengths.iter().map(|l| ((l / step) - 1e-9).ceil().max(1.0) as usize).collect();
        Ok(Self { lengths, step, counts })
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn cells(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.step.powi(self.lengths.len() as i32)
    }

    pub fn site_set(&self) -> SiteSet {
        SiteSet::lattice_box(&self.counts)
    }

    /// Matrix `phi_h(u, v) = phi(h |u - v|)` over cell centres; the diagonal
    /// holds the same-cell interaction `phi(0)`.
    pub fn sample(&self, potential: &RadialPairPotential) -> Vec<f64> {
        let sites = self.site_set();
        let pts = sites.sites();
        let n = pts.len();
        let mut out = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                let disp: Vec<f64> = pts[u].iter().zip(&pts[v]).map(|(a, b)| (a - b) as f64 * self.step).collect();
                out[u * n + v] = potential.value_at(&disp);
            }
        }
        out
    }
}

/// Parameters of a model family, carried by its generator so rates can be
/// evaluated on arbitrary configurations (including ones outside the
/// enumerated space).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    KawasakiComplete {
        sites: usize,
        potential: LatticePotential,
        beta: f64,
    },
    KawasakiNn {
        sites: usize,
        edges: Vec<(usize, usize)>,
        potential: LatticePotential,
        beta: f64,
    },
    ZeroRange {
        rates: Vec<RateFunction>,
        energy: QuadraticEnergy,
    },
    Glauber {
        lambda: f64,
        potential: OccupationPairPotential,
        beta: f64,
        cap: u32,
    },
    ContinuumKawasaki {
        grid: CellGrid,
        potential: RadialPairPotential,
        beta: f64,
        cell_potential: Vec<f64>,
    },
    ContinuumGlauber {
        grid: CellGrid,
        potential: RadialPairPotential,
        beta: f64,
        activity: f64,
        cap: u32,
        lattice: OccupationPairPotential,
    },
}

impl Model {
    pub fn tag(&self) -> &'static str {
        match self {
            Model::KawasakiComplete { .. } => "kawasaki-complete",
            Model::KawasakiNn { .. } => "kawasaki-nn",
            Model::ZeroRange { .. } => "zero-range",
            Model::Glauber { .. } => "glauber",
            Model::ContinuumKawasaki { .. } => "continuum-kawasaki",
            Model::ContinuumGlauber { .. } => "continuum-glauber",
        }
    }

    pub fn sites(&self) -> usize {
        match self {
            Model::KawasakiComplete { sites, .. } | Model::KawasakiNn { sites, .. } => *sites,
            Model::ZeroRange { rates, .. } => rates.len(),
            Model::Glauber { potential, .. } => potential.sites(),
            Model::ContinuumKawasaki { grid, .. } | Model::ContinuumGlauber { grid, .. } => grid.cells(),
        }
    }

    /// Activity `lambda` and inverse temperature of the birth-death view,
    /// with the lattice interaction (continuum Glauber maps onto it).
    pub fn glauber_view(&self) -> Option<(f64, &OccupationPairPotential, f64, u32)> {
        match self {
            Model::Glauber { lambda, potential, beta, cap } => Some((*lambda, potential, *beta, *cap)),
            Model::ContinuumGlauber { grid, activity, lattice, beta, cap, .. } => {
                Some((activity * grid.cell_volume(), lattice, *beta, *cap))
            }
            _ => None,
        }
    }

    /// The move labels of the model, in a fixed order.
    pub fn labels(&self) -> Vec<MoveLabel> {
        let n = self.sites();
        match self {
            Model::KawasakiComplete { .. } => {
                let mut out = Vec::new();
                for x in 0..n {
                    for z in x + 1..n {
                        out.push(MoveLabel::new(MoveKind::Exchange, x, z, Direction::Both));
                    }
                }
                out
            }
            Model::KawasakiNn { edges, .. } => edges
                .iter()
                .map(|&(x, z)| MoveLabel::new(MoveKind::Exchange, x, z, Direction::Both))
                .collect(),
            Model::ZeroRange { .. } | Model::ContinuumKawasaki { .. } => {
                let mut out = Vec::with_capacity(n * n);
                for x in 0..n {
                    for z in 0..n {
                        out.push(MoveLabel::new(MoveKind::Move, x, z, Direction::Both));
                    }
                }
                out
            }
            Model::Glauber { .. } | Model::ContinuumGlauber { .. } => {
                let mut out: Vec<MoveLabel> = (0..n)
                    .map(|x| MoveLabel::new(MoveKind::Birth, x, x, Direction::Forward))
                    .collect();
                out.extend((0..n).map(|x| MoveLabel::new(MoveKind::Death, x, x, Direction::Backward)));
                out
            }
        }
    }

    /// Index of the inverse of each label within `labels()`.
    pub fn inverse_labels(&self, labels: &[MoveLabel]) -> Vec<usize> {
        let n = self.sites();
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| match l.kind {
                MoveKind::Exchange => i,
                MoveKind::Move => l.z * n + l.x,
                MoveKind::Birth => n + l.x,
                MoveKind::Death => l.x,
            })
            .collect()
    }

    fn cap(&self) -> Option<u32> {
        match self {
            Model::Glauber { cap, .. } | Model::ContinuumGlauber { cap, .. } => Some(*cap),
            _ => None,
        }
    }

    /// Image of a configuration under a move; `None` when a birth is
    /// suppressed by the occupation cap.
    pub fn apply(&self, eta: &Configuration, label: &MoveLabel) -> Option<Configuration> {
        match label.kind {
            MoveKind::Exchange => Some(eta.apply_exchange(label.x, label.z).expect("labels have distinct sites")),
            MoveKind::Move => Some(eta.apply_move(label.x, label.z)),
            MoveKind::Birth => eta.apply_birth(label.x, self.cap().unwrap_or(u32::MAX)),
            MoveKind::Death => Some(eta.apply_death(label.x)),
        }
    }

    /// Unnormalized log Gibbs weight of a configuration.
    pub fn log_weight(&self, eta: &Configuration) -> Result<f64> {
        let e = eta.occupations();
        Ok(match self {
            Model::KawasakiComplete { potential, beta, .. } | Model::KawasakiNn { potential, beta, .. } => {
                -beta * potential.energy(eta)?
            }
            Model::ZeroRange { rates, energy } => {
                -energy.energy(eta) - rates.iter().zip(e).map(|(g, &k)| g.log_factorial(k)).sum::<f64>()
            }
            Model::Glauber { .. } | Model::ContinuumGlauber { .. } => {
                let (lambda, potential, beta, _) = self.glauber_view().expect("birth-death model");
                let ln_l = lambda.ln();
                let mut acc = -beta * potential.energy(eta)?;
                for &k in e {
                    acc += k as f64 * ln_l - ln_factorial(k);
                }
                acc
            }
            Model::ContinuumKawasaki { beta, cell_potential, .. } => {
                let n = e.len();
                let mut h = 0.0;
                for u in 0..n {
                    let ku = e[u] as f64;
                    h += cell_potential[u * n + u] * ku * (ku - 1.0) / 2.0;
                    for v in u + 1..n {
                        h += cell_potential[u * n + v] * ku * e[v] as f64;
                    }
                }
                -beta * h - e.iter().map(|&k| ln_factorial(k)).sum::<f64>()
            }
        })
    }

    /// Rate `c(eta, label)` evaluated from the model formulas. Defined for
    /// any configuration of the right length.
    pub fn rate(&self, eta: &Configuration, label: &MoveLabel) -> Result<f64> {
        let n = self.sites() as f64;
        Ok(match self {
            Model::KawasakiComplete { potential, beta, .. } => {
                (-0.5 * beta * potential.grad_exchange(eta, label.x, label.z)?).exp() / n
            }
            Model::KawasakiNn { potential, beta, .. } => (-0.5 * beta * potential.grad_exchange(eta, label.x, label.z)?).exp(),
            Model::ZeroRange { rates, energy } => zero_range_rate(rates, energy, eta, label.x),
            Model::Glauber { .. } | Model::ContinuumGlauber { .. } => {
                let (lambda, potential, beta, cap) = self.glauber_view().expect("birth-death model");
                match label.kind {
                    MoveKind::Birth => {
                        if eta.get(label.x) >= cap {
                            0.0
                        } else {
                            lambda * (-beta * potential.grad_birth(eta, label.x)?).exp()
                        }
                    }
                    _ => eta.get(label.x) as f64,
                }
            }
            Model::ContinuumKawasaki { beta, cell_potential, .. } => {
                let (u, v) = (label.x, label.z);
                let ku = eta.get(u);
                if ku == 0 {
                    return Ok(0.0);
                }
                let cells = self.sites();
                let mut field = 0.0;
                for (w, &k) in eta.occupations().iter().enumerate() {
                    let others = if w == u { k - 1 } else { k };
                    field += others as f64 * cell_potential[w * cells + v];
                }
                ku as f64 / n * (-beta * field).exp()
            }
        })
    }
}

/// `c_x(eta) = (1/n) g_x(eta_x) exp(-grad_x^- H(eta))`, also used off the
/// fixed-N space.
pub(crate) fn zero_range_rate(rates: &[RateFunction], energy: &QuadraticEnergy, eta: &Configuration, x: usize) -> f64 {
    let k = eta.get(x);
    if k == 0 {
        return 0.0;
    }
    rates[x].eval(k) * (-energy.grad_death(eta, x)).exp() / rates.len() as f64
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_functions() {
        assert_eq!(RateFunction::Linear.eval(3), 3.0);
        assert_eq!(RateFunction::Constant.eval(0), 0.0);
        assert_eq!(RateFunction::Constant.eval(5), 1.0);
        let t = RateFunction::Table { values: vec![0.0, 1.0, 3.0] };
        assert_eq!(t.eval(7), 3.0);
        assert!(RateFunction::Table { values: vec![0.0, 0.5] }.check(2).is_err());
        assert!(RateFunction::Table { values: vec![1.0, 1.0] }.check(2).is_err());
        assert!(RateFunction::Linear.check(10).is_ok());
        assert!((RateFunction::Linear.log_factorial(4) - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn grid_geometry() {
        let g = CellGrid::new(vec![1.0], 0.25).unwrap();
        assert_eq!(g.cells(), 4);
        assert_eq!(g.cell_volume(), 0.25);
        let g2 = CellGrid::new(vec![1.0, 0.5], 0.25).unwrap();
        assert_eq!(g2.counts(), &[4, 2]);
        assert!(CellGrid::new(vec![1.0], 0.0).is_err());
    }
}
