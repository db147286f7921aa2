//! Experiment configuration: one TOML file describes one experiment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gaplab::generators::RateFunction;
use gaplab::potentials::RadialProfile;
use gaplab::spectral::{Method, SolverSettings, DEFAULT_AUTO_DENSE_LIMIT, DEFAULT_DENSE_CAP};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Verify,
    Gap,
    Bounds,
    Sweep,
    Scaling,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Verify => "verify",
            Task::Gap => "gap",
            Task::Bounds => "bounds",
            Task::Sweep => "sweep",
            Task::Scaling => "scaling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    KawasakiComplete,
    KawasakiNn,
    ZeroRange,
    Glauber,
    ContinuumKawasaki,
    ContinuumGlauber,
}

impl ModelKind {
    pub fn conserves_particles(self) -> bool {
        matches!(
            self,
            ModelKind::KawasakiComplete | ModelKind::KawasakiNn | ModelKind::ZeroRange | ModelKind::ContinuumKawasaki
        )
    }

    pub fn is_continuum(self) -> bool {
        matches!(self, ModelKind::ContinuumKawasaki | ModelKind::ContinuumGlauber)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    Complete { sites: usize },
    Segment { length: usize },
    Box { lengths: Vec<usize> },
    Torus { length: usize, dimension: usize },
    /// cubic cells of side `step` tiling a box with the given side lengths
    Cells { lengths: Vec<f64>, step: f64 },
}

impl Geometry {
    fn resize(&mut self, size: usize) {
        match self {
            Geometry::Complete { sites } => *sites = size,
            Geometry::Segment { length } | Geometry::Torus { length, .. } => *length = size,
            Geometry::Box { lengths } => lengths.iter_mut().for_each(|l| *l = size),
            Geometry::Cells { lengths, .. } => lengths.iter_mut().for_each(|l| *l = size as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fault {
    pub state: usize,
    pub label: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub geometry: Geometry,
    /// name of an entry of `[potentials]`; no interaction when absent
    #[serde(default)]
    pub potential: Option<String>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub particles: Option<usize>,
    /// `N = floor(fraction * sites)`, used when `particles` is absent
    #[serde(default)]
    pub particle_fraction: Option<f64>,
    #[serde(default)]
    pub rates: Option<RateFunction>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub activity: Option<f64>,
    #[serde(default)]
    pub cap: Option<u32>,
    /// multiplies one rate after assembly
    #[serde(default)]
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub points: Vec<Vec<i64>>,
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub displacement: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub sites: [usize; 2],
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Zero,
    /// `J eta_x eta_y` on every edge of `geometry` (default: the model's)
    NearestNeighbour {
        coupling: f64,
        #[serde(default)]
        geometry: Option<Geometry>,
    },
    /// explicit `(support, table)` terms, table indexed by the support
    /// occupations read as a binary number
    Terms { terms: Vec<TermSpec> },
    /// `J_xx = diagonal`, `J_xy = off_diagonal` along edges
    Quadratic { diagonal: f64, off_diagonal: f64 },
    QuadraticMatrix { j: Vec<f64> },
    OccupationKernel {
        coupling: Vec<f64>,
        #[serde(default)]
        field: Option<Vec<f64>>,
    },
    LatticeKernel { entries: Vec<KernelEntry> },
    PowerLawKernel { amplitude: f64, exponent: f64 },
    PairTable { cap: u32, pairs: Vec<PairEntry> },
    Radial { shape: RadialProfile },
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::Zero => "zero",
            PotentialSpec::NearestNeighbour { .. } => "nearest-neighbour",
            PotentialSpec::Terms { .. } => "terms",
            PotentialSpec::Quadratic { .. } => "quadratic",
            PotentialSpec::QuadraticMatrix { .. } => "quadratic-matrix",
            PotentialSpec::OccupationKernel { .. } => "occupation-kernel",
            PotentialSpec::LatticeKernel { .. } => "lattice-kernel",
            PotentialSpec::PowerLawKernel { .. } => "power-law-kernel",
            PotentialSpec::PairTable { .. } => "pair-table",
            PotentialSpec::Radial { .. } => "radial",
        }
    }

    fn fits(&self, kind: ModelKind) -> bool {
        use PotentialSpec as P;
        match kind {
            _ if matches!(self, P::Zero) => !kind.is_continuum(),
            ModelKind::KawasakiComplete | ModelKind::KawasakiNn => {
                matches!(self, P::NearestNeighbour { .. } | P::Terms { .. })
            }
            ModelKind::ZeroRange => matches!(self, P::Quadratic { .. } | P::QuadraticMatrix { .. }),
            ModelKind::Glauber => matches!(
                self,
                P::OccupationKernel { .. } | P::LatticeKernel { .. } | P::PowerLawKernel { .. } | P::PairTable { .. }
            ),
            ModelKind::ContinuumKawasaki | ModelKind::ContinuumGlauber => matches!(self, P::Radial { .. }),
        }
    }

    fn resize(&mut self, size: usize) {
        if let PotentialSpec::NearestNeighbour { geometry: Some(g), .. } = self {
            g.resize(size);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// every combination of the grid values
    #[default]
    Product,
    /// the i-th values of all grids together; grids of equal length
    Zip,
}

fn default_budget() -> usize {
    5_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub mode: GridMode,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub particles: Option<Vec<usize>>,
    #[serde(default)]
    pub size: Option<Vec<usize>>,
    #[serde(default)]
    pub cap: Option<Vec<u32>>,
    #[serde(default)]
    pub step: Option<Vec<f64>>,
    /// refuse sweeps whose state spaces add up to more than this
    #[serde(default = "default_budget")]
    pub max_total_states: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            mode: GridMode::Product,
            beta: None,
            particles: None,
            size: None,
            cap: None,
            step: None,
            max_total_states: default_budget(),
        }
    }
}

impl SweepSpec {
    fn grids(&self) -> Vec<(&'static str, Vec<f64>)> {
        let mut out = Vec::new();
        if let Some(v) = &self.beta {
            out.push(("beta", v.clone()));
        }
        if let Some(v) = &self.particles {
            out.push(("particles", v.iter().map(|&x| x as f64).collect()));
        }
        if let Some(v) = &self.size {
            out.push(("size", v.iter().map(|&x| x as f64).collect()));
        }
        if let Some(v) = &self.cap {
            out.push(("cap", v.iter().map(|&x| f64::from(x)).collect()));
        }
        if let Some(v) = &self.step {
            out.push(("step", v.clone()));
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.grids().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub method: Method,
    pub dense_cap: usize,
    pub auto_dense_limit: usize,
    /// residual tolerance of the iterative eigensolver
    pub tol: f64,
    /// largest state space for the certified comparison constant
    pub certify_limit: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            method: s.method,
            dense_cap: DEFAULT_DENSE_CAP,
            auto_dense_limit: DEFAULT_AUTO_DENSE_LIMIT,
            tol: s.tol,
            certify_limit: 1000,
        }
    }
}

impl SolverSpec {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            method: self.method,
            dense_cap: self.dense_cap,
            auto_dense_limit: self.auto_dense_limit,
            tol: self.tol,
            ..SolverSettings::default()
        }
    }
}

/// Pass/fail thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// relative error of the second-difference identities
    pub identity: f64,
    /// relative residuals of the axioms on `R`
    pub axioms: f64,
    /// eigenpair residual, relative to `max(1, gap)`
    pub eigen: f64,
    pub detailed_balance: f64,
    /// relative Bakry-Emery violation and eigenvector defect
    pub bakry_emery: f64,
    /// slack in `bound <= gap`
    pub ordering: f64,
    /// extra slack for birth-death models truncated at a finite cap
    pub truncation: f64,
    /// quadrature tolerance for continuum `eps`
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            axioms: 1e-10,
            eigen: 1e-8,
            detailed_balance: 1e-12,
            bakry_emery: 1e-8,
            ordering: 1e-8,
            truncation: 1e-4,
            quadrature: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    /// random functions for the second-difference identities
    pub functions: usize,
    /// random bounded `F` for the axiom checks
    pub axiom_functions: usize,
    pub bakry_emery: bool,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            functions: 100,
            axiom_functions: 200,
            bakry_emery: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub tasks: Vec<Task>,
    pub model: ModelSpec,
    #[serde(default)]
    pub potentials: BTreeMap<String, PotentialSpec>,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Everything one grid point's record depends on. Its hash names the
/// record in the cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub model: ModelSpec,
    pub potential: PotentialSpec,
    /// grid coordinates of this point
    pub point: BTreeMap<String, f64>,
    pub tasks: Vec<Task>,
    pub solver: SolverSpec,
    pub tolerances: Tolerances,
    pub verify: VerifySpec,
    pub seed: u64,
}

impl PointConfig {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("point configs serialize");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn wants(&self, task: Task) -> bool {
        self.tasks.contains(&task)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))
    }

    /// Parses without validating, so command-line overrides can fill in
    /// fields first.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            bail!("tasks: at least one task is required");
        }
        let m = &self.model;
        let potential = match &m.potential {
            Some(name) => match self.potentials.get(name) {
                Some(p) => p.clone(),
                None => bail!("model.potential: '{name}' is not defined under [potentials]"),
            },
            None if m.kind.is_continuum() => bail!("model.potential: continuum models need a radial potential"),
            None => PotentialSpec::Zero,
        };
        if !potential.fits(m.kind) {
            bail!(
                "model.potential: a {} potential does not fit a {:?} model",
                potential.name(),
                m.kind
            );
        }
        if !(m.beta.is_finite() && m.beta >= 0.0) {
            bail!("model.beta: {} must be finite and >= 0", m.beta);
        }
        let is_cells = matches!(m.geometry, Geometry::Cells { .. });
        if m.kind.is_continuum() != is_cells {
            bail!("model.geometry: continuum models use cells, lattice models do not");
        }
        if m.kind.conserves_particles() && m.particles.is_none() && m.particle_fraction.is_none() {
            bail!("model.particles: required by a {:?} model", m.kind);
        }
        if let Some(f) = m.particle_fraction {
            if !(0.0..=1.0).contains(&f) {
                bail!("model.particle_fraction: {f} is not in [0, 1]");
            }
        }
        match m.kind {
            ModelKind::Glauber if m.lambda.is_none() => bail!("model.lambda: required by a glauber model"),
            ModelKind::ContinuumGlauber if m.activity.is_none() => {
                bail!("model.activity: required by a continuum-glauber model")
            }
            ModelKind::Glauber | ModelKind::ContinuumGlauber if m.cap.is_none() && self.sweep.cap.is_none() => {
                bail!("model.cap: birth-death models need an occupation cap")
            }
            ModelKind::ZeroRange => {}
            _ if m.rates.is_some() => bail!("model.rates: only zero-range models take rate functions"),
            _ => {}
        }
        for (name, grid) in self.sweep.grids() {
            if grid.is_empty() {
                bail!("sweep.{name}: grid is empty");
            }
        }
        if self.sweep.mode == GridMode::Zip {
            let lens: Vec<usize> = self.sweep.grids().iter().map(|(_, g)| g.len()).collect();
            if lens.windows(2).any(|w| w[0] != w[1]) {
                bail!("sweep.mode: zipped grids must have equal lengths, got {lens:?}");
            }
        }
        if self.sweep.step.is_some() && !is_cells {
            bail!("sweep.step: only cell geometries have a step");
        }
        if self.tasks.contains(&Task::Sweep) && self.sweep.is_empty() {
            bail!("sweep: the sweep task needs at least one grid");
        }
        if self.tasks.contains(&Task::Scaling) {
            if m.kind != ModelKind::KawasakiNn || !matches!(m.geometry, Geometry::Segment { .. }) {
                bail!("tasks: scaling runs on a kawasaki-nn model on a segment");
            }
            if self.sweep.size.is_none() {
                bail!("sweep.size: the scaling task needs a list of segment lengths");
            }
        }
        if self.tasks.contains(&Task::Verify) && self.seed.is_none() {
            bail!("seed: required by the verify task (random test functions)");
        }
        Ok(())
    }

    /// Grid points in a fixed order: the last grid varies fastest.
    pub fn points(&self) -> Vec<BTreeMap<String, f64>> {
        let grids = self.sweep.grids();
        if grids.is_empty() {
            return vec![BTreeMap::new()];
        }
        match self.sweep.mode {
            GridMode::Zip => (0..grids[0].1.len())
                .map(|i| grids.iter().map(|(k, g)| (k.to_string(), g[i])).collect())
                .collect(),
            GridMode::Product => {
                let mut out = vec![BTreeMap::new()];
                for (k, g) in &grids {
                    out = out
                        .into_iter()
                        .flat_map(|p: BTreeMap<String, f64>| {
                            g.iter().map(move |v| {
                                let mut q = p.clone();
                                q.insert(k.to_string(), *v);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    /// The config of one grid point running `tasks`.
    pub fn resolve(&self, point: &BTreeMap<String, f64>, tasks: &[Task]) -> Result<PointConfig> {
        self.validate()?;
        let mut model = self.model.clone();
        let mut potential = match &model.potential {
            Some(name) => self.potentials[name].clone(),
            None => PotentialSpec::Zero,
        };
        for (k, &v) in point {
            match k.as_str() {
                "beta" => model.beta = v,
                "particles" => {
                    model.particles = Some(v as usize);
                    model.particle_fraction = None;
                }
                "size" => {
                    model.geometry.resize(v as usize);
                    potential.resize(v as usize);
                }
                "cap" => model.cap = Some(v as u32),
                "step" => {
                    if let Geometry::Cells { step, .. } = &mut model.geometry {
                        *step = v;
                    }
                }
                other => bail!("sweep: unknown grid '{other}'"),
            }
        }
        let mut tasks = tasks.to_vec();
        tasks.sort();
        tasks.dedup();
        Ok(PointConfig {
            model,
            potential,
            point: point.clone(),
            tasks,
            solver: self.solver.clone(),
            tolerances: self.tolerances.clone(),
            verify: self.verify.clone(),
            seed: self.seed.unwrap_or(0),
        })
    }

    /// Tasks run at every point of a sweep: the requested per-point tasks,
    /// or gap and bounds when none are listed.
    pub fn point_tasks(&self) -> Vec<Task> {
        let tasks: Vec<Task> = self
            .tasks
            .iter()
            .copied()
            .filter(|t| matches!(t, Task::Verify | Task::Gap | Task::Bounds))
            .collect();
        if tasks.is_empty() {
            vec![Task::Gap, Task::Bounds]
        } else {
            tasks
        }
    }
}
