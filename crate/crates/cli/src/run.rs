//! Runners: one grid point, and the verify / gap / sweep / scaling drivers
//! on top of it.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use gaplab::bochner::{
    certified_k, check_bochner_identity, check_corollary1, default_kernel, m_matrix_bound, verify_axioms,
    CERTIFIED_DENSE_CAP,
};
use gaplab::bounds::{
    applicable_bounds, continuum_bounds, continuum_eps, discrete_eps, discretization_slack, BoundEntry,
    ContinuumModel, QuadratureSpec, KAWASAKI, ZR_POINTWISE, ZR_UNIFORM,
};
use gaplab::generators::check_detailed_balance;
use gaplab::random::gaussian_function;
use gaplab::spectral::{bakry_emery_check, spectral_gap, SpectralResult};
use gaplab::{Error, Model, ReversibleGenerator};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, PointConfig, Task};
use crate::model::{build, cell_grid, describe, estimate_states, particles, radial_potential, site_set};
use crate::output::{append_records, write_summary, Cache, CACHE_DIR, RECORDS_FILE, SCALING_FILE, SUMMARY_FILE};
use crate::record::{
    CertifiedRecord, Check, ContinuumRecord, GapRecord, ResultRecord, Residuals, ScalingRecord, ScalingSummary,
    Timings, VERSION,
};

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// where records, the summary and the cache go; nothing is written
    /// when unset
    pub out_dir: Option<PathBuf>,
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out_dir: None,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

struct PointRun<'a> {
    p: &'a PointConfig,
    gen: ReversibleGenerator,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl PointRun<'_> {
    fn check(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) {
        self.checks.push(Check::le(name, lhs, rhs));
    }

    fn fail(&mut self, name: &str, why: impl std::fmt::Display) {
        self.notes.push(format!("{name}: {why}"));
        self.check(name, 1.0, 0.0);
    }

    /// Slack in `bound <= gap`: birth-death models are truncated.
    fn bound_slack(&self) -> f64 {
        let t = &self.p.tolerances;
        match self.gen.model() {
            Model::Glauber { .. } | Model::ContinuumGlauber { .. } => t.ordering + t.truncation,
            _ => t.ordering,
        }
    }

    fn verify(&mut self, spectral: Option<&SpectralResult>, db: f64) -> Result<Residuals> {
        let p = self.p;
        let t = &p.tolerances;
        let kernel = default_kernel(&self.gen);
        let ax = verify_axioms(&self.gen, &kernel, p.verify.axiom_functions, p.seed)?;
        let n = self.gen.len();
        let gen = &self.gen;
        let (bochner_identity, corollary1) = (0..p.verify.functions as u64)
            .into_par_iter()
            .map(|k| -> Result<(f64, f64)> {
                let f = gaussian_function(n, p.seed.wrapping_add(k));
                Ok((
                    check_bochner_identity(gen, &kernel, &f)?.relative_error,
                    check_corollary1(gen, &kernel, &f)?.relative_error,
                ))
            })
            .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))?;
        let mut res = Residuals {
            a2: Some(ax.a2_residual),
            a3: Some(ax.a3_residual),
            a4: Some(ax.a4_residual),
            bochner_identity: Some(bochner_identity),
            corollary1: Some(corollary1),
            detailed_balance: Some(db),
            ..Residuals::default()
        };
        self.check("a2", ax.a2_residual, t.axioms);
        self.check("a3", ax.a3_residual, t.axioms);
        self.check("a4", ax.a4_residual, t.axioms);
        self.check("bochner_identity", bochner_identity, t.identity);
        self.check("corollary1", corollary1, t.identity);
        self.check("detailed-balance", db, t.detailed_balance);
        if p.verify.bakry_emery {
            match spectral {
                Some(s) => {
                    let be = bakry_emery_check(&self.gen, s, p.verify.functions, p.seed);
                    res.bakry_emery_violation = Some(be.max_violation);
                    res.bakry_emery_eigen_defect = Some(be.eigenvector_defect);
                    self.check("bakry-emery", be.max_violation, t.bakry_emery);
                    self.check("bakry-emery-eigenvector", be.eigenvector_defect, t.bakry_emery);
                }
                None => self.notes.push("bakry-emery: skipped, no spectral gap".into()),
            }
        }
        Ok(res)
    }

    fn certify(&mut self, gap: f64) -> Result<Option<CertifiedRecord>> {
        let states = self.gen.len();
        if states > self.p.solver.certify_limit.min(CERTIFIED_DENSE_CAP) {
            self.notes
                .push(format!("certified-k: skipped, {states} states above the certify limit"));
            return Ok(None);
        }
        match certified_k(&self.gen, &default_kernel(&self.gen)) {
            Ok(c) => {
                let slack = self.p.tolerances.ordering;
                self.check("certified <= gap", c.bound(), gap + slack);
                Ok(Some(CertifiedRecord {
                    k_star: c.k_star,
                    bound: c.bound(),
                }))
            }
            Err(e @ (Error::BoundViolated(_) | Error::Asymmetric(_))) => {
                self.fail("certified-k", e);
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn ordering(&mut self, entries: &[BoundEntry], gap: f64, certified: Option<&CertifiedRecord>) {
        let slack = self.bound_slack();
        let tol = self.p.tolerances.ordering;
        for r in entries.iter().filter_map(BoundEntry::report).filter(|r| !r.vacuous) {
            self.check(format!("{} <= gap", r.name), r.value, gap + slack);
            if r.name == KAWASAKI {
                if let Some(c) = certified {
                    self.check("kawasaki <= certified", r.value, c.bound + tol);
                }
            }
        }
    }

    fn zero_range_chain(&mut self, entries: &[BoundEntry], gap: f64) -> Result<gaplab::bochner::MMatrixBound> {
        let tol = self.p.tolerances.ordering;
        let mm = m_matrix_bound(&self.gen)?;
        let get = |name: &str| entries.iter().find(|e| e.name() == name).and_then(BoundEntry::report);
        let pointwise = get(ZR_POINTWISE).filter(|r| !r.vacuous).map(|r| r.value);
        if let (Some(u), Some(pw)) = (get(ZR_UNIFORM).filter(|r| !r.vacuous).map(|r| r.value), pointwise) {
            self.check("zr-uniform <= zr-pointwise", u, pw + tol);
        }
        if let Some(pw) = pointwise {
            if !mm.cobound_vacuous {
                self.check("zr-pointwise <= cobound", pw, mm.cobound_value + tol);
            }
        }
        if !mm.cobound_vacuous && !mm.teom_vacuous {
            self.check("cobound <= teom", mm.cobound_value, mm.teom_delta + tol);
        }
        if !mm.teom_vacuous {
            self.check("teom <= gap", mm.teom_delta, gap + tol);
        }
        Ok(mm)
    }

    fn continuum(&mut self, gap: f64) -> Result<Option<ContinuumRecord>> {
        let p = self.p;
        let model = match self.gen.model() {
            Model::ContinuumKawasaki { grid, .. } => ContinuumModel::Kawasaki {
                particles: particles(p)?,
                volume: grid.volume(),
            },
            Model::ContinuumGlauber { activity, .. } => ContinuumModel::Glauber { activity: *activity },
            _ => return Ok(None),
        };
        let phi = radial_potential(p)?;
        let grid = cell_grid(&p.model.geometry)?;
        let beta = p.model.beta;
        let eps = continuum_eps(&QuadratureSpec::new(&phi, p.tolerances.quadrature), beta)?;
        let eps_h = discrete_eps(&grid, &phi, beta);
        let slack = discretization_slack(&model, eps_h, eps.value);
        let bounds = continuum_bounds(&model, eps.value);
        let ordering = self.bound_slack();
        for b in bounds.iter().filter(|b| !b.vacuous) {
            self.check(format!("{} - slack <= gap", b.name), b.value - slack, gap + ordering);
        }
        Ok(Some(ContinuumRecord {
            eps: eps.value,
            eps_error: eps.error_bound(),
            eps_h,
            slack,
            bounds,
        }))
    }
}

fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Builds the model of one point and runs its tasks.
pub fn run_point(p: &PointConfig) -> Result<ResultRecord> {
    let start = Instant::now();
    let gen = build(p)?;
    let mut timings = Timings {
        build_s: seconds(start),
        ..Timings::default()
    };
    let model = describe(p, &gen)?;
    let mut run = PointRun {
        p,
        gen,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let t = &p.tolerances;
    let wants_gap = p.wants(Task::Gap) || p.wants(Task::Bounds) || p.wants(Task::Scaling);
    let db = check_detailed_balance(&run.gen);

    let clock = Instant::now();
    let spectral = if wants_gap || (p.wants(Task::Verify) && p.verify.bakry_emery) {
        match spectral_gap(&run.gen, &p.solver.settings()) {
            Ok(s) => Some(s),
            Err(e @ Error::DetailedBalance { .. }) => {
                run.fail("spectral-gap", e);
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    timings.gap_s = seconds(clock);

    let clock = Instant::now();
    let residuals = if p.wants(Task::Verify) {
        run.verify(spectral.as_ref(), db)?
    } else {
        Residuals::default()
    };
    timings.verify_s = seconds(clock);

    let clock = Instant::now();
    let mut gap = None;
    let mut certified = None;
    let mut bounds = Vec::new();
    let mut m_matrix = None;
    let mut continuum = None;
    let mut scaling = None;
    if let (true, Some(s)) = (wants_gap, &spectral) {
        run.check("eigen-residual", s.residual, t.eigen * s.gap.max(1.0));
        gap = Some(GapRecord {
            value: s.gap,
            method: s.method,
            residual: s.residual,
            null_residual: s.null_residual,
            spectrum_head: s.spectrum_head.clone(),
        });
        if p.wants(Task::Gap) || p.wants(Task::Bounds) {
            certified = run.certify(s.gap)?;
        }
        if p.wants(Task::Bounds) {
            bounds = applicable_bounds(&run.gen)?;
            run.ordering(&bounds, s.gap, certified.as_ref());
            if matches!(run.gen.model(), Model::ZeroRange { .. }) {
                m_matrix = Some(run.zero_range_chain(&bounds, s.gap)?);
            }
            continuum = run.continuum(s.gap)?;
        }
        if p.wants(Task::Scaling) {
            let sites = site_set(&p.model.geometry)?;
            let length = sites.len();
            let diameter = sites.diameter();
            scaling = Some(ScalingRecord {
                length,
                diameter,
                gap_diam2: s.gap * diameter * diameter,
                gap_length2: s.gap * (length * length) as f64,
            });
        }
    }
    timings.bounds_s = seconds(clock);
    timings.total_s = seconds(start);

    let passed = run.checks.iter().all(|c| c.passed);
    Ok(ResultRecord {
        config_hash: p.hash(),
        point: p.point.clone(),
        model,
        gap,
        certified,
        m_matrix,
        bounds,
        continuum,
        scaling,
        residuals,
        checks: run.checks,
        notes: run.notes,
        passed,
        timings,
        version: VERSION.to_string(),
    })
}

fn out_dir(config: &ExperimentConfig, opts: &RunOptions) -> Option<PathBuf> {
    opts.out_dir.clone().or_else(|| config.output.dir.clone())
}

/// Runs the points on `opts.workers` threads, reusing cached records, and
/// writes the record stream and summary.
fn execute(config: &ExperimentConfig, points: &[PointConfig], opts: &RunOptions) -> Result<Vec<ResultRecord>> {
    let dir = out_dir(config, opts);
    let cache = match &dir {
        Some(d) => Some(Cache::open(&d.join(CACHE_DIR))?),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers.max(1)).build()?;
    let records = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                if let Some(hit) = cache.as_ref().and_then(|c| c.get(&p.hash())) {
                    return Ok(hit);
                }
                let record = run_point(p)?;
                if let Some(c) = &cache {
                    c.put(&record)?;
                }
                Ok(record)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    if let Some(d) = &dir {
        append_records(&d.join(RECORDS_FILE), &records)?;
        write_summary(&d.join(SUMMARY_FILE), &records)?;
    }
    Ok(records)
}

fn check_budget(config: &ExperimentConfig, points: &[PointConfig]) -> Result<()> {
    let mut total: usize = 0;
    for p in points {
        total = total.saturating_add(estimate_states(p)?);
    }
    let cap = config.sweep.max_total_states;
    if total > cap {
        bail!(
            "sweep refused: {} points need an estimated {total} states in total, above the budget of {cap} (sweep.max_total_states)",
            points.len()
        );
    }
    Ok(())
}

fn require(config: &ExperimentConfig, any_of: &[Task]) -> Result<()> {
    config.validate()?;
    if !any_of.iter().any(|t| config.tasks.contains(t)) {
        bail!("tasks: the config does not request the {} task", any_of[0].name());
    }
    Ok(())
}

/// Axiom, identity, detailed-balance and Bakry-Emery checks on the model.
pub fn run_verify(config: &ExperimentConfig, opts: &RunOptions) -> Result<ResultRecord> {
    require(config, &[Task::Verify])?;
    let point = config.resolve(&BTreeMap::new(), &[Task::Verify])?;
    Ok(execute(config, &[point], opts)?.remove(0))
}

/// Exact gap, certified constant and every applicable closed-form bound.
pub fn run_gap_and_bounds(config: &ExperimentConfig, opts: &RunOptions) -> Result<ResultRecord> {
    require(config, &[Task::Gap, Task::Bounds])?;
    let point = config.resolve(&BTreeMap::new(), &[Task::Gap, Task::Bounds])?;
    Ok(execute(config, &[point], opts)?.remove(0))
}

/// One record per grid point.
pub fn run_sweep(config: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRecord>> {
    require(config, &[Task::Sweep])?;
    let tasks = config.point_tasks();
    let points = config
        .points()
        .iter()
        .map(|pt| config.resolve(pt, &tasks))
        .collect::<Result<Vec<_>>>()?;
    check_budget(config, &points)?;
    execute(config, &points, opts)
}

/// Gap against segment length for nearest-neighbour exchange dynamics.
pub fn run_scaling(config: &ExperimentConfig, opts: &RunOptions) -> Result<(Vec<ResultRecord>, ScalingSummary)> {
    require(config, &[Task::Scaling])?;
    let points = config
        .points()
        .iter()
        .map(|pt| config.resolve(pt, &[Task::Scaling]))
        .collect::<Result<Vec<_>>>()?;
    check_budget(config, &points)?;
    let records = execute(config, &points, opts)?;
    let rows: Vec<&ScalingRecord> = records.iter().filter_map(|r| r.scaling.as_ref()).collect();
    if rows.len() != records.len() {
        bail!("scaling: some points have no spectral gap");
    }
    let min = rows.iter().map(|s| s.gap_diam2).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|s| s.gap_diam2).fold(f64::NEG_INFINITY, f64::max);
    let summary = ScalingSummary {
        sizes: rows.iter().map(|s| s.length).collect(),
        min_gap_diam2: min,
        max_gap_diam2: max,
        ratio: max / min,
    };
    if let Some(d) = out_dir(config, opts) {
        std::fs::write(d.join(SCALING_FILE), serde_json::to_vec_pretty(&summary)?)?;
    }
    Ok((records, summary))
}
