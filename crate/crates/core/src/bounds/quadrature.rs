use serde::{Deserialize, Serialize};

use crate::generators::CellGrid;
use crate::potentials::{RadialPairPotential, RadialProfile};
use crate::{Error, Result};

// Gauss-Kronrod 7/15 nodes on [-1, 1] (nonnegative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 200_000;
const MAX_RADIUS: f64 = 1e30;

/// Where the radial integral is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum Cutoff {
    /// the support radius, or the smallest radius whose tail bound fits
    /// half of the tolerance
    Auto,
    /// a given radius; rejected if its tail bound exceeds half of the
    /// tolerance
    Fixed { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub dimension: usize,
    pub profile: RadialProfile,
    /// bound on quadrature error plus truncated tail
    pub abs_tol: f64,
    pub cutoff: Cutoff,
}

impl QuadratureSpec {
    pub fn new(potential: &RadialPairPotential, abs_tol: f64) -> Self {
        Self {
            dimension: potential.dimension(),
            profile: potential.profile().clone(),
            abs_tol,
            cutoff: Cutoff::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumEps {
    pub value: f64,
    /// summed Gauss-Kronrod error estimates
    pub quadrature_error: f64,
    /// bound on the integral beyond the cutoff
    pub tail_bound: f64,
    pub cutoff_radius: f64,
    pub intervals: usize,
}

impl ContinuumEps {
    pub fn error_bound(&self) -> f64 {
        self.quadrature_error + self.tail_bound
    }
}

/// Surface area of the unit sphere in `R^d`.
pub fn sphere_surface(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_surface(d - 2) / (d - 2) as f64,
    }
}

fn profile_max(profile: &RadialProfile) -> f64 {
    match profile {
        RadialProfile::Indicator { height, .. } => *height,
        RadialProfile::ExponentialDecay { amplitude, .. } | RadialProfile::PowerTail { amplitude, .. } => *amplitude,
        RadialProfile::Tabulated { values, .. } => values.iter().copied().fold(0.0, f64::max),
    }
}

/// `Gamma(d, x) / (d-1)! = e^{-x} sum_{k<d} x^k / k!`
fn upper_gamma_ratio(d: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..d {
        term *= x / k as f64;
        sum += term;
    }
    (-x).exp() * sum
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// Bound on `int_{|x| > r} (1 - e^{-beta phi})`, using `1 - e^{-u} <= u`
/// on the decaying profiles.
fn tail_bound(spec: &QuadratureSpec, beta: f64, r: f64) -> Result<f64> {
    let d = spec.dimension;
    let cd = sphere_surface(d);
    Ok(match &spec.profile {
        p @ (RadialProfile::Indicator { .. } | RadialProfile::Tabulated { .. }) => {
            let outer = p.support_radius().unwrap_or(0.0);
            if r >= outer {
                0.0
            } else {
                cd * (outer.powi(d as i32) - r.powi(d as i32)) / d as f64 * -(-beta * profile_max(p)).exp_m1()
            }
        }
        RadialProfile::ExponentialDecay { amplitude, length } => {
            beta * amplitude * cd * length.powi(d as i32) * factorial(d - 1) * upper_gamma_ratio(d, r / length)
        }
        RadialProfile::PowerTail { amplitude, exponent } => {
            let ba = beta * amplitude;
            if ba == 0.0 {
                0.0
            } else if *exponent <= d as f64 {
                return Err(Error::Divergence(format!(
                    "profile decays like r^-{exponent} in dimension {d}; the tail beyond {r} is infinite"
                )));
            } else {
                ba * cd * (1.0 + r).powf(d as f64 - exponent) / (exponent - d as f64)
            }
        }
    })
}

fn auto_radius(spec: &QuadratureSpec, beta: f64, budget: f64) -> Result<f64> {
    let d = spec.dimension as f64;
    match &spec.profile {
        p @ (RadialProfile::Indicator { .. } | RadialProfile::Tabulated { .. }) => Ok(p.support_radius().unwrap_or(0.0)),
        RadialProfile::ExponentialDecay { length, .. } => {
            let mut r = *length;
            while tail_bound(spec, beta, r)? > budget {
                r *= 2.0;
            }
            Ok(r)
        }
        RadialProfile::PowerTail { amplitude, exponent } => {
            let ba = beta * amplitude;
            if ba == 0.0 {
                return Ok(0.0);
            }
            tail_bound(spec, beta, 0.0)?;
            let gap = exponent - d;
            let r = (ba * sphere_surface(spec.dimension) / (gap * budget)).powf(1.0 / gap) - 1.0;
            if !(r <= MAX_RADIUS) {
                return Err(Error::Divergence(format!(
                    "tail decays too slowly: cutoff radius {r:e} needed for tolerance {:e}",
                    spec.abs_tol
                )));
            }
            Ok(r.max(1.0))
        }
    }
}

struct Adaptive<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    intervals: usize,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    fn rule(&self, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = (self.f)(c);
        let mut kron = WGK[7] * fc;
        let mut gauss = WG[3] * fc;
        for j in 0..7 {
            let pair = (self.f)(c - h * XGK[j]) + (self.f)(c + h * XGK[j]);
            kron += WGK[j] * pair;
            if j % 2 == 1 {
                gauss += WG[j / 2] * pair;
            }
        }
        (kron * h, ((kron - gauss) * h).abs())
    }

    fn integrate(&mut self, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
        self.intervals += 1;
        if self.intervals > MAX_INTERVALS {
            return Err(Error::NoConvergence {
                iterations: self.intervals,
                residual: tol,
            });
        }
        let (value, err) = self.rule(a, b);
        let mid = 0.5 * (a + b);
        if err <= tol || !(mid > a && mid < b) {
            return Ok((value, err));
        }
        let (v1, e1) = self.integrate(a, mid, 0.5 * tol)?;
        let (v2, e2) = self.integrate(mid, b, 0.5 * tol)?;
        Ok((v1 + v2, e1 + e2))
    }
}

/// `eps(beta) = int_{R^d} (1 - e^{-beta phi(|x|)}) dx` as the radial
/// integral `int_0^R c_d r^{d-1} (1 - e^{-beta phi(r)}) dr` plus a tail
/// bound, the two error parts each held to half of `abs_tol`.
pub fn continuum_eps(spec: &QuadratureSpec, beta: f64) -> Result<ContinuumEps> {
    spec.profile.validate()?;
    if spec.dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(spec.abs_tol.is_finite() && spec.abs_tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("inverse temperature {beta} must be finite and >= 0")));
    }
    let half = 0.5 * spec.abs_tol;
    let radius = match spec.cutoff {
        Cutoff::Auto => auto_radius(spec, beta, 0.9 * half)?,
        Cutoff::Fixed { radius } => radius,
    };
    let tail = tail_bound(spec, beta, radius)?;
    if tail > half {
        return Err(Error::Divergence(format!(
            "tail beyond radius {radius} is bounded only by {tail:e}, above half the tolerance {half:e}"
        )));
    }
    let d = spec.dimension;
    let cd = sphere_surface(d);
    let profile = &spec.profile;
    let f = move |r: f64| cd * r.powi(d as i32 - 1) * -(-beta * profile.value(r)).exp_m1();

    let mut cuts: Vec<f64> = vec![0.0, radius];
    cuts.extend(profile.breakpoints().into_iter().filter(|&b| b > 0.0 && b < radius));
    if profile.support_radius().is_none() {
        let scale = match profile {
            RadialProfile::ExponentialDecay { length, .. } => *length,
            _ => 1.0,
        };
        let mut s = scale;
        while s < radius {
            cuts.push(s);
            s *= 2.0;
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts.len().saturating_sub(1).max(1);
    let mut quad = Adaptive { f: &f, intervals: 0 };
    let (mut value, mut error) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (v, e) = quad.integrate(w[0], w[1], half / pieces as f64)?;
        value += v;
        error += e;
    }
    if error > half {
        return Err(Error::NoConvergence {
            iterations: quad.intervals,
            residual: error,
        });
    }
    Ok(ContinuumEps {
        value,
        quadrature_error: error,
        tail_bound: tail,
        cutoff_radius: radius,
        intervals: quad.intervals,
    })
}

/// Grid analogue `h^d max_u sum_v (1 - e^{-beta phi(h |u - v|)})` over the
/// cells of `grid`, the same-cell term included.
pub fn discrete_eps(grid: &CellGrid, potential: &RadialPairPotential, beta: f64) -> f64 {
    let n = grid.cells();
    let phi = grid.sample(potential);
    let row_max = (0..n)
        .map(|u| phi[u * n..(u + 1) * n].iter().map(|v| -(-beta * v).exp_m1()).sum::<f64>())
        .fold(0.0, f64::max);
    grid.cell_volume() * row_max
}
