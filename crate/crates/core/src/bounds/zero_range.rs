use super::{BoundEntry, BoundReport, ZR_INCREMENT, ZR_POINTWISE, ZR_RELATIVE_INCREMENT, ZR_TORUS, ZR_UNIFORM};
use crate::generators::{Model, RateFunction, ReversibleGenerator};
use crate::potentials::QuadraticEnergy;
use crate::{Error, Result};

// With H = sum over ordered pairs of J_xy eta_x eta_y, removing a particle
// at x then at y changes the energy gradient by 2 J_xy (diagonal included).

/// `min over states, occupied x` of
/// `e^{-grad_x^- H} [g(k) - g(k-1) e^{-2 J_xx} - g(k) sum_{z != x} |1 - e^{-2 J_xz}|]`,
/// evaluated from `J` directly.
fn pointwise_min(gen: &ReversibleGenerator, rates: &[RateFunction], energy: &QuadraticEnergy) -> f64 {
    let n = rates.len();
    let eps: Vec<f64> = (0..n)
        .map(|x| {
            (0..n)
                .filter(|&z| z != x)
                .map(|z| (1.0 - (-2.0 * energy.coupling(x, z)).exp()).abs())
                .sum()
        })
        .collect();
    let mut best = f64::INFINITY;
    for eta in gen.space().configs() {
        for x in 0..n {
            let k = eta.get(x);
            if k == 0 {
                continue;
            }
            let jxx = energy.coupling(x, x);
            let field: f64 = (0..n)
                .filter(|&z| z != x)
                .map(|z| energy.coupling(x, z) * eta.get(z) as f64)
                .sum();
            let prefactor = (2.0 * field + jxx * (2.0 * k as f64 - 1.0)).exp();
            let (g, g_prev) = (rates[x].eval(k), rates[x].eval(k - 1));
            best = best.min(prefactor * (g - g_prev * (-2.0 * jxx).exp() - g * eps[x]));
        }
    }
    best
}

fn non_decreasing(rates: &[RateFunction], particles: u32) -> bool {
    rates.iter().all(|g| (0..particles).all(|k| g.eval(k + 1) >= g.eval(k)))
}

/// `(lambda, b, K)` when `J = lambda I + b A` for the adjacency matrix `A`
/// of a regular graph of even degree `K`.
fn torus_shape(energy: &QuadraticEnergy) -> Option<(f64, f64, usize)> {
    let n = energy.sites();
    let lambda = energy.coupling(0, 0);
    let mut b = None;
    let mut degree = None;
    for x in 0..n {
        if energy.coupling(x, x) != lambda {
            return None;
        }
        let mut count = 0;
        for y in (0..n).filter(|&y| y != x) {
            let v = energy.coupling(x, y);
            if v == 0.0 {
                continue;
            }
            if *b.get_or_insert(v) != v {
                return None;
            }
            count += 1;
        }
        if *degree.get_or_insert(count) != count {
            return None;
        }
    }
    match (b, degree) {
        (Some(b), Some(k)) if b > 0.0 && lambda > 0.0 && k % 2 == 0 => Some((lambda, b, k)),
        _ => None,
    }
}

/// Every zero-range bound, with a not-applicable marker for those whose
/// hypotheses fail on this instance.
pub fn zero_range_bounds(gen: &ReversibleGenerator) -> Result<Vec<BoundEntry>> {
    let Model::ZeroRange { rates, energy } = gen.model() else {
        return Err(Error::ModelMismatch {
            expected: "zero-range",
            got: gen.model().tag(),
        });
    };
    let particles = gen.space().kind().fixed_particles().unwrap_or(0) as u32;
    let n = rates.len();
    let mut out = Vec::new();

    out.push(BoundEntry::Applicable(BoundReport::new(
        ZR_POINTWISE,
        pointwise_min(gen, rates, energy),
        &[("sites", n as f64), ("particles", particles as f64)],
        "min_{eta, x: eta_x > 0} e^{-grad_x^- H} [g(k) - g(k-1) e^{-2 J_xx} - g(k) sum_{z != x} |1 - e^{-2 J_xz}|]",
    )));

    if energy.is_zero() {
        let delta = rates
            .iter()
            .flat_map(|g| (0..particles).map(move |k| g.eval(k + 1) - g.eval(k)))
            .fold(f64::INFINITY, f64::min);
        out.push(BoundEntry::Applicable(BoundReport::new(
            ZR_INCREMENT,
            delta,
            &[("particles", particles as f64)],
            "min_x min_{k < N} [g_x(k+1) - g_x(k)]",
        )));
    } else {
        out.push(BoundEntry::not_applicable(ZR_INCREMENT, "needs H = 0"));
    }

    let monotone = non_decreasing(rates, particles);
    let nonnegative = energy.has_nonnegative_couplings();
    let (a, b, k) = energy.shape();
    if energy.is_zero() {
        out.push(BoundEntry::not_applicable(ZR_UNIFORM, "H = 0: the increment bound applies"));
    } else if !nonnegative {
        out.push(BoundEntry::not_applicable(ZR_UNIFORM, "needs J >= 0"));
    } else if !monotone {
        out.push(BoundEntry::not_applicable(ZR_UNIFORM, "needs non-decreasing rates"));
    } else {
        out.push(BoundEntry::Applicable(BoundReport::new(
            ZR_UNIFORM,
            a.exp() * (1.0 - (-a).exp() - k as f64 * (1.0 - (-2.0 * b).exp())),
            &[("a", a), ("b", b), ("K", k as f64)],
            "e^a [1 - e^{-a} - K (1 - e^{-2b})], a = min J_xx, b = max J_xy, K = max row support",
        )));
    }

    match torus_shape(energy) {
        Some((lambda, b, k)) if monotone => out.push(BoundEntry::Applicable(BoundReport::new(
            ZR_TORUS,
            lambda.exp() * (1.0 - (-lambda).exp() - k as f64 * (1.0 - (-2.0 * b).exp())),
            &[("lambda", lambda), ("beta", 2.0 * b), ("K", k as f64)],
            "e^lambda [1 - e^{-lambda} - 2d (1 - e^{-beta})], J = lambda I + (beta / 2) A",
        ))),
        Some(_) => out.push(BoundEntry::not_applicable(ZR_TORUS, "needs non-decreasing rates")),
        None => out.push(BoundEntry::not_applicable(
            ZR_TORUS,
            "J is not a positive multiple of the identity plus a constant on an even-degree regular graph",
        )),
    }

    let massless = (0..n).all(|x| energy.coupling(x, x) == 0.0);
    if massless && nonnegative && particles > 0 {
        let eps_n = rates
            .iter()
            .flat_map(|g| (1..=particles).map(move |j| (g.eval(j) - g.eval(j - 1)) / g.eval(j)))
            .fold(f64::INFINITY, f64::min);
        out.push(BoundEntry::Applicable(BoundReport::new(
            ZR_RELATIVE_INCREMENT,
            eps_n - k as f64 * (1.0 - (-2.0 * b).exp()),
            &[("eps_n", eps_n), ("b", b), ("K", k as f64), ("particles", particles as f64)],
            "eps(N) - K (1 - e^{-2b}), eps(N) = min_x min_{1 <= k <= N} [g_x(k) - g_x(k-1)] / g_x(k)",
        )));
    } else {
        out.push(BoundEntry::not_applicable(ZR_RELATIVE_INCREMENT, "needs J_xx = 0 and J >= 0"));
    }
    Ok(out)
}
