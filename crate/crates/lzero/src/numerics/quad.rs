//! Adaptive 1-D quadrature.
//!
//! The kernel is the classical 15-point Gauss-Kronrod rule (all nodes
//! interior, so integrable endpoint singularities are never evaluated
//! head-on), driven by a globally adaptive bisection loop. Integrable
//! power singularities at the lower endpoint can be declared via
//! [`EndpointHint::PowerSingularity`], which switches to a polynomial
//! substitution that removes the singularity entirely. Infinite upper
//! bounds are folded to a finite interval with a tangent map; the
//! integrand must decay at least like t^-2 (callers with slower decay
//! are expected to supply analytic tails instead).

use crate::error::{Error, Result};
use crate::numerics::tol::Tolerances;

/// Behaviour of the integrand at the *lower* endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointHint {
    /// Smooth (or at worst a mild logarithmic endpoint handled by
    /// adaptive refinement).
    Regular,
    /// f(t) ~ (t - a)^alpha with -1 < alpha < 0 near the lower endpoint.
    /// Practical accuracy degrades as alpha approaches -1; callers in
    /// this crate peel near-non-integrable terms analytically instead of
    /// leaning on the substitution.
    PowerSingularity(f64),
}

/// Upper integration bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperBound {
    Finite(f64),
    /// +infinity; the integrand must decay at least like t^-2.
    Infinite,
}

/// 15-point Kronrod abscissae (positive half) and weights, with the
/// embedded 7-point Gauss weights. Values from the QUADPACK tables.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_7,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_93,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Apply G7K15 on [a, b]; returns (kronrod value, error estimate).
fn qk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = WGK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    let mut resabs = kron.abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::NonFinite {
                context: format!("integrand at t = {} or t = {}", c - dx, c + dx),
            });
        }
        kron += WGK[i] * (f1 + f2);
        resabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    if !kron.is_finite() {
        return Err(Error::NonFinite {
            context: format!("quadrature on [{a}, {b}]"),
        });
    }
    let value = kron * h;
    let err_raw = ((kron - gauss) * h).abs();
    // QUADPACK-style sharpening of the raw difference
    let resabs = resabs * h.abs();
    let err = if resabs > 0.0 && err_raw > 0.0 {
        let scaled = (200.0 * err_raw / resabs).powf(1.5);
        (resabs * scaled.min(1.0)).max(f64::EPSILON * 50.0 * resabs)
    } else {
        err_raw
    };
    Ok((value, err))
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Globally adaptive integration of `f` on [a, b] (finite).
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: &Tolerances) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = qk15(f, a, b)?;
    let mut ivs = vec![Interval { a, b, value: v, err: e }];
    const MAX_INTERVALS: usize = 4000;
    loop {
        let total: f64 = ivs.iter().map(|i| i.value).sum();
        let err: f64 = ivs.iter().map(|i| i.err).sum();
        let target = tol.quad_abs.max(tol.quad_rel * total.abs());
        if err <= target || ivs.len() >= MAX_INTERVALS {
            if err > target && err > 1e3 * target {
                return Err(Error::NonConvergence {
                    routine: "integrate_1d",
                    iterations: ivs.len(),
                    estimate: total,
                });
            }
            return Ok(total);
        }
        // split the interval with the largest error estimate
        let (worst, _) = ivs
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.err.total_cmp(&y.err))
            .expect("non-empty interval list");
        let iv = ivs.swap_remove(worst);
        let m = 0.5 * (iv.a + iv.b);
        if m <= iv.a || m >= iv.b {
            // interval at floating-point resolution: keep as converged
            ivs.push(Interval { err: 0.0, ..iv });
            continue;
        }
        let (v1, e1) = qk15(f, iv.a, m)?;
        let (v2, e2) = qk15(f, m, iv.b)?;
        ivs.push(Interval { a: iv.a, b: m, value: v1, err: e1 });
        ivs.push(Interval { a: m, b: iv.b, value: v2, err: e2 });
    }
}

/// Integrate `f` from `a` to `b` with an optional lower-endpoint hint.
///
/// * `PowerSingularity(alpha)` (-1 < alpha < 0): substitutes
///   t = a + u^m with m(1+alpha) >= 2, turning the singular factor into
///   a C^1 integrand. The substitution also tames logarithmic endpoints.
/// * `UpperBound::Infinite`: maps [a, inf) to a finite interval via
///   t = a + tan(u); requires decay at least like t^-2 (or an
///   integrable-log-over-t^2 profile).
pub fn integrate_1d(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: UpperBound,
    hint: EndpointHint,
    tol: &Tolerances,
) -> Result<f64> {
    if let EndpointHint::PowerSingularity(alpha) = hint {
        if alpha <= -1.0 {
            return Err(Error::InvalidParameter(format!(
                "power singularity exponent {alpha} is not integrable"
            )));
        }
    }
    match (b, hint) {
        (UpperBound::Finite(b), EndpointHint::Regular) => adaptive(f, a, b, tol),
        (UpperBound::Finite(b), EndpointHint::PowerSingularity(alpha)) => {
            if b <= a {
                return Ok(if b == a { 0.0 } else { -integrate_1d(f, b, UpperBound::Finite(a), hint, tol)? });
            }
            if alpha >= 0.0 {
                return adaptive(f, a, b, tol);
            }
            let m = ((2.0 / (1.0 + alpha)).ceil() as i32).clamp(2, 9);
            let mf = f64::from(m);
            let g = |u: f64| mf * u.powi(m - 1) * f(a + u.powi(m));
            adaptive(&g, 0.0, (b - a).powf(1.0 / mf), tol)
        }
        (UpperBound::Infinite, hint) => {
            // split off [a, a+1] so the endpoint hint applies there, then
            // fold the tail with t = s + tan(u)
            let s = a + 1.0;
            let head = integrate_1d(f, a, UpperBound::Finite(s), hint, tol)?;
            let g = |u: f64| {
                let c = u.cos();
                let t = s + u.tan();
                f(t) / (c * c)
            };
            let tail = adaptive(&g, 0.0, std::f64::consts::FRAC_PI_2 - 1e-14, tol)?;
            Ok(head + tail)
        }
    }
}
