//! Parallel section functions `A_{K,ξ}(t)`: the (n−1)-volume of the
//! slice of `K` by the hyperplane `{(x,ξ) = t}`, together with its
//! central derivatives of integer, fractional, and regularized-integral
//! flavor. These are the raw material for the spherical transform of
//! `ln‖x‖_K`: in odd dimension only `A^{(n-1)}(0)` is needed, in even
//! dimension the regularized integral `∫ (A(z) − Taylor(z)) z^{-n} dz`.
//!
//! Evaluation strategy is per body: exact formulas for balls,
//! ellipsoids, and bodies of revolution (including oblique directions,
//! which reduce to a 1-d profile integral), a radial slice quadrature
//! for everything else, and a seeded hit-or-miss fallback for star
//! bodies whose shifted slices fail to be star-shaped.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bodies::{Shape, StarBody};
use crate::error::{Error, Result};
use crate::numerics::grid::compensated_sum;
use crate::numerics::linalg::{self, add_scaled, dot, orthonormal_complement, scale};
use crate::numerics::quad::{integrate_1d, EndpointHint, UpperBound};
use crate::numerics::roots::{bracket_root, golden_min};
use crate::numerics::special::{ball_volume, binomial_general, gamma};
use crate::numerics::{derivative_at_zero, sphere_grid, GridKind, SphereGrid, Tolerances};

/// How to evaluate section values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectionMethod {
    /// Closed form when the body admits one, radial slices otherwise.
    Auto,
    /// Insist on a closed form; errors when none exists.
    ClosedForm,
    /// Radial quadrature of the slice about an interior center.
    RadialSlice,
    /// Seeded hit-or-miss in the slice's bounding disk.
    MonteCarlo { samples: u64, seed: u64 },
}

enum Evaluator {
    /// `A(t) = scale · (1 − t²/h²)_+^{(n−1)/2}`; covers the unit ball
    /// (scale = κ_{n−1}, h = 1) and arbitrary ellipsoids.
    PowerLaw { scale: f64, h: f64 },
    /// Section of a revolution body orthogonal to its axis:
    /// `A(t) = κ_{n−1} f(t)^{n−1}`.
    RevolutionAxis,
    /// Oblique section of a revolution body, reduced to a 1-d integral
    /// over the axis coordinate.
    RevolutionOblique { cos_phi: f64 },
    /// Quadrature of `r(θ)^{n−1}/(n−1)` over the unit sphere of the
    /// slicing hyperplane, with boundary crossings from root bracketing.
    RadialSlice {
        basis: Vec<Vec<f64>>,
        grid: SphereGrid,
    },
    /// Hit-or-miss with the given budget.
    MonteCarlo {
        basis: Vec<Vec<f64>>,
        samples: u64,
        seed: u64,
    },
}

impl Evaluator {
    fn name(&self) -> &'static str {
        match self {
            Evaluator::PowerLaw { .. } => "closed-form",
            Evaluator::RevolutionAxis => "closed-form",
            Evaluator::RevolutionOblique { .. } => "revolution-reduction",
            Evaluator::RadialSlice { .. } => "radial-slice",
            Evaluator::MonteCarlo { .. } => "montecarlo-slice",
        }
    }
}

/// Section function of one body along one direction, with cached
/// Taylor data at the center. Write-once caches keep the profile safe
/// to share across threads.
pub struct SectionProfile {
    body: StarBody,
    xi: Vec<f64>,
    t_max: f64,
    enclosing: f64,
    evaluator: Evaluator,
    tol: Tolerances,
    taylor: Mutex<HashMap<usize, f64>>,
}

impl SectionProfile {
    pub fn new(
        body: &StarBody,
        xi: &[f64],
        method: SectionMethod,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = body.dim();
        assert_eq!(xi.len(), n, "direction dimension mismatch");
        let xi = linalg::normalize(xi);
        let closed = closed_evaluator(body, &xi);
        let evaluator = match (method, closed) {
            (SectionMethod::Auto | SectionMethod::ClosedForm, Some(ev)) => ev,
            (SectionMethod::ClosedForm, None) => {
                return Err(Error::InvalidParameter(format!(
                    "no closed-form sections for {body:?}"
                )))
            }
            (SectionMethod::Auto | SectionMethod::RadialSlice, None)
            | (SectionMethod::RadialSlice, Some(_)) => {
                if n < 3 {
                    return Err(Error::UnsupportedDimension(n, "radial slices need n >= 3"));
                }
                let res = (SphereGrid::default_resolution(n - 1) / 4).clamp(3, 16);
                Evaluator::RadialSlice {
                    basis: orthonormal_complement(&xi),
                    grid: sphere_grid(n - 1, res, GridKind::Deterministic)?,
                }
            }
            (SectionMethod::MonteCarlo { samples, seed }, _) => {
                if n < 3 {
                    return Err(Error::UnsupportedDimension(n, "slice sampling needs n >= 3"));
                }
                Evaluator::MonteCarlo {
                    basis: orthonormal_complement(&xi),
                    samples,
                    seed,
                }
            }
        };
        let enclosing = body.enclosing_radius();
        let t_max = match &evaluator {
            Evaluator::PowerLaw { h, .. } => *h,
            Evaluator::RevolutionAxis => revolution_parts(body).1,
            Evaluator::RevolutionOblique { cos_phi } => {
                oblique_support(body, *cos_phi) * 1.001
            }
            _ => support_estimate(body, &xi) * 1.02,
        };
        Ok(SectionProfile {
            body: body.clone(),
            xi,
            t_max,
            enclosing,
            evaluator,
            tol: tol.clone(),
            taylor: Mutex::new(HashMap::new()),
        })
    }

    pub fn direction(&self) -> &[f64] {
        &self.xi
    }

    /// Upper bound on the section support: `A(t) = 0` for `|t| > t_max`.
    /// Exact for closed forms, a padded estimate otherwise (padding is
    /// harmless: the extra range carries `A = 0`).
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn method_name(&self) -> &'static str {
        self.evaluator.name()
    }

    /// `A(t)`, the (n−1)-volume of `K ∩ {(x,ξ) = t}`.
    pub fn value(&self, t: f64) -> Result<f64> {
        if t.abs() >= self.t_max {
            return Ok(0.0);
        }
        match &self.evaluator {
            Evaluator::PowerLaw { scale, h } => {
                let n = self.body.dim();
                let u = 1.0 - (t / h) * (t / h);
                Ok(scale * u.max(0.0).powf((n as f64 - 1.0) / 2.0))
            }
            Evaluator::RevolutionAxis => {
                let n = self.body.dim();
                let (f, _a_max) = revolution_profile(&self.body);
                Ok(ball_volume(n - 1) * f(t).max(0.0).powi(n as i32 - 1))
            }
            Evaluator::RevolutionOblique { cos_phi } => self.oblique_value(t, *cos_phi),
            Evaluator::RadialSlice { basis, grid } => self.radial_slice_value(t, basis, grid),
            Evaluator::MonteCarlo { basis, samples, seed } => self
                .montecarlo_value(t, basis, *samples, *seed)
                .map(|(v, _)| v),
        }
    }

    /// Oblique revolution sections: with `c = (ξ, axis)` and
    /// `s² = 1 − c²`, the slice is a graph over the axis coordinate and
    /// the cross-sections are (n−2)-balls, so
    /// `A(t) = (κ_{n−2}/|s|) ∫ (f(u)² − ((t − cu)/s)²)_+^{(n−2)/2} du`.
    ///
    /// The `(·)_+` kink would poison adaptive quadrature (and through
    /// it the finite-difference Taylor coefficients), so the support of
    /// the integrand is located by root bracketing first and each piece
    /// is integrated as a smooth function.
    fn oblique_value(&self, t: f64, cos_phi: f64) -> Result<f64> {
        let n = self.body.dim();
        let (f, a_max) = revolution_profile(&self.body);
        let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
        let kappa = ball_volume(n - 2);
        let pow = (n as f64 - 2.0) / 2.0;
        // signed distance of the profile above the slicing line
        let margin = |u: f64| f(u) - ((t - cos_phi * u) / sin_phi).abs();
        let mut total = 0.0;
        for (lo, hi) in positive_intervals(&margin, a_max, self.tol.root_tol)? {
            let integrand = |u: f64| {
                let y1 = (t - cos_phi * u) / sin_phi;
                kappa * (f(u) * f(u) - y1 * y1).max(0.0).powf(pow)
            };
            total += integrate_1d(
                &integrand,
                lo,
                UpperBound::Finite(hi),
                EndpointHint::Regular,
                &self.tol,
            )?;
        }
        Ok(total / sin_phi)
    }

    fn radial_slice_value(&self, t: f64, basis: &[Vec<f64>], grid: &SphereGrid) -> Result<f64> {
        let n = self.body.dim();
        let point = |s: &[f64]| -> Vec<f64> {
            let mut x = scale(&self.xi, t);
            for (j, b) in basis.iter().enumerate() {
                x = add_scaled(&x, b, s[j]);
            }
            x
        };
        let Some(center) = self.recenter(basis.len(), &point) else {
            return Ok(0.0);
        };
        let r_hi = linalg::norm(&center) + 1.01 * self.enclosing + 0.01;
        let terms: Result<Vec<f64>> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let theta = grid.node(i);
                let psi = |r: f64| {
                    let s = add_scaled(&center, theta, r);
                    self.body.gauge(&point(&s)) - 1.0
                };
                let root = bracket_root(&psi, 0.0, r_hi, self.tol.root_tol)
                    .map_err(|_| Error::NonStarSlice { t })?;
                Ok(grid.weight(i) * root.root.powi(n as i32 - 1))
            })
            .collect();
        Ok(compensated_sum(terms?.into_iter()) / (n as f64 - 1.0))
    }

    /// Find a point interior to the slice (in slice coordinates), or
    /// None when the slice appears empty. The hyperplane's intercept
    /// with the ray through ξ works whenever `t` is inside the radial
    /// support; beyond it (elongated bodies, oblique directions) the
    /// gauge is minimized over the hyperplane by coordinate descent
    /// with exact golden-section line searches, which converges on
    /// convex bodies — the documented assumption of this evaluator.
    fn recenter(&self, m: usize, point: &dyn Fn(&[f64]) -> Vec<f64>) -> Option<Vec<f64>> {
        let mut s = vec![0.0; m];
        let mut g = self.body.gauge(&point(&s));
        if g <= 0.999 {
            return Some(s);
        }
        let span = 1.01 * self.enclosing;
        for _sweep in 0..30 {
            let before = g;
            for j in 0..m {
                let phi = |d: f64| {
                    let mut sj = s.clone();
                    sj[j] += d;
                    self.body.gauge(&point(&sj))
                };
                let (d, v) = golden_min(&phi, -span, span, 1e-4 * span);
                if v < g {
                    s[j] += d;
                    g = v;
                }
            }
            // any point comfortably inside works: the polar slice
            // integral is center-independent
            if g < 0.99 {
                return Some(s);
            }
            if before - g < 1e-12 {
                break;
            }
        }
        if g < 1.0 - 1e-9 {
            Some(s)
        } else {
            None
        }
    }

    fn montecarlo_value(
        &self,
        t: f64,
        basis: &[Vec<f64>],
        samples: u64,
        seed: u64,
    ) -> Result<(f64, f64)> {
        let m = basis.len();
        let disk2 = self.enclosing * self.enclosing - t * t;
        if disk2 <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let disk = disk2.sqrt();
        const BATCH: u64 = 1 << 14;
        let n_batches = samples.div_ceil(BATCH);
        let hits: u64 = (0..n_batches)
            .into_par_iter()
            .map(|bi| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(bi + 1);
                let count = BATCH.min(samples - bi * BATCH);
                let mut h = 0u64;
                for _ in 0..count {
                    // uniform point in the m-ball of radius `disk`
                    let s;
                    loop {
                        let g: Vec<f64> = (0..m)
                            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                            .collect();
                        let norm = linalg::norm(&g);
                        if norm > 1e-12 {
                            let r = disk * rng.gen::<f64>().powf(1.0 / m as f64);
                            s = scale(&g, r / norm);
                            break;
                        }
                    }
                    let mut x = scale(&self.xi, t);
                    for (j, b) in basis.iter().enumerate() {
                        x = add_scaled(&x, b, s[j]);
                    }
                    if self.body.member(&x) {
                        h += 1;
                    }
                }
                h
            })
            .sum();
        let vol = ball_volume(m) * disk.powi(m as i32);
        let p = hits as f64 / samples as f64;
        let value = vol * p;
        let stderr = vol * (p * (1.0 - p) / samples as f64).sqrt();
        Ok((value, stderr))
    }

    /// `A^{(k)}(0)` for even k (k = 0 returns `A(0)`). Closed forms are
    /// differentiated analytically; quadrature evaluators go through
    /// Richardson finite differences with steps scaled by the support.
    /// Values are cached.
    pub fn derivative(&self, k: usize) -> Result<f64> {
        assert!(k % 2 == 0 && k <= 4, "central derivatives of order 0, 2, 4 only");
        if let Some(v) = self.taylor.lock().unwrap().get(&k) {
            return Ok(*v);
        }
        let v = match &self.evaluator {
            Evaluator::PowerLaw { scale, h } => {
                let alpha = (self.body.dim() as f64 - 1.0) / 2.0;
                let j = k / 2;
                // coefficient of t^{2j} in (1 - t^2/h^2)^alpha, times (2j)!
                scale
                    * binomial_general(alpha, j)
                    * (-1.0 / (h * h)).powi(j as i32)
                    * (1..=k).map(|i| i as f64).product::<f64>()
            }
            _ => {
                if k == 0 {
                    self.value(0.0)?
                } else {
                    let scale_t = self.t_max;
                    let err: Mutex<Option<Error>> = Mutex::new(None);
                    let g = |u: f64| match self.value(u * scale_t) {
                        Ok(v) => v,
                        Err(e) => {
                            err.lock().unwrap().get_or_insert(e);
                            f64::NAN
                        }
                    };
                    let d = derivative_at_zero(&g, k, &self.tol);
                    if let Some(e) = err.into_inner().unwrap() {
                        return Err(e);
                    }
                    d?.value / scale_t.powi(k as i32)
                }
            }
        };
        self.taylor.lock().unwrap().insert(k, v);
        Ok(v)
    }

    /// Fractional central derivative `A^{(q)}(0)` of non-integer order
    /// `q > 0`:
    /// `(1/Γ(−q)) ∫₀^∞ t^{−1−q} (A(t) − Taylor_{m−1}(t)) dt`, m = ⌈q⌉.
    /// The section vanishes beyond `t_max`, so the tail is the closed
    /// form of the peeled Taylor powers.
    pub fn fractional_derivative(&self, q: f64) -> Result<f64> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fractional order must be positive, got {q}"
            )));
        }
        if (q - q.round()).abs() < 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "order {q} is an integer; use the integer-order derivative"
            )));
        }
        if q >= 5.0 {
            return Err(Error::InvalidParameter(format!(
                "fractional order {q} beyond the supported Taylor depth"
            )));
        }
        let m = q.ceil() as usize;
        let mut derivs = Vec::new();
        for k in (0..m).step_by(2) {
            derivs.push((k, self.derivative(k)?));
        }
        let eval = |t: f64| self.value(t);
        let integral = peeled_integral(&eval, &derivs, 1.0 + q, self.t_max, &self.tol)?;
        Ok(integral / gamma(-q))
    }

    /// The even-dimension regularized integral
    /// `I(ξ) = ∫₀^∞ (A(z) − Σ_{k ≤ n−2} A^{(k)}(0) z^k / k!) z^{−n} dz`.
    pub fn regularized_integral(&self) -> Result<f64> {
        let n = self.body.dim();
        if n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "regularized section integral is an even-dimension construct, n = {n}"
            )));
        }
        let mut derivs = Vec::new();
        for k in (0..=n - 2).step_by(2) {
            derivs.push((k, self.derivative(k)?));
        }
        let eval = |t: f64| self.value(t);
        peeled_integral(&eval, &derivs, n as f64, self.t_max, &self.tol)
    }

    /// Uniform samples of (t, A(t)) over [−t_max, t_max], for export.
    pub fn sample_uniform(&self, count: usize) -> Result<Vec<(f64, f64)>> {
        assert!(count >= 2, "need at least two samples");
        (0..count)
            .map(|i| {
                let t = self.t_max * (2.0 * i as f64 / (count as f64 - 1.0) - 1.0);
                self.value(t).map(|a| (t, a))
            })
            .collect()
    }
}

/// `∫₀^∞ (f(z) − P(z)) z^{−s} dz` for `f` supported on `[0, t_max]`,
/// where `P` is the even Taylor polynomial described by `derivs`
/// (order, derivative-value) pairs.
///
/// Near zero the difference `f − P` loses all significant digits while
/// `z^{-s}` amplifies what is left — and for s close to the first peeled
/// power the head carries almost the whole integral. The head
/// `[0, z₀]` is therefore evaluated analytically from a two-term even
/// power model fitted to the difference at `z₀` and `2z₀`, where it is
/// still accurate; the model is validated at `√2·z₀` and the band is
/// widened once before giving up. The body `[z₀, t_max]` integrates the
/// explicit difference adaptively, and the tail is the closed form of
/// the peeled powers.
pub fn peeled_integral(
    f: &dyn Fn(f64) -> Result<f64>,
    derivs: &[(usize, f64)],
    s: f64,
    t_max: f64,
    tol: &Tolerances,
) -> Result<f64> {
    assert!(t_max > 0.0 && t_max.is_finite());
    let max_order = derivs.iter().map(|(k, _)| *k).max().unwrap_or(0);
    assert!(
        s > max_order as f64 + 1.0,
        "integral diverges at infinity: s = {s} with peeled order {max_order}"
    );
    let factorial = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let p = |z: f64| -> f64 {
        derivs
            .iter()
            .map(|(k, d)| d / factorial(*k) * z.powi(*k as i32))
            .sum()
    };
    let remainder = |z: f64| -> Result<f64> { Ok(f(z)? - p(z)) };

    // analytic head from a fitted three-term power model. The default
    // basis {a, a+2, a+4} covers smooth sections; the fallback with
    // consecutive powers covers profiles whose support endpoints ride a
    // vanishing-slope tip, where the remainder carries odd powers of z
    // (equatorial slices of the quartic revolution body start at z^5).
    let a = (max_order + 2) as f64;
    let f0 = f(0.0)?.abs().max(1e-300);
    let mut head = f64::NAN;
    let mut z0 = 0.05 * t_max;
    'model: for exponents in [[a, a + 2.0, a + 4.0], [a, a + 1.0, a + 2.0]] {
        z0 = 0.05 * t_max;
        for _attempt in 0..3 {
            let nodes = [1.0f64, 1.5, 2.0];
            let mut r = Vec::with_capacity(3);
            for u in nodes {
                r.push(remainder(u * z0)?);
            }
            if r.iter().all(|ri| ri.abs() <= 1e-12 * f0) {
                // the peeled polynomial reproduces f to rounding near zero
                head = 0.0;
                break 'model;
            }
            let mat: Vec<Vec<f64>> = nodes
                .iter()
                .map(|u| exponents.iter().map(|e| u.powf(*e)).collect())
                .collect();
            let inv = linalg::inverse(&mat).expect("distinct power-model nodes");
            let d = linalg::mat_vec(&inv, &r);
            // validate by mild extrapolation toward the singular end
            let uc = 0.7f64;
            let predicted: f64 = (0..3).map(|i| d[i] * uc.powf(exponents[i])).sum();
            let actual = remainder(uc * z0)?;
            let scale = actual.abs().max(1e-12 * f0);
            if (predicted - actual).abs() <= 2e-2 * scale {
                head = z0.powf(1.0 - s)
                    * (0..3)
                        .map(|i| d[i] / (exponents[i] + 1.0 - s))
                        .sum::<f64>();
                break 'model;
            }
            z0 *= 2.0; // cancellation suspected: move the band outward
        }
    }
    if !head.is_finite() {
        return Err(Error::Cancellation {
            context: format!("near-zero remainder model at z0 = {z0:e} (order {a})"),
        });
    }

    let err: Mutex<Option<Error>> = Mutex::new(None);
    let integrand = |z: f64| match remainder(z) {
        Ok(r) => r * z.powf(-s),
        Err(e) => {
            err.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    };
    let body = integrate_1d(
        &integrand,
        z0,
        UpperBound::Finite(t_max),
        EndpointHint::Regular,
        tol,
    );
    if let Some(e) = err.into_inner().unwrap() {
        return Err(e);
    }
    let body = body?;

    let tail: f64 = derivs
        .iter()
        .map(|(k, d)| {
            let k_f = *k as f64;
            -d / factorial(*k) * t_max.powf(k_f + 1.0 - s) / (s - 1.0 - k_f)
        })
        .sum();
    Ok(head + body + tail)
}

/// One-shot section value; builds a throwaway profile.
pub fn section_value(
    body: &StarBody,
    xi: &[f64],
    t: f64,
    method: SectionMethod,
    tol: &Tolerances,
) -> Result<f64> {
    SectionProfile::new(body, xi, method, tol)?.value(t)
}

/// `A^{(k)}(0)` for k in {2, 4} with automatic evaluator selection.
pub fn section_derivative_at_zero(
    body: &StarBody,
    xi: &[f64],
    k: usize,
    tol: &Tolerances,
) -> Result<f64> {
    assert!(k == 2 || k == 4, "supported central orders are 2 and 4");
    SectionProfile::new(body, xi, SectionMethod::Auto, tol)?.derivative(k)
}

/// Hit-or-miss slice volume with its standard error.
pub fn montecarlo_section(
    body: &StarBody,
    xi: &[f64],
    t: f64,
    samples: u64,
    seed: u64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let profile = SectionProfile::new(body, xi, SectionMethod::MonteCarlo { samples, seed }, tol)?;
    if t.abs() >= profile.t_max {
        return Ok((0.0, 0.0));
    }
    match &profile.evaluator {
        Evaluator::MonteCarlo { basis, .. } => profile.montecarlo_value(t, basis, samples, seed),
        _ => unreachable!("constructed with the Monte Carlo method"),
    }
}

fn closed_evaluator(body: &StarBody, xi: &[f64]) -> Option<Evaluator> {
    let n = body.dim();
    match body.shape() {
        Shape::EuclideanBall => Some(Evaluator::PowerLaw {
            scale: ball_volume(n - 1),
            h: 1.0,
        }),
        Shape::DirectionalEllipsoid { axis, a, b } => {
            let c = dot(axis, xi);
            let h = (a * a * c * c + b * b * (1.0 - c * c).max(0.0)).sqrt();
            let det_sqrt = a * b.powi(n as i32 - 1);
            Some(Evaluator::PowerLaw {
                scale: ball_volume(n - 1) * det_sqrt / h,
                h,
            })
        }
        Shape::Ellipsoid { m } => {
            let inv = linalg::inverse(m).ok()?;
            let det_inv = linalg::determinant(&inv).ok()?;
            let h = dot(xi, &linalg::mat_vec(&inv, xi)).max(0.0).sqrt();
            Some(Evaluator::PowerLaw {
                scale: ball_volume(n - 1) * det_inv.max(0.0).sqrt() / h,
                h,
            })
        }
        Shape::Revolution { axis, .. } => {
            let mut e = vec![0.0; n];
            e[*axis] = 1.0;
            let c = dot(&e, xi);
            if (c.abs() - 1.0).abs() < 1e-12 {
                Some(Evaluator::RevolutionAxis)
            } else {
                Some(Evaluator::RevolutionOblique { cos_phi: c })
            }
        }
        _ => None,
    }
}

fn revolution_profile(body: &StarBody) -> (impl Fn(f64) -> f64 + '_, f64) {
    match body.shape() {
        Shape::Revolution { profile, a_max, .. } => {
            let p = profile.clone();
            (move |t: f64| p(t), *a_max)
        }
        _ => unreachable!("revolution evaluator on a non-revolution body"),
    }
}

fn revolution_parts(body: &StarBody) -> ((), f64) {
    match body.shape() {
        Shape::Revolution { a_max, .. } => ((), *a_max),
        _ => unreachable!(),
    }
}

/// Intervals of `[-a_max, a_max]` where `margin > 0`, located by a
/// coarse sign scan refined with root bracketing. A positive region
/// lost between scan samples is recovered by a golden-section probe of
/// the maximum.
fn positive_intervals(
    margin: &dyn Fn(f64) -> f64,
    a_max: f64,
    root_tol: f64,
) -> Result<Vec<(f64, f64)>> {
    const COARSE: usize = 128;
    let at = |i: usize| a_max * (2.0 * i as f64 / COARSE as f64 - 1.0);
    let samples: Vec<f64> = (0..=COARSE).map(|i| margin(at(i))).collect();
    let mut cuts = vec![-a_max];
    for i in 0..COARSE {
        if (samples[i] > 0.0) != (samples[i + 1] > 0.0) {
            let root = bracket_root(margin, at(i), at(i + 1), root_tol)?;
            cuts.push(root.root);
        }
    }
    cuts.push(a_max);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        if margin(0.5 * (w[0] + w[1])) > 0.0 {
            intervals.push((w[0], w[1]));
        }
    }
    if intervals.is_empty() {
        // a sliver of support can hide between coarse samples
        let best = (0..=COARSE).max_by(|a, b| samples[*a].total_cmp(&samples[*b])).unwrap();
        let lo = at(best.saturating_sub(1));
        let hi = at((best + 1).min(COARSE));
        let (peak, neg_val) = golden_min(&|u| -margin(u), lo, hi, root_tol);
        if -neg_val > 0.0 {
            let left = bracket_root(margin, lo, peak, root_tol)
                .map(|r| r.root)
                .unwrap_or(lo);
            let right = bracket_root(margin, peak, hi, root_tol)
                .map(|r| r.root)
                .unwrap_or(hi);
            intervals.push((left, right));
        }
    }
    Ok(intervals)
}

/// Support of the sections of a revolution body along a direction with
/// axis cosine `c`: max over the axis coordinate of `cu + |s| f(u)`.
fn oblique_support(body: &StarBody, cos_phi: f64) -> f64 {
    let (f, a_max) = revolution_profile(body);
    let s = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
    let c = cos_phi.abs();
    let mut sup = 0.0f64;
    for i in 0..=2048 {
        let u = a_max * (2.0 * i as f64 / 2048.0 - 1.0);
        sup = sup.max(c * u + s * f(u));
    }
    sup
}

/// Support-function estimate `max ρ(u)(u,ξ)` over a deterministic grid.
fn support_estimate(body: &StarBody, xi: &[f64]) -> f64 {
    let n = body.dim();
    let res = SphereGrid::default_resolution(n).min(16);
    let grid = sphere_grid(n, res, GridKind::Deterministic).expect("support grid");
    let mut sup = 0.0f64;
    for i in 0..grid.len() {
        let u = grid.node(i);
        let d = dot(u, xi);
        if d > 0.0 {
            sup = sup.max(body.radial(u) * d);
        }
    }
    sup
}
