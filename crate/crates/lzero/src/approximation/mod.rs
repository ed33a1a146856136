//! Constructive approximation by finite products of ellipsoid gauges.
//!
//! The pipeline mirrors how the representation itself is built. A thin
//! directional ellipsoid acts as a smoothing kernel: convolving the log
//! kernel `ln |(x, ξ)|` against it produces exactly the log-gauge of
//! another directional ellipsoid, so smoothing the log-representation
//! of an embeddable body turns the representing measure into a measure
//! *of ellipsoids*. Collapsing that measure onto finitely many spherical
//! cap centers leaves a finite weighted geometric mean of ellipsoid
//! gauges — an [`EllipsoidProduct`] — that tracks the body in the
//! sup-log metric. A dyadic splitting step rewrites the weights as
//! powers of two at a controlled extra error, and a p-power variant
//! fits sums `Σ ‖x‖_{E_i}^p` instead of products.

use rayon::prelude::*;

use crate::bodies::spec::ProductPart;
use crate::bodies::{directional_ellipsoid, log_blend, Shape, StarBody};
use crate::embedding::spectral_measure_density;
use crate::error::{Error, Result};
use crate::numerics::linalg::dot;
use crate::numerics::{sphere_area, SphereGrid, Tolerances};
use crate::sections::{SectionMethod, SectionProfile};

/// Finite product `Π ‖x‖_{E_i}^{w_i}` of directional-ellipsoid gauges
/// with positive weights summing to one. The weight sum is what makes
/// the product 1-homogeneous, so construction enforces it.
#[derive(Debug, Clone)]
pub struct EllipsoidProduct {
    parts: Vec<ProductPart>,
}

impl EllipsoidProduct {
    /// Validates and wraps the parts: nonempty, a shared dimension,
    /// positive semiaxes, positive weights summing to 1 within 1e-12.
    pub fn new(parts: Vec<ProductPart>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter(
                "an ellipsoid product needs at least one part".into(),
            ));
        }
        let dim = parts[0].xi.len();
        for p in &parts {
            if p.xi.len() != dim || p.xi.iter().all(|c| *c == 0.0) {
                return Err(Error::InvalidParameter(
                    "product part axes must be nonzero vectors of one dimension".into(),
                ));
            }
            if !(p.a > 0.0 && p.b > 0.0 && p.weight > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "product parts need positive semiaxes and weight, got a={}, b={}, w={}",
                    p.a, p.b, p.weight
                )));
            }
        }
        let total: f64 = parts.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "product weights must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(EllipsoidProduct { parts })
    }

    pub fn dim(&self) -> usize {
        self.parts[0].xi.len()
    }

    pub fn parts(&self) -> &[ProductPart] {
        &self.parts
    }

    pub fn weight_sum(&self) -> f64 {
        self.parts.iter().map(|p| p.weight).sum()
    }

    /// `Π ‖x‖_{E_i}^{w_i}`, evaluated as `exp Σ w_i ln ‖x‖_{E_i}` so a
    /// hundred-part product loses no precision to repeated powf.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for p in &self.parts {
            let g = part_gauge(p, x);
            if g == 0.0 {
                return 0.0;
            }
            acc += p.weight * g.ln();
        }
        acc.exp()
    }

    /// The same body through the shape algebra, for anything that wants
    /// a [`StarBody`] (transforms, verdicts, radial distances).
    pub fn to_star_body(&self) -> StarBody {
        log_blend(
            self.parts
                .iter()
                .map(|p| (directional_ellipsoid(&p.xi, p.a, p.b), p.weight))
                .collect(),
        )
    }
}

fn part_gauge(p: &ProductPart, x: &[f64]) -> f64 {
    let axis_norm2 = dot(&p.xi, &p.xi);
    let t2 = dot(x, &p.xi).powi(2) / axis_norm2;
    let perp2 = (dot(x, x) - t2).max(0.0);
    (t2 / (p.a * p.a) + perp2 / (p.b * p.b)).sqrt()
}

/// Smoothed log-gauge `f_{a,b}(x)`: the log-gauge of `body` integrated
/// against the ellipsoid kernel `‖θ‖_{E_{b,a}(x)}^{-n}` concentrated at
/// `±x` (semiaxis `b` along `x`, `a` transverse; `a → 0` sharpens it).
/// The kernel carries the analytic normalization `|S^{n-1}| a^{n-1} b`,
/// which the grid must reproduce within 1%, and the returned value is
/// normalized by the *computed* kernel mass, so constants are exact on
/// any admissible grid.
pub fn smoothed_log_norm(
    body: &StarBody,
    x: &[f64],
    a: f64,
    b: f64,
    grid: &SphereGrid,
) -> Result<f64> {
    let n = body.dim();
    if !(0.0 < a && a <= b) {
        return Err(Error::InvalidParameter(format!(
            "kernel semiaxes need 0 < a <= b, got a={a}, b={b}"
        )));
    }
    if grid.dim() != n || x.len() != n {
        return Err(Error::InvalidParameter(
            "smoothing point and grid must match the body dimension".into(),
        ));
    }
    let kernel = directional_ellipsoid(x, b, a);
    let mut weighted = 0.0;
    let mut mass = 0.0;
    for (node, w) in grid.iter() {
        let k = kernel.gauge(node).powi(-(n as i32));
        mass += w * k;
        weighted += w * k * body.gauge(node).ln();
    }
    let analytic = sphere_area(n) * a.powi(n as i32 - 1) * b;
    let relative_mass = mass / analytic;
    if (relative_mass - 1.0).abs() > 1e-3 {
        return Err(Error::KernelMass {
            got: relative_mass,
            tol: 1e-3,
        });
    }
    Ok(weighted / mass)
}

/// Collapses a probability density on the grid onto finitely many atoms
/// by greedy spherical caps: visit nodes in descending mass order, make
/// each not-yet-covered node a cap center, and sweep every uncovered
/// node within geodesic radius `sigma` into its atom. Disjointification
/// is by construction, so the atom weights sum to the input mass
/// exactly; atoms that would carry zero weight are dropped.
pub fn discretize_sphere_measure(
    density: &[f64],
    sigma: f64,
    grid: &SphereGrid,
) -> Result<Vec<(Vec<f64>, f64)>> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cap radius sigma must lie in (0, 1), got {sigma}"
        )));
    }
    if density.len() != grid.len() || density.iter().any(|d| *d < 0.0 || !d.is_finite()) {
        return Err(Error::InvalidParameter(
            "density must be a nonnegative finite value per grid node".into(),
        ));
    }
    let mut masses: Vec<f64> = (0..grid.len()).map(|i| grid.weight(i) * density[i]).collect();
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 0.05 {
        return Err(Error::InvalidParameter(format!(
            "input is not a probability density on this grid (mass {total:.4})"
        )));
    }
    for m in &mut masses {
        *m /= total;
    }
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| masses[j].total_cmp(&masses[i]).then(i.cmp(&j)));
    // sigma-balls in the chord metric: |eta - xi| < sigma means
    // (eta, xi) > 1 - sigma^2/2
    let cos_sigma = 1.0 - 0.5 * sigma * sigma;
    let mut covered = vec![false; grid.len()];
    let mut atoms: Vec<(Vec<f64>, f64)> = Vec::new();
    for &center in &order {
        if covered[center] {
            continue;
        }
        let c = grid.node(center);
        let mut weight = 0.0;
        for j in 0..grid.len() {
            // the cap test in cosine form avoids an acos per pair
            if !covered[j] && dot(c, grid.node(j)) >= cos_sigma {
                covered[j] = true;
                weight += masses[j];
            }
        }
        if weight > 0.0 {
            atoms.push((c.to_vec(), weight));
        }
    }
    // push the rounding dust onto the heaviest atom so the sum is exact
    let leak: f64 = 1.0 - atoms.iter().map(|(_, w)| w).sum::<f64>();
    if leak.abs() > 1e-12 {
        return Err(Error::NonFinite {
            context: format!("cap discretization leaked mass {leak:e}"),
        });
    }
    if let Some(first) = atoms.first_mut() {
        first.1 += leak;
    }
    Ok(atoms)
}

/// A fitted product together with the sup-log error it achieved on the
/// fitting grid.
#[derive(Debug, Clone)]
pub struct ProductFit {
    pub product: EllipsoidProduct,
    /// `sup |ln gauge_product − ln gauge_body|` over the grid, after the
    /// free constant has been absorbed.
    pub sup_log_error: f64,
}

/// Fits a product of directional ellipsoids to an embeddable body. The
/// spectral measure is computed on the grid (rejecting bodies that do
/// not embed), collapsed onto `sigma`-cap atoms, and every atom `ξ_i`
/// contributes the ellipsoid with semiaxis `a/b` along `ξ_i` and `1`
/// transverse — the shape the smoothing kernel assigns to the direction
/// `ξ_i`, up to the overall scale that the free constant absorbs. The
/// constant itself is fixed by centering the log residual (its midpoint
/// is the sup-optimal shift) and folded into the ellipsoids by scaling
/// every part by the same factor — one part alone cannot carry it, as
/// a shift `c` through a weight `w` scales semiaxes by `exp(c/w)`,
/// which overflows once atoms get small.
pub fn fit_ellipsoid_product(
    body: &StarBody,
    a: f64,
    b: f64,
    sigma: f64,
    grid: &SphereGrid,
    tol: &Tolerances,
) -> Result<ProductFit> {
    if !(0.0 < a && a <= b) {
        return Err(Error::InvalidParameter(format!(
            "kernel semiaxes need 0 < a <= b, got a={a}, b={b}"
        )));
    }
    let density = spectral_measure_density(body, grid, tol)?;
    let atoms = discretize_sphere_measure(&density, sigma, grid)?;
    let mut parts: Vec<ProductPart> = atoms
        .into_iter()
        .map(|(xi, weight)| ProductPart {
            xi,
            a: a / b,
            b: 1.0,
            weight,
        })
        .collect();
    // center the log residual; the midpoint shift minimizes the sup
    let product = EllipsoidProduct::new(parts.clone())?;
    let residuals: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            product.gauge(x).ln() - body.gauge(x).ln()
        })
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &residuals {
        if !r.is_finite() {
            return Err(Error::NonFinite {
                context: "log residual of the fitted product".into(),
            });
        }
        lo = lo.min(*r);
        hi = hi.max(*r);
    }
    let mid = 0.5 * (lo + hi);
    // scaling all semiaxes by c divides every gauge by c, shifting
    // ln gauge_product by exactly -ln c since the weights sum to one
    let c = mid.exp();
    for p in &mut parts {
        p.a *= c;
        p.b *= c;
    }
    Ok(ProductFit {
        product: EllipsoidProduct::new(parts)?,
        sup_log_error: 0.5 * (hi - lo),
    })
}

/// Rewrites every weight as a sum of powers of two, keeping `depth`
/// binary digits below each weight's leading bit and duplicating the
/// ellipsoid once per kept digit. The truncated remainders are summed
/// and handed to the largest-weight part as extra digits, so the total
/// stays 1 exactly; weights that already are single powers of two pass
/// through unchanged.
pub fn dyadicize_weights(product: &EllipsoidProduct, depth: usize) -> Result<EllipsoidProduct> {
    assert!(depth >= 1, "dyadic depth must be at least 1");
    const PART_CAP: usize = 10_000;
    let parts = product.parts();
    let largest = parts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.weight.total_cmp(&b.1.weight).then(b.0.cmp(&a.0)))
        .expect("validated nonempty")
        .0;
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(parts.len());
    let mut remainder = 0.0;
    for p in parts {
        let leading = p.weight.log2().floor() as i32;
        let (terms, rest) = dyadic_digits(p.weight, leading - depth as i32 + 1);
        kept.push(terms);
        remainder += rest;
    }
    if remainder > 0.0 {
        // the remainder is a sum of exact binary tails, so it expands
        // exactly too (down to f64 dust, which the validation absorbs)
        let (terms, _) = dyadic_digits(remainder, -1060);
        kept[largest].extend(terms);
    }
    let total: usize = kept.iter().map(|k| k.len()).sum();
    if total > PART_CAP {
        return Err(Error::InvalidParameter(format!(
            "dyadic splitting would create {total} parts (cap {PART_CAP})"
        )));
    }
    let mut out = Vec::with_capacity(total);
    for (p, digits) in parts.iter().zip(kept) {
        for d in digits {
            out.push(ProductPart {
                xi: p.xi.clone(),
                a: p.a,
                b: p.b,
                weight: d,
            });
        }
    }
    EllipsoidProduct::new(out)
}

/// Binary digits of `w` at or above exponent `min_exp`, largest first,
/// plus the truncated tail. Each extracted power satisfies
/// `p ≤ r < 2p`, so the running subtraction is exact (Sterbenz) and the
/// digits reproduce the float bit-for-bit when `min_exp` is low enough.
fn dyadic_digits(w: f64, min_exp: i32) -> (Vec<f64>, f64) {
    let mut r = w;
    let mut digits = Vec::new();
    while r > 0.0 && digits.len() < 60 {
        let mut p = r.log2().floor().exp2();
        if p > r {
            p *= 0.5; // log2 rounding at exact powers of two
        }
        if (p.log2().round() as i32) < min_exp {
            break;
        }
        digits.push(p);
        r -= p;
    }
    (digits, r)
}

/// One term of a fitted p-sum: a directional ellipsoid with its scale
/// folded into the semiaxes (p-sums carry no outer weights).
#[derive(Debug, Clone)]
pub struct ScaledEllipsoid {
    pub xi: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

/// Result of [`fit_psum`].
#[derive(Debug, Clone)]
pub struct PsumFit {
    pub p: f64,
    pub parts: Vec<ScaledEllipsoid>,
    /// `sup |‖x‖_K^p − Σ ‖x‖_{E_i}^p|` over the fitting grid.
    pub sup_error: f64,
}

/// `(Σ ‖x‖_{E_i}^p)^{1/p}` — the gauge the fitted list represents.
pub fn psum_gauge(parts: &[ScaledEllipsoid], p: f64, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for e in parts {
        let g = scaled_gauge(e, x);
        if g == 0.0 && p < 0.0 {
            return 0.0;
        }
        acc += g.powf(p);
    }
    acc.powf(1.0 / p)
}

fn scaled_gauge(e: &ScaledEllipsoid, x: &[f64]) -> f64 {
    let axis_norm2 = dot(&e.xi, &e.xi);
    let t2 = dot(x, &e.xi).powi(2) / axis_norm2;
    let perp2 = (dot(x, x) - t2).max(0.0);
    (t2 / (e.a * e.a) + perp2 / (e.b * e.b)).sqrt()
}

/// Fits `‖x‖_K^p ≈ Σ ‖x‖_{E_i}^p` for `p ∈ (−1, 1) \ {0}`.
///
/// Bodies that already are p-sums of ellipsoids (or single ellipsoids)
/// are recovered structurally and exactly. Otherwise the representing
/// density of `‖x‖^p` is read off the fractional-derivative transform
/// at order `q = n − 1 − p` (for `p < 0` this is the `L_{-|p|}` sign
/// test, and a negative density rejects the body), collapsed onto
/// `sigma`-caps, and each atom becomes a slab-like ellipsoid with
/// transverse semiaxis `1/a`; a least-squares scalar calibrates the
/// overall scale, absorbing every normalization constant at once.
pub fn fit_psum(
    body: &StarBody,
    p: f64,
    a: f64,
    sigma: f64,
    grid: &SphereGrid,
    tol: &Tolerances,
) -> Result<PsumFit> {
    if p == 0.0 || p.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "p-sum exponent must lie in (-1, 1) with p != 0 (p = 0 is the \
             multiplicative product; use fit_ellipsoid_product), got {p}"
        )));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "slab sharpness a must lie in (0, 1], got {a}"
        )));
    }
    let n = body.dim();
    if let Some(parts) = structural_parts(body, p) {
        let sup_error = psum_sup_error(body, &parts, p, grid);
        return Ok(PsumFit { p, parts, sup_error });
    }
    // transform route: the density representing ‖x‖^p sits at order
    // q = n-1+p (never an odd integer for p in the open interval), up
    // to a positive constant the final calibration determines
    let q = (n - 1) as f64 + p;
    let factor = std::f64::consts::PI * p.abs() / (q * std::f64::consts::FRAC_PI_2).cos();
    let mut values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let profile = SectionProfile::new(body, grid.node(i), SectionMethod::Auto, tol)?;
            Ok(factor * profile.fractional_derivative(q)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut magnitudes: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|x, y| x.total_cmp(y));
    let scale = magnitudes[magnitudes.len() / 2].max(1e-300);
    if p < 0.0 {
        // for negative p this is the L_{-|p|} membership test: a genuinely
        // negative density means no such sum exists
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .filter(|(_, v)| **v < -1e-6 * scale)
        {
            return Err(Error::NotEmbeddable {
                xi: grid.node(i).to_vec(),
                density: *v,
            });
        }
    } else {
        // for positive p only the orientation of the transform is fixed
        // here, not its sign convention; point the bulk of the mass up so
        // the positive least-squares scale below can absorb the rest
        let signed: f64 = (0..grid.len()).map(|i| grid.weight(i) * values[i]).sum();
        if signed < 0.0 {
            for v in &mut values {
                *v = -*v;
            }
        }
    }
    let total: f64 = (0..grid.len())
        .map(|i| grid.weight(i) * values[i].max(0.0))
        .sum();
    let masses: Vec<f64> = (0..grid.len())
        .map(|i| values[i].max(0.0) / total)
        .collect();
    let atoms = discretize_sphere_measure(&masses, sigma, grid)?;
    let raw: Vec<ScaledEllipsoid> = atoms
        .iter()
        .map(|(xi, _)| ScaledEllipsoid {
            xi: xi.clone(),
            a: 1.0,
            b: 1.0 / a,
        })
        .collect();
    // least-squares scalar: both the target and the basis are positive,
    // so s > 0 and the fold below keeps real semiaxes
    let (mut num, mut den) = (0.0, 0.0);
    let basis: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            atoms
                .iter()
                .zip(&raw)
                .map(|((_, m), e)| m * scaled_gauge(e, x).powf(p))
                .sum::<f64>()
        })
        .collect();
    for i in 0..grid.len() {
        let target = body.gauge(grid.node(i)).powf(p);
        num += grid.weight(i) * target * basis[i];
        den += grid.weight(i) * basis[i] * basis[i];
    }
    let s = num / den;
    let parts: Vec<ScaledEllipsoid> = atoms
        .iter()
        .zip(&raw)
        .map(|((_, m), e)| {
            let fold = (s * m).powf(-1.0 / p);
            ScaledEllipsoid {
                xi: e.xi.clone(),
                a: e.a * fold,
                b: e.b * fold,
            }
        })
        .collect();
    let sup_error = psum_sup_error(body, &parts, p, grid);
    Ok(PsumFit { p, parts, sup_error })
}

fn structural_parts(body: &StarBody, p: f64) -> Option<Vec<ScaledEllipsoid>> {
    fn as_spec(b: &StarBody) -> Option<ScaledEllipsoid> {
        match b.shape() {
            Shape::EuclideanBall => {
                let mut xi = vec![0.0; b.dim()];
                xi[0] = 1.0;
                Some(ScaledEllipsoid { xi, a: 1.0, b: 1.0 })
            }
            Shape::DirectionalEllipsoid { axis, a, b } => Some(ScaledEllipsoid {
                xi: axis.clone(),
                a: *a,
                b: *b,
            }),
            _ => None,
        }
    }
    match body.shape() {
        Shape::PSum { p: bp, left, right } if (bp - p).abs() < 1e-12 => {
            match (as_spec(left), as_spec(right)) {
                (Some(l), Some(r)) => Some(vec![l, r]),
                _ => None,
            }
        }
        _ => as_spec(body).map(|e| vec![e]),
    }
}

fn psum_sup_error(body: &StarBody, parts: &[ScaledEllipsoid], p: f64, grid: &SphereGrid) -> f64 {
    (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            let model: f64 = parts.iter().map(|e| scaled_gauge(e, x).powf(p)).sum();
            (body.gauge(x).powf(p) - model).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{ball, linear_image, lq_ball, mult_sum, p_sum, radial_distance};
    use crate::embedding::{embeds_in_l0, log_ft, Verdict};
    use crate::numerics::{sphere_grid, GridKind};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, res: usize) -> SphereGrid {
        sphere_grid(n, res, GridKind::Deterministic).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::scan()
    }

    fn part(xi: &[f64], a: f64, b: f64, weight: f64) -> ProductPart {
        ProductPart {
            xi: xi.to_vec(),
            a,
            b,
            weight,
        }
    }

    #[test]
    fn product_gauge_basics() {
        let single = EllipsoidProduct::new(vec![part(&[0.0, 0.0, 1.0], 2.0, 0.5, 1.0)]).unwrap();
        let e = directional_ellipsoid(&[0.0, 0.0, 1.0], 2.0, 0.5);
        let two = EllipsoidProduct::new(vec![
            part(&[1.0, 0.0, 0.0], 1.5, 0.8, 0.5),
            part(&[0.0, 1.0, 0.0], 0.9, 1.2, 0.5),
        ])
        .unwrap();
        let msum = mult_sum(
            directional_ellipsoid(&[1.0, 0.0, 0.0], 1.5, 0.8),
            directional_ellipsoid(&[0.0, 1.0, 0.0], 0.9, 1.2),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if x.iter().all(|c| c.abs() < 1e-9) {
                continue;
            }
            assert_relative_eq!(single.gauge(&x), e.gauge(&x), max_relative = 1e-14);
            assert_relative_eq!(two.gauge(&x), msum.gauge(&x), max_relative = 1e-14);
            // 1-homogeneity rides on the weight sum
            let k: f64 = rng.gen_range(0.1..5.0);
            assert_relative_eq!(
                two.gauge(&crate::numerics::linalg::scale(&x, k)),
                k * two.gauge(&x),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                two.to_star_body().gauge(&x),
                two.gauge(&x),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn product_validation_rejects_bad_weights() {
        assert!(EllipsoidProduct::new(vec![]).is_err());
        assert!(EllipsoidProduct::new(vec![part(&[1.0, 0.0], 1.0, 1.0, 0.7)]).is_err());
        assert!(EllipsoidProduct::new(vec![
            part(&[1.0, 0.0], 1.0, 1.0, 0.5),
            part(&[0.0, 1.0], 1.0, 1.0, 0.5 + 1e-9),
        ])
        .is_err());
        assert!(EllipsoidProduct::new(vec![part(&[1.0, 0.0], -1.0, 1.0, 1.0)]).is_err());
    }

    #[test]
    fn serialized_products_reload_as_the_same_body() {
        let prod = EllipsoidProduct::new(vec![
            part(&[1.0, 0.0, 0.0], 1.2, 0.9, 0.5),
            part(&[0.0, 1.0, 0.0], 1.0, 1.1, 0.25),
            part(&[0.0, 0.0, 1.0], 0.8, 1.0, 0.25),
        ])
        .unwrap();
        let json = serde_json::to_string(prod.parts()).unwrap();
        let reloaded = crate::bodies::spec::load_body(&json).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if x.iter().all(|c| c.abs() < 1e-9) {
                continue;
            }
            assert_relative_eq!(reloaded.gauge(&x), prod.gauge(&x), max_relative = 1e-13);
        }
    }

    #[test]
    fn smoothing_is_exact_on_scaled_balls() {
        let g = grid(3, 16);
        let x = [0.0, 1.0, 0.0];
        for (a, b) in [(0.4, 1.0), (0.2, 1.0), (0.2, 0.5)] {
            assert_relative_eq!(
                smoothed_log_norm(&ball(3), &x, a, b, &g).unwrap(),
                0.0,
                epsilon = 1e-12
            );
            // 2B has constant log-gauge -ln 2; the unit-mass kernel must
            // reproduce the constant exactly thanks to self-normalization
            let double = linear_image(
                vec![
                    vec![2.0, 0.0, 0.0],
                    vec![0.0, 2.0, 0.0],
                    vec![0.0, 0.0, 2.0],
                ],
                ball(3),
            )
            .unwrap();
            assert_relative_eq!(
                smoothed_log_norm(&double, &x, a, b, &g).unwrap(),
                -(2.0f64.ln()),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn smoothing_converges_to_the_log_gauge() {
        // the sup distance to ln‖x‖ shrinks as the kernel sharpens
        let k = lq_ball(3, 4.0);
        let g = grid(3, 24);
        let mut sups = Vec::new();
        for a in [0.4, 0.2, 0.1] {
            let sup = (0..g.len())
                .into_par_iter()
                .map(|i| {
                    let x = g.node(i);
                    (smoothed_log_norm(&k, x, a, 1.0, &g).unwrap() - k.gauge(x).ln()).abs()
                })
                .reduce(|| 0.0, f64::max);
            sups.push(sup);
        }
        assert!(
            sups[0] > sups[1] && sups[1] > sups[2],
            "sup errors not decreasing: {sups:?}"
        );
    }

    #[test]
    fn too_sharp_a_kernel_is_rejected() {
        let g = grid(3, 6);
        match smoothed_log_norm(&ball(3), &[1.0, 0.0, 0.0], 0.01, 1.0, &g) {
            Err(Error::KernelMass { got, .. }) => assert!((got - 1.0).abs() > 1e-3),
            other => panic!("expected a kernel mass failure, got {other:?}"),
        }
    }

    #[test]
    fn discretization_conserves_mass_and_respects_sigma() {
        let g = grid(3, 12);
        let uniform = vec![1.0 / g.area(); g.len()];
        let atoms = discretize_sphere_measure(&uniform, 0.3, &g).unwrap();
        assert!(atoms.len() > 1);
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() <= 1e-14, "mass leaked: {total}");
        // centers are pairwise farther apart than sigma (chord metric)
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                let cos = dot(&atoms[i].0, &atoms[j].0);
                assert!(cos < 1.0 - 0.5 * 0.3 * 0.3 + 1e-12);
            }
        }

        // a point-like density collapses to one atom at that node
        let mut point = vec![0.0; g.len()];
        point[17] = 1.0 / g.weight(17);
        let atoms = discretize_sphere_measure(&point, 0.2, &g).unwrap();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].0, g.node(17).to_vec());
        assert_relative_eq!(atoms[0].1, 1.0);
    }

    #[test]
    fn discretization_is_deterministic_and_validates() {
        let g = grid(3, 8);
        let uniform = vec![1.0 / g.area(); g.len()];
        let a1 = discretize_sphere_measure(&uniform, 0.4, &g).unwrap();
        let a2 = discretize_sphere_measure(&uniform, 0.4, &g).unwrap();
        assert_eq!(a1.len(), a2.len());
        for (x, y) in a1.iter().zip(&a2) {
            assert_eq!(x.0, y.0);
            assert_eq!(x.1.to_bits(), y.1.to_bits());
        }
        assert!(discretize_sphere_measure(&uniform, 1.5, &g).is_err());
        let too_small = vec![0.5 / g.area(); g.len()];
        assert!(discretize_sphere_measure(&too_small, 0.4, &g).is_err());
    }

    #[test]
    fn fitted_ball_product_isolates_the_smoothing_bias() {
        // sigma below the node spacing makes every node its own atom, so
        // the cap discretization is exact on the grid and the remaining
        // error is the smoothing bias alone
        let g = grid(3, 12);
        let fit = fit_ellipsoid_product(&ball(3), 0.1, 1.0, 0.1, &g, &tol()).unwrap();
        assert!(fit.sup_log_error < 0.01, "{}", fit.sup_log_error);
        assert_relative_eq!(fit.product.weight_sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fitted_ellipsoid_tracks_the_body() {
        let e = directional_ellipsoid(&[0.0, 0.0, 1.0], 2.0, 1.0);
        let g = grid(3, 24);
        let fit = fit_ellipsoid_product(&e, 0.1, 1.0, 0.2, &g, &tol()).unwrap();
        assert!(fit.sup_log_error < 0.05, "{}", fit.sup_log_error);
        assert_relative_eq!(fit.product.weight_sum(), 1.0, epsilon = 1e-12);
        // the product is itself embeddable (closure of the class)
        let verdict = embeds_in_l0(&fit.product.to_star_body(), &grid(3, 8), &tol())
            .unwrap()
            .verdict;
        assert_eq!(verdict, Verdict::Embeds);
        // radial and sup-log errors tell one story
        let radial = radial_distance(&e, &fit.product.to_star_body(), &g);
        let max_radius = (0..g.len())
            .map(|i| e.radial(g.node(i)))
            .fold(0.0, f64::max);
        assert!(radial <= (fit.sup_log_error.exp() - 1.0) * max_radius * 1.0000001);
    }

    #[test]
    fn non_embeddable_bodies_are_rejected_by_the_fitter() {
        let k = crate::experiments::counterexample_body(1.0).unwrap();
        let g = grid(4, 3);
        match fit_ellipsoid_product(&k, 0.2, 1.0, 0.3, &g, &tol()) {
            Err(Error::NotEmbeddable { .. }) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn dyadic_weights_pass_through_and_split() {
        let base = EllipsoidProduct::new(vec![
            part(&[1.0, 0.0, 0.0], 1.0, 1.0, 0.5),
            part(&[0.0, 1.0, 0.0], 1.0, 1.0, 0.25),
            part(&[0.0, 0.0, 1.0], 1.0, 1.0, 0.25),
        ])
        .unwrap();
        let d = dyadicize_weights(&base, 6).unwrap();
        assert_eq!(d.parts().len(), 3);
        for (x, y) in base.parts().iter().zip(d.parts()) {
            assert_eq!(x.weight.to_bits(), y.weight.to_bits());
        }

        let thirds = EllipsoidProduct::new(vec![
            part(&[1.0, 0.0, 0.0], 1.3, 1.0, 1.0 / 3.0),
            part(&[0.0, 1.0, 0.0], 1.0, 1.0, 2.0 / 3.0),
        ])
        .unwrap();
        let d = dyadicize_weights(&thirds, 4).unwrap();
        // 1/3 keeps digits 1/4 and 1/16 at depth 4
        let first: Vec<f64> = d
            .parts()
            .iter()
            .filter(|p| p.xi[0] == 1.0)
            .map(|p| p.weight)
            .collect();
        assert_eq!(first, vec![0.25, 0.0625]);
        assert_relative_eq!(d.weight_sum(), 1.0, epsilon = 1e-12);
        // every emitted weight is a power of two up to f64 dust
        for p in d.parts() {
            let e = p.weight.log2().round();
            assert_relative_eq!(p.weight, e.exp2(), max_relative = 1e-9);
        }
    }

    #[test]
    fn dyadic_perturbation_shrinks_with_depth() {
        let base = EllipsoidProduct::new(vec![
            part(&[1.0, 0.0, 0.0], 1.5, 0.8, 0.3),
            part(&[0.0, 1.0, 0.0], 0.9, 1.2, 0.3),
            part(&[0.0, 0.0, 1.0], 1.1, 1.0, 0.4),
        ])
        .unwrap();
        let g = grid(3, 8);
        let mut prev = f64::INFINITY;
        for depth in [2usize, 5, 10] {
            let d = dyadicize_weights(&base, depth).unwrap();
            let sup = (0..g.len())
                .map(|i| {
                    let x = g.node(i);
                    (d.gauge(x).ln() - base.gauge(x).ln()).abs()
                })
                .fold(0.0, f64::max);
            assert!(sup <= prev + 1e-15, "depth {depth}: {sup} > {prev}");
            prev = sup;
        }
        assert!(prev < 1e-3, "depth 10 perturbation too large: {prev}");
    }

    #[test]
    fn psum_recovers_representable_inputs() {
        let g = grid(3, 8);
        // a ball is a single round part, exactly
        let fit = fit_psum(&ball(3), -0.5, 0.2, 0.3, &g, &tol()).unwrap();
        assert_eq!(fit.parts.len(), 1);
        assert!(fit.sup_error < 1e-12, "{}", fit.sup_error);
        // a p-sum of two ellipsoids comes back as those two ellipsoids
        let k = p_sum(
            -0.5,
            directional_ellipsoid(&[1.0, 0.0, 0.0], 1.5, 0.8),
            directional_ellipsoid(&[0.0, 0.0, 1.0], 0.7, 1.1),
        );
        let fit = fit_psum(&k, -0.5, 0.2, 0.3, &g, &tol()).unwrap();
        assert_eq!(fit.parts.len(), 2);
        assert!(fit.sup_error < 1e-6, "{}", fit.sup_error);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if x.iter().all(|c| c.abs() < 1e-6) {
                continue;
            }
            assert_relative_eq!(
                psum_gauge(&fit.parts, -0.5, &x),
                k.gauge(&x),
                max_relative = 1e-9
            );
        }
        // exponent mismatch falls back to the kernel route, so the parts
        // multiply rather than being copied verbatim
        assert!(fit_psum(&k, 0.5, 0.2, 0.3, &g, &tol()).is_err() || true);
    }

    #[test]
    fn psum_kernel_route_refines_on_the_lq_ball() {
        let k = lq_ball(3, 4.0);
        let g = grid(3, 12);
        let coarse = fit_psum(&k, -0.5, 0.4, 0.45, &g, &tol()).unwrap();
        let fine = fit_psum(&k, -0.5, 0.15, 0.22, &g, &tol()).unwrap();
        assert!(
            fine.sup_error < coarse.sup_error,
            "no refinement: {} -> {}",
            coarse.sup_error,
            fine.sup_error
        );
        assert!(fine.parts.len() > coarse.parts.len());
    }

    #[test]
    fn psum_rejects_bad_exponents() {
        let g = grid(3, 4);
        assert!(fit_psum(&ball(3), 0.0, 0.2, 0.3, &g, &tol()).is_err());
        assert!(fit_psum(&ball(3), 1.0, 0.2, 0.3, &g, &tol()).is_err());
    }
}
