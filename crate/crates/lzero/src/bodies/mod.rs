//! Origin-symmetric star bodies and their algebra.
//!
//! A star body is described through its gauge (Minkowski functional)
//! `‖x‖_K = min{a ≥ 0 : x ∈ aK}`, a positive, even, 1-homogeneous
//! function. The reciprocal on the unit sphere is the radial function
//! `ρ_K(u) = 1/‖u‖_K`, the distance from the origin to the boundary
//! along `u`. Everything downstream (section functions, the spherical
//! transform of `ln‖x‖_K`, measure fitting) consumes bodies through
//! [`StarBody::gauge`] and a handful of structural accessors.
//!
//! Bodies are immutable after construction and cheap to clone; gauge
//! evaluation is pure, so bodies can be shared freely across threads.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::grid::SphereGrid;
use crate::numerics::linalg::{self, cholesky, condition_estimate, mat_vec};

pub mod spec;

/// Radial profile of a body of revolution, `t ↦ f(t)` on `[-a_max, a_max]`.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The shape variants. Composite variants (`MultSum`, `LogBlend`, `PSum`,
/// `LinearImage`) hold their operands; evaluation recurses.
#[derive(Clone)]
pub enum Shape {
    /// Unit Euclidean ball, gauge `|x|₂`.
    EuclideanBall,
    /// Unit ball of `ℓ_q`: gauge `(Σ|x_i|^q)^{1/q}`, any `q > 0`
    /// (a norm only for `q ≥ 1`, a star-body gauge for all `q > 0`).
    LqBall { q: f64 },
    /// Ellipsoid of revolution with semiaxis `a` along the unit vector
    /// `axis` and `b` across it: gauge² = `(axis,x)²/a² + (|x|²−(axis,x)²)/b²`.
    DirectionalEllipsoid { axis: Vec<f64>, a: f64, b: f64 },
    /// General ellipsoid with gauge `√(xᵀ M x)` for symmetric positive
    /// definite `M`.
    Ellipsoid { m: Vec<Vec<f64>> },
    /// Image `T·K` of the base body under an invertible matrix:
    /// gauge(x) = gauge_base(T⁻¹ x). The inverse is fixed at construction.
    LinearImage { t: Vec<Vec<f64>>, t_inv: Vec<Vec<f64>>, base: Box<StarBody> },
    /// Multiplicative sum: gauge is the geometric mean of the operands'.
    MultSum { left: Box<StarBody>, right: Box<StarBody> },
    /// Weighted multiplicative blend: gauge `Π ‖x‖_i^{w_i}`, `Σ w_i = 1`.
    LogBlend { parts: Vec<(StarBody, f64)> },
    /// p-sum: gauge `(‖x‖_K^p + ‖x‖_L^p)^{1/p}`, `p ∈ [−1,1] \ {0}`.
    PSum { p: f64, left: Box<StarBody>, right: Box<StarBody> },
    /// Body of revolution about coordinate `axis`: membership is
    /// `|x_axis| ≤ a_max` and `|x_⊥| ≤ f(x_axis)`.
    Revolution { profile: Profile, axis: usize, a_max: f64 },
    /// Radial function sampled on a sphere grid. With `interpolate` the
    /// gauge is defined everywhere by normalized inverse-angle blending
    /// of the nearest nodes; without it, only grid directions may be
    /// queried (anything else is a caller error and panics).
    Tabulated {
        grid: Arc<SphereGrid>,
        radial: Vec<f64>,
        interpolate: bool,
    },
}

/// An origin-symmetric star body in `R^n`.
#[derive(Clone)]
pub struct StarBody {
    dim: usize,
    shape: Shape,
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarBody(dim={}, {})", self.dim, self.shape.label())
    }
}

impl Shape {
    fn label(&self) -> String {
        match self {
            Shape::EuclideanBall => "ball".into(),
            Shape::LqBall { q } => format!("lq({q})"),
            Shape::DirectionalEllipsoid { a, b, .. } => format!("dir-ellipsoid(a={a}, b={b})"),
            Shape::Ellipsoid { .. } => "ellipsoid".into(),
            Shape::LinearImage { base, .. } => format!("linear-image of {}", base.shape.label()),
            Shape::MultSum { left, right } => {
                format!("mult-sum({}, {})", left.shape.label(), right.shape.label())
            }
            Shape::LogBlend { parts } => format!("log-blend of {} parts", parts.len()),
            Shape::PSum { p, .. } => format!("p-sum(p={p})"),
            Shape::Revolution { a_max, .. } => format!("revolution(|t| <= {a_max})"),
            Shape::Tabulated { radial, .. } => format!("tabulated({} nodes)", radial.len()),
        }
    }
}

// ---------------------------------------------------------------------------
// constructors

/// Unit Euclidean ball in `R^dim`.
pub fn ball(dim: usize) -> StarBody {
    assert!(dim >= 2, "dimension must be at least 2");
    StarBody { dim, shape: Shape::EuclideanBall }
}

/// Unit ball of `ℓ_q` in `R^dim`, `q > 0`.
pub fn lq_ball(dim: usize, q: f64) -> StarBody {
    assert!(dim >= 2, "dimension must be at least 2");
    assert!(q > 0.0 && q.is_finite(), "lq exponent must be positive, got {q}");
    StarBody { dim, shape: Shape::LqBall { q } }
}

/// Ellipsoid of revolution `E_{a,b}(x)`: semiaxis `a` along `x` (which is
/// normalized here), semiaxis `b` in every direction orthogonal to it.
pub fn directional_ellipsoid(axis: &[f64], a: f64, b: f64) -> StarBody {
    assert!(a > 0.0 && b > 0.0, "semiaxes must be positive, got a={a}, b={b}");
    let axis = linalg::normalize(axis);
    let dim = axis.len();
    assert!(dim >= 2, "dimension must be at least 2");
    StarBody { dim, shape: Shape::DirectionalEllipsoid { axis, a, b } }
}

/// Ellipsoid `{x : xᵀ M x ≤ 1}`; `M` must be symmetric positive definite.
pub fn ellipsoid(m: Vec<Vec<f64>>) -> Result<StarBody> {
    let dim = m.len();
    if dim < 2 || m.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidParameter(format!(
            "ellipsoid matrix must be square with dim >= 2, got {dim} rows"
        )));
    }
    cholesky(&m)?; // SPD check
    Ok(StarBody { dim, shape: Shape::Ellipsoid { m } })
}

/// The image `T·base` of a body under an invertible matrix `T`: its
/// gauge is `x ↦ ‖T⁻¹x‖_base`. Rejects ill-conditioned `T` (condition
/// estimate above 1e12), since applying the inverse would then lose
/// most significant digits.
pub fn linear_image(t: Vec<Vec<f64>>, base: StarBody) -> Result<StarBody> {
    let dim = base.dim;
    if t.len() != dim || t.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidParameter(format!(
            "linear image matrix must be {dim}x{dim}"
        )));
    }
    let cond = condition_estimate(&t)?;
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::InvalidParameter(format!(
            "matrix condition estimate {cond:.3e} exceeds 1e12"
        )));
    }
    let t_inv = linalg::inverse(&t)?;
    Ok(StarBody { dim, shape: Shape::LinearImage { t, t_inv, base: Box::new(base) } })
}

/// Multiplicative (0-)sum: the body whose gauge is `√(‖x‖_K ‖x‖_L)`.
pub fn mult_sum(k: StarBody, l: StarBody) -> StarBody {
    assert_eq!(k.dim, l.dim, "mult_sum operands must share a dimension");
    let dim = k.dim;
    StarBody { dim, shape: Shape::MultSum { left: Box::new(k), right: Box::new(l) } }
}

/// p-sum for `p ∈ [−1,1]`, `p ≠ 0`: gauge `(‖x‖_K^p + ‖x‖_L^p)^{1/p}`.
/// `p = 0` is the multiplicative sum; use [`mult_sum`].
pub fn p_sum(p: f64, k: StarBody, l: StarBody) -> StarBody {
    assert_eq!(k.dim, l.dim, "p_sum operands must share a dimension");
    assert!(
        p != 0.0 && (-1.0..=1.0).contains(&p),
        "p must lie in [-1,1] and be nonzero (p=0 is mult_sum), got {p}"
    );
    let dim = k.dim;
    StarBody { dim, shape: Shape::PSum { p, left: Box::new(k), right: Box::new(l) } }
}

/// Weighted multiplicative blend `Π ‖x‖_i^{w_i}`. Weights must be
/// positive and sum to 1 within 1e-9; they are renormalized exactly.
pub fn log_blend(parts: Vec<(StarBody, f64)>) -> StarBody {
    assert!(!parts.is_empty(), "log_blend needs at least one part");
    let dim = parts[0].0.dim;
    assert!(
        parts.iter().all(|(b, _)| b.dim == dim),
        "log_blend parts must share a dimension"
    );
    let total: f64 = parts.iter().map(|(_, w)| w).sum();
    assert!(
        parts.iter().all(|(_, w)| *w > 0.0) && (total - 1.0).abs() < 1e-9,
        "log_blend weights must be positive and sum to 1, got total {total}"
    );
    let parts = parts.into_iter().map(|(b, w)| (b, w / total)).collect();
    StarBody { dim, shape: Shape::LogBlend { parts } }
}

/// Body of revolution in `R^dim` about the coordinate axis `axis`:
/// `{x : |x_axis| ≤ a_max, |x_⊥| ≤ f(x_axis)}`. The profile must be
/// even, positive on the open interval, and vanish at `±a_max`; this is
/// checked on a sample and violations are rejected.
pub fn revolution_body(
    profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    a_max: f64,
    dim: usize,
    axis: usize,
) -> Result<StarBody> {
    if dim < 2 || axis >= dim {
        return Err(Error::InvalidParameter(format!(
            "revolution axis {axis} out of range for dim {dim}"
        )));
    }
    if !(a_max > 0.0) || !a_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "revolution support a_max must be positive and finite, got {a_max}"
        )));
    }
    let mut f_scale = 0.0f64;
    for i in 0..=256usize {
        let t = a_max * i as f64 / 256.0;
        let (fp, fm) = (profile(t), profile(-t));
        if (fp - fm).abs() > 1e-10 * fp.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "revolution profile is not even at t={t}: f(t)={fp}, f(-t)={fm}"
            )));
        }
        if i < 256 && !(fp > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "revolution profile must be positive on the interior, f({t})={fp}"
            )));
        }
        f_scale = f_scale.max(fp);
    }
    // the tolerance allows profiles that approach zero with unbounded
    // slope (e.g. cube roots of a polynomial), where a root located to
    // 1e-12 still leaves f(a_max) ~ 1e-4
    let f_end = profile(a_max);
    if f_end.abs() > 1e-3 * f_scale {
        return Err(Error::InvalidParameter(format!(
            "revolution profile must vanish at a_max, f({a_max})={f_end}"
        )));
    }
    Ok(StarBody {
        dim,
        shape: Shape::Revolution { profile: Arc::new(profile), axis, a_max },
    })
}

/// Star body given by radial samples on a sphere grid. All values must
/// be positive and finite. With `interpolate` the body is defined in
/// every direction by blending nearby nodes; otherwise only exact grid
/// directions are valid queries.
pub fn tabulated(grid: Arc<SphereGrid>, radial: Vec<f64>, interpolate: bool) -> Result<StarBody> {
    if radial.len() != grid.len() {
        return Err(Error::BodySpec(format!(
            "tabulated body needs one radial value per node: {} values, {} nodes",
            radial.len(),
            grid.len()
        )));
    }
    if let Some(bad) = radial.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::BodySpec(format!(
            "tabulated radial values must be positive and finite, got {bad}"
        )));
    }
    let dim = grid.dim();
    Ok(StarBody { dim, shape: Shape::Tabulated { grid, radial, interpolate } })
}

// ---------------------------------------------------------------------------
// evaluation

impl StarBody {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The Minkowski functional `‖x‖_K`. Zero maps to zero; everywhere
    /// else the gauge is positive, even, and 1-homogeneous.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        if x.iter().all(|&c| c == 0.0) {
            return 0.0;
        }
        match &self.shape {
            Shape::EuclideanBall => linalg::norm(x),
            Shape::LqBall { q } => {
                // factor out the max to keep powf in range for large q
                let m = x.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
                let s: f64 = x.iter().map(|&c| (c.abs() / m).powf(*q)).sum();
                m * s.powf(1.0 / q)
            }
            Shape::DirectionalEllipsoid { axis, a, b } => {
                let t = linalg::dot(axis, x);
                let n2 = linalg::dot(x, x);
                let perp2 = (n2 - t * t).max(0.0);
                (t * t / (a * a) + perp2 / (b * b)).sqrt()
            }
            Shape::Ellipsoid { m } => {
                let mx = mat_vec(m, x);
                linalg::dot(x, &mx).max(0.0).sqrt()
            }
            Shape::LinearImage { t_inv, base, .. } => base.gauge(&mat_vec(t_inv, x)),
            Shape::MultSum { left, right } => (left.gauge(x) * right.gauge(x)).sqrt(),
            Shape::LogBlend { parts } => {
                let mut acc = 0.0;
                for (b, w) in parts {
                    let g = b.gauge(x);
                    if g == 0.0 {
                        return 0.0;
                    }
                    acc += w * g.ln();
                }
                acc.exp()
            }
            Shape::PSum { p, left, right } => {
                let (gl, gr) = (left.gauge(x), right.gauge(x));
                if *p < 0.0 && (gl == 0.0 || gr == 0.0) {
                    return 0.0; // harmonic-type sum is dominated by a vanishing term
                }
                (gl.powf(*p) + gr.powf(*p)).powf(1.0 / p)
            }
            Shape::Revolution { .. } => self.revolution_gauge(x),
            Shape::Tabulated { grid, radial, interpolate } => {
                let norm = linalg::norm(x);
                let u: Vec<f64> = x.iter().map(|c| c / norm).collect();
                norm / tabulated_radial(grid, radial, *interpolate, &u)
            }
        }
    }

    /// Radial function on a unit direction: `ρ_K(u) = 1/‖u‖_K`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }

    /// Membership test `‖x‖_K ≤ 1`. For revolution bodies this is the
    /// direct profile comparison, bypassing the gauge root search.
    pub fn member(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Revolution { profile, axis, a_max } => {
                let t = x[*axis];
                if t.abs() > *a_max {
                    return false;
                }
                let perp2: f64 = x
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i != axis)
                    .map(|(_, c)| c * c)
                    .sum();
                perp2.sqrt() <= profile(t)
            }
            _ => self.gauge(x) <= 1.0,
        }
    }

    /// Gauge of a revolution body: the unique ray scale where membership
    /// flips. Star-shapedness makes `a ↦ member(x/a)` monotone, so a
    /// plain bisection on the membership predicate is exact and robust
    /// for arbitrary (non-algebraic) profiles.
    fn revolution_gauge(&self, x: &[f64]) -> f64 {
        let norm = linalg::norm(x);
        let mut hi = norm; // gauge scale with member(x/hi); grow until inside
        let mut lo = hi;
        let mut grow = 0;
        while !self.member(&linalg::scale(x, 1.0 / hi)) {
            lo = hi;
            hi *= 2.0;
            grow += 1;
            assert!(grow < 2000, "revolution gauge bracket failed to grow");
        }
        if grow == 0 {
            // x/norm may already be inside; shrink lo until outside
            let mut shrink = 0;
            while self.member(&linalg::scale(x, 1.0 / lo)) {
                lo /= 2.0;
                shrink += 1;
                if shrink > 2000 {
                    return 0.0; // inside at all scales: zero direction handled earlier
                }
            }
        }
        // invariant: member at hi, not at lo
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.member(&linalg::scale(x, 1.0 / mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Conservative convexity flag: true only for variants whose
    /// convexity is guaranteed (balls `q ≥ 1`, ellipsoids, linear images
    /// and 1-sums of convex bodies). Composite multiplicative blends can
    /// fail convexity even with convex parts, so they report false.
    pub fn is_convex(&self) -> bool {
        match &self.shape {
            Shape::EuclideanBall | Shape::DirectionalEllipsoid { .. } | Shape::Ellipsoid { .. } => {
                true
            }
            Shape::LqBall { q } => *q >= 1.0,
            Shape::LinearImage { base, .. } => base.is_convex(),
            Shape::PSum { p, left, right } => *p == 1.0 && left.is_convex() && right.is_convex(),
            _ => false,
        }
    }

    /// Radius of a ball circumscribing the body — an upper bound on the
    /// radial function, used for bracketing and section supports. The
    /// bound is exact for the primitive shapes and composes through the
    /// algebra; revolution profiles are sampled with a safety margin.
    pub fn enclosing_radius(&self) -> f64 {
        match &self.shape {
            Shape::EuclideanBall => 1.0,
            Shape::LqBall { q } => {
                let n = self.dim as f64;
                // radial max: 1 at the axes for q <= 2, at the diagonal beyond
                n.powf((0.5 - 1.0 / q).max(0.0))
            }
            Shape::DirectionalEllipsoid { a, b, .. } => a.max(*b),
            Shape::Ellipsoid { m } => {
                // 1/sqrt(lambda_min(M)) via power iteration on M^{-1}
                let inv = linalg::inverse(m).expect("SPD matrix is invertible");
                let mut v = vec![1.0; self.dim];
                let mut lambda = 0.0;
                for _ in 0..500 {
                    let w = mat_vec(&inv, &v);
                    lambda = linalg::norm(&w);
                    v = linalg::scale(&w, 1.0 / lambda);
                }
                lambda.sqrt() * 1.000001
            }
            Shape::LinearImage { t, base, .. } => {
                // points of T·K are T y with |y| <= R_base, and |T y| <= ||T||_F |y|
                let frob: f64 = t
                    .iter()
                    .flat_map(|r| r.iter())
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt();
                base.enclosing_radius() * frob
            }
            Shape::MultSum { left, right } => {
                (left.enclosing_radius() * right.enclosing_radius()).sqrt()
            }
            Shape::LogBlend { parts } => parts
                .iter()
                .map(|(b, w)| b.enclosing_radius().powf(*w))
                .product(),
            Shape::PSum { p, left, right } => {
                let (rl, rr) = (left.enclosing_radius(), right.enclosing_radius());
                if *p > 0.0 {
                    // gauge >= max of the operands' => radial <= min
                    rl.min(rr)
                } else {
                    // radial^{-p} is additive in the operands' radials
                    (rl.powf(-p) + rr.powf(-p)).powf(-1.0 / p)
                }
            }
            Shape::Revolution { profile, a_max, .. } => {
                let mut r2 = 0.0f64;
                for i in 0..=4096usize {
                    let t = a_max * i as f64 / 4096.0;
                    let f = profile(t);
                    r2 = r2.max(t * t + f * f);
                }
                r2.sqrt() * 1.05
            }
            Shape::Tabulated { radial, .. } => {
                // inverse-angle blending never exceeds the node maximum
                radial.iter().cloned().fold(0.0, f64::max) * 1.000001
            }
        }
    }
}

/// Radial value of a tabulated body in direction `u` (unit). Exact node
/// hits (including antipodes) return the stored value; otherwise the
/// value is a normalized inverse-angle blend of the four nearest nodes,
/// which stays within the range of the blended samples.
fn tabulated_radial(grid: &SphereGrid, radial: &[f64], interpolate: bool, u: &[f64]) -> f64 {
    let mut best: [(usize, f64); 4] = [(usize::MAX, -2.0); 4];
    for i in 0..grid.len() {
        // antipodal symmetry: match u against ±node
        let c = linalg::dot(grid.node(i), u).abs();
        if c > best[3].1 {
            best[3] = (i, c);
            best.sort_by(|a, b| b.1.total_cmp(&a.1));
        }
    }
    let (nearest, cos_near) = best[0];
    if cos_near >= 1.0 - 1e-12 {
        return radial[nearest];
    }
    assert!(
        interpolate,
        "tabulated body queried off-grid (nearest node cosine {cos_near:.6}) \
         without interpolation enabled"
    );
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, c) in best {
        let ang = c.clamp(-1.0, 1.0).acos();
        let w = 1.0 / (ang + 1e-12);
        num += w * radial[i];
        den += w;
    }
    num / den
}

/// Radial (Hausdorff-on-rays) distance `max_u |ρ_K(u) − ρ_L(u)|`,
/// approximated by the maximum over the grid nodes.
pub fn radial_distance(k: &StarBody, l: &StarBody, grid: &SphereGrid) -> f64 {
    assert_eq!(k.dim, l.dim, "radial distance needs equal dimensions");
    assert_eq!(grid.dim(), k.dim, "grid dimension mismatch");
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let u = grid.node(i);
        worst = worst.max((k.radial(u) - l.radial(u)).abs());
    }
    worst
}
