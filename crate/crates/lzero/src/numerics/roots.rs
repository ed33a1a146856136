//! Scalar root bracketing and related 1-D searches.

use crate::error::{Error, Result};

/// Result of a bracketing root solve.
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    /// Final bracket width (an upper bound on the error).
    pub width: f64,
    pub iterations: usize,
}

/// Find a root of `f` in `[lo, hi]` given a sign change, using the
/// Illinois variant of regula falsi (superlinear, bracket-preserving).
///
/// Stops when the bracket width drops below `tol` (absolute) or an
/// endpoint evaluates exactly to zero. Errors if the endpoints do not
/// straddle a sign change or the iteration cap is hit.
pub fn bracket_root(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<RootResult> {
    assert!(lo < hi, "bracket_root needs lo < hi, got [{lo}, {hi}]");
    assert!(tol > 0.0);
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NonFinite {
            context: format!("bracket_root endpoints f({a}) = {fa}, f({b}) = {fb}"),
        });
    }
    if fa == 0.0 {
        return Ok(RootResult { root: a, width: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(RootResult { root: b, width: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi, flo: fa, fhi: fb });
    }

    const MAX_ITER: usize = 200;
    // which side was retained last: 0 none, 1 kept a, 2 kept b
    let mut last_kept = 0u8;
    for it in 0..MAX_ITER {
        if b - a <= tol {
            return Ok(RootResult {
                root: 0.5 * (a + b),
                width: b - a,
                iterations: it,
            });
        }
        // secant step, clipped to the interior; fall back to bisection
        let mut x = (a * fb - b * fa) / (fb - fa);
        let mid = 0.5 * (a + b);
        if !(x > a && x < b) {
            x = mid;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite {
                context: format!("bracket_root trial point f({x}) = {fx}"),
            });
        }
        if fx == 0.0 {
            return Ok(RootResult { root: x, width: 0.0, iterations: it + 1 });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if last_kept == 2 {
                // b retained twice in a row: halve its weight (Illinois)
                fb *= 0.5;
            }
            last_kept = 2;
        } else {
            b = x;
            fb = fx;
            if last_kept == 1 {
                fa *= 0.5;
            }
            last_kept = 1;
        }
    }
    Err(Error::NonConvergence {
        routine: "bracket_root",
        iterations: MAX_ITER,
        estimate: 0.5 * (a + b),
    })
}

/// Expand `hi` geometrically (factor 2) from `start` until `f` changes
/// sign relative to `f(lo)`, then solve. Used by gauge evaluations where
/// only a lower bound of the bracket is known a priori.
pub fn expand_and_solve(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    start_hi: f64,
    tol: f64,
) -> Result<RootResult> {
    let flo = f(lo);
    let mut hi = start_hi.max(lo * (1.0 + 1e-9) + 1e-300);
    for _ in 0..200 {
        let fhi = f(hi);
        if fhi.is_finite() && flo.is_finite() && fhi.signum() != flo.signum() {
            return bracket_root(f, lo, hi, tol);
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        routine: "expand_and_solve",
        iterations: 200,
        estimate: hi,
    })
}

/// Golden-section minimizer for a unimodal function on [a, b].
/// Returns (argmin, min). Tolerance is on the argument.
pub fn golden_min(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = a;
    let mut b = b;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
