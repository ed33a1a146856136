//! Even-order derivatives at the origin of even functions.
//!
//! Section profiles A(t) are even in t, so only one-sided samples are
//! needed and every finite-difference error expansion contains even
//! powers of h only. That makes Richardson extrapolation with ratio 4
//! per level exact for polynomial inputs and very effective otherwise.

use crate::error::{Error, Result};
use crate::numerics::tol::Tolerances;

/// Outcome of a Richardson-extrapolated derivative estimate.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeEstimate {
    pub value: f64,
    /// Difference between the last two diagonal extrapolants; a
    /// pragmatic error proxy.
    pub error_estimate: f64,
    /// Set when the extrapolation tail stops contracting, which is the
    /// signature of noise-dominated samples.
    pub noisy: bool,
}

/// Central-difference stencil of order k for an even function,
/// expressed over samples at 0, h, 2h, ... Exact for polynomials of
/// degree <= k+1.
fn stencil(f: &dyn Fn(f64) -> f64, k: usize, h: f64) -> f64 {
    match k {
        2 => 2.0 * (f(h) - f(0.0)) / (h * h),
        4 => (2.0 * f(2.0 * h) - 8.0 * f(h) + 6.0 * f(0.0)) / h.powi(4),
        6 => (2.0 * f(3.0 * h) - 12.0 * f(2.0 * h) + 30.0 * f(h) - 20.0 * f(0.0)) / h.powi(6),
        _ => unreachable!("validated by caller"),
    }
}

/// Estimate d^k f / dt^k (0) for an *even* function f, k in {2, 4, 6}.
///
/// Base step is `tol.deriv_step` (an absolute step here; callers that
/// differentiate section profiles scale it by the support radius first),
/// halved `tol.richardson_levels - 1` times. Larger k automatically uses
/// a larger base step to keep rounding noise of the k-th divided
/// difference in check.
pub fn derivative_at_zero(
    f: &dyn Fn(f64) -> f64,
    k: usize,
    tol: &Tolerances,
) -> Result<DerivativeEstimate> {
    if !matches!(k, 2 | 4 | 6) {
        return Err(Error::InvalidParameter(format!(
            "derivative order k = {k} not supported (even orders 2, 4, 6)"
        )));
    }
    let levels = tol.richardson_levels.max(2);
    // noise amplification of the k-th difference is eps/h^k: widen the
    // base step for the higher orders
    let h0 = tol.deriv_step
        * match k {
            2 => 1.0,
            4 => 5.0,
            _ => 12.0,
        };
    let mut diag: Vec<f64> = Vec::with_capacity(levels);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for lvl in 0..levels {
        let h = h0 / 2f64.powi(lvl as i32);
        let d = stencil(f, k, h);
        if !d.is_finite() {
            return Err(Error::NonFinite {
                context: format!("derivative stencil at h = {h}"),
            });
        }
        let mut row = vec![d];
        for j in 1..=lvl {
            let p = 4f64.powi(j as i32);
            let v = (p * row[j - 1] - rows[lvl - 1][j - 1]) / (p - 1.0);
            row.push(v);
        }
        diag.push(*row.last().expect("row non-empty"));
        rows.push(row);
    }
    let value = *diag.last().expect("at least two levels");
    let diffs: Vec<f64> = diag.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let error_estimate = *diffs.last().expect("at least one difference");
    // non-monotone tail => the last halving added noise instead of
    // accuracy; diffs at rounding level (relative 1e-11) are treated as
    // converged, not noisy
    let scale = value.abs().max(1e-300);
    let noisy = diffs.len() >= 2 && {
        let prev = diffs[diffs.len() - 2];
        let last = diffs[diffs.len() - 1];
        last > prev * 1.000_001 && last > 1e-11 * scale
    };
    Ok(DerivativeEstimate { value, error_estimate, noisy })
}
