//! Concrete constructions: the four-dimensional revolution body whose
//! axis direction obstructs the log-representation for large quartic
//! coefficient, and a Monte Carlo check of the Cauchy log-moment
//! identity that powers the one-dimensional representation argument.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bodies::{revolution_body, StarBody};
use crate::embedding::{embeds_in_l0, Verdict};
use crate::error::{Error, Result};
use crate::numerics::grid::{sphere_grid, GridKind};
use crate::numerics::roots::bracket_root;
use crate::numerics::Tolerances;
use crate::sections::{SectionMethod, SectionProfile};

pub const FOUR_PI_OVER_3: f64 = 4.0 * std::f64::consts::PI / 3.0;

/// Support endpoint `a_N`: the positive root of `1 − a² − N a⁴`.
/// Shrinks like `N^{-1/4}` as the quartic term takes over.
pub fn counterexample_support(n_param: f64) -> Result<f64> {
    if !(n_param >= 0.0) || !n_param.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "quartic coefficient must be a finite nonnegative real, got {n_param}"
        )));
    }
    if n_param == 0.0 {
        return Ok(1.0);
    }
    // the root is below min(1, N^{-1/4}); both ends bracket a sign change
    let hi = 1.0f64.min(n_param.powf(-0.25));
    let g = |a: f64| 1.0 - a * a - n_param * a.powi(4);
    let r = bracket_root(&g, 0.0, hi, Tolerances::default().root_tol)?;
    Ok(r.root)
}

/// The revolution body in R⁴ with profile `f_N(t) = (1 − t² − N t⁴)^{1/3}`
/// about the last coordinate axis. Its central section function along
/// that axis is the plain quartic `(4π/3)(1 − t² − N t⁴)`, which is what
/// makes the construction analytically transparent.
pub fn counterexample_body(n_param: f64) -> Result<StarBody> {
    let a_n = counterexample_support(n_param)?;
    revolution_body(
        move |t| (1.0 - t * t - n_param * t.powi(4)).max(0.0).cbrt(),
        a_n,
        4,
        3,
    )
}

/// Closed form of the regularized section integral at the axis
/// direction: `(4π/3)(−N a_N + 1/a_N − 1/(3 a_N³))`. Positive means the
/// axis direction is compatible with a log-representation; negative
/// means the body admits none.
pub fn counterexample_closed_form(n_param: f64) -> Result<f64> {
    let a = counterexample_support(n_param)?;
    Ok(FOUR_PI_OVER_3 * (-n_param * a + 1.0 / a - 1.0 / (3.0 * a * a * a)))
}

/// Root of the closed-form value in `(n_lo, n_hi)`: the quartic
/// coefficient where the axis obstruction first appears.
pub fn find_counterexample_threshold(n_lo: f64, n_hi: f64) -> Result<f64> {
    let f = |n: f64| counterexample_closed_form(n).unwrap_or(f64::NAN);
    let r = bracket_root(&f, n_lo, n_hi, Tolerances::default().root_tol)?;
    Ok(r.root)
}

/// One row of the quartic-coefficient scan: the support root, the
/// closed-form axis value, its independently computed numeric twin, and
/// the embedding verdict with the direction that decides it.
#[derive(Debug, Clone)]
pub struct CounterexampleRecord {
    pub n_param: f64,
    pub a_n: f64,
    pub closed_form_value: f64,
    pub numeric_i: f64,
    pub verdict: Verdict,
    /// Direction witnessing a failure; `None` when the body embeds.
    pub witness: Option<Vec<f64>>,
}

/// Evaluates the body at one quartic coefficient. The regularized
/// section integral at ξ = e₄ is recomputed numerically (not copied from
/// the closed form); the verdict checks the axis first — a negative
/// value there already defeats any log representation — and falls back
/// to a coarse full-sphere scan otherwise.
pub fn counterexample_value(n_param: f64) -> Result<CounterexampleRecord> {
    let a_n = counterexample_support(n_param)?;
    let closed_form_value = counterexample_closed_form(n_param)?;
    let body = counterexample_body(n_param)?;
    let axis = [0.0, 0.0, 0.0, 1.0];
    let profile = SectionProfile::new(&body, &axis, SectionMethod::Auto, &Tolerances::default())?;
    let numeric_i = profile.regularized_integral()?;
    let (verdict, witness) = if closed_form_value < 0.0 {
        (Verdict::Fails, Some(axis.to_vec()))
    } else {
        let grid = sphere_grid(4, 4, GridKind::Deterministic)?;
        let report = embeds_in_l0(&body, &grid, &Tolerances::scan())?;
        (report.verdict, report.witness.map(|(xi, _)| xi))
    };
    Ok(CounterexampleRecord {
        n_param,
        a_n,
        closed_form_value,
        numeric_i,
        verdict,
        witness,
    })
}

/// Scan over quartic coefficients; rows come back in input order.
pub fn counterexample_scan(coefficients: &[f64]) -> Result<Vec<CounterexampleRecord>> {
    coefficients
        .par_iter()
        .map(|&n| counterexample_value(n))
        .collect()
}

/// Monte Carlo estimate of `E ln|a₀ + Σ a_j f_j|` for independent
/// standard Cauchy `f_j`, with its analytic target.
#[derive(Debug, Clone)]
pub struct CauchyMcResult {
    pub estimate: f64,
    pub stderr: f64,
    /// `ln √(a₀² + (Σ|a_j|)²)`, the closed form the estimate verifies.
    pub target: f64,
    pub samples: u64,
    pub seed: u64,
}

const MC_BATCH: u64 = 1 << 14;

/// Estimates `E ln|a₀ + Σ a_j f_j|` by sampling each Cauchy variate as a
/// ratio of two independent standard Gaussians. Batches run in parallel
/// on ChaCha streams derived from the seed and are merged in a fixed
/// order, so results are byte-stable across thread counts.
pub fn cauchy_log_moment_mc(a0: f64, coeffs: &[f64], samples: u64, seed: u64) -> CauchyMcResult {
    assert!(samples >= 10_000, "need at least 1e4 samples, got {samples}");
    assert!(
        a0 != 0.0 || coeffs.iter().any(|c| *c != 0.0),
        "all coefficients zero"
    );
    let target = (a0 * a0 + coeffs.iter().map(|c| c.abs()).sum::<f64>().powi(2))
        .sqrt()
        .ln();
    if coeffs.is_empty() {
        // no randomness left: the expectation is ln|a0| exactly
        return CauchyMcResult {
            estimate: a0.abs().ln(),
            stderr: 0.0,
            target,
            samples,
            seed,
        };
    }
    let n_batches = samples.div_ceil(MC_BATCH);
    let stats: Vec<(f64, f64)> = (0..n_batches)
        .into_par_iter()
        .map(|bi| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(bi + 1);
            let count = MC_BATCH.min(samples - bi * MC_BATCH);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..count {
                let v = loop {
                    let mut v = a0;
                    for &c in coeffs {
                        let g1: f64 = rng.sample(StandardNormal);
                        let mut g2: f64 = rng.sample(StandardNormal);
                        while g2 == 0.0 {
                            g2 = rng.sample(StandardNormal);
                        }
                        v += c * (g1 / g2);
                    }
                    if v != 0.0 {
                        break v;
                    }
                };
                let l = v.abs().ln();
                sum += l;
                sumsq += l * l;
            }
            (sum, sumsq)
        })
        .collect();
    let (sum, sumsq) = stats
        .iter()
        .fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let n = samples as f64;
    let estimate = sum / n;
    let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
    CauchyMcResult {
        estimate,
        stderr: (var / n).sqrt(),
        target,
        samples,
        seed,
    }
}
