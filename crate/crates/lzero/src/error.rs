use thiserror::Error;

/// Crate-wide error type.
///
/// Numerical routines report *runtime* failures (no sign change in a
/// bracket, non-convergence, detected cancellation) through this enum;
/// violations of documented preconditions (e.g. querying an
/// interpolation-disabled tabulated body off grid) panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension n = {0} (supported: {1})")]
    UnsupportedDimension(usize, &'static str),

    #[error("sphere grid resolution {resolution} for n = {dim} would create {nodes} nodes (cap {cap})")]
    ResolutionOverflow {
        dim: usize,
        resolution: usize,
        nodes: usize,
        cap: usize,
    },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {flo:e}, f(hi) = {fhi:e}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error("{routine} failed to converge after {iterations} iterations (best estimate {estimate:e})")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("slice at t = {t} is not star-shaped about its center (root bracketing failed); use the Monte Carlo slice evaluator")]
    NonStarSlice { t: f64 },

    #[error("catastrophic cancellation detected in {context}; refine the step or supply closed-form Taylor data")]
    Cancellation { context: String },

    #[error("body does not embed: negative spectral density {density:e} at direction {xi:?}")]
    NotEmbeddable { xi: Vec<f64>, density: f64 },

    #[error("kernel mass check failed: got {got} (expected 1 within {tol})")]
    KernelMass { got: f64, tol: f64 },

    #[error("body specification error: {0}")]
    BodySpec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
