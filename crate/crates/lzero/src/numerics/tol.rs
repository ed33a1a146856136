//! Centralized numerical tolerances.
//!
//! Every pipeline takes a [`Tolerances`] value instead of hard-coding
//! magic numbers, so coarse "verdict scan" settings and high-accuracy
//! "oracle" settings can coexist. The defaults below are tuned for the
//! desk-scale dimensions (n <= 6) this crate targets.

/// Knobs controlling quadrature, differentiation, root finding and grid
/// resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for adaptive 1-D quadrature.
    pub quad_rel: f64,
    /// Absolute floor for adaptive 1-D quadrature (guards integrals near 0).
    pub quad_abs: f64,
    /// Base finite-difference step as a fraction of the relevant radial
    /// scale (the section support radius for section derivatives).
    pub deriv_step: f64,
    /// Number of Richardson halvings: steps h, h/2, ..., h/2^(levels-1).
    pub richardson_levels: usize,
    /// Absolute bracket width at which root finding stops.
    pub root_tol: f64,
    /// Default sphere-grid resolution parameter for integration-grade
    /// grids on S^2 (higher dimensions should scale this down; see
    /// `SphereGrid::default_resolution`).
    pub sphere_resolution: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad_rel: 1e-10,
            quad_abs: 1e-12,
            deriv_step: 1e-2,
            richardson_levels: 3,
            root_tol: 1e-12,
            sphere_resolution: 48,
        }
    }
}

impl Tolerances {
    /// Looser settings for full-sphere verdict scans, where each node
    /// runs an entire section pipeline and only the sign and rough
    /// magnitude of the result matter.
    pub fn scan() -> Self {
        Tolerances {
            quad_rel: 1e-6,
            quad_abs: 1e-9,
            ..Self::default()
        }
    }

    /// Copy with a different base differentiation step.
    pub fn with_deriv_step(mut self, h: f64) -> Self {
        self.deriv_step = h;
        self
    }

    /// Copy with a different quadrature relative tolerance.
    pub fn with_quad_rel(mut self, rel: f64) -> Self {
        self.quad_rel = rel;
        self
    }

    /// Copy with a different sphere resolution.
    pub fn with_sphere_resolution(mut self, r: usize) -> Self {
        self.sphere_resolution = r;
        self
    }
}
