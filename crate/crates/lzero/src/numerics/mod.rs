//! Numerical infrastructure: sphere grids, adaptive 1-D quadrature,
//! Richardson-extrapolated derivatives at the origin, root bracketing,
//! small dense linear algebra and special functions.

pub mod deriv;
pub mod grid;
pub mod linalg;
pub mod quad;
pub mod roots;
pub mod special;
pub mod tol;

pub use deriv::{derivative_at_zero, DerivativeEstimate};
pub use grid::{integrate_sphere, sphere_grid, GridKind, SphereGrid};
pub use quad::{integrate_1d, EndpointHint, UpperBound};
pub use roots::{bracket_root, RootResult};
pub use special::{ball_volume, digamma, gamma, sphere_abs_moment, sphere_area};
pub use tol::Tolerances;
