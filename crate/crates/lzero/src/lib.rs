//! Geometry of logarithmic norm representations for origin-symmetric
//! star bodies.
//!
//! The crate answers, numerically, when the log-gauge of a star body K
//! in R^n admits the representation
//!
//!   ln ||x||_K = integral over S^{n-1} of ln |(x, xi)| d mu(xi) + C
//!
//! with a probability measure mu, by computing the spherical part of
//! the Fourier transform of ln ||x||_K through derivatives (odd n) or a
//! regularized integral (even n) of hyperplane section functions. On
//! top of the classifier sit the spectral-measure extractor, the
//! representation constant, an ellipsoid-product approximation pipeline
//! with dyadic weights, a four-dimensional non-embeddable convex body,
//! and Monte Carlo checks of the Cauchy log-moment identities that
//! motivate the whole construction.
//!
//! Modules mirror the pipeline: [`numerics`] (grids, quadrature,
//! differentiation), [`bodies`] (star-body algebra), [`sections`]
//! (parallel section functions and their fractional derivatives),
//! [`embedding`] (classification, spectral measures, constants),
//! [`approximation`] (ellipsoid products), [`experiments`]
//! (counterexample and Monte Carlo), [`report`] (deterministic
//! serialization).

pub mod approximation;
pub mod bodies;
pub mod error;
pub mod experiments;
pub mod embedding;
pub mod numerics;
pub mod report;
pub mod sections;

pub use error::{Error, Result};
