//! JSON body-spec documents.
//!
//! A spec is a small compositional description of a star body, e.g.
//! `{"kind": "ball", "dim": 3}` or
//! `{"kind": "mult-sum", "left": {...}, "right": {...}}`. Specs are the
//! CLI's ingestion format and round-trip losslessly through serde, so a
//! loaded body can be re-serialized and reloaded with identical gauges.
//! A bare JSON array is accepted as shorthand for an ellipsoid-product
//! spec, matching the fit report output.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bodies::{
    ball, directional_ellipsoid, ellipsoid, linear_image, log_blend, lq_ball, mult_sum, p_sum,
    StarBody,
};
use crate::error::{Error, Result};
use crate::experiments::counterexample_body;

/// One factor of an ellipsoid-product body: the ellipsoid `E_{a,b}(xi)`
/// raised to `weight` in the gauge product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductPart {
    pub xi: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub weight: f64,
}

/// Serializable body description. `build` turns it into a [`StarBody`];
/// all validation happens there, so a deserialized spec can be inspected
/// before any numeric work runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    Ball { dim: usize },
    Lq { dim: usize, q: f64 },
    DirEllipsoid { axis: Vec<f64>, a: f64, b: f64 },
    Ellipsoid { matrix: Vec<Vec<f64>> },
    LinearImage { matrix: Vec<Vec<f64>>, base: Box<BodySpec> },
    MultSum { left: Box<BodySpec>, right: Box<BodySpec> },
    PSum { p: f64, left: Box<BodySpec>, right: Box<BodySpec> },
    LogBlend { parts: Vec<(BodySpec, f64)> },
    Counterexample {
        #[serde(rename = "N")]
        n: f64,
    },
    Product { parts: Vec<ProductPart> },
}

impl BodySpec {
    /// Construct the described body.
    pub fn build(&self) -> Result<StarBody> {
        // constructor preconditions (dimension agreement, parameter
        // ranges) panic on programmer error; for documents coming from
        // the outside we validate first and return BodySpec errors
        match self {
            BodySpec::Ball { dim } => {
                check(*dim >= 2, "ball dim must be >= 2")?;
                Ok(ball(*dim))
            }
            BodySpec::Lq { dim, q } => {
                check(*dim >= 2, "lq dim must be >= 2")?;
                check(*q > 0.0 && q.is_finite(), "lq exponent must be positive")?;
                Ok(lq_ball(*dim, *q))
            }
            BodySpec::DirEllipsoid { axis, a, b } => {
                check(axis.len() >= 2, "axis must have dim >= 2")?;
                check(
                    axis.iter().any(|c| *c != 0.0),
                    "axis must be a nonzero vector",
                )?;
                check(*a > 0.0 && *b > 0.0, "semiaxes must be positive")?;
                Ok(directional_ellipsoid(axis, *a, *b))
            }
            BodySpec::Ellipsoid { matrix } => ellipsoid(matrix.clone()),
            BodySpec::LinearImage { matrix, base } => linear_image(matrix.clone(), base.build()?),
            BodySpec::MultSum { left, right } => {
                let (l, r) = (left.build()?, right.build()?);
                check(l.dim() == r.dim(), "mult-sum operands must share dim")?;
                Ok(mult_sum(l, r))
            }
            BodySpec::PSum { p, left, right } => {
                let (l, r) = (left.build()?, right.build()?);
                check(l.dim() == r.dim(), "p-sum operands must share dim")?;
                check(
                    *p != 0.0 && (-1.0..=1.0).contains(p),
                    "p must lie in [-1,1] \\ {0}",
                )?;
                Ok(p_sum(*p, l, r))
            }
            BodySpec::LogBlend { parts } => {
                check(!parts.is_empty(), "log-blend needs parts")?;
                let total: f64 = parts.iter().map(|(_, w)| w).sum();
                check(
                    parts.iter().all(|(_, w)| *w > 0.0) && (total - 1.0).abs() < 1e-9,
                    "log-blend weights must be positive and sum to 1",
                )?;
                let built: Result<Vec<(StarBody, f64)>> = parts
                    .iter()
                    .map(|(s, w)| s.build().map(|b| (b, *w)))
                    .collect();
                let built = built?;
                let dim = built[0].0.dim();
                check(
                    built.iter().all(|(b, _)| b.dim() == dim),
                    "log-blend parts must share dim",
                )?;
                Ok(log_blend(built))
            }
            BodySpec::Counterexample { n } => counterexample_body(*n),
            BodySpec::Product { parts } => build_product(parts),
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::BodySpec(msg.into()))
    }
}

fn build_product(parts: &[ProductPart]) -> Result<StarBody> {
    check(!parts.is_empty(), "product needs at least one part")?;
    let dim = parts[0].xi.len();
    let total: f64 = parts.iter().map(|p| p.weight).sum();
    check(
        parts.iter().all(|p| p.weight > 0.0) && (total - 1.0).abs() < 1e-9,
        "product weights must be positive and sum to 1",
    )?;
    let mut blend = Vec::with_capacity(parts.len());
    for p in parts {
        check(p.xi.len() == dim, "product parts must share dim")?;
        check(p.xi.iter().any(|c| *c != 0.0), "part axis must be nonzero")?;
        check(p.a > 0.0 && p.b > 0.0, "part semiaxes must be positive")?;
        blend.push((directional_ellipsoid(&p.xi, p.a, p.b), p.weight));
    }
    Ok(log_blend(blend))
}

/// Parse a body-spec document. Accepts either a spec object or a bare
/// array of product parts.
pub fn parse_body_spec(text: &str) -> Result<BodySpec> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let parts: Vec<ProductPart> = serde_json::from_str(trimmed)
            .map_err(|e| Error::BodySpec(format!("bad product array: {e}")))?;
        return Ok(BodySpec::Product { parts });
    }
    serde_json::from_str(trimmed).map_err(|e| Error::BodySpec(format!("bad body spec: {e}")))
}

/// Parse and build in one step.
pub fn load_body(text: &str) -> Result<StarBody> {
    parse_body_spec(text)?.build()
}

/// Snapshot a body's radial function on a grid as a tabulated body; the
/// standard way to freeze a composite body for distance comparisons.
pub fn snapshot(body: &StarBody, grid: Arc<crate::numerics::SphereGrid>) -> Result<StarBody> {
    let radial: Vec<f64> = (0..grid.len()).map(|i| body.radial(grid.node(i))).collect();
    crate::bodies::tabulated(grid, radial, true)
}
