//! Amoeba and tropical-curve data for `y - F_v(t)`.
//!
//! Plot coordinates are `(u, s) = (ln|t|, ln|y|)`. The upper boundary of the
//! amoeba is the graph of `u ↦ 𝓛_v(e^u)`, and its unbounded arms are
//! asymptotic to the tentacle lines.

use serde::Serialize;

use crate::approx::eval_lcal;
use crate::error::{Error, Result};
use crate::vector::{summarize, RealVector};

/// Vertices of the Newton polygon, as `(exponent of t, exponent of y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    /// `(M, 0)`, `(m, 0)`, `(0, 1)`; the first two coincide when `degenerate`.
    pub vertices: Vec<(i64, i64)>,
    pub degenerate: bool,
}

pub fn newton_polygon(v: &RealVector) -> Result<NewtonPolygon> {
    let ints = v.to_i64()?;
    let top = *ints.iter().max().unwrap();
    let bottom = *ints.iter().min().unwrap();
    let degenerate = top == bottom;
    let vertices = if degenerate {
        vec![(top, 0), (0, 1)]
    } else {
        vec![(top, 0), (bottom, 0), (0, 1)]
    };
    Ok(NewtonPolygon {
        vertices,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    SlopeIntercept,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TentacleLabel {
    MaxTentacle,
    MinTentacle,
}

/// A line in the `(u, s)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line2D {
    pub kind: LineKind,
    /// Ignored for vertical lines.
    pub slope: f64,
    /// `s`-intercept, or the `u`-position of a vertical line.
    pub intercept: f64,
    pub label: TentacleLabel,
}

impl Line2D {
    pub fn at(&self, u: f64) -> f64 {
        self.slope * u + self.intercept
    }
}

/// The two sloped tentacles: `s = ln μ_M + M·u` and `s = ln μ_m + m·u`.
///
/// The vertical tentacles sit at the moduli of the roots of `F_v` and are not
/// produced.
pub fn tentacle_lines(v: &RealVector) -> Result<[Line2D; 2]> {
    v.require_integral()?;
    let s = summarize(v);
    let line = |slope: f64, count: usize, label| Line2D {
        kind: LineKind::SlopeIntercept,
        slope,
        intercept: (count as f64).ln(),
        label,
    };
    Ok([
        line(s.max, s.max_multiplicity(), TentacleLabel::MaxTentacle),
        line(s.min, s.min_multiplicity(), TentacleLabel::MinTentacle),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub u: f64,
    pub s: f64,
}

/// `samples` equally spaced points of the graph of `𝓛_v(e^u)` on `[u_min, u_max]`.
pub fn amoeba_upper_boundary(
    v: &RealVector,
    u_min: f64,
    u_max: f64,
    samples: usize,
) -> Result<Vec<BoundaryPoint>> {
    if samples < 2 {
        return Err(Error::param("samples", "need at least two samples"));
    }
    if !(u_min < u_max) || !u_min.is_finite() || !u_max.is_finite() {
        return Err(Error::param(
            "u_min",
            format!("need finite u_min < u_max, got [{u_min}, {u_max}]"),
        ));
    }
    let step = (u_max - u_min) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| {
            let u = if i + 1 == samples {
                u_max
            } else {
                u_min + i as f64 * step
            };
            BoundaryPoint {
                u,
                s: eval_lcal(v, u),
            }
        })
        .collect())
}

/// Primitive outer normals of the Newton polygon, one per edge: the rays of
/// the tropical curve `(1, M)`, `(0, -1)` and `(-1, -m)`.
pub fn trop_rays(v: &RealVector) -> Result<[(i64, i64); 3]> {
    let ints = v.to_i64()?;
    let top = *ints.iter().max().unwrap();
    let bottom = *ints.iter().min().unwrap();
    if top == bottom {
        return Err(Error::Degenerate(format!(
            "all entries equal {top}; the Newton polygon is a segment"
        )));
    }
    Ok([(1, top), (0, -1), (-1, -bottom)])
}
