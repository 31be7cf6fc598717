//! Points, half-width edge vectors and the axis-aligned cells of the search tree.
//!
//! The unit cube `[0,1]^n` is embedded in the wrapped domain
//! `[0, θ^(n-1)] × … × [0, θ^0]` with `θ = 2^(1/n)`. Bisecting the longest side
//! of a cell in that domain always produces a cell whose edge entries are the
//! next consecutive run of θ-powers, so every split shrinks the edge norm by
//! exactly `2^(1/n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growth factor of the wrapped domain, `2^(1/n)`.
pub fn theta(n: usize) -> f64 {
    (1.0 / n as f64).exp2()
}

/// A point in the wrapped domain (or in the unit cube after projection).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::param(
                "point",
                format!("non-finite coordinate {bad}"),
            ));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &Point) -> f64 {
        euclidean(&self.0, &other.0)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Half side lengths of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeVector(Vec<f64>);

impl EdgeVector {
    pub fn new(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(bad) = half_widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::param(
                "edge",
                format!("half width {bad} is not positive"),
            ));
        }
        Ok(EdgeVector(half_widths))
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean norm, summed in index order.
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Index of the largest half width; ties go to the lowest index.
    pub fn longest_axis(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.0.iter().enumerate().skip(1) {
            if w > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Euclidean norm of a slice, summed in index order.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Axis-aligned cell `[center - edge, center + edge]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRect {
    pub center: Point,
    pub edge: EdgeVector,
}

impl HyperRect {
    pub fn new(center: Point, edge: EdgeVector) -> Result<Self> {
        if center.dim() != edge.0.len() {
            return Err(Error::DimensionMismatch {
                expected: center.dim(),
                actual: edge.0.len(),
            });
        }
        if center.0.iter().zip(&edge.0).any(|(c, e)| c - e < 0.0) {
            return Err(Error::param("cell", "region extends below zero"));
        }
        Ok(HyperRect { center, edge })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Bisects the longest side. Returns `(lower, upper)`: the child shifted
    /// towards the origin first.
    pub fn split(&self) -> (HyperRect, HyperRect) {
        let axis = self.edge.longest_axis();
        let shift = self.edge.0[axis] / 2.0;

        let mut edge = self.edge.0.clone();
        edge[axis] -= shift;
        let mut lower = self.center.0.clone();
        lower[axis] -= shift;
        let mut upper = self.center.0.clone();
        upper[axis] += shift;

        (
            HyperRect {
                center: Point(lower),
                edge: EdgeVector(edge.clone()),
            },
            HyperRect {
                center: Point(upper),
                edge: EdgeVector(edge),
            },
        )
    }

    /// Lebesgue measure of the region, `Π 2·edge(i)`.
    pub fn volume(&self) -> f64 {
        self.edge.0.iter().map(|e| 2.0 * e).product()
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.center
            .0
            .iter()
            .zip(&self.edge.0)
            .map(|(c, e)| c - e)
            .collect()
    }

    pub fn upper_corner(&self) -> Vec<f64> {
        self.center
            .0
            .iter()
            .zip(&self.edge.0)
            .map(|(c, e)| c + e)
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.center.0.iter().zip(&self.edge.0))
                .all(|(xi, (c, e))| *xi >= c - e && *xi <= c + e)
    }
}

/// Root cell of the wrapped domain: center and edge are both `(θ^-1, …, θ^-n)`.
pub fn wrap_domain(n: usize) -> Result<HyperRect> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let half: Vec<f64> = (1..=n).map(|i| (-(i as f64) / n as f64).exp2()).collect();
    Ok(HyperRect {
        center: Point(half.clone()),
        edge: EdgeVector(half),
    })
}

/// Volume of the wrapped domain, `2^((n-1)/2)`.
pub fn wrapped_volume(n: usize) -> f64 {
    ((n as f64 - 1.0) / 2.0).exp2()
}

/// Nearest point of the unit cube. For an axis-aligned box the Euclidean
/// projection is the coordinatewise clamp.
pub fn project(x: &Point) -> Point {
    Point(x.0.iter().map(|c| c.clamp(0.0, 1.0)).collect())
}

/// In-place variant of [`project`] for hot loops.
pub fn project_into(x: &[f64], out: &mut [f64]) {
    for (o, c) in out.iter_mut().zip(x) {
        *o = c.clamp(0.0, 1.0);
    }
}
