//! Points, rectangular observation windows and the distances used by every
//! estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance between two points.
pub fn distance(p: Point, q: Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Axis-aligned rectangular observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Bounds")]
pub struct Window {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

#[derive(Deserialize)]
struct Bounds {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl TryFrom<Bounds> for Window {
    type Error = Error;

    fn try_from(b: Bounds) -> Result<Self> {
        Window::new(b.xmin, b.xmax, b.ymin, b.ymax)
    }
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidWindow("bounds must be finite".into()));
        }
        if xmax <= xmin || ymax <= ymin {
            return Err(Error::InvalidWindow(format!(
                "need xmin < xmax and ymin < ymax, got [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
        })
    }

    /// The unit square `[0, 1]^2`.
    pub fn unit_square() -> Self {
        Self {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }
    pub fn xmax(&self) -> f64 {
        self.xmax
    }
    pub fn ymin(&self) -> f64 {
        self.ymin
    }
    pub fn ymax(&self) -> f64 {
        self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn min_side(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    /// Closed containment: points on the boundary are inside.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn is_unit_square(&self) -> bool {
        *self == Self::unit_square()
    }

    /// Distance from an interior point to the nearest edge, without the
    /// containment check.
    pub(crate) fn edge_distance(&self, p: Point) -> f64 {
        (p.x - self.xmin)
            .min(self.xmax - p.x)
            .min(p.y - self.ymin)
            .min(self.ymax - p.y)
    }
}

/// Shortest distance from `p` to the boundary of `w`.
pub fn boundary_distance(p: Point, w: &Window) -> Result<f64> {
    if !w.contains(p) {
        return Err(Error::PointOutsideWindow {
            index: 0,
            x: p.x,
            y: p.y,
        });
    }
    Ok(w.edge_distance(p))
}
