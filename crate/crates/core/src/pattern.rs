use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};

/// A finite, simple, marked point pattern observed in a rectangular window.
///
/// Construction checks that every point lies in the (closed) window, that
/// coordinates and marks are finite and that no two points coincide. Mark
/// positivity is only required by the product-weighted estimators and is
/// checked there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPattern")]
pub struct MarkedPattern {
    points: Vec<Point>,
    marks: Vec<f64>,
    window: Window,
}

#[derive(Deserialize)]
struct RawPattern {
    points: Vec<Point>,
    marks: Vec<f64>,
    window: Window,
}

impl TryFrom<RawPattern> for MarkedPattern {
    type Error = Error;

    fn try_from(raw: RawPattern) -> Result<Self> {
        MarkedPattern::new(raw.points, raw.marks, raw.window)
    }
}

impl MarkedPattern {
    pub fn new(points: Vec<Point>, marks: Vec<f64>, window: Window) -> Result<Self> {
        if points.len() != marks.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                marks: marks.len(),
            });
        }
        for (index, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::NonFinite {
                    what: "coordinate",
                    index,
                });
            }
            if !window.contains(*p) {
                return Err(Error::PointOutsideWindow {
                    index,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        if let Some(index) = marks.iter().position(|m| !m.is_finite()) {
            return Err(Error::NonFinite {
                what: "mark",
                index,
            });
        }
        check_simple(&points)?;
        Ok(Self {
            points,
            marks,
            window,
        })
    }

    /// Pattern with every mark set to one.
    pub fn unmarked(points: Vec<Point>, window: Window) -> Result<Self> {
        let marks = vec![1.0; points.len()];
        Self::new(points, marks, window)
    }

    /// Same locations and window, new marks. Only the marks are validated.
    pub fn with_marks(&self, marks: Vec<f64>) -> Result<Self> {
        if marks.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                points: self.points.len(),
                marks: marks.len(),
            });
        }
        if let Some(index) = marks.iter().position(|m| !m.is_finite()) {
            return Err(Error::NonFinite {
                what: "mark",
                index,
            });
        }
        Ok(Self {
            points: self.points.clone(),
            marks,
            window: self.window,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub(crate) fn require_len(&self, min: usize) -> Result<()> {
        if self.len() < min {
            Err(Error::TooFewPoints { n: self.len(), min })
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_positive_marks(&self) -> Result<()> {
        match self.marks.iter().position(|&m| m <= 0.0) {
            Some(index) => Err(Error::NonPositiveMark {
                index,
                value: self.marks[index],
            }),
            None => Ok(()),
        }
    }
}

fn check_simple(points: &[Point]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
    });
    for w in order.windows(2) {
        let (a, b) = (points[w[0]], points[w[1]]);
        if a.x == b.x && a.y == b.y {
            return Err(Error::DuplicatePoint {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
            });
        }
    }
    Ok(())
}
