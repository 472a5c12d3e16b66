use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Window;

/// Default number of distances in a grid.
pub const DEFAULT_GRID_POINTS: usize = 128;

/// Fraction of the shorter window side used as the default maximum distance.
pub const DEFAULT_RMAX_FRACTION: f64 = 0.25;

/// Uniformly spaced distances `0 < r_1 < ... < r_K` on which curves are
/// tabulated and statistics integrated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RGrid {
    values: Vec<f64>,
}

impl RGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid("need at least two distances".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("distances must be finite".into()));
        }
        if values[0] <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first distance must be positive, got {}",
                values[0]
            )));
        }
        let step = values[1] - values[0];
        for w in values.windows(2) {
            let d = w[1] - w[0];
            if d <= 0.0 {
                return Err(Error::InvalidGrid("distances must increase".into()));
            }
            if ((d - step) / step).abs() > 1e-12 {
                return Err(Error::InvalidGrid(
                    "distances must be uniformly spaced".into(),
                ));
            }
        }
        Ok(Self { values })
    }

    /// `rmax * i / k` for `i = 1..=k`.
    pub fn uniform(rmax: f64, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("grid points", format!("need k >= 2, got {k}")));
        }
        if !(rmax > 0.0 && rmax.is_finite()) {
            return Err(Error::param(
                "rmax",
                format!("must be positive, got {rmax}"),
            ));
        }
        Self::new((1..=k).map(|i| rmax * i as f64 / k as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rmin(&self) -> f64 {
        self.values[0]
    }

    pub fn rmax(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn step(&self) -> f64 {
        self.values[1] - self.values[0]
    }

    /// Index of the first grid distance `r_k >= d`, or `len()` if `d > rmax`.
    pub fn first_at_or_above(&self, d: f64) -> usize {
        self.values.partition_point(|&r| r < d)
    }
}

impl TryFrom<Vec<f64>> for RGrid {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<RGrid> for Vec<f64> {
    fn from(g: RGrid) -> Self {
        g.values
    }
}

/// Grid of `k` distances up to a quarter of the shorter window side.
pub fn default_rgrid(w: &Window, k: usize) -> Result<RGrid> {
    RGrid::uniform(DEFAULT_RMAX_FRACTION * w.min_side(), k)
}
