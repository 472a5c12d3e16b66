//! First-order intensity at the data points.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::index::NeighborIndex;
use crate::pattern::MarkedPattern;

/// Kernel contributions beyond this many bandwidths are dropped
/// (relative weight below 1e-13).
const KERNEL_CUTOFF: f64 = 8.0;
/// Values are floored at this multiple of the average intensity.
const FLOOR_FACTOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    /// Resolve to a concrete standard deviation for a pattern of `n` points.
    ///
    /// The automatic rule is `0.15 * s / sqrt(n / 100)` clamped to
    /// `[0.01 s, 0.5 s]`, with `s` the shorter window side.
    pub fn resolve(self, n: usize, w: &Window) -> Result<f64> {
        match self {
            Bandwidth::Fixed(b) if b > 0.0 && b.is_finite() => Ok(b),
            Bandwidth::Fixed(b) => Err(Error::param(
                "bandwidth",
                format!("must be positive, got {b}"),
            )),
            Bandwidth::Auto => {
                let side = w.min_side();
                let raw = 0.15 * side / (n.max(1) as f64 / 100.0).sqrt();
                Ok(raw.clamp(0.01 * side, 0.5 * side))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntensityKind {
    Constant,
    Kernel { bandwidth: f64 },
}

/// Intensity estimate evaluated at each data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityEstimate {
    pub at_points: Vec<f64>,
    pub kind: IntensityKind,
}

impl IntensityEstimate {
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, IntensityKind::Constant)
    }

    pub fn bandwidth(&self) -> Option<f64> {
        match self.kind {
            IntensityKind::Kernel { bandwidth } => Some(bandwidth),
            IntensityKind::Constant => None,
        }
    }
}

/// `n / |W|` at every point.
pub fn constant_intensity(pattern: &MarkedPattern) -> Result<IntensityEstimate> {
    pattern.require_len(1)?;
    let lambda = pattern.len() as f64 / pattern.window().area();
    Ok(IntensityEstimate {
        at_points: vec![lambda; pattern.len()],
        kind: IntensityKind::Constant,
    })
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Mass of an isotropic Gaussian centred at `p` that falls inside `w`.
pub fn edge_mass(p: Point, sigma: f64, w: &Window) -> f64 {
    let fx = std_normal_cdf((w.xmax() - p.x) / sigma) - std_normal_cdf((w.xmin() - p.x) / sigma);
    let fy = std_normal_cdf((w.ymax() - p.y) / sigma) - std_normal_cdf((w.ymin() - p.y) / sigma);
    fx * fy
}

fn gaussian_density(d: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    (-0.5 * d * d / s2).exp() / (2.0 * std::f64::consts::PI * s2)
}

/// Leave-one-out Gaussian kernel estimate with uniform edge correction.
///
/// `lambda(x_i) = sum_{j != i} phi(|x_i - x_j|) / e(x_i)` where `e` is the
/// kernel mass inside the window.
pub fn kernel_intensity(
    pattern: &MarkedPattern,
    bandwidth: Bandwidth,
) -> Result<IntensityEstimate> {
    pattern.require_len(2)?;
    let w = pattern.window();
    let n = pattern.len();
    let sigma = bandwidth.resolve(n, w)?;
    let floor = FLOOR_FACTOR * n as f64 / w.area();

    let index = NeighborIndex::build(pattern, KERNEL_CUTOFF * sigma)?;
    let mut sums = vec![0.0; n];
    index.for_each_pair(f64::INFINITY, |i, j, d| {
        let k = gaussian_density(d, sigma);
        sums[i] += k;
        sums[j] += k;
    });
    let at_points = pattern
        .points()
        .iter()
        .zip(sums)
        .map(|(&p, s)| (s / edge_mass(p, sigma, w)).max(floor))
        .collect();
    Ok(IntensityEstimate {
        at_points,
        kind: IntensityKind::Kernel { bandwidth: sigma },
    })
}

/// Edge-corrected kernel intensity at an arbitrary location (no point is
/// left out).
pub fn kernel_intensity_at(pattern: &MarkedPattern, sigma: f64, u: Point) -> f64 {
    let w = pattern.window();
    let cutoff = KERNEL_CUTOFF * sigma;
    let s: f64 = pattern
        .points()
        .iter()
        .map(|&p| crate::geometry::distance(p, u))
        .filter(|&d| d <= cutoff)
        .map(|d| gaussian_density(d, sigma))
        .sum();
    s / edge_mass(u, sigma, w)
}
