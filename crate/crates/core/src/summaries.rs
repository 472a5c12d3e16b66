//! Second-order summaries: Ripley's K, the product-weighted mark K-function
//! (global and per-point) and the mark correlation function.
//!
//! All K-type estimators use the test function `tf(m, m') = m m'` and carry
//! a `1 / |W|` factor so that, for a Poisson pattern with independent
//! marks, the expected global curve is `pi r^2`. With constant intensity
//! `lambda = n / |W|`:
//!
//! ```text
//! K_tf(r)   = |W| / (c_tf n^2)  * sum_{i != j} m_i m_j 1{d_ij <= r}
//! K_tf,i(r) = |W| / (c_tf,i n)  * sum_{j != i} m_i m_j 1{d_ij <= r}
//! ```
//!
//! with `c_tf = mean(m)^2` and `c_tf,i` either `mean(m)^2` (default) or
//! `m_i mean(m)` (see [`LocalNormalization`]). Either way
//! `K_tf = (1/n) sum_i (c_tf,i / c_tf) K_tf,i` exactly. With a kernel
//! intensity the pair weights become `m_i m_j / (lambda_i lambda_j)` and the
//! scale factors `1 / (c_tf |W|)` and `n / (c_tf,i |W|)`; the identity still
//! holds.
//!
//! No edge correction is applied unless requested. Ties `d_ij = r` count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RGrid;
use crate::index::NeighborIndex;
use crate::intensity::{Bandwidth, IntensityEstimate};
use crate::pattern::MarkedPattern;

/// Fraction of `rmax` used as the automatic mark-correlation bandwidth.
pub const KAPPA_BANDWIDTH_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "point", rename_all = "snake_case")]
pub enum CurveKind {
    K,
    Ktf,
    KtfInhom,
    LocalKtf(usize),
    Kappa,
    Reference,
}

/// A function of distance tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    pub grid: RGrid,
    pub values: Vec<f64>,
    pub kind: CurveKind,
}

impl SummaryCurve {
    pub fn new(grid: RGrid, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values, kind })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(r, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .values()
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkSummary {
    pub mean: f64,
    pub c_tf: f64,
    pub c_tf_i: Vec<f64>,
}

pub fn mark_summary(pattern: &MarkedPattern) -> Result<MarkSummary> {
    pattern.require_len(1)?;
    Ok(summarize_marks(pattern.marks()))
}

fn summarize_marks(marks: &[f64]) -> MarkSummary {
    let mean = marks.iter().sum::<f64>() / marks.len() as f64;
    MarkSummary {
        mean,
        c_tf: mean * mean,
        c_tf_i: marks.iter().map(|&m| m * mean).collect(),
    }
}

/// Normalizing constant of the per-point curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalNormalization {
    /// `c_tf,i = mean(m)^2`, the expectation of `m_i mean(m)` under
    /// independent marks. Keeps the point's own mark in its curve.
    #[default]
    MeanSquare,
    /// `c_tf,i = m_i mean(m)`. The own mark cancels, so the curve measures
    /// only the mark mass around `x_i`.
    PointMark,
}

impl LocalNormalization {
    pub fn constant(self, summary: &MarkSummary, i: usize) -> f64 {
        match self {
            Self::MeanSquare => summary.c_tf,
            Self::PointMark => summary.c_tf_i[i],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCorrection {
    #[default]
    None,
    /// Translation weights `|W| / |W ∩ (W + x_j - x_i)|`. Default inside the
    /// Monte Carlo tests.
    Translation,
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    i: u32,
    j: u32,
    d: f64,
    // first grid index with r >= d; grid.len() when d > rmax
    bin: u32,
    edge: f64,
}

/// Pair distances of one set of locations binned on a grid, reusable across
/// mark assignments and intensity estimates.
#[derive(Debug, Clone)]
pub struct SecondOrder {
    grid: RGrid,
    n: usize,
    area: f64,
    pairs: Vec<Pair>,
    reach: f64,
    corrected: bool,
}

impl SecondOrder {
    /// Collect all pairs within `grid.rmax() + reach_extra`.
    pub fn new(pattern: &MarkedPattern, grid: &RGrid, reach_extra: f64) -> Result<Self> {
        Self::with_edge_correction(pattern, grid, reach_extra, EdgeCorrection::None)
    }

    pub fn with_edge_correction(
        pattern: &MarkedPattern,
        grid: &RGrid,
        reach_extra: f64,
        correction: EdgeCorrection,
    ) -> Result<Self> {
        let reach = grid.rmax() + reach_extra.max(0.0);
        let index = NeighborIndex::build(pattern, reach)?;
        let w = pattern.window();
        let pts = pattern.points();
        let mut pairs = Vec::new();
        index.for_each_pair(reach, |i, j, d| {
            let edge = match correction {
                EdgeCorrection::None => 1.0,
                EdgeCorrection::Translation => {
                    let dx = (pts[i].x - pts[j].x).abs();
                    let dy = (pts[i].y - pts[j].y).abs();
                    w.area() / ((w.width() - dx) * (w.height() - dy))
                }
            };
            pairs.push(Pair {
                i: i as u32,
                j: j as u32,
                d,
                bin: grid.first_at_or_above(d) as u32,
                edge,
            });
        });
        Ok(Self {
            grid: grid.clone(),
            n: pattern.len(),
            area: w.area(),
            pairs,
            reach,
            corrected: correction == EdgeCorrection::Translation,
        })
    }

    pub fn grid(&self) -> &RGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unordered pairs within reach, as `(i, j, d)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pairs.iter().map(|p| (p.i as usize, p.j as usize, p.d))
    }

    /// `2 * sum_{pairs with d <= r_k} weight(i, j)` for every grid index.
    fn cumulative<F: Fn(usize, usize) -> f64>(&self, weight: F) -> Vec<f64> {
        let k = self.grid.len();
        let mut hist = vec![0.0; k];
        for p in &self.pairs {
            let b = p.bin as usize;
            if b < k {
                let mut w = weight(p.i as usize, p.j as usize);
                if self.corrected {
                    w *= p.edge;
                }
                hist[b] += w;
            }
        }
        let mut acc = 0.0;
        for h in hist.iter_mut() {
            acc += *h;
            *h = 2.0 * acc;
        }
        hist
    }

    fn check_intensity(&self, intensity: &IntensityEstimate) -> Result<()> {
        if intensity.at_points.len() != self.n {
            return Err(Error::LengthMismatch {
                points: self.n,
                marks: intensity.at_points.len(),
            });
        }
        Ok(())
    }

    /// Unmarked K (inhomogeneous when the intensity is not constant).
    pub fn k(&self, intensity: &IntensityEstimate) -> Result<Vec<f64>> {
        self.check_intensity(intensity)?;
        let nf = self.n as f64;
        Ok(if intensity.is_constant() {
            let scale = self.area / (nf * nf);
            self.cumulative(|_, _| 1.0)
                .into_iter()
                .map(|v| scale * v)
                .collect()
        } else {
            let lam = &intensity.at_points;
            let scale = 1.0 / self.area;
            self.cumulative(|i, j| 1.0 / (lam[i] * lam[j]))
                .into_iter()
                .map(|v| scale * v)
                .collect()
        })
    }

    /// Global product-weighted mark K-function.
    pub fn ktf(&self, marks: &[f64], intensity: &IntensityEstimate) -> Result<Vec<f64>> {
        self.check_marks(marks)?;
        self.check_intensity(intensity)?;
        let c_tf = summarize_marks(marks).c_tf;
        let nf = self.n as f64;
        Ok(if intensity.is_constant() {
            let scale = self.area / (c_tf * nf * nf);
            self.cumulative(|i, j| marks[i] * marks[j])
                .into_iter()
                .map(|v| scale * v)
                .collect()
        } else {
            let lam = &intensity.at_points;
            let scale = 1.0 / (c_tf * self.area);
            self.cumulative(|i, j| marks[i] * marks[j] / (lam[i] * lam[j]))
                .into_iter()
                .map(|v| scale * v)
                .collect()
        })
    }

    /// Per-point product-weighted mark K-functions, one row per point.
    pub fn local_ktf(
        &self,
        marks: &[f64],
        intensity: &IntensityEstimate,
        normalization: LocalNormalization,
    ) -> Result<Vec<Vec<f64>>> {
        self.check_marks(marks)?;
        self.check_intensity(intensity)?;
        let summary = summarize_marks(marks);
        let k = self.grid.len();
        let n = self.n;
        let nf = n as f64;
        let constant = intensity.is_constant();
        let lam = &intensity.at_points;

        let mut hist = vec![0.0; n * k];
        for p in &self.pairs {
            let b = p.bin as usize;
            if b >= k {
                continue;
            }
            let (i, j) = (p.i as usize, p.j as usize);
            let mut w = marks[i] * marks[j];
            if !constant {
                w /= lam[i] * lam[j];
            }
            if self.corrected {
                w *= p.edge;
            }
            hist[i * k + b] += w;
            hist[j * k + b] += w;
        }
        Ok(hist
            .chunks(k)
            .enumerate()
            .map(|(i, row)| {
                let ci = normalization.constant(&summary, i);
                let scale = if constant {
                    self.area / (ci * nf)
                } else {
                    nf / (ci * self.area)
                };
                let mut acc = 0.0;
                row.iter()
                    .map(|&h| {
                        acc += h;
                        scale * acc
                    })
                    .collect()
            })
            .collect())
    }

    /// Nadaraya-Watson estimate of the mark correlation function with an
    /// Epanechnikov kernel of half-width `bandwidth`. Grid points with no
    /// pair mass get the independence value 1.
    pub fn kappa(&self, marks: &[f64], bandwidth: f64) -> Result<Vec<f64>> {
        self.check_marks(marks)?;
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::param(
                "bandwidth",
                format!("must be positive, got {bandwidth}"),
            ));
        }
        let reach = self.grid.rmax() + bandwidth;
        if reach > self.reach * (1.0 + 1e-12) {
            return Err(Error::param(
                "bandwidth",
                format!(
                    "pairs were collected up to {} but kappa needs {reach}",
                    self.reach
                ),
            ));
        }
        let c_tf = summarize_marks(marks).c_tf;
        let r = self.grid.values();
        let k = r.len();
        let mut num = vec![0.0; k];
        let mut den = vec![0.0; k];
        for p in &self.pairs {
            let lo = r.partition_point(|&x| x <= p.d - bandwidth);
            let hi = r.partition_point(|&x| x < p.d + bandwidth);
            let w = marks[p.i as usize] * marks[p.j as usize];
            for idx in lo..hi {
                let u = (p.d - r[idx]) / bandwidth;
                let kern = 0.75 * (1.0 - u * u) / bandwidth;
                if kern > 0.0 {
                    num[idx] += w * kern;
                    den[idx] += kern;
                }
            }
        }
        Ok(num
            .iter()
            .zip(&den)
            .map(|(&a, &b)| if b > 0.0 { a / b / c_tf } else { 1.0 })
            .collect())
    }

    fn check_marks(&self, marks: &[f64]) -> Result<()> {
        if marks.len() != self.n {
            return Err(Error::LengthMismatch {
                points: self.n,
                marks: marks.len(),
            });
        }
        if self.n < 2 {
            return Err(Error::TooFewPoints { n: self.n, min: 2 });
        }
        match marks.iter().position(|&m| m.is_nan() || m <= 0.0) {
            Some(index) => Err(Error::NonPositiveMark {
                index,
                value: marks[index],
            }),
            None => Ok(()),
        }
    }
}

/// Resolve the mark-correlation bandwidth: automatic is `0.1 * rmax`.
pub fn kappa_bandwidth(bandwidth: Bandwidth, grid: &RGrid) -> Result<f64> {
    match bandwidth {
        Bandwidth::Auto => Ok(KAPPA_BANDWIDTH_FRACTION * grid.rmax()),
        Bandwidth::Fixed(b) if b > 0.0 && b.is_finite() => Ok(b),
        Bandwidth::Fixed(b) => Err(Error::param(
            "bandwidth",
            format!("must be positive, got {b}"),
        )),
    }
}

/// Ripley's K without edge correction.
pub fn k_hat(pattern: &MarkedPattern, grid: &RGrid) -> Result<SummaryCurve> {
    k_hat_corrected(pattern, grid, EdgeCorrection::None)
}

pub fn k_hat_corrected(
    pattern: &MarkedPattern,
    grid: &RGrid,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    pattern.require_len(2)?;
    let so = SecondOrder::with_edge_correction(pattern, grid, 0.0, correction)?;
    let values = so.k(&crate::intensity::constant_intensity(pattern)?)?;
    SummaryCurve::new(grid.clone(), values, CurveKind::K)
}

/// Global mark-weighted K-function.
pub fn ktf_hat(
    pattern: &MarkedPattern,
    grid: &RGrid,
    intensity: &IntensityEstimate,
) -> Result<SummaryCurve> {
    ktf_hat_corrected(pattern, grid, intensity, EdgeCorrection::None)
}

pub fn ktf_hat_corrected(
    pattern: &MarkedPattern,
    grid: &RGrid,
    intensity: &IntensityEstimate,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    pattern.require_len(2)?;
    pattern.require_positive_marks()?;
    let so = SecondOrder::with_edge_correction(pattern, grid, 0.0, correction)?;
    let values = so.ktf(pattern.marks(), intensity)?;
    let kind = if intensity.is_constant() {
        CurveKind::Ktf
    } else {
        CurveKind::KtfInhom
    };
    SummaryCurve::new(grid.clone(), values, kind)
}

/// Mark-weighted K-function contribution of point `i`.
pub fn local_ktf_hat(
    pattern: &MarkedPattern,
    grid: &RGrid,
    intensity: &IntensityEstimate,
    i: usize,
) -> Result<SummaryCurve> {
    if i >= pattern.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: pattern.len(),
        });
    }
    let mut all = local_ktf_all(pattern, grid, intensity)?;
    Ok(all.swap_remove(i))
}

/// Per-point mark-weighted K-functions for every point, with the default
/// normalization.
pub fn local_ktf_all(
    pattern: &MarkedPattern,
    grid: &RGrid,
    intensity: &IntensityEstimate,
) -> Result<Vec<SummaryCurve>> {
    local_ktf_all_with(pattern, grid, intensity, LocalNormalization::default())
}

pub fn local_ktf_all_with(
    pattern: &MarkedPattern,
    grid: &RGrid,
    intensity: &IntensityEstimate,
    normalization: LocalNormalization,
) -> Result<Vec<SummaryCurve>> {
    pattern.require_len(2)?;
    pattern.require_positive_marks()?;
    let so = SecondOrder::new(pattern, grid, 0.0)?;
    so.local_ktf(pattern.marks(), intensity, normalization)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| SummaryCurve::new(grid.clone(), v, CurveKind::LocalKtf(i)))
        .collect()
}

/// Mark correlation function for `tf(m, m') = m m'`.
pub fn kappa_tf_hat(
    pattern: &MarkedPattern,
    grid: &RGrid,
    bandwidth: Bandwidth,
) -> Result<SummaryCurve> {
    pattern.require_len(2)?;
    pattern.require_positive_marks()?;
    let b = kappa_bandwidth(bandwidth, grid)?;
    let so = SecondOrder::new(pattern, grid, b)?;
    SummaryCurve::new(
        grid.clone(),
        so.kappa(pattern.marks(), b)?,
        CurveKind::Kappa,
    )
}
