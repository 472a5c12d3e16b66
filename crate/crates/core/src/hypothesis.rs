//! Chi-square type discrepancy statistics between a mark-weighted K-function
//! and its null expectation, calibrated by Monte Carlo.
//!
//! | hypothesis | null                          | reference curve      | null simulator |
//! |------------|-------------------------------|----------------------|----------------|
//! | H1         | homogeneity + independent marks | `pi r^2`           | binomial CSR, marks resampled i.i.d. |
//! | H2         | homogeneity                   | `pi r^2 kappa_tf(r)` | binomial CSR, marks transferred by boundary-distance rank |
//! | H3         | independent marks             | `K(r)`               | random labelling |
//!
//! The local variants compare each point's curve with the same reference and
//! calibrate against the pooled local statistics of all null replicates.
//!
//! Curves inside the tests use translation edge correction by default; the
//! uncorrected estimator is available through [`TestConfig::edge_correction`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RGrid;
use crate::intensity::{constant_intensity, kernel_intensity, Bandwidth, IntensityEstimate};
use crate::parallel::map_indexed;
use crate::pattern::MarkedPattern;
use crate::rng::child_seed;
use crate::simulate::{assign_marks_iid, gen_binomial, permute_marks, IidMarks};
use crate::summaries::{
    kappa_bandwidth, CurveKind, EdgeCorrection, LocalNormalization, SecondOrder, SummaryCurve,
};

/// Smallest allowed number of null replicates.
pub const MIN_REPLICATES: usize = 19;
pub const DEFAULT_REPLICATES: usize = 99;
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Reference curves are floored here so the integrand stays finite.
pub const REFERENCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    H1L,
    H2L,
    H3L,
}

impl Hypothesis {
    pub const GLOBAL: [Hypothesis; 3] = [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3];
    pub const LOCAL: [Hypothesis; 3] = [Hypothesis::H1L, Hypothesis::H2L, Hypothesis::H3L];

    pub fn is_local(self) -> bool {
        matches!(self, Hypothesis::H1L | Hypothesis::H2L | Hypothesis::H3L)
    }

    pub fn global(self) -> Self {
        match self {
            Hypothesis::H1 | Hypothesis::H1L => Hypothesis::H1,
            Hypothesis::H2 | Hypothesis::H2L => Hypothesis::H2,
            Hypothesis::H3 | Hypothesis::H3L => Hypothesis::H3,
        }
    }

    pub fn local(self) -> Self {
        match self.global() {
            Hypothesis::H1 => Hypothesis::H1L,
            Hypothesis::H2 => Hypothesis::H2L,
            _ => Hypothesis::H3L,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
            Hypothesis::H1L => "H1L",
            Hypothesis::H2L => "H2L",
            Hypothesis::H3L => "H3L",
        };
        f.write_str(s)
    }
}

impl FromStr for Hypothesis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "").as_str() {
            "H1" => Ok(Hypothesis::H1),
            "H2" => Ok(Hypothesis::H2),
            "H3" => Ok(Hypothesis::H3),
            "H1L" => Ok(Hypothesis::H1L),
            "H2L" => Ok(Hypothesis::H2L),
            "H3L" => Ok(Hypothesis::H3L),
            _ => Err(Error::param(
                "hypothesis",
                format!("unknown hypothesis `{s}` (expected H1, H2, H3, H1L, H2L or H3L)"),
            )),
        }
    }
}

/// Intensity used inside the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntensitySetting {
    Constant,
    Kernel { bandwidth: Bandwidth },
}

impl IntensitySetting {
    pub fn estimate(&self, pattern: &MarkedPattern) -> Result<IntensityEstimate> {
        match *self {
            IntensitySetting::Constant => constant_intensity(pattern),
            IntensitySetting::Kernel { bandwidth } => kernel_intensity(pattern, bandwidth),
        }
    }
}

/// Monte Carlo test settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub grid: RGrid,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub intensity: IntensitySetting,
    pub kappa_bandwidth: Bandwidth,
    #[serde(default = "default_edge_correction")]
    pub edge_correction: EdgeCorrection,
    #[serde(default)]
    pub local_normalization: LocalNormalization,
}

fn default_edge_correction() -> EdgeCorrection {
    EdgeCorrection::Translation
}

impl TestConfig {
    pub fn new(grid: RGrid, seed: u64) -> Self {
        Self {
            grid,
            replicates: DEFAULT_REPLICATES,
            alpha: DEFAULT_ALPHA,
            seed,
            intensity: IntensitySetting::Constant,
            kappa_bandwidth: Bandwidth::Auto,
            edge_correction: default_edge_correction(),
            local_normalization: LocalNormalization::default(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::param(
                "replicates",
                format!(
                    "need at least {MIN_REPLICATES} null replicates, got {}",
                    self.replicates
                ),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param(
                "alpha",
                format!("must lie in (0, 1), got {}", self.alpha),
            ));
        }
        kappa_bandwidth(self.kappa_bandwidth, &self.grid)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub hypothesis: Hypothesis,
    pub statistic: f64,
    pub null_sample: Vec<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub seed: u64,
    pub config: TestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTestResult {
    pub hypothesis: Hypothesis,
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub reject: Vec<bool>,
    /// Number of pooled null statistics (all points of all replicates).
    pub pool_size: usize,
    pub alpha: f64,
    pub seed: u64,
    pub config: TestConfig,
}

impl LocalTestResult {
    pub fn rejected_fraction(&self) -> f64 {
        if self.reject.is_empty() {
            return 0.0;
        }
        self.reject.iter().filter(|&&r| r).count() as f64 / self.reject.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    HomogeneousIndependent,
    InhomogeneousOnly,
    DependentMarksOnly,
    InhomogeneousDependent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialOutcome {
    pub label: Configuration,
    /// H1 rejected but neither follow-up test did; the label is then
    /// `HomogeneousIndependent`.
    pub inconclusive: bool,
    pub h1: TestResult,
    pub h2: Option<TestResult>,
    pub h3: Option<TestResult>,
}

/// Trapezoidal integral of `(curve - reference)^2 / reference` over the grid.
pub fn stat_t(curve: &SummaryCurve, reference: &SummaryCurve) -> Result<f64> {
    if curve.grid != reference.grid {
        return Err(Error::GridMismatch);
    }
    chi2_discrepancy(curve.grid.values(), &curve.values, &reference.values)
}

fn chi2_discrepancy(r: &[f64], curve: &[f64], reference: &[f64]) -> Result<f64> {
    if curve.len() != r.len() || reference.len() != r.len() {
        return Err(Error::GridMismatch);
    }
    if let Some(k) = reference.iter().position(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::NonPositiveReference { r: r[k] });
    }
    let f = |k: usize| {
        let d = curve[k] - reference[k];
        d * d / reference[k]
    };
    let mut total = 0.0;
    let mut prev = f(0);
    for k in 1..r.len() {
        let next = f(k);
        total += 0.5 * (r[k] - r[k - 1]) * (prev + next);
        prev = next;
    }
    Ok(total)
}

/// Null expectation of the mark-weighted K-function under `hypothesis`,
/// estimated from `pattern` where needed.
pub fn reference_curve(
    pattern: &MarkedPattern,
    grid: &RGrid,
    hypothesis: Hypothesis,
    config: &TestConfig,
) -> Result<SummaryCurve> {
    pattern.require_len(2)?;
    pattern.require_positive_marks()?;
    let engine = Engine::new(hypothesis, config)?;
    let so = engine.second_order(pattern, grid)?;
    let intensity = config.intensity.estimate(pattern)?;
    let values = engine.reference(&so, pattern.marks(), &intensity, grid)?;
    SummaryCurve::new(grid.clone(), values, CurveKind::Reference)
}

/// Curves behind an observed statistic, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCurves {
    pub k: SummaryCurve,
    pub ktf: SummaryCurve,
    pub kappa: SummaryCurve,
    pub reference: SummaryCurve,
}

pub fn observed_curves(
    pattern: &MarkedPattern,
    hypothesis: Hypothesis,
    config: &TestConfig,
) -> Result<TestCurves> {
    pattern.require_len(2)?;
    pattern.require_positive_marks()?;
    let grid = &config.grid;
    let b = kappa_bandwidth(config.kappa_bandwidth, grid)?;
    let so = SecondOrder::with_edge_correction(pattern, grid, b, config.edge_correction)?;
    let intensity = config.intensity.estimate(pattern)?;
    let engine = Engine::new(hypothesis, config)?;
    let ktf_kind = if intensity.is_constant() {
        CurveKind::Ktf
    } else {
        CurveKind::KtfInhom
    };
    Ok(TestCurves {
        k: SummaryCurve::new(grid.clone(), so.k(&intensity)?, CurveKind::K)?,
        ktf: SummaryCurve::new(grid.clone(), so.ktf(pattern.marks(), &intensity)?, ktf_kind)?,
        kappa: SummaryCurve::new(
            grid.clone(),
            so.kappa(pattern.marks(), b)?,
            CurveKind::Kappa,
        )?,
        reference: SummaryCurve::new(
            grid.clone(),
            engine.reference(&so, pattern.marks(), &intensity, grid)?,
            CurveKind::Reference,
        )?,
    })
}

struct Engine<'a> {
    hypothesis: Hypothesis,
    config: &'a TestConfig,
    kappa_b: f64,
}

// Statistics of one (observed or simulated) pattern.
struct Evaluation {
    global: f64,
    local: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(hypothesis: Hypothesis, config: &'a TestConfig) -> Result<Self> {
        Ok(Self {
            hypothesis: hypothesis.global(),
            config,
            kappa_b: kappa_bandwidth(config.kappa_bandwidth, &config.grid)?,
        })
    }

    fn second_order(&self, pattern: &MarkedPattern, grid: &RGrid) -> Result<SecondOrder> {
        let extra = if self.hypothesis == Hypothesis::H2 {
            self.kappa_b
        } else {
            0.0
        };
        SecondOrder::with_edge_correction(pattern, grid, extra, self.config.edge_correction)
    }

    fn reference(
        &self,
        so: &SecondOrder,
        marks: &[f64],
        intensity: &IntensityEstimate,
        grid: &RGrid,
    ) -> Result<Vec<f64>> {
        let csr = grid.values().iter().map(|r| PI * r * r);
        let values: Vec<f64> = match self.hypothesis {
            Hypothesis::H1 => csr.collect(),
            Hypothesis::H2 => csr
                .zip(so.kappa(marks, self.kappa_b)?)
                .map(|(a, k)| a * k)
                .collect(),
            _ => so.k(intensity)?,
        };
        Ok(values.into_iter().map(|v| v.max(REFERENCE_FLOOR)).collect())
    }

    fn evaluate(
        &self,
        pattern: &MarkedPattern,
        so: &SecondOrder,
        intensity: &IntensityEstimate,
        fixed_reference: Option<&[f64]>,
        local: bool,
    ) -> Result<Evaluation> {
        let grid = &self.config.grid;
        let marks = pattern.marks();
        let owned;
        let reference = match fixed_reference {
            Some(r) => r,
            None => {
                owned = self.reference(so, marks, intensity, grid)?;
                &owned
            }
        };
        let ktf = so.ktf(marks, intensity)?;
        let global = chi2_discrepancy(grid.values(), &ktf, reference)?;
        let local = if local {
            so.local_ktf(marks, intensity, self.config.local_normalization)?
                .iter()
                .map(|c| chi2_discrepancy(grid.values(), c, reference))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Evaluation { global, local })
    }

    /// Observed statistics plus one evaluation per null replicate.
    fn run(&self, pattern: &MarkedPattern, local: bool) -> Result<(Evaluation, Vec<Evaluation>)> {
        pattern.require_len(2)?;
        pattern.require_positive_marks()?;
        self.config.validate()?;
        let grid = &self.config.grid;
        let setting = self.config.intensity;
        let so = self.second_order(pattern, grid)?;
        let intensity = setting.estimate(pattern)?;
        let observed = self.evaluate(pattern, &so, &intensity, None, local)?;

        let seed = self.config.seed;
        let replicates: Vec<Result<Evaluation>> = match self.hypothesis {
            Hypothesis::H3 => {
                // Locations stay fixed: pairs, intensity and reference are shared.
                let reference = self.reference(&so, pattern.marks(), &intensity, grid)?;
                map_indexed(self.config.replicates, |b| {
                    let null = permute_marks(pattern, child_seed(seed, b as u64))?;
                    self.evaluate(&null, &so, &intensity, Some(&reference), local)
                })
            }
            _ => map_indexed(self.config.replicates, |b| {
                let null = self.simulate_null(pattern, child_seed(seed, b as u64))?;
                let so = self.second_order(&null, grid)?;
                let intensity = setting.estimate(&null)?;
                self.evaluate(&null, &so, &intensity, None, local)
            }),
        };
        let replicates = replicates.into_iter().collect::<Result<Vec<_>>>()?;
        Ok((observed, replicates))
    }

    fn simulate_null(&self, pattern: &MarkedPattern, seed: u64) -> Result<MarkedPattern> {
        let w = pattern.window();
        let locations = gen_binomial(pattern.len(), w, child_seed(seed, 0))?;
        match self.hypothesis {
            Hypothesis::H1 => assign_marks_iid(
                &locations,
                &IidMarks::Empirical {
                    pool: pattern.marks().to_vec(),
                },
                child_seed(seed, 1),
            ),
            Hypothesis::H2 => rank_transfer_marks(pattern.marks(), &locations),
            _ => permute_marks(pattern, seed),
        }
    }
}

/// Assign the sorted `marks` to the points of `locations` in order of their
/// distance to the window boundary (smallest mark to the point nearest the
/// boundary).
pub fn rank_transfer_marks(marks: &[f64], locations: &MarkedPattern) -> Result<MarkedPattern> {
    if marks.len() != locations.len() {
        return Err(Error::LengthMismatch {
            points: locations.len(),
            marks: marks.len(),
        });
    }
    let w = locations.window();
    let mut sorted = marks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let depth: Vec<f64> = locations
        .points()
        .iter()
        .map(|&p| w.edge_distance(p))
        .collect();
    let mut order: Vec<usize> = (0..locations.len()).collect();
    order.sort_by(|&a, &b| depth[a].total_cmp(&depth[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; marks.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = sorted[rank];
    }
    locations.with_marks(out)
}

/// Monte Carlo p-value with the add-one correction.
pub fn monte_carlo_p_value(statistic: f64, null_sample: &[f64]) -> f64 {
    let exceed = null_sample.iter().filter(|&&t| t >= statistic).count();
    (1 + exceed) as f64 / (null_sample.len() + 1) as f64
}

pub fn global_test(
    pattern: &MarkedPattern,
    hypothesis: Hypothesis,
    config: &TestConfig,
) -> Result<TestResult> {
    let engine = Engine::new(hypothesis, config)?;
    let (observed, replicates) = engine.run(pattern, false)?;
    let null_sample: Vec<f64> = replicates.iter().map(|e| e.global).collect();
    let p_value = monte_carlo_p_value(observed.global, &null_sample);
    Ok(TestResult {
        hypothesis: hypothesis.global(),
        statistic: observed.global,
        null_sample,
        p_value,
        reject: p_value <= config.alpha,
        alpha: config.alpha,
        seed: config.seed,
        config: config.clone(),
    })
}

pub fn local_test(
    pattern: &MarkedPattern,
    hypothesis: Hypothesis,
    config: &TestConfig,
) -> Result<LocalTestResult> {
    let engine = Engine::new(hypothesis, config)?;
    let (observed, replicates) = engine.run(pattern, true)?;
    let mut pool: Vec<f64> = replicates.into_iter().flat_map(|e| e.local).collect();
    pool.sort_by(f64::total_cmp);
    let p_values: Vec<f64> = observed
        .local
        .iter()
        .map(|&t| {
            let below = pool.partition_point(|&x| x < t);
            (1 + pool.len() - below) as f64 / (pool.len() + 1) as f64
        })
        .collect();
    Ok(LocalTestResult {
        hypothesis: hypothesis.local(),
        reject: p_values.iter().map(|&p| p <= config.alpha).collect(),
        statistics: observed.local,
        p_values,
        pool_size: pool.len(),
        alpha: config.alpha,
        seed: config.seed,
        config: config.clone(),
    })
}

/// H1 first; on rejection H2 and H3 decide between the remaining
/// configurations.
pub fn sequential_procedure(
    pattern: &MarkedPattern,
    config: &TestConfig,
) -> Result<SequentialOutcome> {
    let h1 = global_test(
        pattern,
        Hypothesis::H1,
        &config.with_seed(child_seed(config.seed, 1)),
    )?;
    if !h1.reject {
        return Ok(SequentialOutcome {
            label: Configuration::HomogeneousIndependent,
            inconclusive: false,
            h1,
            h2: None,
            h3: None,
        });
    }
    let h2 = global_test(
        pattern,
        Hypothesis::H2,
        &config.with_seed(child_seed(config.seed, 2)),
    )?;
    let h3 = global_test(
        pattern,
        Hypothesis::H3,
        &config.with_seed(child_seed(config.seed, 3)),
    )?;
    let (label, inconclusive) = match (h2.reject, h3.reject) {
        (true, false) => (Configuration::InhomogeneousOnly, false),
        (false, true) => (Configuration::DependentMarksOnly, false),
        (true, true) => (Configuration::InhomogeneousDependent, false),
        (false, false) => (Configuration::HomogeneousIndependent, true),
    };
    Ok(SequentialOutcome {
        label,
        inconclusive,
        h1,
        h2: Some(h2),
        h3: Some(h3),
    })
}
