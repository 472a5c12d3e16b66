//! Seeded generators for point locations and mark schemes, and the scenario
//! descriptions used by the power and classification experiments.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, Normal, Open01, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Point, Window};
use crate::pattern::MarkedPattern;
use crate::rng::{child_seed, rng_from_seed, Rng};

/// Standard deviation of the Gaussian offspring displacement in the local
/// scenarios.
pub const THOMAS_SIGMA: f64 = 0.03;
/// Share of points belonging to the clustered component in the local
/// scenarios.
pub const CLUSTERED_FRACTION: f64 = 0.3;
/// Parent intensity of the clustered component in the local scenarios.
pub const THOMAS_KAPPA: f64 = 5.0;
/// Radius of the mark neighborhoods in the local mark scenario.
pub const LOCAL_MARK_RADIUS: f64 = 0.05;
/// Default number of mark-neighborhood centers.
pub const LOCAL_MARK_CENTERS: usize = 3;

/// A pattern together with per-point ground-truth membership of the planted
/// structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPattern {
    pub pattern: MarkedPattern,
    pub truth: Vec<bool>,
}

impl LabeledPattern {
    fn unlabeled(pattern: MarkedPattern) -> Self {
        let truth = vec![false; pattern.len()];
        Self { pattern, truth }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

fn nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be nonnegative, got {v}")))
    }
}

fn poisson_count(mean: f64, rng: &mut Rng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    let n: f64 = dist.sample(rng);
    n as usize
}

fn uniform_point(w: &Window, rng: &mut Rng) -> Point {
    Point::new(
        w.xmin() + w.width() * rng.random::<f64>(),
        w.ymin() + w.height() * rng.random::<f64>(),
    )
}

/// `n` i.i.d. uniform points in the window (binomial process), unit marks.
pub fn gen_binomial(n: usize, w: &Window, seed: u64) -> Result<MarkedPattern> {
    let mut rng = rng_from_seed(seed);
    binomial_points(n, w, &mut rng)
}

fn binomial_points(n: usize, w: &Window, rng: &mut Rng) -> Result<MarkedPattern> {
    let points = (0..n).map(|_| uniform_point(w, rng)).collect();
    MarkedPattern::unmarked(points, *w)
}

/// Homogeneous Poisson process with intensity `lambda` per unit area.
pub fn gen_hom_poisson(lambda: f64, w: &Window, seed: u64) -> Result<MarkedPattern> {
    positive("lambda", lambda)?;
    let mut rng = rng_from_seed(seed);
    let n = poisson_count(lambda * w.area(), &mut rng);
    binomial_points(n, w, &mut rng)
}

/// Poisson process on the unit square with intensity `10 + alpha * x`,
/// simulated by thinning a homogeneous process of rate `10 + max(alpha, 0)`.
pub fn gen_inhom_poisson_linear(alpha: f64, w: &Window, seed: u64) -> Result<MarkedPattern> {
    if !w.is_unit_square() {
        return Err(Error::param(
            "window",
            "the linear intensity 10 + alpha x is defined on the unit square only",
        ));
    }
    if !(alpha > -10.0 && alpha.is_finite()) {
        return Err(Error::param(
            "alpha",
            format!("must exceed -10, got {alpha}"),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let base = 10.0;
    let dominating = base + alpha.max(0.0);
    let n = poisson_count(dominating, &mut rng);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let p = uniform_point(w, &mut rng);
        let u: f64 = rng.random();
        if u * dominating < base + alpha * p.x {
            points.push(p);
        }
    }
    MarkedPattern::unmarked(points, *w)
}

/// Homogeneous Poisson background superimposed with a Thomas cluster process.
///
/// Parents are uniform in `w` and not part of the result; each parent has
/// Poisson(`mu_offspring`) offspring displaced by an isotropic Gaussian with
/// standard deviation `sigma`. Offspring outside the window are dropped.
/// Background points come first and are labeled `false`; offspring are
/// labeled `true`.
pub fn gen_thomas_superposition(
    lambda_bg: f64,
    kappa: f64,
    mu_offspring: f64,
    sigma: f64,
    w: &Window,
    seed: u64,
) -> Result<LabeledPattern> {
    nonnegative("lambda_bg", lambda_bg)?;
    nonnegative("kappa", kappa)?;
    nonnegative("mu_offspring", mu_offspring)?;
    positive("sigma", sigma)?;
    let mut rng = rng_from_seed(seed);
    let n_bg = poisson_count(lambda_bg * w.area(), &mut rng);
    let mut points: Vec<Point> = (0..n_bg).map(|_| uniform_point(w, &mut rng)).collect();

    let n_parents = poisson_count(kappa * w.area(), &mut rng);
    let offset = Normal::new(0.0, sigma).expect("positive sigma");
    for _ in 0..n_parents {
        let parent = uniform_point(w, &mut rng);
        let children = poisson_count(mu_offspring, &mut rng);
        for _ in 0..children {
            let child = Point::new(
                parent.x + offset.sample(&mut rng),
                parent.y + offset.sample(&mut rng),
            );
            if w.contains(child) {
                points.push(child);
            }
        }
    }
    let truth = (0..points.len()).map(|i| i >= n_bg).collect();
    Ok(LabeledPattern {
        pattern: MarkedPattern::unmarked(points, *w)?,
        truth,
    })
}

/// Marks `d(x_i, W)^h`.
pub fn assign_marks_boundary(pattern: &MarkedPattern, h: f64) -> Result<MarkedPattern> {
    positive("h", h)?;
    let w = pattern.window();
    let marks = pattern
        .points()
        .iter()
        .map(|&p| w.edge_distance(p).powf(h))
        .collect();
    pattern.with_marks(marks)
}

fn open_uniform(rng: &mut Rng) -> f64 {
    Open01.sample(rng)
}

// Gaussian marks are redrawn until positive; with mean 5 and sd 1 this
// never triggers in practice.
fn positive_gaussian(normal: &Normal<f64>, rng: &mut Rng) -> f64 {
    loop {
        let v = normal.sample(rng);
        if v > 0.0 {
            return v;
        }
    }
}

/// Pick `k` distinct centers; points within `radius` of any center form the
/// flagged set and get `N(mean, sd^2)` marks, everything else `Unif(0, 1)`.
/// Centers belong to their own neighborhoods.
pub fn assign_marks_local_centers(
    pattern: &MarkedPattern,
    k: usize,
    radius: f64,
    mean: f64,
    sd: f64,
    seed: u64,
) -> Result<LabeledPattern> {
    let n = pattern.len();
    if k > n {
        return Err(Error::param(
            "k",
            format!("cannot pick {k} centers from {n} points"),
        ));
    }
    positive("radius", radius)?;
    nonnegative("sd", sd)?;
    let normal = Normal::new(mean, sd).map_err(|e| Error::param("sd", e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let centers: Vec<Point> = index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| pattern.points()[i])
        .collect();
    let truth: Vec<bool> = pattern
        .points()
        .iter()
        .map(|&p| centers.iter().any(|&c| distance(p, c) <= radius))
        .collect();
    let marks = truth
        .iter()
        .map(|&inside| {
            if inside {
                positive_gaussian(&normal, &mut rng)
            } else {
                open_uniform(&mut rng)
            }
        })
        .collect();
    Ok(LabeledPattern {
        pattern: pattern.with_marks(marks)?,
        truth,
    })
}

/// Source of i.i.d. marks drawn independently of the locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IidMarks {
    Uniform01,
    Empirical { pool: Vec<f64> },
}

pub fn assign_marks_iid(
    pattern: &MarkedPattern,
    scheme: &IidMarks,
    seed: u64,
) -> Result<MarkedPattern> {
    let mut rng = rng_from_seed(seed);
    iid_marks(pattern, scheme, &mut rng)
}

fn iid_marks(pattern: &MarkedPattern, scheme: &IidMarks, rng: &mut Rng) -> Result<MarkedPattern> {
    let n = pattern.len();
    let marks = match scheme {
        IidMarks::Uniform01 => (0..n).map(|_| open_uniform(rng)).collect(),
        IidMarks::Empirical { pool } => {
            if pool.is_empty() {
                return Err(Error::param("pool", "empirical mark pool is empty"));
            }
            (0..n)
                .map(|_| pool[rng.random_range(0..pool.len())])
                .collect()
        }
    };
    pattern.with_marks(marks)
}

/// Same locations, marks uniformly permuted.
pub fn permute_marks(pattern: &MarkedPattern, seed: u64) -> Result<MarkedPattern> {
    pattern.require_len(2)?;
    let mut rng = rng_from_seed(seed);
    let mut marks = pattern.marks().to_vec();
    marks.shuffle(&mut rng);
    pattern.with_marks(marks)
}

/// Location model of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    HomPoisson {
        lambda: f64,
    },
    InhomPoissonLinear {
        alpha: f64,
    },
    ThomasSuperposition {
        lambda_bg: f64,
        kappa: f64,
        mu_offspring: f64,
        sigma: f64,
    },
    BinomialFixedN {
        n: usize,
    },
}

/// Mark model of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkScheme {
    BoundaryPower {
        h: f64,
    },
    IidUniform01,
    LocalGaussianCenters {
        k: usize,
        radius: f64,
        mean: f64,
        sd: f64,
    },
    /// `N(mean, sd^2)` marks on points labeled by the generator,
    /// `Unif(0, 1)` elsewhere.
    ClusterGaussianMarks {
        mean: f64,
        sd: f64,
    },
    IidEmpirical {
        pool: Vec<f64>,
    },
    Permutation {
        marks: Vec<f64>,
    },
}

/// Declarative scenario: locations, marks, window and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub generator: Generator,
    pub marks: MarkScheme,
    pub window: Window,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(generator: Generator, marks: MarkScheme, window: Window, seed: u64) -> Self {
        Self {
            generator,
            marks,
            window,
            seed,
        }
    }

    /// Check parameters without generating anything.
    pub fn validate(&self) -> Result<()> {
        match self.generator {
            Generator::HomPoisson { lambda } => positive("lambda", lambda)?,
            Generator::InhomPoissonLinear { alpha } => {
                if !self.window.is_unit_square() {
                    return Err(Error::param(
                        "window",
                        "inhom_poisson_linear needs the unit square",
                    ));
                }
                if !(alpha > -10.0 && alpha.is_finite()) {
                    return Err(Error::param(
                        "alpha",
                        format!("must exceed -10, got {alpha}"),
                    ));
                }
            }
            Generator::ThomasSuperposition {
                lambda_bg,
                kappa,
                mu_offspring,
                sigma,
            } => {
                nonnegative("lambda_bg", lambda_bg)?;
                nonnegative("kappa", kappa)?;
                nonnegative("mu_offspring", mu_offspring)?;
                positive("sigma", sigma)?;
            }
            Generator::BinomialFixedN { .. } => {}
        }
        match &self.marks {
            MarkScheme::BoundaryPower { h } => positive("h", *h)?,
            MarkScheme::LocalGaussianCenters { radius, sd, .. } => {
                positive("radius", *radius)?;
                nonnegative("sd", *sd)?;
            }
            MarkScheme::ClusterGaussianMarks { sd, .. } => nonnegative("sd", *sd)?,
            MarkScheme::IidEmpirical { pool } if pool.is_empty() => {
                return Err(Error::param("pool", "empirical mark pool is empty"))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<LabeledPattern> {
        self.generate_with_seed(self.seed)
    }

    /// Generate with an explicit seed; locations and marks use independent
    /// child streams of it.
    pub fn generate_with_seed(&self, seed: u64) -> Result<LabeledPattern> {
        let loc_seed = child_seed(seed, 0);
        let mark_seed = child_seed(seed, 1);
        let w = &self.window;
        let located = match self.generator {
            Generator::HomPoisson { lambda } => {
                LabeledPattern::unlabeled(gen_hom_poisson(lambda, w, loc_seed)?)
            }
            Generator::InhomPoissonLinear { alpha } => {
                LabeledPattern::unlabeled(gen_inhom_poisson_linear(alpha, w, loc_seed)?)
            }
            Generator::ThomasSuperposition {
                lambda_bg,
                kappa,
                mu_offspring,
                sigma,
            } => gen_thomas_superposition(lambda_bg, kappa, mu_offspring, sigma, w, loc_seed)?,
            Generator::BinomialFixedN { n } => {
                LabeledPattern::unlabeled(gen_binomial(n, w, loc_seed)?)
            }
        };
        let LabeledPattern { pattern, truth } = located;
        let mut rng = rng_from_seed(mark_seed);
        Ok(match &self.marks {
            MarkScheme::BoundaryPower { h } => LabeledPattern {
                pattern: assign_marks_boundary(&pattern, *h)?,
                truth,
            },
            MarkScheme::IidUniform01 => LabeledPattern {
                pattern: iid_marks(&pattern, &IidMarks::Uniform01, &mut rng)?,
                truth,
            },
            MarkScheme::IidEmpirical { pool } => LabeledPattern {
                pattern: iid_marks(
                    &pattern,
                    &IidMarks::Empirical { pool: pool.clone() },
                    &mut rng,
                )?,
                truth,
            },
            MarkScheme::LocalGaussianCenters {
                k,
                radius,
                mean,
                sd,
            } => {
                let k = (*k).min(pattern.len());
                assign_marks_local_centers(&pattern, k, *radius, *mean, *sd, mark_seed)?
            }
            MarkScheme::ClusterGaussianMarks { mean, sd } => {
                let normal =
                    Normal::new(*mean, *sd).map_err(|e| Error::param("sd", e.to_string()))?;
                let marks = truth
                    .iter()
                    .map(|&t| {
                        if t {
                            positive_gaussian(&normal, &mut rng)
                        } else {
                            open_uniform(&mut rng)
                        }
                    })
                    .collect();
                LabeledPattern {
                    pattern: pattern.with_marks(marks)?,
                    truth,
                }
            }
            MarkScheme::Permutation { marks } => {
                if marks.len() != pattern.len() {
                    return Err(Error::param(
                        "marks",
                        format!(
                            "permutation list has {} marks for {} points",
                            marks.len(),
                            pattern.len()
                        ),
                    ));
                }
                let mut marks = marks.clone();
                marks.shuffle(&mut rng);
                LabeledPattern {
                    pattern: pattern.with_marks(marks)?,
                    truth,
                }
            }
        })
    }

    /// Global power scenario for one cell of the power table: `expected_n`
    /// points in the unit square with boundary-distance marks of power `h`.
    /// Homogeneity is tested against the linear inhomogeneous process with
    /// the same expected count, the other hypotheses against a homogeneous
    /// Poisson process.
    pub fn global_preset(
        hypothesis: crate::hypothesis::Hypothesis,
        expected_n: f64,
        h: f64,
        seed: u64,
    ) -> Self {
        use crate::hypothesis::Hypothesis;
        let generator = match hypothesis.global() {
            Hypothesis::H2 => Generator::InhomPoissonLinear {
                alpha: linear_alpha_for(expected_n),
            },
            _ => Generator::HomPoisson { lambda: expected_n },
        };
        Self::new(
            generator,
            MarkScheme::BoundaryPower { h },
            Window::unit_square(),
            seed,
        )
    }

    /// Local classification scenario for one row of the classification
    /// table.
    pub fn local_preset(
        hypothesis: crate::hypothesis::Hypothesis,
        expected_n: f64,
        seed: u64,
    ) -> Self {
        use crate::hypothesis::Hypothesis;
        let thomas = thomas_for(expected_n);
        let (generator, marks) = match hypothesis.global() {
            Hypothesis::H1 => (
                thomas,
                MarkScheme::ClusterGaussianMarks { mean: 5.0, sd: 1.0 },
            ),
            Hypothesis::H2 => (thomas, MarkScheme::IidUniform01),
            _ => (
                Generator::HomPoisson { lambda: expected_n },
                MarkScheme::LocalGaussianCenters {
                    k: LOCAL_MARK_CENTERS,
                    radius: LOCAL_MARK_RADIUS,
                    mean: 5.0,
                    sd: 1.0,
                },
            ),
        };
        Self::new(generator, marks, Window::unit_square(), seed)
    }
}

/// Slope of `10 + alpha x` giving `expected_n` points on the unit square.
pub fn linear_alpha_for(expected_n: f64) -> f64 {
    2.0 * (expected_n - 10.0)
}

/// Thomas superposition with `expected_n` points in the unit square, 30% of
/// them clustered.
pub fn thomas_for(expected_n: f64) -> Generator {
    Generator::ThomasSuperposition {
        lambda_bg: (1.0 - CLUSTERED_FRACTION) * expected_n,
        kappa: THOMAS_KAPPA,
        mu_offspring: CLUSTERED_FRACTION * expected_n / THOMAS_KAPPA,
        sigma: THOMAS_SIGMA,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn hom_poisson_mean_count() {
        let w = Window::unit_square();
        let counts: Vec<f64> = (0..500)
            .map(|s| gen_hom_poisson(100.0, &w, s).unwrap().len() as f64)
            .collect();
        let m = mean(&counts);
        assert!((98.7..=101.3).contains(&m), "mean count {m}");

        let counts: Vec<f64> = (0..500)
            .map(|s| gen_hom_poisson(25.0, &w, s).unwrap().len() as f64)
            .collect();
        assert!((mean(&counts) - 25.0).abs() < 3.0 * (25.0f64 / 500.0).sqrt());

        let w2 = Window::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let counts: Vec<f64> = (0..500)
            .map(|s| gen_hom_poisson(100.0, &w2, s).unwrap().len() as f64)
            .collect();
        assert!((mean(&counts) - 400.0).abs() < 3.0 * (400.0f64 / 500.0).sqrt());
    }

    #[test]
    fn inhom_requires_unit_square() {
        let w = Window::new(0.0, 2.0, 0.0, 1.0).unwrap();
        assert!(gen_inhom_poisson_linear(30.0, &w, 1).is_err());
        assert!(gen_inhom_poisson_linear(-10.0, &Window::unit_square(), 1).is_err());
    }

    #[test]
    fn inhom_mean_counts() {
        let w = Window::unit_square();
        for &(alpha, expected) in &[(180.0, 100.0), (30.0, 25.0), (0.0, 10.0), (80.0, 50.0)] {
            let counts: Vec<f64> = (0..1000)
                .map(|s| gen_inhom_poisson_linear(alpha, &w, s).unwrap().len() as f64)
                .collect();
            let se = (expected / 1000.0f64).sqrt();
            let m = mean(&counts);
            assert!((m - expected).abs() < 3.0 * se, "alpha {alpha}: {m}");
        }
    }

    #[test]
    fn thomas_without_offspring_is_background_only() {
        let w = Window::unit_square();
        let lp = gen_thomas_superposition(40.0, 5.0, 0.0, 0.03, &w, 3).unwrap();
        assert!(lp.truth.iter().all(|&t| !t));
        let bg = gen_hom_poisson(40.0, &w, 3).unwrap();
        assert_eq!(lp.pattern.len(), bg.len());
    }

    #[test]
    fn thomas_clustered_fraction() {
        let w = Window::unit_square();
        let (mut clustered, mut total) = (0usize, 0usize);
        for s in 0..500 {
            let lp = gen_thomas_superposition(35.0, 5.0, 3.0, 0.03, &w, s).unwrap();
            clustered += lp.truth.iter().filter(|&&t| t).count();
            total += lp.truth.len();
        }
        let frac = clustered as f64 / total as f64;
        assert!((frac - 0.30).abs() <= 0.04, "fraction {frac}");
    }

    #[test]
    fn marks_on_boundary_power() {
        let w = Window::unit_square();
        let pat =
            MarkedPattern::unmarked(vec![Point::new(0.5, 0.5), Point::new(0.9, 0.5)], w).unwrap();
        assert_eq!(assign_marks_boundary(&pat, 1.0).unwrap().marks()[0], 0.5);
        assert_eq!(assign_marks_boundary(&pat, 3.0).unwrap().marks()[0], 0.125);
        let m = assign_marks_boundary(&pat, 2.0).unwrap().marks()[1];
        assert!((m - 0.01).abs() < 1e-15);
        assert!(assign_marks_boundary(&pat, 0.0).is_err());
    }

    #[test]
    fn local_centers_edge_cases() {
        let w = Window::unit_square();
        let pat = gen_hom_poisson(50.0, &w, 11).unwrap();
        let none = assign_marks_local_centers(&pat, 0, 0.05, 5.0, 1.0, 1).unwrap();
        assert!(none.truth.iter().all(|&t| !t));
        assert!(none.pattern.marks().iter().all(|&m| m > 0.0 && m < 1.0));

        let all = assign_marks_local_centers(&pat, pat.len(), w.diagonal(), 5.0, 1.0, 1).unwrap();
        assert!(all.truth.iter().all(|&t| t));

        assert!(assign_marks_local_centers(&pat, pat.len() + 1, 0.05, 5.0, 1.0, 1).is_err());
    }

    #[test]
    fn local_center_marks_have_requested_mean() {
        let w = Window::unit_square();
        let mut z_marks = Vec::new();
        for s in 0..500 {
            let pat = gen_hom_poisson(100.0, &w, s).unwrap();
            let lp = assign_marks_local_centers(&pat, 3, 0.05, 5.0, 1.0, s + 10_000).unwrap();
            // centers are always inside their own neighborhoods
            assert!(lp.truth.iter().filter(|&&t| t).count() >= 1);
            z_marks.extend(
                lp.truth
                    .iter()
                    .zip(lp.pattern.marks())
                    .filter(|(t, _)| **t)
                    .map(|(_, &m)| m),
            );
        }
        let m = mean(&z_marks);
        assert!((m - 5.0).abs() < 0.2, "mean {m}");
    }

    #[test]
    fn iid_marks() {
        let w = Window::unit_square();
        let pat = gen_hom_poisson(50.0, &w, 2).unwrap();
        let u = assign_marks_iid(&pat, &IidMarks::Uniform01, 3).unwrap();
        assert!(u.marks().iter().all(|&m| (0.0..=1.0).contains(&m)));
        let c = assign_marks_iid(&pat, &IidMarks::Empirical { pool: vec![2.0; 3] }, 3).unwrap();
        assert!(c.marks().iter().all(|&m| m == 2.0));
        let pool = vec![0.5, 1.5, 7.0];
        let e = assign_marks_iid(&pat, &IidMarks::Empirical { pool: pool.clone() }, 4).unwrap();
        assert!(e.marks().iter().all(|m| pool.contains(m)));
        assert!(assign_marks_iid(&pat, &IidMarks::Empirical { pool: vec![] }, 4).is_err());
    }

    #[test]
    fn permutation_preserves_multiset() {
        let w = Window::unit_square();
        let two = MarkedPattern::new(
            vec![Point::new(0.2, 0.2), Point::new(0.7, 0.7)],
            vec![1.0, 2.0],
            w,
        )
        .unwrap();
        for s in 0..20 {
            let m = permute_marks(&two, s).unwrap().marks().to_vec();
            assert!(m == vec![1.0, 2.0] || m == vec![2.0, 1.0]);
        }
        let pat = assign_marks_iid(
            &gen_hom_poisson(40.0, &w, 5).unwrap(),
            &IidMarks::Uniform01,
            6,
        )
        .unwrap();
        let perm = permute_marks(&pat, 7).unwrap();
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v
        };
        assert_eq!(sorted(pat.marks()), sorted(perm.marks()));
        assert_eq!(perm.points(), pat.points());

        let one = MarkedPattern::new(vec![Point::new(0.2, 0.2)], vec![1.0], w).unwrap();
        assert!(permute_marks(&one, 1).is_err());
    }

    #[test]
    fn scenarios_are_deterministic_and_inside() {
        let spec = ScenarioSpec::new(
            thomas_for(50.0),
            MarkScheme::ClusterGaussianMarks { mean: 5.0, sd: 1.0 },
            Window::unit_square(),
            99,
        );
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        assert_eq!(a, b);
        assert!(a
            .pattern
            .points()
            .iter()
            .all(|&p| a.pattern.window().contains(p)));
        assert_ne!(spec.generate_with_seed(100).unwrap(), a);
    }

    #[test]
    fn validate_names_parameter() {
        let spec = ScenarioSpec::new(
            Generator::HomPoisson { lambda: -1.0 },
            MarkScheme::IidUniform01,
            Window::unit_square(),
            1,
        );
        assert!(matches!(
            spec.validate(),
            Err(Error::InvalidParameter { name: "lambda", .. })
        ));
    }

    #[test]
    fn offspring_displacement_mean_is_rayleigh() {
        // Rayleigh mean sigma * sqrt(pi / 2), checked on raw Gaussian draws
        let mut rng = rng_from_seed(5);
        let normal = Normal::new(0.0, THOMAS_SIGMA).unwrap();
        let n = 200_000;
        let total: f64 = (0..n)
            .map(|_| normal.sample(&mut rng).hypot(normal.sample(&mut rng)))
            .sum();
        let expected = THOMAS_SIGMA * (std::f64::consts::PI / 2.0).sqrt();
        assert!((total / n as f64 - expected).abs() < 2e-4);
        assert!((expected - 0.0376).abs() < 1e-4);
    }
}
