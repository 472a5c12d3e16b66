//! Replication harness for power and local classification studies, and the
//! two-sample Kolmogorov-Smirnov comparison.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{global_test, local_test, Hypothesis, TestConfig};
use crate::parallel::map_indexed;
use crate::rng::child_seed;
use crate::simulate::ScenarioSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub scenario: ScenarioSpec,
    pub hypothesis: Hypothesis,
    pub replicates: usize,
    pub rejections: usize,
    pub power: f64,
    pub seed: u64,
    /// Left unset unless timing is requested, so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn from_flags(predicted: &[bool], truth: &[bool]) -> Self {
        let mut c = Self::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `None` when there are no true positives to find.
    pub fn tpr(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn fpr(&self) -> Option<f64> {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn acc(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }

    fn add(&mut self, other: &Self) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub scenario: ScenarioSpec,
    pub hypothesis: Hypothesis,
    pub replicates: usize,
    pub counts: ConfusionCounts,
    /// Rates from counts pooled over all replicates.
    pub pooled: Rates,
    /// Per-replicate rates averaged over the replicates where they are
    /// defined.
    pub averaged: Rates,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl ClassificationReport {
    pub fn tpr(&self) -> Option<f64> {
        self.pooled.tpr
    }
    pub fn fpr(&self) -> Option<f64> {
        self.pooled.fpr
    }
    pub fn acc(&self) -> Option<f64> {
        self.pooled.acc
    }
}

/// Seeds of replicate `r`: (pattern, test).
fn replicate_seeds(seed: u64, r: usize) -> (u64, u64) {
    (
        child_seed(seed, 2 * r as u64),
        child_seed(seed, 2 * r as u64 + 1),
    )
}

/// Rejection rate of the global test over `replicates` patterns drawn from
/// `scenario`.
pub fn run_power(
    scenario: &ScenarioSpec,
    hypothesis: Hypothesis,
    replicates: usize,
    config: &TestConfig,
    seed: u64,
) -> Result<PowerReport> {
    if replicates == 0 {
        return Err(Error::param("replicates", "need at least one replicate"));
    }
    scenario.validate()?;
    config.validate()?;
    let rejected = map_indexed(replicates, |r| -> Result<bool> {
        let (pat_seed, test_seed) = replicate_seeds(seed, r);
        let lp = scenario.generate_with_seed(pat_seed)?;
        if lp.pattern.len() < 2 {
            // too few points to compute any statistic: no rejection
            return Ok(false);
        }
        Ok(global_test(&lp.pattern, hypothesis, &config.with_seed(test_seed))?.reject)
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    let rejections = rejected.iter().filter(|&&r| r).count();
    Ok(PowerReport {
        scenario: scenario.clone(),
        hypothesis: hypothesis.global(),
        replicates,
        rejections,
        power: rejections as f64 / replicates as f64,
        seed,
        wall_time_secs: None,
    })
}

/// Per-point classification of the local test against the scenario's
/// ground-truth labels.
pub fn run_classification(
    scenario: &ScenarioSpec,
    hypothesis: Hypothesis,
    replicates: usize,
    config: &TestConfig,
    seed: u64,
) -> Result<ClassificationReport> {
    if replicates == 0 {
        return Err(Error::param("replicates", "need at least one replicate"));
    }
    scenario.validate()?;
    config.validate()?;
    let per_rep = map_indexed(replicates, |r| -> Result<ConfusionCounts> {
        let (pat_seed, test_seed) = replicate_seeds(seed, r);
        let lp = scenario.generate_with_seed(pat_seed)?;
        if lp.pattern.len() < 2 {
            let none = vec![false; lp.truth.len()];
            return Ok(ConfusionCounts::from_flags(&none, &lp.truth));
        }
        let res = local_test(&lp.pattern, hypothesis, &config.with_seed(test_seed))?;
        Ok(ConfusionCounts::from_flags(&res.reject, &lp.truth))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut counts = ConfusionCounts::default();
    per_rep.iter().for_each(|c| counts.add(c));
    let mean_of = |f: fn(&ConfusionCounts) -> Option<f64>| {
        let vals: Vec<f64> = per_rep.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    Ok(ClassificationReport {
        scenario: scenario.clone(),
        hypothesis: hypothesis.local(),
        replicates,
        counts,
        pooled: Rates {
            tpr: counts.tpr(),
            fpr: counts.fpr(),
            acc: counts.acc(),
        },
        averaged: Rates {
            tpr: mean_of(ConfusionCounts::tpr),
            fpr: mean_of(ConfusionCounts::fpr),
            acc: mean_of(ConfusionCounts::acc),
        },
        seed,
        wall_time_secs: None,
    })
}

/// Time a closure and return its result with the elapsed seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sided two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// at effective size `sqrt(n1 n2 / (n1 + n2))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::param("sample", "contains NaN"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let t = x[i].min(y[j]);
        while i < n1 && x[i] <= t {
            i += 1;
        }
        while j < n2 && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let en = (n1 as f64 * n2 as f64 / (n1 + n2) as f64).sqrt();
    Ok(KsResult {
        d,
        p_value: kolmogorov_sf(en * d),
        n1,
        n2,
    })
}

/// Survival function of the Kolmogorov distribution,
/// `P(K > x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // complementary theta-function form converges fast for small x
        let c = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x
            * (1..=20)
                .map(|k| ((2 * k - 1) as f64).powi(2) * c)
                .map(f64::exp)
                .sum::<f64>();
        return (1.0 - cdf).clamp(f64::MIN_POSITIVE, 1.0);
    }
    let mut total = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        total += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * total).clamp(f64::MIN_POSITIVE, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ks_examples() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.d, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(r.d, 1.0);
        let r = ks_two_sample(&[0.1, 0.5], &[0.3, 0.7]).unwrap();
        assert_eq!(r.d, 0.5);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn kolmogorov_reference_values() {
        // P(K > 1.3581) ~= 0.05, P(K > 1.2238) ~= 0.10
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.2238) - 0.10).abs() < 1e-4);
        // both branches agree near the switch
        let lo = kolmogorov_sf(1.0 - 1e-12);
        let hi = kolmogorov_sf(1.0);
        assert!((lo - hi).abs() < 1e-10);
        assert!((kolmogorov_sf(0.5) - 0.963945).abs() < 1e-5);
    }

    #[test]
    fn confusion_rates() {
        let c = ConfusionCounts::from_flags(&[false; 4], &[true, false, false, true]);
        assert_eq!(c.tpr(), Some(0.0));
        assert_eq!(c.fpr(), Some(0.0));
        assert_eq!(c.acc(), Some(0.5));
        let c = ConfusionCounts::from_flags(&[true, false], &[false, false]);
        assert_eq!(c.tpr(), None);
        assert_eq!(c.fpr(), Some(0.5));
    }

    proptest! {
        #[test]
        fn ks_symmetric_and_monotone_invariant(
            a in prop::collection::vec(-100.0f64..100.0, 1..40),
            b in prop::collection::vec(-100.0f64..100.0, 1..40),
        ) {
            let ab = ks_two_sample(&a, &b).unwrap();
            let ba = ks_two_sample(&b, &a).unwrap();
            prop_assert_eq!(ab.d, ba.d);
            prop_assert_eq!(ab.p_value, ba.p_value);
            prop_assert!((0.0..=1.0).contains(&ab.d));
            let f = |v: &f64| (v / 50.0).exp() * 3.0 + 1.0;
            let ta: Vec<f64> = a.iter().map(f).collect();
            let tb: Vec<f64> = b.iter().map(f).collect();
            prop_assert_eq!(ks_two_sample(&ta, &tb).unwrap().d, ab.d);
        }
    }
}
