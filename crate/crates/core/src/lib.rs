//! Global and local product-weighted mark K-functions for marked point
//! patterns, and chi-square type Monte Carlo tests of homogeneity and mark
//! independence built on them.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`], [`pattern`], [`grid`], [`index`]: data model and
//!   fixed-radius neighbor search;
//! * [`simulate`]: seeded point and mark generators;
//! * [`intensity`]: constant and kernel intensity estimates;
//! * [`summaries`]: K, mark-weighted K (global and local), mark correlation;
//! * [`hypothesis`]: the test statistics and Monte Carlo calibration;
//! * [`experiments`]: power / classification harness and the KS test.
//!
//! Replicate loops run on rayon when the `parallel` feature is enabled
//! (default) and sequentially otherwise; both give identical results.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod hypothesis;
pub mod index;
pub mod intensity;
pub mod parallel;
pub mod pattern;
pub mod rng;
pub mod simulate;
pub mod summaries;

pub use error::{Error, Result};
pub use experiments::{
    ks_two_sample, run_classification, run_power, ClassificationReport, ConfusionCounts, KsResult,
    PowerReport,
};
pub use geometry::{boundary_distance, distance, Point, Window};
pub use grid::{default_rgrid, RGrid};
pub use hypothesis::{
    global_test, local_test, reference_curve, sequential_procedure, stat_t, Configuration,
    Hypothesis, IntensitySetting, LocalTestResult, SequentialOutcome, TestConfig, TestResult,
};
pub use index::{build_index, NeighborIndex};
pub use intensity::{constant_intensity, kernel_intensity, Bandwidth, IntensityEstimate};
pub use pattern::MarkedPattern;
pub use simulate::{Generator, LabeledPattern, MarkScheme, ScenarioSpec};
pub use summaries::{
    k_hat, kappa_tf_hat, ktf_hat, local_ktf_all, local_ktf_all_with, local_ktf_hat, mark_summary,
    EdgeCorrection, LocalNormalization, MarkSummary, SummaryCurve,
};
