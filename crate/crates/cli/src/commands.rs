use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use markedk::experiments::timed;
use markedk::hypothesis::observed_curves;
use markedk::intensity::Bandwidth;
use markedk::parallel::with_threads;
use markedk::rng::child_seed;
use markedk::simulate::{Generator, MarkScheme};
use markedk::{
    global_test, ks_two_sample, local_test, run_classification, run_power, sequential_procedure,
    ClassificationReport, ConfusionCounts, EdgeCorrection, Hypothesis, IntensitySetting, KsResult,
    LocalNormalization, LocalTestResult, PowerReport, ScenarioSpec, SequentialOutcome, TestResult,
};
use serde::Serialize;

use crate::config::{parse_window, RunConfig};
use crate::io;
use crate::{
    CommonArgs, EdgeArg, ExperimentArgs, HypothesisArg, IntensityArg, KsArgs, NormalizationArg,
    SimulateArgs, TestArgs, TestSettingsArgs,
};

/// Which exit code an error maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<markedk::Error> for Failure {
    fn from(e: markedk::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult<T> = Result<T, Failure>;

trait UsageExt<T> {
    fn usage(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> UsageExt<T> for Result<T, E> {
    fn usage(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
}

pub fn run(command: crate::Command) -> CmdResult<()> {
    use crate::Command::*;
    match command {
        Simulate(a) => simulate(a),
        Test(a) => test(a),
        Power(a) => power(a),
        Classify(a) => classify(a),
        Ks(a) => ks(a),
    }
}

/// Every JSON output: the command, its effective config, then the results.
#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn emit<T: Serialize>(
    path: Option<&Path>,
    command: &'static str,
    config: &RunConfig,
    body: T,
) -> CmdResult<()> {
    let out = Output {
        command,
        config,
        body,
    };
    let mut text = serde_json::to_string_pretty(&out).map_err(anyhow::Error::from)?;
    text.push('\n');
    io::write_output(path, text.as_bytes())?;
    Ok(())
}

fn base_config(common: &CommonArgs) -> CmdResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).usage()?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(w) = &common.window {
        cfg.window = Some(parse_window(w).usage()?);
    }
    Ok(cfg)
}

fn apply_settings(cfg: &mut RunConfig, s: &TestSettingsArgs) {
    if let Some(b) = s.null_replicates {
        cfg.test.replicates = b;
    }
    if let Some(a) = s.alpha {
        cfg.test.alpha = a;
    }
    if let Some(k) = s.grid_points {
        cfg.grid.points = k;
    }
    if let Some(r) = s.rmax {
        cfg.grid.rmax = Some(r);
    }
    match (s.intensity, s.bandwidth) {
        (Some(IntensityArg::Constant), _) => cfg.test.intensity = IntensitySetting::Constant,
        (_, Some(b)) => {
            cfg.test.intensity = IntensitySetting::Kernel {
                bandwidth: Bandwidth::Fixed(b),
            }
        }
        (Some(IntensityArg::Kernel), None) => {
            cfg.test.intensity = IntensitySetting::Kernel {
                bandwidth: Bandwidth::Auto,
            }
        }
        (None, None) => {}
    }
    if let Some(e) = s.edge_correction {
        cfg.test.edge_correction = match e {
            EdgeArg::None => EdgeCorrection::None,
            EdgeArg::Translation => EdgeCorrection::Translation,
        };
    }
    if let Some(n) = s.local_normalization {
        cfg.test.local_normalization = match n {
            NormalizationArg::MeanSquare => LocalNormalization::MeanSquare,
            NormalizationArg::PointMark => LocalNormalization::PointMark,
        };
    }
}

fn scenario_is_labeled(spec: &ScenarioSpec) -> bool {
    matches!(spec.generator, Generator::ThomasSuperposition { .. })
        || matches!(
            spec.marks,
            MarkScheme::LocalGaussianCenters { .. } | MarkScheme::ClusterGaussianMarks { .. }
        )
}

fn simulate(a: SimulateArgs) -> CmdResult<()> {
    let mut cfg = base_config(&a.common)?;
    if let Some(n) = a.expected_n {
        cfg.experiment.expected_n = n;
    }
    if let Some(h) = a.h {
        cfg.experiment.h = h;
    }
    if let Some(hyp) = a.hypothesis {
        cfg.hypothesis = Some(hyp);
    }
    let hyp = cfg.hypothesis.unwrap_or(Hypothesis::H1);
    let spec = cfg.scenario_for(hyp).usage()?;
    cfg.scenario = Some(crate::config::ScenarioConfig {
        generator: spec.generator.clone(),
        marks: spec.marks.clone(),
    });

    let labeled = with_threads(a.common.threads, || spec.generate())?;
    let truth = scenario_is_labeled(&spec).then_some(labeled.truth.as_slice());
    let csv = io::pattern_csv(&labeled.pattern, truth)?;
    io::write_output(a.common.out.as_deref(), &csv)?;

    if let Some(path) = &a.manifest {
        #[derive(Serialize)]
        struct Body<'a> {
            points: usize,
            labeled: usize,
            output: Option<&'a Path>,
        }
        let body = Body {
            points: labeled.pattern.len(),
            labeled: labeled.truth.iter().filter(|&&t| t).count(),
            output: a.common.out.as_deref(),
        };
        emit(Some(path), "simulate", &cfg, body)?;
    }
    Ok(())
}

// written once per run, so boxing buys nothing
#[allow(clippy::large_enum_variant)]
#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum TestBody {
    Sequential(SequentialOutcome),
    Global(TestResult),
    Local(LocalTestResult),
}

fn test(a: TestArgs) -> CmdResult<()> {
    let mut cfg = base_config(&a.common)?;
    apply_settings(&mut cfg, &a.settings);
    if let Some(input) = a.input {
        cfg.input = Some(input);
    }
    match a.hypothesis {
        Some(HypothesisArg::Sequential) => cfg.hypothesis = None,
        Some(HypothesisArg::One(h)) => cfg.hypothesis = Some(h),
        None => {}
    }
    if a.local {
        cfg.local = true;
    }
    if let Some(h) = cfg.hypothesis {
        if h.is_local() {
            cfg.local = true;
        }
    }
    if cfg.local {
        cfg.hypothesis = Some(cfg.hypothesis.unwrap_or(Hypothesis::H1L).local());
    }

    let input = cfg.require_input().usage()?.to_path_buf();
    let file = io::read_pattern(&input, cfg.window())
        .with_context(|| format!("reading {}", input.display()))
        .usage()?;
    let pattern = file.pattern.clone();
    if pattern.len() < 2 {
        return Err(Failure::Usage(anyhow!(
            "{}: the tests need at least 2 points, found {}",
            input.display(),
            pattern.len()
        )));
    }
    if let Some(i) = pattern.marks().iter().position(|&m| m <= 0.0) {
        return Err(Failure::Usage(anyhow!(
            "{}: line {}: marks must be positive, got {}",
            input.display(),
            i + 2,
            pattern.marks()[i]
        )));
    }
    let tc = cfg.test_config().usage()?;

    let body = with_threads(a.common.threads, || -> markedk::Result<TestBody> {
        Ok(match cfg.hypothesis {
            None => TestBody::Sequential(sequential_procedure(&pattern, &tc)?),
            Some(h) if cfg.local => TestBody::Local(local_test(&pattern, h, &tc)?),
            Some(h) => TestBody::Global(global_test(&pattern, h, &tc)?),
        })
    })?;

    if let Some(dir) = &a.curves {
        write_curves(dir, &pattern, &cfg)?;
    }
    if let TestBody::Local(local) = &body {
        let points = a
            .points
            .clone()
            .or_else(|| a.curves.as_ref().map(|d| d.join("local_points.csv")));
        if let Some(path) = points {
            io::write_output(Some(&path), &io::local_points_csv(&pattern, local)?)?;
        }
    }

    let counts = match (&body, &file.truth) {
        (TestBody::Local(local), Some(truth)) => {
            Some(ConfusionCounts::from_flags(&local.reject, truth))
        }
        _ => None,
    };

    #[derive(Serialize)]
    struct Body {
        points: usize,
        result: TestBody,
        #[serde(skip_serializing_if = "Option::is_none")]
        truth_counts: Option<ConfusionCounts>,
    }
    emit(
        a.common.out.as_deref(),
        "test",
        &cfg,
        Body {
            points: pattern.len(),
            result: body,
            truth_counts: counts,
        },
    )
}

fn write_curves(dir: &Path, pattern: &markedk::MarkedPattern, cfg: &RunConfig) -> CmdResult<()> {
    let tc = cfg.test_config().usage()?;
    let h1 = observed_curves(pattern, Hypothesis::H1, &tc)?;
    let h2 = observed_curves(pattern, Hypothesis::H2, &tc)?;
    let h3 = observed_curves(pattern, Hypothesis::H3, &tc)?;
    let csv = io::curves_csv(&[
        ("k", &h1.k),
        ("ktf", &h1.ktf),
        ("kappa", &h1.kappa),
        ("reference_h1", &h1.reference),
        ("reference_h2", &h2.reference),
        ("reference_h3", &h3.reference),
    ])?;
    let path = dir.join("curves.csv");
    io::write_output(Some(&path), &csv)?;

    #[derive(Serialize)]
    struct Manifest {
        files: Vec<&'static str>,
        columns: Vec<&'static str>,
    }
    emit(
        Some(&dir.join("manifest.json")),
        "curves",
        cfg,
        Manifest {
            files: vec!["curves.csv"],
            columns: vec![
                "r",
                "k",
                "ktf",
                "kappa",
                "reference_h1",
                "reference_h2",
                "reference_h3",
            ],
        },
    )
}

fn experiment_config(a: &ExperimentArgs) -> CmdResult<RunConfig> {
    let mut cfg = base_config(&a.common)?;
    apply_settings(&mut cfg, &a.settings);
    if let Some(h) = a.hypothesis {
        cfg.hypothesis = Some(h);
    }
    if let Some(r) = a.replicates {
        cfg.experiment.replicates = r;
    }
    if let Some(n) = a.expected_n {
        cfg.experiment.expected_n = n;
        cfg.scenario = None;
    }
    if let Some(h) = a.h {
        cfg.experiment.h = h;
        cfg.scenario = None;
    }
    if a.full_table {
        cfg.experiment.full_table = true;
    }
    if a.timing {
        cfg.experiment.timing = true;
    }
    if cfg.experiment.replicates == 0 {
        return Err(Failure::Usage(anyhow!("--replicates must be at least 1")));
    }
    Ok(cfg)
}

const EXPECTED_COUNTS: [f64; 3] = [25.0, 50.0, 100.0];
const MARK_POWERS: [f64; 3] = [1.0, 2.0, 3.0];

/// Expected number of points of a scenario, when it has a closed form.
fn expected_count(spec: &ScenarioSpec) -> Option<f64> {
    let area = spec.window.area();
    match spec.generator {
        Generator::HomPoisson { lambda } => Some(lambda * area),
        Generator::InhomPoissonLinear { alpha } => Some(10.0 + alpha / 2.0),
        Generator::ThomasSuperposition {
            lambda_bg,
            kappa,
            mu_offspring,
            ..
        } => Some((lambda_bg + kappa * mu_offspring) * area),
        Generator::BinomialFixedN { n } => Some(n as f64),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.2}"))
}

fn fmt_count(v: Option<f64>) -> String {
    v.map_or_else(
        || "NA".to_string(),
        |x| format!("{}", (x * 1e6).round() / 1e6),
    )
}

fn power(a: ExperimentArgs) -> CmdResult<()> {
    let cfg = experiment_config(&a)?;
    let tc = cfg.test_config().usage()?;
    let reps = cfg.experiment.replicates;
    let timing = cfg.experiment.timing;
    let run_cell = |spec: &ScenarioSpec, hyp: Hypothesis, seed: u64| -> CmdResult<PowerReport> {
        let (report, secs) = timed(|| run_power(spec, hyp, reps, &tc, seed));
        let mut report = report?;
        if timing {
            report.wall_time_secs = Some(secs);
        }
        Ok(report)
    };

    let mut reports = Vec::new();
    let mut rows = Vec::new();
    with_threads(a.common.threads, || -> CmdResult<()> {
        if cfg.experiment.full_table {
            let mut cell = 0;
            for &n in &EXPECTED_COUNTS {
                for &h in &MARK_POWERS {
                    let mut row = vec![fmt_count(Some(n)), format!("{h}")];
                    for hyp in Hypothesis::GLOBAL {
                        let mut spec = ScenarioSpec::global_preset(hyp, n, h, cfg.seed);
                        if let Some(w) = cfg.window {
                            spec.window = w;
                        }
                        let r = run_cell(&spec, hyp, child_seed(cfg.seed, cell))?;
                        cell += 1;
                        row.push(format!("{:.2}", r.power));
                        reports.push(r);
                    }
                    rows.push(row);
                }
            }
        } else {
            let hyp = cfg.hypothesis.unwrap_or(Hypothesis::H1).global();
            let spec = cfg.scenario_for(hyp).usage()?;
            let r = run_cell(&spec, hyp, cfg.seed)?;
            let h = match spec.marks {
                MarkScheme::BoundaryPower { h } => format!("{h}"),
                _ => "NA".to_string(),
            };
            rows.push(vec![
                fmt_count(expected_count(&spec)),
                h,
                hyp.to_string(),
                format!("{:.2}", r.power),
            ]);
            reports.push(r);
        }
        Ok(())
    })?;
    if let Some(path) = &a.table {
        let header: &[&str] = if cfg.experiment.full_table {
            &["E[N]", "h", "H1", "H2", "H3"]
        } else {
            &["E[N]", "h", "hypothesis", "power"]
        };
        io::append_rows(path, header, &rows)?;
    }

    #[derive(Serialize)]
    struct Body {
        reports: Vec<PowerReport>,
    }
    emit(a.common.out.as_deref(), "power", &cfg, Body { reports })
}

fn classify(a: ExperimentArgs) -> CmdResult<()> {
    let cfg = experiment_config(&a)?;
    let tc = cfg.test_config().usage()?;
    let reps = cfg.experiment.replicates;
    let timing = cfg.experiment.timing;
    let run_cell =
        |spec: &ScenarioSpec, hyp: Hypothesis, seed: u64| -> CmdResult<ClassificationReport> {
            let (report, secs) = timed(|| run_classification(spec, hyp, reps, &tc, seed));
            let mut report = report?;
            if timing {
                report.wall_time_secs = Some(secs);
            }
            Ok(report)
        };

    let mut reports = Vec::new();
    let mut rows = Vec::new();
    with_threads(a.common.threads, || -> CmdResult<()> {
        if cfg.experiment.full_table {
            let mut cell = 0;
            for &n in &EXPECTED_COUNTS {
                let mut metric_rows = [
                    vec![fmt_count(Some(n)), "TPR".to_string()],
                    vec![fmt_count(Some(n)), "FPR".to_string()],
                    vec![fmt_count(Some(n)), "ACC".to_string()],
                ];
                for hyp in Hypothesis::LOCAL {
                    let mut spec = ScenarioSpec::local_preset(hyp, n, cfg.seed);
                    if let Some(w) = cfg.window {
                        spec.window = w;
                    }
                    let r = run_cell(&spec, hyp, child_seed(cfg.seed, cell))?;
                    cell += 1;
                    metric_rows[0].push(fmt_opt(r.pooled.tpr));
                    metric_rows[1].push(fmt_opt(r.pooled.fpr));
                    metric_rows[2].push(fmt_opt(r.pooled.acc));
                    reports.push(r);
                }
                rows.extend(metric_rows);
            }
        } else {
            let hyp = cfg.hypothesis.unwrap_or(Hypothesis::H1L).local();
            let spec = cfg.scenario_for(hyp).usage()?;
            let r = run_cell(&spec, hyp, cfg.seed)?;
            rows.push(vec![
                fmt_count(expected_count(&spec)),
                hyp.to_string(),
                fmt_opt(r.pooled.tpr),
                fmt_opt(r.pooled.fpr),
                fmt_opt(r.pooled.acc),
            ]);
            reports.push(r);
        }
        Ok(())
    })?;
    if let Some(path) = &a.table {
        let header: &[&str] = if cfg.experiment.full_table {
            &["E[N]", "metric", "H1L", "H2L", "H3L"]
        } else {
            &["E[N]", "hypothesis", "TPR", "FPR", "ACC"]
        };
        io::append_rows(path, header, &rows)?;
    }

    #[derive(Serialize)]
    struct Body {
        reports: Vec<ClassificationReport>,
    }
    emit(a.common.out.as_deref(), "classify", &cfg, Body { reports })
}

fn ks(a: KsArgs) -> CmdResult<()> {
    let mut cfg = base_config(&a.common)?;
    if let Some(input) = a.input {
        cfg.input = Some(input);
    }
    if let Some(g) = a.group {
        cfg.ks.group = Some(g);
    }
    if let Some(vars) = a.vars {
        cfg.ks.variables = vars.into_iter().map(|v| v.trim().to_string()).collect();
    }
    let group = cfg
        .ks
        .group
        .clone()
        .ok_or_else(|| anyhow!("no group column given (--group)"))
        .usage()?;
    if cfg.ks.variables.is_empty() {
        return Err(Failure::Usage(anyhow!("no variables given (--vars)")));
    }
    let input: PathBuf = cfg.require_input().usage()?.to_path_buf();
    let table = io::read_grouped(&input, &group, &cfg.ks.variables)
        .with_context(|| format!("reading {}", input.display()))
        .usage()?;

    #[derive(Serialize)]
    struct Comparison {
        variable: String,
        result: KsResult,
    }
    #[derive(Serialize)]
    struct Body {
        groups: [String; 2],
        comparisons: Vec<Comparison>,
    }
    let comparisons = table
        .columns
        .into_iter()
        .map(|(variable, [a, b])| {
            let result = ks_two_sample(&a, &b)
                .with_context(|| format!("variable `{variable}`"))
                .usage()?;
            Ok(Comparison { variable, result })
        })
        .collect::<CmdResult<Vec<_>>>()?;
    emit(
        a.common.out.as_deref(),
        "ks",
        &cfg,
        Body {
            groups: table.labels,
            comparisons,
        },
    )
}
