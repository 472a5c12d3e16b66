//! `markedk`: simulate marked point patterns, run the global, local and
//! sequential tests on CSV data, and reproduce the power and
//! classification experiments.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 runtime error.

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use markedk::Hypothesis;

use crate::commands::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "markedk",
    version,
    about = "Mark-weighted K-function tests for marked point patterns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write `x,y,mark[,truth]` CSV.
    Simulate(SimulateArgs),
    /// Test a pattern file: sequential procedure, one hypothesis, or local.
    Test(TestArgs),
    /// Power of a global test over simulated datasets.
    Power(ExperimentArgs),
    /// Classification rates of a local test over simulated datasets.
    Classify(ExperimentArgs),
    /// Two-sample Kolmogorov-Smirnov comparison between two groups of rows.
    Ks(KsArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML config, or a JSON output whose embedded config is replayed.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replicate loops (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Observation window as xmin,xmax,ymin,ymax.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IntensityArg {
    Constant,
    Kernel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EdgeArg {
    None,
    Translation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizationArg {
    MeanSquare,
    PointMark,
}

#[derive(Debug, Args)]
struct TestSettingsArgs {
    /// Null replicates per Monte Carlo test.
    #[arg(short = 'B', long)]
    null_replicates: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of distances in the r grid.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, value_enum)]
    intensity: Option<IntensityArg>,
    /// Kernel intensity bandwidth (implies `--intensity kernel`).
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, value_enum)]
    edge_correction: Option<EdgeArg>,
    #[arg(long, value_enum)]
    local_normalization: Option<NormalizationArg>,
}

fn parse_hypothesis(s: &str) -> Result<Hypothesis, String> {
    s.parse().map_err(|e: markedk::Error| e.to_string())
}

/// `sequential` or a hypothesis name.
#[derive(Debug, Clone, Copy)]
enum HypothesisArg {
    Sequential,
    One(Hypothesis),
}

fn parse_hypothesis_arg(s: &str) -> Result<HypothesisArg, String> {
    if s.eq_ignore_ascii_case("sequential") {
        Ok(HypothesisArg::Sequential)
    } else {
        parse_hypothesis(s).map(HypothesisArg::One)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Preset scenario of this hypothesis (ignored when the config has a
    /// `scenario`).
    #[arg(long, value_parser = parse_hypothesis)]
    hypothesis: Option<Hypothesis>,
    #[arg(long)]
    expected_n: Option<f64>,
    /// Boundary-distance mark exponent of the global presets.
    #[arg(long)]
    h: Option<f64>,
    /// Also write a JSON manifest with the effective config.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TestArgs {
    /// Pattern CSV with header `x,y,mark` (`-` for stdin).
    input: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    settings: TestSettingsArgs,
    /// H1, H2, H3, H1L, H2L, H3L or `sequential` (default).
    #[arg(long, value_parser = parse_hypothesis_arg)]
    hypothesis: Option<HypothesisArg>,
    /// Run the local version of the hypothesis (H1L when none is given).
    #[arg(long)]
    local: bool,
    /// Directory for curve CSVs and a JSON manifest.
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Per-point CSV (x, y, mark, t, p, reject) for local tests.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    settings: TestSettingsArgs,
    #[arg(long, value_parser = parse_hypothesis)]
    hypothesis: Option<Hypothesis>,
    /// Simulated datasets per cell.
    #[arg(short = 'R', long)]
    replicates: Option<usize>,
    #[arg(long)]
    expected_n: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Append the result rows to this CSV table.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Run every cell of the experiment grid.
    #[arg(long)]
    full_table: bool,
    /// Record wall times (outputs are then no longer byte-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct KsArgs {
    /// CSV with a binary group column and numeric variable columns.
    input: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
    /// Name of the grouping column.
    #[arg(long)]
    group: Option<String>,
    /// Comma-separated variable columns.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
