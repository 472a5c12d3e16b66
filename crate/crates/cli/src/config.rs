//! Run configuration: defaults, TOML or JSON files, and command-line
//! overrides, merged into one effective config that is echoed into every
//! JSON output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use markedk::grid::{DEFAULT_GRID_POINTS, DEFAULT_RMAX_FRACTION};
use markedk::hypothesis::{DEFAULT_ALPHA, DEFAULT_REPLICATES};
use markedk::intensity::Bandwidth;
use markedk::simulate::{Generator, MarkScheme};
use markedk::{
    EdgeCorrection, Hypothesis, IntensitySetting, LocalNormalization, RGrid, ScenarioSpec,
    TestConfig, Window,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Pattern or table file read by `test` and `ks`.
    pub input: Option<PathBuf>,
    /// Observation window; the unit square when absent.
    pub window: Option<Window>,
    pub grid: GridConfig,
    pub test: TestSettings,
    /// Hypothesis to test; `None` runs the sequential procedure.
    pub hypothesis: Option<Hypothesis>,
    pub local: bool,
    pub scenario: Option<ScenarioConfig>,
    pub experiment: ExperimentConfig,
    pub ks: KsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            input: None,
            window: None,
            grid: GridConfig::default(),
            test: TestSettings::default(),
            hypothesis: None,
            local: false,
            scenario: None,
            experiment: ExperimentConfig::default(),
            ks: KsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    /// Largest distance; a quarter of the shorter window side when absent.
    pub rmax: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: DEFAULT_GRID_POINTS,
            rmax: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSettings {
    pub replicates: usize,
    pub alpha: f64,
    pub intensity: IntensitySetting,
    pub kappa_bandwidth: Bandwidth,
    pub edge_correction: EdgeCorrection,
    pub local_normalization: LocalNormalization,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            alpha: DEFAULT_ALPHA,
            intensity: IntensitySetting::Constant,
            kappa_bandwidth: Bandwidth::Auto,
            edge_correction: EdgeCorrection::Translation,
            local_normalization: LocalNormalization::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub generator: Generator,
    pub marks: MarkScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Simulated datasets per cell.
    pub replicates: usize,
    pub expected_n: f64,
    pub h: f64,
    pub full_table: bool,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            replicates: 100,
            expected_n: 50.0,
            h: 1.0,
            full_table: false,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KsConfig {
    pub group: Option<String>,
    pub variables: Vec<String>,
}

impl RunConfig {
    /// Read a TOML config, or a JSON output file whose `config` entry is
    /// replayed.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let is_json =
            path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("invalid JSON in {}", path.display()))?;
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value(value)
                .with_context(|| format!("invalid config in {}", path.display()))
        } else {
            toml::from_str(&text).with_context(|| format!("invalid config in {}", path.display()))
        }
    }

    pub fn window(&self) -> Window {
        self.window.unwrap_or_else(Window::unit_square)
    }

    pub fn rgrid(&self) -> anyhow::Result<RGrid> {
        let w = self.window();
        let rmax = self
            .grid
            .rmax
            .unwrap_or(DEFAULT_RMAX_FRACTION * w.min_side());
        Ok(RGrid::uniform(rmax, self.grid.points)?)
    }

    pub fn test_config(&self) -> anyhow::Result<TestConfig> {
        let mut cfg = TestConfig::new(self.rgrid()?, self.seed);
        cfg.replicates = self.test.replicates;
        cfg.alpha = self.test.alpha;
        cfg.intensity = self.test.intensity;
        cfg.kappa_bandwidth = self.test.kappa_bandwidth;
        cfg.edge_correction = self.test.edge_correction;
        cfg.local_normalization = self.test.local_normalization;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Explicit scenario when configured, otherwise the preset for
    /// `hypothesis` at the configured `expected_n` and `h`.
    pub fn scenario_for(&self, hypothesis: Hypothesis) -> anyhow::Result<ScenarioSpec> {
        let spec = match &self.scenario {
            Some(s) => ScenarioSpec::new(
                s.generator.clone(),
                s.marks.clone(),
                self.window(),
                self.seed,
            ),
            None => self.preset(hypothesis, self.experiment.expected_n),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn preset(&self, hypothesis: Hypothesis, expected_n: f64) -> ScenarioSpec {
        let mut spec = if hypothesis.is_local() {
            ScenarioSpec::local_preset(hypothesis, expected_n, self.seed)
        } else {
            ScenarioSpec::global_preset(hypothesis, expected_n, self.experiment.h, self.seed)
        };
        if let Some(w) = self.window {
            spec.window = w;
        }
        spec
    }

    pub fn require_input(&self) -> anyhow::Result<&Path> {
        self.input.as_deref().ok_or_else(|| {
            anyhow!("no input file given (pass a path or set `input` in the config)")
        })
    }
}

/// Parse `xmin,xmax,ymin,ymax`.
pub fn parse_window(s: &str) -> anyhow::Result<Window> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("--window expects xmin,xmax,ymin,ymax, got `{s}`");
    }
    let mut v = [0.0; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .parse()
            .with_context(|| format!("--window: `{p}` is not a number"))?;
    }
    Ok(Window::new(v[0], v[1], v[2], v[3])?)
}
