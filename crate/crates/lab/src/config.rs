//! Experiment configuration: one JSON document per experiment.

use std::fmt;
use std::path::{Path, PathBuf};

use polarlab_core::sampling::SamplerSpec;
use polarlab_core::Mode;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, LabError, Result};
use crate::shapes::Initial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    ConvPolar,
    RateUniform,
    RecursionAudit,
    LowerCone,
    LowerEllipsoid,
    NonconvCone,
    NonconvSteiner,
    SteinerRate,
    CompactHausdorff,
    OrbitDensity,
    DivergenceAudit,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 11] = [
        ExperimentName::ConvPolar,
        ExperimentName::RateUniform,
        ExperimentName::RecursionAudit,
        ExperimentName::LowerCone,
        ExperimentName::LowerEllipsoid,
        ExperimentName::NonconvCone,
        ExperimentName::NonconvSteiner,
        ExperimentName::SteinerRate,
        ExperimentName::CompactHausdorff,
        ExperimentName::OrbitDensity,
        ExperimentName::DivergenceAudit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::ConvPolar => "conv-polar",
            ExperimentName::RateUniform => "rate-uniform",
            ExperimentName::RecursionAudit => "recursion-audit",
            ExperimentName::LowerCone => "lower-cone",
            ExperimentName::LowerEllipsoid => "lower-ellipsoid",
            ExperimentName::NonconvCone => "nonconv-cone",
            ExperimentName::NonconvSteiner => "nonconv-steiner",
            ExperimentName::SteinerRate => "steiner-rate",
            ExperimentName::CompactHausdorff => "compact-hausdorff",
            ExperimentName::OrbitDensity => "orbit-density",
            ExperimentName::DivergenceAudit => "divergence-audit",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentName::ConvPolar => "random polarizations of a grid function converge to f* in sup norm",
            ExperimentName::RateUniform => "uniform polarizations: L1 / symmetric-difference rate 1/n and Hölder sup rate",
            ExperimentName::RecursionAudit => "z_n = E m(A_n △ A*)/C obeys z_n ≤ z_(n−1)(1 − z_(n−1))",
            ExperimentName::LowerCone => "cone under symmetric random polarizations converges no faster than 2^(−n)",
            ExperimentName::LowerEllipsoid => "ellipsoid under uniform Steiner symmetrizations converges no faster than 3^(−n)",
            ExperimentName::NonconvCone => "adversarial dense polarization sequence that keeps the cone apex away from o",
            ExperimentName::NonconvSteiner => "adversarial dense Steiner sequence that keeps the eigenvalue gap open",
            ExperimentName::SteinerRate => "uniform Steiner symmetrizations of a grid function: L1 rate 1/n",
            ExperimentName::CompactHausdorff => "Hausdorff convergence of a compact set and of its boundary",
            ExperimentName::OrbitDensity => "orbit of a direction under the folding maps of a finite set G",
            ExperimentName::DivergenceAudit => "partial sums of the Gaussian / Poisson-kernel divergence lower bounds",
        }
    }

    /// Whether the experiment evolves a lattice representation.
    pub fn needs_grid(self) -> bool {
        matches!(
            self,
            ExperimentName::ConvPolar
                | ExperimentName::RateUniform
                | ExperimentName::RecursionAudit
                | ExperimentName::SteinerRate
                | ExperimentName::CompactHausdorff
        )
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub half_width: f64,
    pub cells: usize,
}

/// Which steps produce a result row. Step 0 and the last step are always
/// included, except with an explicit `at` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Record {
    /// Roughly this many log-spaced steps per decade.
    Log(u32),
    Every(u64),
    At(Vec<u64>),
}

impl Default for Record {
    fn default() -> Self {
        Record::Log(10)
    }
}

impl Record {
    /// Sorted, deduplicated steps in `0..=steps`.
    pub fn steps(&self, steps: u64) -> Vec<u64> {
        let mut out: Vec<u64> = match self {
            Record::Log(per_decade) => {
                let per = (*per_decade).max(1) as f64;
                let mut v = vec![0, steps];
                let mut k = 0.0;
                loop {
                    let s = 10f64.powf(k / per).round() as u64;
                    if s > steps {
                        break;
                    }
                    v.push(s);
                    k += 1.0;
                }
                v
            }
            Record::Every(e) => {
                let e = (*e).max(1);
                let mut v: Vec<u64> = (0..=steps).step_by(e as usize).collect();
                v.push(steps);
                v
            }
            Record::At(list) => list.iter().copied().filter(|&s| s <= steps).collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Tolerances used by the embedded checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Monte Carlo slack in standard errors.
    pub sigmas: f64,
    /// Discretization allowance in units of the cell spacing.
    pub h_factor: f64,
    /// Slack of the monotonicity audit.
    pub monotone: f64,
    /// Absolute slack of the adversarial gap audit.
    pub gap: f64,
    /// Experiment-specific target (sup distance, Hausdorff distance in
    /// cells, covering radius or partial-sum threshold).
    pub target: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigmas: 3.0,
            h_factor: 5.0,
            monotone: 1e-12,
            gap: 1e-9,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputParams {
    pub dir: PathBuf,
    /// File stem; the experiment name when absent.
    pub stem: Option<String>,
    /// Log-scaled axes in the chart.
    pub log_log: bool,
}

impl Default for OutputParams {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            stem: None,
            log_log: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitParams {
    pub start: Vec<f64>,
    pub budgets: Vec<usize>,
    pub probes: usize,
    pub max_denominator: u64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            start: Vec::new(),
            budgets: vec![100, 1_000, 10_000, 100_000],
            probes: 20_000,
            max_denominator: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DivergenceParams {
    pub rho: f64,
    pub half_width: f64,
}

impl Default for DivergenceParams {
    fn default() -> Self {
        Self {
            rho: 0.5,
            half_width: 1.0,
        }
    }
}

fn default_one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Initial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub steps: u64,
    #[serde(default = "default_one")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub record: Record,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputParams,
    #[serde(default)]
    pub orbit: OrbitParams,
    #[serde(default)]
    pub divergence: DivergenceParams,
}

fn default_mode() -> Mode {
    Mode::Interp
}

impl ExperimentConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(experiment: ExperimentName, dim: usize, steps: u64, trials: u64) -> Self {
        Self {
            experiment,
            dim,
            grid: None,
            initial: None,
            sampler: None,
            mode: default_mode(),
            steps,
            trials,
            seed: 0,
            record: Record::default(),
            tolerances: Tolerances::default(),
            output: OutputParams::default(),
            orbit: OrbitParams::default(),
            divergence: DivergenceParams::default(),
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.to_owned(),
            source,
        })?;
        let cfg = Self::from_json(&text).map_err(|source| LabError::Parse {
            path: path.to_owned(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn stem(&self) -> String {
        self.output
            .stem
            .clone()
            .unwrap_or_else(|| self.experiment.as_str().to_owned())
    }

    /// Checks that do not depend on the experiment logic.
    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.dim) {
            return config_err(format!("dim must be in 1..=8, got {}", self.dim));
        }
        if self.steps == 0 {
            return config_err("steps must be at least 1");
        }
        if self.trials == 0 {
            return config_err("trials must be at least 1");
        }
        let t = &self.tolerances;
        if !(t.sigmas >= 0.0 && t.h_factor >= 0.0 && t.monotone >= 0.0 && t.gap >= 0.0) {
            return config_err("tolerances must be nonnegative");
        }
        if self.experiment.needs_grid() && self.grid.is_none() {
            return config_err(format!("{} needs a grid", self.experiment));
        }
        if let Some(g) = &self.grid {
            polarlab_core::Lattice::new(self.dim, g.half_width, g.cells)?;
        }
        if let Some(s) = &self.sampler {
            s.validate(self.dim)?;
        }
        if let Some(init) = &self.initial {
            init.validate(self.dim)?;
        }
        Ok(())
    }
}
