//! TOML documents describing scenarios and sweeps.
//!
//! Scenario:
//!
//! ```toml
//! order = 3
//! beta = 0.5                 # relative noise level in [0, 1]
//! samples = 1024
//! seed = 7                   # optional, default 0
//! correlation = "uncorrelated"   # or "identical"; optional
//! sample_rate = 48000        # optional, used for WAV output and frame times
//! diffuse_only = false       # optional; with beta = 1, ignore sources
//!
//! [[sources]]
//! azimuth_deg = 0.0
//! elevation_deg = 0.0
//! power = 1.0                # optional, default 1
//! ```
//!
//! Sweep (`experiment = "sweep"` or `"transition"`); every other key is
//! optional and defaults to the standard experiment axes:
//!
//! ```toml
//! experiment = "sweep"
//! estimators = ["comedie", "dirac", "thiele_gover"]
//! orders = [1, 2, 3]
//! q_values = [1, 2, 4, 8]
//! beta_values = [0.0, 0.5, 1.0]
//! correlation = "uncorrelated"
//! covariance_mode = "empirical"  # or "analytic"
//! samples = 1024
//! seeds = 10
//! base_seed = 0
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::experiments::{default_beta_axis, CovarianceMode, SweepSpec};
use crate::field_sim::{Correlation, ScenarioConfig, Source};
use crate::io::DEFAULT_SAMPLE_RATE;
use crate::sh_math::Direction;

fn default_power() -> f64 {
    1.0
}

fn default_rate() -> u32 {
    DEFAULT_SAMPLE_RATE
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    #[serde(default = "default_power")]
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub order: usize,
    pub beta: f64,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub correlation: Correlation,
    #[serde(default = "default_rate")]
    pub sample_rate: u32,
    #[serde(default, skip_serializing_if = "is_false")]
    pub diffuse_only: bool,
    #[serde(default)]
    pub sources: Vec<SourceEntry>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents always serialize")
    }

    pub fn from_scenario(config: &ScenarioConfig, sample_rate: u32) -> Self {
        Self {
            order: config.order,
            beta: config.beta,
            samples: config.samples,
            seed: config.seed,
            correlation: config.correlation,
            sample_rate,
            diffuse_only: config.diffuse_only,
            sources: config
                .sources
                .iter()
                .map(|s| SourceEntry {
                    azimuth_deg: s.direction.azimuth().to_degrees(),
                    elevation_deg: s.direction.elevation().to_degrees(),
                    power: s.power,
                })
                .collect(),
        }
    }

    /// Validated scenario.
    pub fn to_scenario(&self) -> Result<ScenarioConfig> {
        if self.sample_rate == 0 {
            return Err(Error::config("sample_rate", "must be positive"));
        }
        let mut sources = Vec::with_capacity(self.sources.len());
        for (i, s) in self.sources.iter().enumerate() {
            if !s.azimuth_deg.is_finite() {
                return Err(Error::config(
                    format!("sources[{i}].azimuth_deg"),
                    "must be finite",
                ));
            }
            if !(s.elevation_deg.is_finite() && s.elevation_deg.abs() <= 90.0) {
                return Err(Error::config(
                    format!("sources[{i}].elevation_deg"),
                    format!("must lie in [-90, 90], got {}", s.elevation_deg),
                ));
            }
            sources.push(Source {
                direction: Direction::from_degrees(s.azimuth_deg, s.elevation_deg),
                power: s.power,
            });
        }
        let config = ScenarioConfig {
            order: self.order,
            sources,
            correlation: self.correlation,
            beta: self.beta,
            samples: self.samples,
            seed: self.seed,
            diffuse_only: self.diffuse_only,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sweep,
    Transition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub experiment: ExperimentKind,
    pub estimators: Option<Vec<Estimator>>,
    pub orders: Option<Vec<usize>>,
    pub q_values: Option<Vec<usize>>,
    pub beta_values: Option<Vec<f64>>,
    pub correlation: Option<Correlation>,
    pub covariance_mode: Option<CovarianceMode>,
    pub samples: Option<usize>,
    pub seeds: Option<usize>,
    pub base_seed: Option<u64>,
}

/// Transition experiment axes.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSpec {
    pub orders: Vec<usize>,
    pub q_values: Vec<usize>,
    pub samples: usize,
    pub seeds: usize,
    pub base_seed: u64,
}

impl Default for TransitionSpec {
    fn default() -> Self {
        Self {
            orders: vec![1, 2, 3, 4],
            q_values: (1..=36).collect(),
            samples: 1024,
            seeds: 10,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentPlan {
    Sweep(SweepSpec),
    Transition(TransitionSpec),
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_plan(&self) -> Result<ExperimentPlan> {
        match self.experiment {
            ExperimentKind::Sweep => {
                let d = SweepSpec::default();
                Ok(ExperimentPlan::Sweep(SweepSpec {
                    estimators: self.estimators.clone().unwrap_or(d.estimators),
                    orders: self.orders.clone().unwrap_or(d.orders),
                    q_values: self.q_values.clone().unwrap_or(d.q_values),
                    beta_values: self.beta_values.clone().unwrap_or_else(default_beta_axis),
                    correlation: self.correlation.unwrap_or(d.correlation),
                    samples: self.samples.unwrap_or(d.samples),
                    seeds: self.seeds.unwrap_or(d.seeds),
                    covariance_mode: self.covariance_mode.unwrap_or(d.covariance_mode),
                    base_seed: self.base_seed.unwrap_or(d.base_seed),
                }))
            }
            ExperimentKind::Transition => {
                let not_applicable = [
                    ("estimators", self.estimators.is_some()),
                    ("beta_values", self.beta_values.is_some()),
                    ("correlation", self.correlation.is_some()),
                    ("covariance_mode", self.covariance_mode.is_some()),
                ];
                if let Some((field, _)) = not_applicable.iter().find(|(_, set)| *set) {
                    return Err(Error::config(
                        *field,
                        "does not apply to experiment = \"transition\"",
                    ));
                }
                let d = TransitionSpec::default();
                Ok(ExperimentPlan::Transition(TransitionSpec {
                    orders: self.orders.clone().unwrap_or(d.orders),
                    q_values: self.q_values.clone().unwrap_or(d.q_values),
                    samples: self.samples.unwrap_or(d.samples),
                    seeds: self.seeds.unwrap_or(d.seeds),
                    base_seed: self.base_seed.unwrap_or(d.base_seed),
                }))
            }
        }
    }
}
