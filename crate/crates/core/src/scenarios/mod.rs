//! Concrete games: spectrum access, cloud platform selection, deal selection.

pub mod cloud;
pub mod groupon;
pub mod spectrum;

use serde::Serialize;

use crate::error::ConfigError;
use crate::model::ScenarioModel;

pub use cloud::{build_cloud, cloud_reliability, CloudConfig};
pub use groupon::{build_groupon, groupon_revenue, FactoredBelief, GrouponConfig, ValueFunction};
pub use spectrum::{build_spectrum, spectrum_interference_count, SpectrumConfig};

/// Which scenario-specific metrics an episode records, with the data needed
/// to compute them from the outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioMetricsSpec {
    None,
    /// State `l` means channel `l` carries the primary user.
    Interference,
    /// `crash[state * K + platform]` is the per-subscriber crash
    /// probability; `high_platform[state]` the upgraded platform.
    Reliability {
        crash: Vec<f64>,
        high_platform: Vec<usize>,
    },
    /// Deal prices and `high[state * K + deal]` quality flags.
    Revenue {
        prices: Vec<f64>,
        high: Vec<bool>,
    },
}

/// A validated scenario parameterization.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Spectrum(SpectrumConfig),
    Cloud(CloudConfig),
    Groupon(GrouponConfig),
}

impl ScenarioConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioConfig::Spectrum(_) => "spectrum",
            ScenarioConfig::Cloud(_) => "cloud",
            ScenarioConfig::Groupon(_) => "groupon",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            ScenarioConfig::Spectrum(c) => c.validate(),
            ScenarioConfig::Cloud(c) => c.validate(),
            ScenarioConfig::Groupon(c) => c.validate(),
        }
    }

    pub fn build(&self) -> Result<ScenarioModel, ConfigError> {
        match self {
            ScenarioConfig::Spectrum(c) => build_spectrum(c),
            ScenarioConfig::Cloud(c) => build_cloud(c),
            ScenarioConfig::Groupon(c) => build_groupon(c),
        }
    }

    pub fn num_agents(&self) -> usize {
        match self {
            ScenarioConfig::Spectrum(c) => c.n,
            ScenarioConfig::Cloud(c) => c.n,
            ScenarioConfig::Groupon(c) => c.n,
        }
    }

    /// Copy with one sweepable parameter replaced, validated.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let next = match self {
            ScenarioConfig::Spectrum(c) => ScenarioConfig::Spectrum(c.with_param(name, value)?),
            ScenarioConfig::Cloud(c) => ScenarioConfig::Cloud(c.with_param(name, value)?),
            ScenarioConfig::Groupon(c) => ScenarioConfig::Groupon(c.with_param(name, value)?),
        };
        next.validate()?;
        Ok(next)
    }
}

pub(crate) fn check_probability(key: &str, value: f64) -> Result<(), ConfigError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(ConfigError::invalid(
            key,
            format!("{value} is not in [0, 1]"),
        ));
    }
    Ok(())
}

pub(crate) fn as_count(key: &str, value: f64) -> Result<usize, ConfigError> {
    if value.fract() != 0.0 || !(1.0..=64.0).contains(&value) {
        return Err(ConfigError::invalid(
            key,
            format!("{value} is not an integer in 1..=64"),
        ));
    }
    Ok(value as usize)
}

pub(crate) fn unknown_param(name: &str, scenario: &str) -> ConfigError {
    ConfigError::invalid(name, format!("not a sweepable {scenario} parameter"))
}
