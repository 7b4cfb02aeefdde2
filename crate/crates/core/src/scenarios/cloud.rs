//! Subscribers choosing between two storage platforms, one of which runs
//! upgraded infrastructure.
//!
//! State 0: platform A is the high-reliability one; state 1: platform B.
//! Signal 0 is a rumor favoring A, signal 1 one favoring B.

use serde::Serialize;

use super::{as_count, check_probability, unknown_param, ScenarioMetricsSpec};
use crate::error::ConfigError;
use crate::harness::EpisodeOutcome;
use crate::model::ScenarioModel;

pub const PLATFORM_A: usize = 0;
pub const PLATFORM_B: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudConfig {
    pub n: usize,
    /// Crash probability per subscriber on the upgraded platform.
    pub p_h: f64,
    /// Crash probability per subscriber on the other platform.
    pub p_l: f64,
    /// Probability a rumor points at the upgraded platform.
    pub p: f64,
    /// Prior that platform A is the upgraded one.
    pub g_0: f64,
}

impl Default for CloudConfig {
    fn default() -> Self {
        CloudConfig {
            n: 10,
            p_h: 0.0001,
            p_l: 0.0005,
            p: 0.7,
            g_0: 0.5,
        }
    }
}

impl CloudConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::invalid("n", "must be positive"));
        }
        check_probability("p_h", self.p_h)?;
        check_probability("p_l", self.p_l)?;
        check_probability("p", self.p)?;
        check_probability("g_0", self.g_0)?;
        if self.p_l <= self.p_h {
            return Err(ConfigError::invalid("p_l", "must exceed p_h"));
        }
        Ok(())
    }

    /// Per-subscriber crash probability of `platform` in `state`.
    pub fn crash_probability(&self, state: usize, platform: usize) -> f64 {
        if state == platform {
            self.p_h
        } else {
            self.p_l
        }
    }

    /// Availability `(1 - p_x)^n`; 1 for an empty platform.
    pub fn utility(&self, state: usize, platform: usize, subscribers: usize) -> f64 {
        (1.0 - self.crash_probability(state, platform)).powi(subscribers as i32)
    }

    pub(crate) fn with_param(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let mut next = self.clone();
        match name {
            "n" => next.n = as_count(name, value)?,
            "p_h" => next.p_h = value,
            "p_l" => next.p_l = value,
            "p" => next.p = value,
            "g_0" => next.g_0 = value,
            _ => return Err(unknown_param(name, "cloud")),
        }
        Ok(next)
    }
}

/// `f(s = x | H_x = H_h) = p`, `f(s = x | H_x = H_l) = 1 - p`.
pub fn rumor_likelihood(rumor: usize, state: usize, cfg: &CloudConfig) -> f64 {
    if rumor == state {
        cfg.p
    } else {
        1.0 - cfg.p
    }
}

pub fn build_cloud(cfg: &CloudConfig) -> Result<ScenarioModel, ConfigError> {
    cfg.validate()?;
    let crash = (0..2)
        .flat_map(|l| (0..2).map(move |x| (l, x)))
        .map(|(l, x)| cfg.crash_probability(l, x))
        .collect();
    ScenarioModel::builder(2, 2, cfg.n)
        .name("cloud")
        .prior(vec![cfg.g_0, 1.0 - cfg.g_0])
        .signals(2, |s, l| rumor_likelihood(s, l, cfg))
        .utility(|l, x, n| cfg.utility(l, x, n))
        .resource_value(|l, x| 1.0 - cfg.crash_probability(l, x))
        .signal_labels(vec!["A".into(), "B".into()])
        .metrics(ScenarioMetricsSpec::Reliability {
            crash,
            high_platform: vec![PLATFORM_A, PLATFORM_B],
        })
        .build()
        .map_err(|e| ConfigError::invalid("params", e.to_string()))
}

/// Availability of platforms A and B at the end of an episode.
pub fn cloud_reliability(outcome: &EpisodeOutcome, cfg: &CloudConfig) -> [f64; 2] {
    let n = outcome.grouping.counts();
    [
        cfg.utility(outcome.state, PLATFORM_A, n[PLATFORM_A] as usize),
        cfg.utility(outcome.state, PLATFORM_B, n[PLATFORM_B] as usize),
    ]
}
