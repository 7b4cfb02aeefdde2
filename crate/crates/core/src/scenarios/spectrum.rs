//! Secondary users sharing channels, one of which carries a primary user.
//!
//! Hypothesis `H_l` means channel `l` is occupied. Every user senses all `K`
//! channels; the signal is the `K`-bit vector with bit `j` set when activity
//! was detected on channel `j`. Users on the same free channel split the
//! slot time; the occupied channel yields nothing.

use serde::Serialize;

use super::{as_count, check_probability, unknown_param, ScenarioMetricsSpec};
use crate::error::ConfigError;
use crate::harness::EpisodeOutcome;
use crate::model::ScenarioModel;

pub const MAX_CHANNELS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumConfig {
    /// Channels.
    pub k: usize,
    /// Secondary users.
    pub n: usize,
    /// Slot time in milliseconds.
    pub t: f64,
    /// False-alarm probability on a free channel.
    pub p_f: f64,
    /// Miss-detection probability on the occupied channel.
    pub p_m: f64,
    /// Degraded factor: `Q_j = 1 - (j - 1) d` unless `q` is given.
    pub d: f64,
    /// Explicit channel qualities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            k: 3,
            n: 7,
            t: 100.0,
            p_f: 0.1,
            p_m: 0.1,
            d: 0.1,
            q: None,
        }
    }
}

impl SpectrumConfig {
    pub fn qualities(&self) -> Vec<f64> {
        match &self.q {
            Some(q) => q.clone(),
            None => (0..self.k).map(|j| 1.0 - j as f64 * self.d).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 || self.k > MAX_CHANNELS {
            return Err(ConfigError::invalid(
                "k",
                format!("must be in 1..={MAX_CHANNELS}"),
            ));
        }
        if self.n == 0 {
            return Err(ConfigError::invalid("n", "must be positive"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(ConfigError::invalid("t", "must be positive"));
        }
        check_probability("p_f", self.p_f)?;
        check_probability("p_m", self.p_m)?;
        if let Some(q) = &self.q {
            if q.len() != self.k {
                return Err(ConfigError::invalid(
                    "q",
                    format!("expected {} qualities", self.k),
                ));
            }
        } else if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(ConfigError::invalid("d", "must be non-negative"));
        }
        let key = if self.q.is_some() { "q" } else { "d" };
        // The degraded-factor grid ends at d = 0.5, where the third channel's
        // quality is exactly 0, so zero is allowed.
        if self
            .qualities()
            .iter()
            .any(|&q| !(q >= 0.0 && q.is_finite()))
        {
            return Err(ConfigError::invalid(
                key,
                "channel qualities must be non-negative",
            ));
        }
        Ok(())
    }

    pub(crate) fn with_param(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let mut next = self.clone();
        match name {
            "k" => next.k = as_count(name, value)?,
            "n" => next.n = as_count(name, value)?,
            "t" => next.t = value,
            "p_f" => next.p_f = value,
            "p_m" => next.p_m = value,
            "d" if self.q.is_some() => {
                return Err(ConfigError::invalid("d", "cannot sweep d with explicit q"))
            }
            "d" => next.d = value,
            _ => return Err(unknown_param(name, "spectrum")),
        }
        Ok(next)
    }
}

/// `Pr(s | H_occupied) = p_m^{1-s_occ} (1-p_m)^{s_occ} Π_{k≠occ} p_f^{s_k} (1-p_f)^{1-s_k}`.
pub fn sensing_likelihood(signal: usize, occupied: usize, cfg: &SpectrumConfig) -> f64 {
    (0..cfg.k)
        .map(|j| {
            let detected = signal >> j & 1 == 1;
            match (j == occupied, detected) {
                (true, true) => 1.0 - cfg.p_m,
                (true, false) => cfg.p_m,
                (false, true) => cfg.p_f,
                (false, false) => 1.0 - cfg.p_f,
            }
        })
        .product()
}

/// Sensing vector with bit `j` set for each channel in `detected`.
pub fn sensing_vector(detected: &[usize]) -> usize {
    detected.iter().fold(0, |acc, j| acc | 1 << j)
}

/// `Q_j R_j(H_l) / n` with `R_j(H_l) = 0` on the occupied channel and `T`
/// elsewhere.
pub fn channel_utility(cfg: &SpectrumConfig, occupied: usize, channel: usize, users: usize) -> f64 {
    if channel == occupied {
        0.0
    } else {
        cfg.qualities()[channel] * cfg.t / users as f64
    }
}

pub fn build_spectrum(cfg: &SpectrumConfig) -> Result<ScenarioModel, ConfigError> {
    cfg.validate()?;
    let q = cfg.qualities();
    let k = cfg.k;
    let labels = (0..1usize << k)
        .map(|s| {
            (0..k)
                .map(|j| if s >> j & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect();
    let model = ScenarioModel::builder(k, k, cfg.n)
        .name("spectrum")
        .prior(vec![1.0 / k as f64; k])
        .signals(1 << k, |s, l| sensing_likelihood(s, l, cfg))
        .utility(|l, j, n| if j == l { 0.0 } else { q[j] * cfg.t / n as f64 })
        .resource_value(|l, j| if j == l { 0.0 } else { q[j] * cfg.t })
        .signal_labels(labels)
        .metrics(ScenarioMetricsSpec::Interference)
        .build()
        .map_err(|e| ConfigError::invalid("params", e.to_string()))?;
    Ok(model)
}

/// Number of users whose channel is the occupied one.
pub fn spectrum_interference_count(outcome: &EpisodeOutcome, occupied: usize) -> usize {
    outcome.choices.iter().filter(|&&c| c == occupied).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::signal_choice;

    #[test]
    fn sensing_probabilities() {
        let cfg = SpectrumConfig::default();
        let s = sensing_vector(&[0]);
        assert!((sensing_likelihood(s, 0, &cfg) - 0.729).abs() < 1e-15);
        assert!((sensing_likelihood(s, 1, &cfg) - 0.009).abs() < 1e-15);
        let model = build_spectrum(&cfg).unwrap();
        for l in 0..3 {
            let total: f64 = (0..8).map(|s| model.likelihood(s, l)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert_eq!(model.signal_label(s), "100");
    }

    #[test]
    fn shared_slot_utility() {
        let cfg = SpectrumConfig {
            q: Some(vec![1.0, 0.8, 0.6]),
            ..SpectrumConfig::default()
        };
        assert_eq!(channel_utility(&cfg, 0, 1, 2), 40.0);
        let model = build_spectrum(&cfg).unwrap();
        assert_eq!(model.utility(0, 1, 2), 40.0);
        for n in 1..=cfg.n {
            assert_eq!(model.utility(2, 2, n), 0.0);
        }
    }

    #[test]
    fn activity_on_first_channel_sends_signal_users_to_the_next_best() {
        for d in [0.05, 0.2, 0.45] {
            let cfg = SpectrumConfig {
                d,
                ..SpectrumConfig::default()
            };
            let model = build_spectrum(&cfg).unwrap();
            assert_eq!(signal_choice(sensing_vector(&[0]), &model), 1);
        }
    }

    #[test]
    fn validation_names_fields() {
        let bad = SpectrumConfig {
            p_f: 1.5,
            ..SpectrumConfig::default()
        };
        assert_eq!(bad.validate().unwrap_err().key(), Some("p_f"));
        let bad = SpectrumConfig {
            d: 0.6,
            ..SpectrumConfig::default()
        };
        assert_eq!(bad.validate().unwrap_err().key(), Some("d"));
        let bad = SpectrumConfig {
            t: 0.0,
            ..SpectrumConfig::default()
        };
        assert_eq!(bad.validate().unwrap_err().key(), Some("t"));
    }
}
