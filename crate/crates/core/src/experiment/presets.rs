//! Named experiments with the published parameterizations.

use super::config::DEFAULT_TRIALS;
use super::{ExperimentConfig, SweepBlock};
use crate::harness::{SeedMode, SweepAxis};
use crate::scenarios::{CloudConfig, GrouponConfig, ScenarioConfig, SpectrumConfig};
use crate::strategy::StrategyKind;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> ExperimentConfig,
}

impl Preset {
    pub fn config(&self) -> ExperimentConfig {
        (self.build)()
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "spectrum-fig3",
        description: "spectrum access, K=3 channels, N=7 users, T=100, p_f=p_m=0.1; all strategies over degraded factor d = 0.05..0.5",
        build: spectrum_fig3,
    },
    Preset {
        name: "cloud-fig5",
        description: "cloud storage, N=10, p_h=0.0001, p_l=0.0005; all strategies over rumor accuracy p = 0.55..0.95",
        build: cloud_fig5,
    },
    Preset {
        name: "cloud-fig6",
        description: "cloud storage, N=10, p_h=0.0001, p=0.7; all strategies over low-platform crash probability p_l = 0.0002..0.001",
        build: cloud_fig6,
    },
    Preset {
        name: "groupon-fig7",
        description: "deal selection, K=2, N=9, Q_h=30, d=2, c=5, p=0.7; all strategies over low quality Q_l = 10..28",
        build: groupon_fig7,
    },
    Preset {
        name: "groupon-pricing",
        description: "new-restaurant pricing, Q_h=25, Q_l=10, incumbent known high at price 10; best response over signal quality 0..0.5 x new price c = 1..20",
        build: groupon_pricing,
    },
];

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    PRESETS.iter().find(|p| p.name == name).map(Preset::config)
}

/// One line per preset: name, then description.
pub fn list_presets() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    PRESETS
        .iter()
        .map(|p| format!("{:width$}  {}\n", p.name, p.description))
        .collect()
}

// `start + i * step` for `i in 0..count`, rounded to 12 decimals so grid
// values print cleanly.
fn grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

fn sweep(param: &str, values: Vec<f64>) -> Option<SweepBlock> {
    Some(SweepBlock {
        axes: vec![SweepAxis {
            param: param.into(),
            values,
        }],
        seed_mode: SeedMode::Independent,
    })
}

fn all_strategies(scenario: ScenarioConfig, sweep: Option<SweepBlock>) -> ExperimentConfig {
    ExperimentConfig {
        scenario,
        strategies: StrategyKind::ALL.to_vec(),
        trials: DEFAULT_TRIALS,
        seed: 0,
        sweep,
        out: None,
    }
}

fn spectrum_fig3() -> ExperimentConfig {
    all_strategies(
        ScenarioConfig::Spectrum(SpectrumConfig::default()),
        sweep("d", grid(0.05, 0.05, 10)),
    )
}

fn cloud_fig5() -> ExperimentConfig {
    all_strategies(
        ScenarioConfig::Cloud(CloudConfig::default()),
        sweep("p", grid(0.55, 0.05, 9)),
    )
}

fn cloud_fig6() -> ExperimentConfig {
    all_strategies(
        ScenarioConfig::Cloud(CloudConfig::default()),
        sweep("p_l", grid(0.0002, 0.0001, 9)),
    )
}

fn groupon_fig7() -> ExperimentConfig {
    all_strategies(
        ScenarioConfig::Groupon(GrouponConfig::default()),
        sweep("q_l", grid(10.0, 2.0, 10)),
    )
}

fn groupon_pricing() -> ExperimentConfig {
    let base = GrouponConfig {
        q_h: 25.0,
        q_l: 10.0,
        c: vec![10.0, 10.0],
        prior_high: vec![1.0, 0.5],
        ..GrouponConfig::default()
    };
    ExperimentConfig {
        scenario: ScenarioConfig::Groupon(base),
        strategies: vec![StrategyKind::BestResponse],
        trials: DEFAULT_TRIALS,
        seed: 0,
        sweep: Some(SweepBlock {
            axes: vec![
                SweepAxis {
                    param: "signal_quality".into(),
                    values: grid(0.0, 0.05, 11),
                },
                SweepAxis {
                    param: "c_2".into(),
                    values: grid(1.0, 1.0, 20),
                },
            ],
            seed_mode: SeedMode::Common,
        }),
        out: None,
    }
}
