//! Config-driven experiments: parse, run, write CSV tables and a manifest.

pub mod config;
pub mod output;
pub mod presets;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::harness::{run_sweep, SeedMode, SweepAxis, SweepError, SweepPoint, SweepSpec};
use crate::scenarios::ScenarioConfig;
use crate::strategy::StrategyKind;

pub use config::{parse_config, DEFAULT_TRIALS};
pub use output::fmt_num;
pub use presets::{list_presets, preset, PRESETS};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    /// One axis for `sweep`, two for `sweep2d`.
    pub axes: Vec<SweepAxis>,
    pub seed_mode: SeedMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub strategies: Vec<StrategyKind>,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<SweepBlock>,
    /// Output path prefix.
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            base: self.scenario.clone(),
            axes: self
                .sweep
                .as_ref()
                .map(|s| s.axes.clone())
                .unwrap_or_default(),
            kinds: self.strategies.clone(),
            trials: self.trials,
            seed: self.seed,
            seed_mode: self.sweep.as_ref().map(|s| s.seed_mode).unwrap_or_default(),
        }
    }

    /// The config as JSON that [`parse_config`] reads back to an equal
    /// config, minus the output prefix.
    pub fn to_json(&self) -> Value {
        let mut obj = json!({
            "scenario": self.scenario.kind(),
            "params": serde_json::to_value(&self.scenario).expect("serializable"),
            "strategies": self.strategies.iter().map(|k| k.as_str()).collect::<Vec<_>>(),
            "trials": self.trials,
            "seed": self.seed,
        });
        if let Some(sweep) = &self.sweep {
            let common = sweep.seed_mode == SeedMode::Common;
            let (key, block) = match sweep.axes.as_slice() {
                [a] => (
                    "sweep",
                    json!({"param": a.param, "values": a.values, "common_seeds": common}),
                ),
                [a, b] => (
                    "sweep2d",
                    json!({
                        "param_a": a.param, "values_a": a.values,
                        "param_b": b.param, "values_b": b.values,
                        "common_seeds": common,
                    }),
                ),
                _ => unreachable!("sweeps have one or two axes"),
            };
            obj[key] = block;
        }
        obj
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Run(#[from] SweepError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Rendered result files.
#[derive(Debug, Clone, PartialEq)]
pub struct Tables {
    pub utilities: String,
    pub metrics: String,
    pub manifest: String,
}

/// Runs the experiment and renders its tables without touching disk.
pub fn render(cfg: &ExperimentConfig) -> Result<Tables, SweepError> {
    let spec = cfg.sweep_spec();
    let points: Vec<SweepPoint> = run_sweep(&spec)?;
    let params: Vec<String> = spec.axes.iter().map(|a| a.param.clone()).collect();
    let manifest = json!({
        "tool": "crg",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_json(),
        "seed": cfg.seed,
        "trials_per_point": cfg.trials,
        "grid_points": points.len(),
        "seed_mode": spec.seed_mode,
        "point_seeds": points.iter().map(|p| p.point.seed).collect::<Vec<_>>(),
    });
    Ok(Tables {
        utilities: output::utilities_csv(&params, &points),
        metrics: output::metrics_csv(&params, &points),
        manifest: serde_json::to_string_pretty(&manifest).expect("serializable") + "\n",
    })
}

/// Paths written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub utilities: PathBuf,
    pub metrics: PathBuf,
    pub manifest: PathBuf,
}

impl OutputFiles {
    pub fn for_prefix(prefix: &str) -> Self {
        OutputFiles {
            utilities: PathBuf::from(format!("{prefix}-utilities.csv")),
            metrics: PathBuf::from(format!("{prefix}-metrics.csv")),
            manifest: PathBuf::from(format!("{prefix}-manifest.json")),
        }
    }
}

/// Runs `cfg` and writes `<prefix>-utilities.csv`, `<prefix>-metrics.csv`
/// and `<prefix>-manifest.json`. Nothing is written unless every run
/// succeeds; a failed write removes whatever was already written.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    prefix: &str,
) -> Result<OutputFiles, ExperimentError> {
    let tables = render(cfg)?;
    let files = OutputFiles::for_prefix(prefix);
    let jobs = [
        (&files.utilities, &tables.utilities),
        (&files.metrics, &tables.metrics),
        (&files.manifest, &tables.manifest),
    ];
    let mut written: Vec<&Path> = Vec::new();
    for (path, body) in jobs {
        if let Err(source) = write_file(path, body) {
            for p in written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(path);
            return Err(ExperimentError::Io {
                path: path.clone(),
                source,
            });
        }
        written.push(path);
    }
    Ok(files)
}

fn write_file(path: &Path, body: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)
}
