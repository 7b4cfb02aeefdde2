//! Strict JSON experiment configs.
//!
//! ```json
//! {
//!   "scenario": "spectrum",
//!   "params": { "d": 0.2 },
//!   "strategies": ["myopic", "best_response"],
//!   "trials": 10000,
//!   "seed": 7,
//!   "sweep": { "param": "d", "values": [0.05, 0.1], "common_seeds": false }
//! }
//! ```
//!
//! Every key is checked; unknown keys and out-of-domain values are errors
//! naming the key.

use serde_json::{Map, Value};

use super::{ExperimentConfig, SweepBlock};
use crate::error::ConfigError;
use crate::harness::{SeedMode, SweepAxis};
use crate::scenarios::{CloudConfig, GrouponConfig, ScenarioConfig, SpectrumConfig, ValueFunction};
use crate::strategy::StrategyKind;

pub const DEFAULT_TRIALS: usize = 10_000;

const TOP_KEYS: &[&str] = &[
    "scenario",
    "params",
    "strategies",
    "trials",
    "seed",
    "out",
    "sweep",
    "sweep2d",
];

/// Parses and fully validates an experiment config, including every sweep
/// grid point.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let top = value
        .as_object()
        .ok_or_else(|| ConfigError::Parse("top level must be a JSON object".into()))?;
    check_keys(top, TOP_KEYS)?;

    let scenario_name = top
        .get("scenario")
        .ok_or_else(|| ConfigError::invalid("scenario", "missing"))?
        .as_str()
        .ok_or_else(|| ConfigError::invalid("scenario", "expected a string"))?;
    let empty = Map::new();
    let params = match top.get("params") {
        None => &empty,
        Some(v) => v
            .as_object()
            .ok_or_else(|| ConfigError::invalid("params", "expected an object"))?,
    };
    let scenario = match scenario_name {
        "spectrum" => ScenarioConfig::Spectrum(spectrum_params(params)?),
        "cloud" => ScenarioConfig::Cloud(cloud_params(params)?),
        "groupon" => ScenarioConfig::Groupon(groupon_params(params)?),
        other => {
            return Err(ConfigError::invalid(
                "scenario",
                format!("unknown scenario `{other}` (spectrum, cloud, groupon)"),
            ))
        }
    };
    scenario.validate()?;

    let strategies = match top.get("strategies") {
        None => StrategyKind::ALL.to_vec(),
        Some(v) => strategies(v)?,
    };
    let trials = match top.get("trials") {
        None => DEFAULT_TRIALS,
        Some(v) => positive_int("trials", v)?,
    };
    let seed = match top.get("seed") {
        None => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| ConfigError::invalid("seed", "expected a non-negative integer"))?,
    };
    let out = match top.get("out") {
        None => None,
        Some(v) => Some(
            v.as_str()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| ConfigError::invalid("out", "expected a non-empty string"))?
                .to_string(),
        ),
    };
    let sweep = match (top.get("sweep"), top.get("sweep2d")) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::invalid(
                "sweep2d",
                "give either sweep or sweep2d, not both",
            ))
        }
        (Some(v), None) => Some(sweep_1d(v)?),
        (None, Some(v)) => Some(sweep_2d(v)?),
        (None, None) => None,
    };

    let cfg = ExperimentConfig {
        scenario,
        strategies,
        trials,
        seed,
        sweep,
        out,
    };
    cfg.sweep_spec().grid()?;
    Ok(cfg)
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str]) -> Result<(), ConfigError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::invalid(
            k.as_str(),
            format!("unknown key; expected one of {}", allowed.join(", ")),
        )),
        None => Ok(()),
    }
}

fn number(key: &str, v: &Value) -> Result<f64, ConfigError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError::invalid(key, "expected a number"))
}

fn positive_int(key: &str, v: &Value) -> Result<usize, ConfigError> {
    match v.as_u64() {
        Some(n) if n >= 1 && n <= u32::MAX as u64 => Ok(n as usize),
        _ => Err(ConfigError::invalid(key, "expected a positive integer")),
    }
}

fn numbers(key: &str, v: &Value) -> Result<Vec<f64>, ConfigError> {
    v.as_array()
        .ok_or_else(|| ConfigError::invalid(key, "expected an array of numbers"))?
        .iter()
        .map(|x| number(key, x))
        .collect()
}

fn strategies(v: &Value) -> Result<Vec<StrategyKind>, ConfigError> {
    let items = v
        .as_array()
        .ok_or_else(|| ConfigError::invalid("strategies", "expected an array of names"))?;
    if items.is_empty() {
        return Err(ConfigError::invalid("strategies", "must not be empty"));
    }
    let mut kinds = Vec::with_capacity(items.len());
    for item in items {
        let kind: StrategyKind = item
            .as_str()
            .ok_or_else(|| ConfigError::invalid("strategies", "expected strategy names"))?
            .parse()
            .map_err(|e: String| ConfigError::invalid("strategies", e))?;
        if kinds.contains(&kind) {
            return Err(ConfigError::invalid(
                "strategies",
                format!("`{kind}` listed twice"),
            ));
        }
        kinds.push(kind);
    }
    Ok(kinds)
}

fn spectrum_params(p: &Map<String, Value>) -> Result<SpectrumConfig, ConfigError> {
    check_keys(p, &["k", "n", "t", "p_f", "p_m", "d", "q"])?;
    let mut c = SpectrumConfig::default();
    for (key, v) in p {
        match key.as_str() {
            "k" => c.k = positive_int(key, v)?,
            "n" => c.n = positive_int(key, v)?,
            "t" => c.t = number(key, v)?,
            "p_f" => c.p_f = number(key, v)?,
            "p_m" => c.p_m = number(key, v)?,
            "d" => c.d = number(key, v)?,
            "q" => c.q = Some(numbers(key, v)?),
            _ => unreachable!("keys checked"),
        }
    }
    Ok(c)
}

fn cloud_params(p: &Map<String, Value>) -> Result<CloudConfig, ConfigError> {
    check_keys(p, &["n", "p_h", "p_l", "p", "g_0"])?;
    let mut c = CloudConfig::default();
    for (key, v) in p {
        match key.as_str() {
            "n" => c.n = positive_int(key, v)?,
            "p_h" => c.p_h = number(key, v)?,
            "p_l" => c.p_l = number(key, v)?,
            "p" => c.p = number(key, v)?,
            "g_0" => c.g_0 = number(key, v)?,
            _ => unreachable!("keys checked"),
        }
    }
    Ok(c)
}

fn groupon_params(p: &Map<String, Value>) -> Result<GrouponConfig, ConfigError> {
    check_keys(
        p,
        &[
            "k",
            "n",
            "q_h",
            "q_l",
            "c",
            "d",
            "p",
            "prior_high",
            "value_function",
        ],
    )?;
    let mut c = GrouponConfig::default();
    if let Some(v) = p.get("k") {
        c.k = positive_int("k", v)?;
        if c.k > crate::scenarios::groupon::MAX_DEALS {
            return Err(ConfigError::invalid("k", "too many deals"));
        }
        c.c = vec![5.0; c.k];
        c.prior_high = vec![0.5; c.k];
    }
    for (key, v) in p {
        match key.as_str() {
            "k" => {}
            "n" => c.n = positive_int(key, v)?,
            "q_h" => c.q_h = number(key, v)?,
            "q_l" => c.q_l = number(key, v)?,
            "d" => c.d = number(key, v)?,
            "p" => c.p = number(key, v)?,
            // A single number applies to every deal.
            "c" => {
                c.c = if v.is_number() {
                    vec![number(key, v)?; c.k]
                } else {
                    numbers(key, v)?
                }
            }
            "prior_high" => {
                c.prior_high = if v.is_number() {
                    vec![number(key, v)?; c.k]
                } else {
                    numbers(key, v)?
                }
            }
            "value_function" => {
                c.value_function = v
                    .as_str()
                    .and_then(ValueFunction::parse)
                    .ok_or_else(|| ConfigError::invalid(key, "expected identity, sqrt or log"))?
            }
            _ => unreachable!("keys checked"),
        }
    }
    Ok(c)
}

fn param_name(key: &str, v: Option<&Value>) -> Result<String, ConfigError> {
    v.ok_or_else(|| ConfigError::invalid(key, "missing"))?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| ConfigError::invalid(key, "expected a parameter name"))
}

fn axis_values(key: &str, v: Option<&Value>) -> Result<Vec<f64>, ConfigError> {
    let values = numbers(key, v.ok_or_else(|| ConfigError::invalid(key, "missing"))?)?;
    if values.is_empty() {
        return Err(ConfigError::invalid(key, "must not be empty"));
    }
    Ok(values)
}

fn seed_mode(obj: &Map<String, Value>) -> Result<SeedMode, ConfigError> {
    match obj.get("common_seeds") {
        None => Ok(SeedMode::Independent),
        Some(Value::Bool(true)) => Ok(SeedMode::Common),
        Some(Value::Bool(false)) => Ok(SeedMode::Independent),
        Some(_) => Err(ConfigError::invalid(
            "common_seeds",
            "expected true or false",
        )),
    }
}

fn sweep_1d(v: &Value) -> Result<SweepBlock, ConfigError> {
    let obj = v
        .as_object()
        .ok_or_else(|| ConfigError::invalid("sweep", "expected an object"))?;
    check_keys(obj, &["param", "values", "common_seeds"])?;
    Ok(SweepBlock {
        axes: vec![SweepAxis {
            param: param_name("param", obj.get("param"))?,
            values: axis_values("values", obj.get("values"))?,
        }],
        seed_mode: seed_mode(obj)?,
    })
}

fn sweep_2d(v: &Value) -> Result<SweepBlock, ConfigError> {
    let obj = v
        .as_object()
        .ok_or_else(|| ConfigError::invalid("sweep2d", "expected an object"))?;
    check_keys(
        obj,
        &["param_a", "values_a", "param_b", "values_b", "common_seeds"],
    )?;
    let a = param_name("param_a", obj.get("param_a"))?;
    let b = param_name("param_b", obj.get("param_b"))?;
    if a == b {
        return Err(ConfigError::invalid("param_b", "must differ from param_a"));
    }
    Ok(SweepBlock {
        axes: vec![
            SweepAxis {
                param: a,
                values: axis_values("values_a", obj.get("values_a"))?,
            },
            SweepAxis {
                param: b,
                values: axis_values("values_b", obj.get("values_b"))?,
            },
        ],
        seed_mode: seed_mode(obj)?,
    })
}
