//! CSV rendering. Numbers carry 12 significant digits, formatted like C's
//! `%.12g`, so output is stable across platforms.

use std::fmt::Write as _;

use crate::harness::{GridPoint, RunMetrics, ScenarioMetrics, SweepPoint};
use crate::stats::MeanStat;

/// `%.12g`: fixed notation for exponents in `-4..12`, scientific
/// otherwise, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

fn header(point_params: &[String], rest: &[&str]) -> String {
    let mut cols: Vec<&str> = point_params.iter().map(String::as_str).collect();
    cols.extend_from_slice(rest);
    cols.join(",") + "\n"
}

fn prefix(point: &GridPoint) -> String {
    point.values.iter().map(|&v| fmt_num(v) + ",").collect()
}

fn stat(s: &MeanStat) -> String {
    format!("{},{}", fmt_num(s.mean), fmt_num(s.stderr))
}

/// `(params..., strategy, agent_index, mean_utility, stderr)`; agent rows
/// are 1-based, followed by an `all` row for the overall mean.
pub fn utilities_csv(params: &[String], points: &[SweepPoint]) -> String {
    let mut out = header(
        params,
        &["strategy", "agent_index", "mean_utility", "stderr"],
    );
    for p in points {
        let pre = prefix(&p.point);
        for (kind, m) in &p.metrics {
            for (i, s) in m.agent_utility.iter().enumerate() {
                let _ = writeln!(out, "{pre}{kind},{},{}", i + 1, stat(s));
            }
            let _ = writeln!(out, "{pre}{kind},all,{}", stat(&m.overall_utility));
        }
    }
    out
}

/// Scenario-specific metrics table; the columns depend on the scenario.
pub fn metrics_csv(params: &[String], points: &[SweepPoint]) -> String {
    let first = points
        .first()
        .and_then(|p| p.metrics.first())
        .map(|(_, m)| m);
    let cols: &[&str] = match first.map(|m| &m.scenario) {
        Some(ScenarioMetrics::Spectrum { .. }) => &["strategy", "mean_interference", "stderr"],
        Some(ScenarioMetrics::Cloud { .. }) => {
            &["strategy", "platform", "mean_reliability", "stderr"]
        }
        Some(ScenarioMetrics::Groupon { .. }) => &[
            "strategy",
            "deal",
            "quality",
            "trials",
            "mean_customers",
            "customers_stderr",
            "mean_revenue",
            "revenue_stderr",
        ],
        _ => &["strategy", "resource", "mean_load", "stderr"],
    };
    let mut out = header(params, cols);
    for p in points {
        let pre = prefix(&p.point);
        for (kind, m) in &p.metrics {
            metric_rows(&mut out, &format!("{pre}{kind}"), m);
        }
    }
    out
}

fn metric_rows(out: &mut String, pre: &str, m: &RunMetrics) {
    match &m.scenario {
        ScenarioMetrics::Spectrum { interference } => {
            let _ = writeln!(out, "{pre},{}", stat(interference));
        }
        ScenarioMetrics::Cloud {
            reliability_high,
            reliability_low,
        } => {
            let _ = writeln!(out, "{pre},high,{}", stat(reliability_high));
            let _ = writeln!(out, "{pre},low,{}", stat(reliability_low));
        }
        ScenarioMetrics::Groupon { deals } => {
            for (j, d) in deals.iter().enumerate() {
                let split = [
                    ("all", &d.customers.all, &d.revenue.all),
                    ("high", &d.customers.high, &d.revenue.high),
                    ("low", &d.customers.low, &d.revenue.low),
                ];
                for (quality, c, r) in split {
                    let _ = writeln!(
                        out,
                        "{pre},{},{quality},{},{},{}",
                        j + 1,
                        c.count,
                        stat(c),
                        stat(r)
                    );
                }
            }
        }
        ScenarioMetrics::None => {
            for (j, s) in m.resource_load.iter().enumerate() {
                let _ = writeln!(out, "{pre},{},{}", j + 1, stat(s));
            }
        }
    }
}
