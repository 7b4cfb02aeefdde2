//! Customers choosing among discounted deals whose meal quality degrades
//! linearly with the number of buyers.
//!
//! Each deal's restaurant is independently high or low quality. The joint
//! state `l` has bit `j` set when restaurant `j` is high quality; a review
//! vector has bit `j` set when the review on restaurant `j` is positive.

use serde::Serialize;

use super::{as_count, check_probability, unknown_param, ScenarioMetricsSpec};
use crate::error::{ConfigError, GameError};
use crate::harness::EpisodeOutcome;
use crate::model::ScenarioModel;

pub const MAX_DEALS: usize = 6;

/// Value a customer places on meal quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ValueFunction {
    #[default]
    Identity,
    Sqrt,
    Log,
}

impl ValueFunction {
    pub fn apply(self, quality: f64) -> f64 {
        match self {
            ValueFunction::Identity => quality,
            ValueFunction::Sqrt => quality.sqrt(),
            ValueFunction::Log => quality.ln(),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(ValueFunction::Identity),
            "sqrt" => Some(ValueFunction::Sqrt),
            "log" => Some(ValueFunction::Log),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrouponConfig {
    /// Deals.
    pub k: usize,
    /// Customers.
    pub n: usize,
    pub q_h: f64,
    pub q_l: f64,
    /// Deal prices, one per deal.
    pub c: Vec<f64>,
    /// Crowd discount per customer.
    pub d: f64,
    /// Probability that a review matches the true quality.
    pub p: f64,
    /// Prior probability that each restaurant is high quality.
    pub prior_high: Vec<f64>,
    pub value_function: ValueFunction,
}

impl Default for GrouponConfig {
    fn default() -> Self {
        GrouponConfig {
            k: 2,
            n: 9,
            q_h: 30.0,
            q_l: 10.0,
            c: vec![5.0; 2],
            d: 2.0,
            p: 0.7,
            prior_high: vec![0.5; 2],
            value_function: ValueFunction::Identity,
        }
    }
}

impl GrouponConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 || self.k > MAX_DEALS {
            return Err(ConfigError::invalid(
                "k",
                format!("must be in 1..={MAX_DEALS}"),
            ));
        }
        if self.n == 0 {
            return Err(ConfigError::invalid("n", "must be positive"));
        }
        if !(self.q_h.is_finite() && self.q_l.is_finite()) || self.q_h <= self.q_l {
            return Err(ConfigError::invalid("q_h", "must exceed q_l"));
        }
        if self.value_function != ValueFunction::Identity && self.q_l <= 0.0 {
            return Err(ConfigError::invalid(
                "q_l",
                "must be positive for this value function",
            ));
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(ConfigError::invalid("d", "must be non-negative"));
        }
        check_probability("p", self.p)?;
        if self.c.len() != self.k {
            return Err(ConfigError::invalid(
                "c",
                format!("expected {} prices", self.k),
            ));
        }
        if self.c.iter().any(|c| !c.is_finite()) {
            return Err(ConfigError::invalid("c", "prices must be finite"));
        }
        if self.prior_high.len() != self.k {
            return Err(ConfigError::invalid(
                "prior_high",
                format!("expected {} entries", self.k),
            ));
        }
        for &g in &self.prior_high {
            check_probability("prior_high", g)?;
        }
        Ok(())
    }

    /// Quality of restaurant `deal` in joint state `state`.
    pub fn quality(&self, state: usize, deal: usize) -> f64 {
        if is_high(state, deal) {
            self.q_h
        } else {
            self.q_l
        }
    }

    /// `R(Q) - d n - c`.
    pub fn utility(&self, state: usize, deal: usize, customers: usize) -> f64 {
        self.value_function.apply(self.quality(state, deal))
            - self.d * customers as f64
            - self.c[deal]
    }

    /// Probability of one review on one restaurant.
    pub fn review_likelihood(&self, positive: bool, high: bool) -> f64 {
        if positive == high {
            self.p
        } else {
            1.0 - self.p
        }
    }

    pub(crate) fn with_param(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let mut next = self.clone();
        match name {
            "n" => next.n = as_count(name, value)?,
            "q_h" => next.q_h = value,
            "q_l" => next.q_l = value,
            "d" => next.d = value,
            "p" => next.p = value,
            "signal_quality" => {
                if !(0.0..=0.5).contains(&value) {
                    return Err(ConfigError::invalid(
                        name,
                        format!("{value} is not in [0, 0.5]"),
                    ));
                }
                next.p = 0.5 + value;
            }
            _ => {
                if let Some(j) = indexed(name, "c_", self.k) {
                    next.c[j] = value;
                } else if let Some(j) = indexed(name, "prior_high_", self.k) {
                    check_probability(name, value)?;
                    next.prior_high[j] = value;
                } else {
                    return Err(unknown_param(name, "groupon"));
                }
            }
        }
        Ok(next)
    }
}

// `c_2` -> Some(1) for 1-based deal indices.
fn indexed(name: &str, prefix: &str, k: usize) -> Option<usize> {
    let j: usize = name.strip_prefix(prefix)?.parse().ok()?;
    (1..=k).contains(&j).then(|| j - 1)
}

#[inline]
fn is_high(state: usize, deal: usize) -> bool {
    state >> deal & 1 == 1
}

pub fn build_groupon(cfg: &GrouponConfig) -> Result<ScenarioModel, ConfigError> {
    cfg.validate()?;
    let k = cfg.k;
    let states = 1usize << k;
    let prior = (0..states)
        .map(|l| {
            (0..k)
                .map(|j| {
                    if is_high(l, j) {
                        cfg.prior_high[j]
                    } else {
                        1.0 - cfg.prior_high[j]
                    }
                })
                .product()
        })
        .collect();
    let high = (0..states)
        .flat_map(|l| (0..k).map(move |j| is_high(l, j)))
        .collect();
    let labels = (0..states)
        .map(|s| {
            (0..k)
                .map(|j| if is_high(s, j) { '+' } else { '-' })
                .collect()
        })
        .collect();
    ScenarioModel::builder(states, k, cfg.n)
        .name("groupon")
        .prior(prior)
        .signals(states, |s, l| joint_review_likelihood(s, l, cfg))
        .utility(|l, j, n| cfg.utility(l, j, n))
        .resource_value(|l, j| cfg.value_function.apply(cfg.quality(l, j)) - cfg.c[j])
        .linear_in_occupancy(cfg.d)
        .signal_labels(labels)
        .metrics(ScenarioMetricsSpec::Revenue {
            prices: cfg.c.clone(),
            high,
        })
        .build()
        .map_err(|e| ConfigError::invalid("params", e.to_string()))
}

/// Product over restaurants of the per-review likelihoods.
pub fn joint_review_likelihood(reviews: usize, state: usize, cfg: &GrouponConfig) -> f64 {
    (0..cfg.k)
        .map(|j| cfg.review_likelihood(is_high(reviews, j), is_high(state, j)))
        .product()
}

/// Revenue of deal `deal`: buyers times price.
pub fn groupon_revenue(outcome: &EpisodeOutcome, deal: usize, cfg: &GrouponConfig) -> f64 {
    outcome.grouping.counts()[deal] as f64 * cfg.c[deal]
}

/// Per-restaurant Bernoulli beliefs. Valid because restaurant qualities are
/// independent and each review only concerns its own restaurant.
///
/// Both masses are stored so a belief close to certainty keeps full
/// relative precision on the unlikely side.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredBelief {
    high: Vec<f64>,
    low: Vec<f64>,
}

impl FactoredBelief {
    pub fn prior(cfg: &GrouponConfig) -> Self {
        FactoredBelief {
            high: cfg.prior_high.clone(),
            low: cfg.prior_high.iter().map(|g| 1.0 - g).collect(),
        }
    }

    /// Probability that restaurant `deal` is high quality.
    pub fn high(&self, deal: usize) -> f64 {
        self.high[deal]
    }

    /// Probability that restaurant `deal` is low quality.
    pub fn low(&self, deal: usize) -> f64 {
        self.low[deal]
    }

    pub fn marginals(&self) -> &[f64] {
        &self.high
    }

    /// Folds in one review vector restaurant by restaurant.
    pub fn update(&self, reviews: usize, cfg: &GrouponConfig) -> Result<Self, GameError> {
        let mut next = self.clone();
        for j in 0..self.high.len() {
            let positive = is_high(reviews, j);
            let up = self.high[j] * cfg.review_likelihood(positive, true);
            let down = self.low[j] * cfg.review_likelihood(positive, false);
            let mass = up + down;
            if mass <= 0.0 {
                return Err(GameError::ZeroMassSignal { signal: reviews });
            }
            next.high[j] = up / mass;
            next.low[j] = down / mass;
        }
        Ok(next)
    }

    /// Marginal high-quality probabilities of a joint-state belief.
    pub fn from_joint(joint: &[f64], k: usize) -> Self {
        let mass = |j: usize, want: bool| -> f64 {
            joint
                .iter()
                .enumerate()
                .filter(|(l, _)| is_high(*l, j) == want)
                .map(|(_, g)| g)
                .sum()
        };
        FactoredBelief {
            high: (0..k).map(|j| mass(j, true)).collect(),
            low: (0..k).map(|j| mass(j, false)).collect(),
        }
    }

    /// Joint belief as the product of marginals.
    pub fn to_joint(&self) -> Vec<f64> {
        let k = self.high.len();
        (0..1usize << k)
            .map(|l| {
                (0..k)
                    .map(|j| {
                        if is_high(l, j) {
                            self.high[j]
                        } else {
                            self.low[j]
                        }
                    })
                    .product()
            })
            .collect()
    }

    /// `E[R(Q_j)] = g_j R(Q_h) + (1 - g_j) R(Q_l)`.
    pub fn expected_value(&self, deal: usize, cfg: &GrouponConfig) -> f64 {
        self.high[deal] * cfg.value_function.apply(cfg.q_h)
            + self.low[deal] * cfg.value_function.apply(cfg.q_l)
    }
}
