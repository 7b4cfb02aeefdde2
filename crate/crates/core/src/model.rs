//! Game definition and the observable state agents reason about.
//!
//! A [`ScenarioModel`] fixes the hidden-state space, the prior, a finite
//! signal alphabet with per-state likelihoods, and a utility table indexed by
//! (state, resource, occupancy). Resources and states are 0-based here;
//! agents are numbered from 1 as in the sequential protocol.

use serde::Serialize;

use crate::error::GameError;
use crate::scenarios::ScenarioMetricsSpec;

const PROB_TOL: f64 = 1e-12;

/// Immutable game definition shared by every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioModel {
    name: String,
    num_states: usize,
    num_resources: usize,
    num_agents: usize,
    num_signals: usize,
    prior: Vec<f64>,
    // [signal * num_states + state]
    likelihood: Vec<f64>,
    // [(state * num_resources + resource) * num_agents + (occupancy - 1)]
    utility: Vec<f64>,
    // [state * num_resources + resource]
    resource_value: Vec<f64>,
    linear_slope: Option<f64>,
    signal_labels: Vec<String>,
    metrics: ScenarioMetricsSpec,
}

impl ScenarioModel {
    pub fn builder(num_states: usize, num_resources: usize, num_agents: usize) -> ModelBuilder {
        ModelBuilder {
            name: String::from("custom"),
            num_states,
            num_resources,
            num_agents,
            prior: None,
            likelihood: None,
            utility: None,
            resource_value: None,
            linear_slope: None,
            signal_labels: None,
            metrics: ScenarioMetricsSpec::None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_resources(&self) -> usize {
        self.num_resources
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_signals(&self) -> usize {
        self.num_signals
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// f(signal | state).
    #[inline]
    pub fn likelihood(&self, signal: usize, state: usize) -> f64 {
        self.likelihood[signal * self.num_states + state]
    }

    /// Likelihood row of one signal across all states.
    #[inline]
    pub fn likelihoods_of(&self, signal: usize) -> &[f64] {
        let start = signal * self.num_states;
        &self.likelihood[start..start + self.num_states]
    }

    /// Utility of an agent on `resource` in `state` when `occupancy` agents
    /// (itself included) end up there. `occupancy` must be in `1..=N`.
    #[inline]
    pub fn utility(&self, state: usize, resource: usize, occupancy: usize) -> f64 {
        debug_assert!(occupancy >= 1 && occupancy <= self.num_agents);
        self.utility[(state * self.num_resources + resource) * self.num_agents + occupancy - 1]
    }

    /// Occupancy-independent value of a resource in a state, used by the
    /// signal and learning rules.
    #[inline]
    pub fn resource_value(&self, state: usize, resource: usize) -> f64 {
        self.resource_value[state * self.num_resources + resource]
    }

    /// Per-occupant utility decrement when the model is declared linear.
    pub fn linear_slope(&self) -> Option<f64> {
        self.linear_slope
    }

    pub fn signal_label(&self, signal: usize) -> &str {
        &self.signal_labels[signal]
    }

    pub fn metrics(&self) -> &ScenarioMetricsSpec {
        &self.metrics
    }

    /// Probability of `signal` under a belief: the mixture Σ_l g_l f(s|l).
    pub fn predictive(&self, belief: &Belief, signal: usize) -> f64 {
        belief
            .probs()
            .iter()
            .zip(self.likelihoods_of(signal))
            .map(|(g, f)| g * f)
            .sum()
    }
}

/// Assembles and validates a [`ScenarioModel`].
pub struct ModelBuilder {
    name: String,
    num_states: usize,
    num_resources: usize,
    num_agents: usize,
    prior: Option<Vec<f64>>,
    likelihood: Option<(usize, Vec<f64>)>,
    utility: Option<Vec<f64>>,
    resource_value: Option<Vec<f64>>,
    linear_slope: Option<f64>,
    signal_labels: Option<Vec<String>>,
    metrics: ScenarioMetricsSpec,
}

impl ModelBuilder {
    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn prior(mut self, prior: Vec<f64>) -> Self {
        self.prior = Some(prior);
        self
    }

    /// Signal alphabet of size `num_signals` with `f(signal, state)`.
    pub fn signals(mut self, num_signals: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut table = Vec::with_capacity(num_signals * self.num_states);
        for s in 0..num_signals {
            for l in 0..self.num_states {
                table.push(f(s, l));
            }
        }
        self.likelihood = Some((num_signals, table));
        self
    }

    /// `u(state, resource, occupancy)`, sampled for occupancy `1..=N`.
    pub fn utility(mut self, u: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut table = Vec::with_capacity(self.num_states * self.num_resources * self.num_agents);
        for l in 0..self.num_states {
            for j in 0..self.num_resources {
                for n in 1..=self.num_agents {
                    table.push(u(l, j, n));
                }
            }
        }
        self.utility = Some(table);
        self
    }

    /// Defaults to the utility at occupancy 1 when not given.
    pub fn resource_value(mut self, r: impl Fn(usize, usize) -> f64) -> Self {
        let mut table = Vec::with_capacity(self.num_states * self.num_resources);
        for l in 0..self.num_states {
            for j in 0..self.num_resources {
                table.push(r(l, j));
            }
        }
        self.resource_value = Some(table);
        self
    }

    /// Declares `u(l, j, n + 1) - u(l, j, n) = -slope` everywhere.
    pub fn linear_in_occupancy(mut self, slope: f64) -> Self {
        self.linear_slope = Some(slope);
        self
    }

    pub fn signal_labels(mut self, labels: Vec<String>) -> Self {
        self.signal_labels = Some(labels);
        self
    }

    pub fn metrics(mut self, metrics: ScenarioMetricsSpec) -> Self {
        self.metrics = metrics;
        self
    }

    pub fn build(self) -> Result<ScenarioModel, GameError> {
        let (l_count, k_count, n_count) = (self.num_states, self.num_resources, self.num_agents);
        if l_count == 0 || k_count == 0 || n_count == 0 {
            return Err(GameError::InvalidDimensions(
                "states, resources and agents must all be positive".into(),
            ));
        }
        if k_count > u16::MAX as usize || n_count > u16::MAX as usize {
            return Err(GameError::InvalidDimensions(
                "too many resources or agents".into(),
            ));
        }
        let prior = self
            .prior
            .unwrap_or_else(|| vec![1.0 / l_count as f64; l_count]);
        if prior.len() != l_count {
            return Err(GameError::InvalidPrior(format!(
                "length {} for {} states",
                prior.len(),
                l_count
            )));
        }
        if prior.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(GameError::InvalidPrior(
                "negative or non-finite entry".into(),
            ));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(GameError::InvalidPrior(format!("sums to {total}")));
        }

        let (num_signals, likelihood) = self
            .likelihood
            .ok_or_else(|| GameError::InvalidDimensions("no signal alphabet".into()))?;
        if num_signals == 0 {
            return Err(GameError::InvalidDimensions("empty signal alphabet".into()));
        }
        for l in 0..l_count {
            let mut sum = 0.0;
            for s in 0..num_signals {
                let f = likelihood[s * l_count + l];
                if !(0.0..=1.0).contains(&f) {
                    return Err(GameError::InvalidLikelihood { state: l, sum: f });
                }
                sum += f;
            }
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(GameError::InvalidLikelihood { state: l, sum });
            }
        }

        let utility = self
            .utility
            .ok_or_else(|| GameError::InvalidDimensions("no utility function".into()))?;
        for l in 0..l_count {
            for j in 0..k_count {
                let row = &utility[(l * k_count + j) * n_count..(l * k_count + j + 1) * n_count];
                if row.iter().any(|u| !u.is_finite()) {
                    return Err(GameError::InvalidDimensions("non-finite utility".into()));
                }
                for n in 1..n_count {
                    if row[n] > row[n - 1] {
                        return Err(GameError::IncreasingUtility {
                            state: l,
                            resource: j,
                            occupancy: n,
                        });
                    }
                }
                if let Some(slope) = self.linear_slope {
                    for n in 1..n_count {
                        let step = row[n] - row[n - 1];
                        if (step + slope).abs() > 1e-9 * (1.0 + slope.abs()) {
                            return Err(GameError::LinearityViolated {
                                state: l,
                                resource: j,
                                occupancy: n,
                            });
                        }
                    }
                }
            }
        }

        let resource_value = self.resource_value.unwrap_or_else(|| {
            let mut table = Vec::with_capacity(l_count * k_count);
            for l in 0..l_count {
                for j in 0..k_count {
                    table.push(utility[(l * k_count + j) * n_count]);
                }
            }
            table
        });

        let signal_labels = match self.signal_labels {
            Some(labels) if labels.len() == num_signals => labels,
            Some(_) => {
                return Err(GameError::InvalidDimensions(
                    "signal label count does not match alphabet".into(),
                ))
            }
            None => (0..num_signals).map(|s| s.to_string()).collect(),
        };

        Ok(ScenarioModel {
            name: self.name,
            num_states: l_count,
            num_resources: k_count,
            num_agents: n_count,
            num_signals,
            prior,
            likelihood,
            utility,
            resource_value,
            linear_slope: self.linear_slope,
            signal_labels,
            metrics: self.metrics,
        })
    }
}

/// Posterior over hidden states.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn prior(model: &ScenarioModel) -> Self {
        Belief(model.prior().to_vec())
    }

    /// Wraps a probability vector, rejecting unnormalized input.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, GameError> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(GameError::InvalidPrior(
                "negative or non-finite entry".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(GameError::InvalidPrior(format!("sums to {total}")));
        }
        Ok(Belief(probs))
    }

    /// Canonical belief for a signal multiset: the prior updated with each
    /// signal value in ascending order.
    pub fn from_counts(model: &ScenarioModel, counts: &[u32]) -> Result<Self, GameError> {
        let mut belief = Belief::prior(model);
        for (signal, &count) in counts.iter().enumerate() {
            for _ in 0..count {
                belief = belief_update(&belief, signal, model)?;
            }
        }
        Ok(belief)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }
}

/// Bayes rule for one observed signal.
pub fn belief_update(
    belief: &Belief,
    signal: usize,
    model: &ScenarioModel,
) -> Result<Belief, GameError> {
    let f = model.likelihoods_of(signal);
    let mut next: Vec<f64> = belief.0.iter().zip(f).map(|(g, f)| g * f).collect();
    let mass: f64 = next.iter().sum();
    if mass <= 0.0 || !mass.is_finite() {
        return Err(GameError::ZeroMassSignal { signal });
    }
    for g in &mut next {
        *g /= mass;
    }
    Ok(Belief(next))
}

/// Occupancy counts per resource.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Grouping(pub Vec<u32>);

impl Grouping {
    pub fn empty(num_resources: usize) -> Self {
        Grouping(vec![0; num_resources])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Tally of a choice sequence.
    pub fn tally(choices: &[usize], num_resources: usize) -> Self {
        let mut counts = vec![0; num_resources];
        for &c in choices {
            counts[c] += 1;
        }
        Grouping(counts)
    }
}

/// Number of times each signal value has been observed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SignalCounts(pub Vec<u32>);

impl SignalCounts {
    pub fn empty(num_signals: usize) -> Self {
        SignalCounts(vec![0; num_signals])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// What agent `agent` knows when choosing: the grouping left by agents
/// `1..agent`, the revealed signals (as a count vector) and the belief they
/// induce. Once the agent folds in its own signal via [`observe`], the
/// history holds `agent` signals instead of `agent - 1`.
///
/// [`observe`]: DecisionContext::observe
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionContext {
    agent: usize,
    grouping: Grouping,
    history: SignalCounts,
    belief: Belief,
}

impl DecisionContext {
    /// Context of agent 1 before it sees its own signal.
    pub fn initial(model: &ScenarioModel) -> Self {
        DecisionContext {
            agent: 1,
            grouping: Grouping::empty(model.num_resources()),
            history: SignalCounts::empty(model.num_signals()),
            belief: Belief::prior(model),
        }
    }

    /// Builds a context from raw parts, checking the structural invariants.
    pub fn new(
        model: &ScenarioModel,
        agent: usize,
        grouping: Grouping,
        history: SignalCounts,
    ) -> Result<Self, GameError> {
        if agent == 0 || agent > model.num_agents() {
            return Err(GameError::InvalidContext(format!(
                "agent {agent} outside 1..={}",
                model.num_agents()
            )));
        }
        if grouping.0.len() != model.num_resources() || history.0.len() != model.num_signals() {
            return Err(GameError::InvalidContext("dimension mismatch".into()));
        }
        if grouping.total() as usize != agent - 1 {
            return Err(GameError::InvalidContext(format!(
                "grouping sums to {}, expected {}",
                grouping.total(),
                agent - 1
            )));
        }
        let seen = history.total() as usize;
        if seen != agent - 1 && seen != agent {
            return Err(GameError::InvalidContext(format!(
                "history holds {seen} signals for agent {agent}"
            )));
        }
        let belief = Belief::from_counts(model, history.counts())?;
        Ok(DecisionContext {
            agent,
            grouping,
            history,
            belief,
        })
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn grouping(&self) -> &Grouping {
        &self.grouping
    }

    pub fn history(&self) -> &SignalCounts {
        &self.history
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    /// True once the deciding agent's own signal is part of the history.
    pub fn has_own_signal(&self) -> bool {
        self.history.total() as usize == self.agent
    }

    /// Folds the deciding agent's private signal into the context.
    pub fn observe(&self, signal: usize, model: &ScenarioModel) -> Result<Self, GameError> {
        if self.has_own_signal() {
            return Err(GameError::InvalidContext(
                "own signal already observed".into(),
            ));
        }
        let mut history = self.history.clone();
        history.0[signal] += 1;
        let belief = Belief::from_counts(model, history.counts())?;
        Ok(DecisionContext {
            agent: self.agent,
            grouping: self.grouping.clone(),
            history,
            belief,
        })
    }
}

/// Moves to the next agent after `chosen` is taken and `revealed_signal`
/// made public. The input context is the deciding agent's view before its
/// own signal was folded in. Advancing past agent N yields the terminal
/// context (agent N + 1) holding the final grouping.
pub fn advance_context(
    ctx: &DecisionContext,
    chosen: usize,
    revealed_signal: usize,
    model: &ScenarioModel,
) -> Result<DecisionContext, GameError> {
    if chosen >= model.num_resources() {
        return Err(GameError::InvalidContext(format!(
            "resource {chosen} out of range"
        )));
    }
    if ctx.has_own_signal() {
        return Err(GameError::InvalidContext(
            "advance from the pre-signal context".into(),
        ));
    }
    if ctx.agent > model.num_agents() {
        return Err(GameError::InvalidContext(
            "all agents have already chosen".into(),
        ));
    }
    let mut grouping = ctx.grouping.clone();
    grouping.0[chosen] += 1;
    let mut history = ctx.history.clone();
    history.0[revealed_signal] += 1;
    // Recomputed from the count vector so every path to the same counts
    // yields bit-identical beliefs.
    let belief = Belief::from_counts(model, history.counts())?;
    Ok(DecisionContext {
        agent: ctx.agent + 1,
        grouping,
        history,
        belief,
    })
}
