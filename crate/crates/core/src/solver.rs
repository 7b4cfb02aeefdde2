//! Backward induction over decision contexts.
//!
//! Agent `i` predicts how many of the agents `i..=N` end on each resource by
//! recursing over every signal the next agent can draw. A context is keyed
//! by `(agent, grouping, signal counts)`; with i.i.d. signals the count
//! vector is a sufficient statistic for the history, so memo keys are exact
//! integers.
//!
//! The recursion is lazy: only contexts reachable from the queried ones are
//! evaluated. A [`Solver`] owns a growable memo; [`Solver::into_table`]
//! freezes it into a [`PolicyTable`] that can be shared across threads and
//! used as a read-only base for further solvers.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::GameError;
use crate::model::{Belief, DecisionContext, ScenarioModel};
use crate::strategy;

/// Two utilities closer than this are treated as tied.
pub const TIE_EPS: f64 = 1e-9;

/// Index of the lowest-numbered value within [`TIE_EPS`] of the maximum.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .position(|&v| v >= best - TIE_EPS)
        .unwrap_or(0)
}

/// How agents after the deciding one are assumed to choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuccessorPolicy {
    BestResponse,
    Myopic,
    Learning,
    Signal,
}

/// Distribution of `m_{i,j}`: the number of agents from `i` onward
/// (inclusive) that end up on one resource.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    probs: Vec<f64>,
}

impl CountDistribution {
    pub fn point_mass(at: usize, support: usize) -> Self {
        let mut probs = vec![0.0; support + 1];
        probs[at] = 1.0;
        CountDistribution { probs }
    }

    /// `probs()[x] = Pr(m = x)` for `x` in `0..=N-i+1`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(x, p)| x as f64 * p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeKey(Box<[u16]>);

impl NodeKey {
    fn new(agent: usize, target: Option<usize>, grouping: &[u32], history: &[u32]) -> Self {
        let mut key = Vec::with_capacity(2 + grouping.len() + history.len());
        key.push(agent as u16);
        if let Some(t) = target {
            key.push(t as u16);
        }
        key.extend(grouping.iter().map(|&g| g as u16));
        key.extend(history.iter().map(|&h| h as u16));
        NodeKey(key.into_boxed_slice())
    }
}

// Per-state rows of the tail distribution, flattened: row `l` holds
// Pr(count among agents decided+1..=N on target = x | state l).
type TailRows = Arc<[f64]>;

/// Frozen memo produced by backward induction. Immutable and `Sync`.
#[derive(Debug, Clone)]
pub struct PolicyTable {
    policy: SuccessorPolicy,
    num_agents: usize,
    num_states: usize,
    decisions: HashMap<NodeKey, u16>,
    tails: HashMap<NodeKey, TailRows>,
}

/// One memoized decision.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEntry {
    pub choice: usize,
    /// `[resource][state]` distribution of `m_{i,resource}` given the agent
    /// picks `resource`. `None` for states ruled out by the history.
    pub counts: Vec<Vec<Option<CountDistribution>>>,
}

impl PolicyTable {
    /// Solves the game from every possible first signal, so the table covers
    /// every context reachable when all agents follow `policy`'s notion of
    /// best response.
    pub fn solve(model: &ScenarioModel) -> Result<PolicyTable, GameError> {
        let mut solver = Solver::new(model);
        let root = DecisionContext::initial(model);
        for s in 0..model.num_signals() {
            if model.predictive(root.belief(), s) > 0.0 {
                solver.best_response(&root.observe(s, model)?)?;
            }
        }
        Ok(solver.into_table())
    }

    pub fn policy(&self) -> SuccessorPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// Memoized choice for a context, if it was reached during solving.
    pub fn choice(&self, ctx: &DecisionContext) -> Option<usize> {
        let key = NodeKey::new(
            ctx.agent(),
            None,
            ctx.grouping().counts(),
            ctx.history().counts(),
        );
        self.decisions.get(&key).map(|&c| c as usize)
    }

    /// Memoized choice together with its per-(resource, state) count
    /// distributions.
    pub fn entry(&self, ctx: &DecisionContext) -> Option<PolicyEntry> {
        let choice = self.choice(ctx)?;
        let k = ctx.grouping().counts().len();
        let mut grouping = ctx.grouping().counts().to_vec();
        let mut counts = Vec::with_capacity(k);
        for j in 0..k {
            grouping[j] += 1;
            let key = NodeKey::new(ctx.agent(), Some(j), &grouping, ctx.history().counts());
            grouping[j] -= 1;
            let rows = self.tails.get(&key)?;
            let per_state = (0..self.num_states)
                .map(|l| {
                    (ctx.belief().get(l) > 0.0)
                        .then(|| shift_row(rows, l, self.num_agents - ctx.agent() + 1, true))
                })
                .collect();
            counts.push(per_state);
        }
        Some(PolicyEntry { choice, counts })
    }
}

fn shift_row(rows: &[f64], state: usize, width: usize, own_is_target: bool) -> CountDistribution {
    let row = &rows[state * width..(state + 1) * width];
    let mut probs = vec![0.0; width + 1];
    let offset = own_is_target as usize;
    for (x, p) in row.iter().enumerate() {
        probs[x + offset] += p;
    }
    CountDistribution { probs }
}

/// Something that can answer best-response queries.
pub trait BestResponder {
    fn best_response(&mut self, ctx: &DecisionContext) -> Result<usize, GameError>;
}

/// Lazy, memoizing backward-induction engine.
pub struct Solver<'m> {
    model: &'m ScenarioModel,
    base: Option<&'m PolicyTable>,
    policy: SuccessorPolicy,
    decisions: HashMap<NodeKey, u16>,
    tails: HashMap<NodeKey, TailRows>,
}

impl<'m> Solver<'m> {
    /// Solver whose successors are best responders themselves.
    pub fn new(model: &'m ScenarioModel) -> Self {
        Self::with_policy(model, SuccessorPolicy::BestResponse)
    }

    pub fn with_policy(model: &'m ScenarioModel, policy: SuccessorPolicy) -> Self {
        Solver {
            model,
            base: None,
            policy,
            decisions: HashMap::new(),
            tails: HashMap::new(),
        }
    }

    /// Solver that reads `base` first and memoizes anything new locally.
    pub fn with_base(model: &'m ScenarioModel, base: &'m PolicyTable) -> Self {
        Solver {
            model,
            base: Some(base),
            policy: base.policy,
            decisions: HashMap::new(),
            tails: HashMap::new(),
        }
    }

    pub fn model(&self) -> &'m ScenarioModel {
        self.model
    }

    /// Number of contexts memoized locally.
    pub fn memo_len(&self) -> usize {
        self.decisions.len()
    }

    pub fn into_table(self) -> PolicyTable {
        let (mut decisions, mut tails) = (self.decisions, self.tails);
        if let Some(base) = self.base {
            decisions.extend(base.decisions.iter().map(|(k, v)| (k.clone(), *v)));
            tails.extend(base.tails.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        PolicyTable {
            policy: self.policy,
            num_agents: self.model.num_agents(),
            num_states: self.model.num_states(),
            decisions,
            tails,
        }
    }

    /// Distribution of how many of agents `ctx.agent()..=N` choose `target`,
    /// given the deciding agent picks `own_choice` and the hidden state is
    /// `state`.
    pub fn successor_count_distribution(
        &mut self,
        ctx: &DecisionContext,
        own_choice: usize,
        target: usize,
        state: usize,
    ) -> Result<CountDistribution, GameError> {
        self.check(ctx, own_choice)?;
        if target >= self.model.num_resources() || state >= self.model.num_states() {
            return Err(GameError::InvalidContext(
                "target or state out of range".into(),
            ));
        }
        if ctx.belief().get(state) <= 0.0 {
            return Err(GameError::ZeroMassState { state });
        }
        let mut grouping = ctx.grouping().counts().to_vec();
        let mut history = ctx.history().counts().to_vec();
        grouping[own_choice] += 1;
        let rows = self.tail(ctx.agent(), &mut grouping, &mut history, target)?;
        let width = self.model.num_agents() - ctx.agent() + 1;
        Ok(shift_row(&rows, state, width, own_choice == target))
    }

    /// Expected utility of `choice` under the belief in `ctx`, predicting
    /// successors through the recursion.
    pub fn expected_utility(
        &mut self,
        ctx: &DecisionContext,
        choice: usize,
    ) -> Result<f64, GameError> {
        self.check(ctx, choice)?;
        let mut grouping = ctx.grouping().counts().to_vec();
        let mut history = ctx.history().counts().to_vec();
        self.utility_at(
            ctx.agent(),
            &mut grouping,
            &mut history,
            ctx.belief(),
            choice,
        )
    }

    /// Expected utilities of every resource.
    pub fn expected_utilities(&mut self, ctx: &DecisionContext) -> Result<Vec<f64>, GameError> {
        (0..self.model.num_resources())
            .map(|j| self.expected_utility(ctx, j))
            .collect()
    }

    fn check(&self, ctx: &DecisionContext, resource: usize) -> Result<(), GameError> {
        if resource >= self.model.num_resources() {
            return Err(GameError::InvalidContext(format!(
                "resource {resource} out of range"
            )));
        }
        if ctx.agent() == 0 || ctx.agent() > self.model.num_agents() {
            return Err(GameError::RecursionDepthExceeded);
        }
        Ok(())
    }

    fn lookup_decision(&self, key: &NodeKey) -> Option<usize> {
        self.decisions
            .get(key)
            .or_else(|| self.base.and_then(|b| b.decisions.get(key)))
            .map(|&c| c as usize)
    }

    fn lookup_tail(&self, key: &NodeKey) -> Option<TailRows> {
        self.tails
            .get(key)
            .or_else(|| self.base.and_then(|b| b.tails.get(key)))
            .cloned()
    }

    fn decision(
        &mut self,
        agent: usize,
        grouping: &mut [u32],
        history: &mut [u32],
    ) -> Result<usize, GameError> {
        let key = NodeKey::new(agent, None, grouping, history);
        if let Some(choice) = self.lookup_decision(&key) {
            return Ok(choice);
        }
        let belief = Belief::from_counts(self.model, history)?;
        let k = self.model.num_resources();
        let choice = if k == 1 {
            0
        } else {
            let mut values = Vec::with_capacity(k);
            for j in 0..k {
                values.push(self.utility_at(agent, grouping, history, &belief, j)?);
            }
            argmax_lowest(&values)
        };
        self.decisions.insert(key, choice as u16);
        Ok(choice)
    }

    fn utility_at(
        &mut self,
        agent: usize,
        grouping: &mut [u32],
        history: &mut [u32],
        belief: &Belief,
        choice: usize,
    ) -> Result<f64, GameError> {
        let before = grouping[choice] as usize;
        grouping[choice] += 1;
        let rows = self.tail(agent, grouping, history, choice);
        grouping[choice] -= 1;
        let rows = rows?;
        let width = self.model.num_agents() - agent + 1;
        let mut total = 0.0;
        for l in 0..self.model.num_states() {
            let g = belief.get(l);
            if g <= 0.0 {
                continue;
            }
            let row = &rows[l * width..(l + 1) * width];
            let mut inner = 0.0;
            for (x, p) in row.iter().enumerate() {
                if *p != 0.0 {
                    inner += p * self.model.utility(l, choice, before + 1 + x);
                }
            }
            total += g * inner;
        }
        Ok(total)
    }

    fn successor_choice(
        &mut self,
        agent: usize,
        grouping: &mut [u32],
        history: &mut [u32],
        own_signal: usize,
    ) -> Result<usize, GameError> {
        match self.policy {
            SuccessorPolicy::BestResponse => self.decision(agent, grouping, history),
            SuccessorPolicy::Signal => Ok(strategy::signal_choice(own_signal, self.model)),
            SuccessorPolicy::Myopic | SuccessorPolicy::Learning => {
                let key = NodeKey::new(agent, None, grouping, history);
                if let Some(choice) = self.lookup_decision(&key) {
                    return Ok(choice);
                }
                let belief = Belief::from_counts(self.model, history)?;
                let choice = if self.policy == SuccessorPolicy::Myopic {
                    strategy::myopic_values(&belief, grouping, self.model)
                } else {
                    strategy::learning_values(&belief, self.model)
                };
                let choice = argmax_lowest(&choice);
                self.decisions.insert(key, choice as u16);
                Ok(choice)
            }
        }
    }

    /// Rows over states of the distribution of how many agents in
    /// `decided+1..=N` pick `target`, where `grouping`/`history` already
    /// reflect agents `1..=decided`.
    fn tail(
        &mut self,
        decided: usize,
        grouping: &mut [u32],
        history: &mut [u32],
        target: usize,
    ) -> Result<TailRows, GameError> {
        let n = self.model.num_agents();
        if decided > n {
            return Err(GameError::RecursionDepthExceeded);
        }
        let key = NodeKey::new(decided, Some(target), grouping, history);
        if let Some(rows) = self.lookup_tail(&key) {
            return Ok(rows);
        }
        let l_count = self.model.num_states();
        let remaining = n - decided;
        let width = remaining + 1;
        let mut out = vec![0.0; l_count * width];
        let belief = Belief::from_counts(self.model, history)?;
        if remaining == 0 {
            for l in 0..l_count {
                out[l * width] = 1.0;
            }
        } else {
            let next = decided + 1;
            for s in 0..self.model.num_signals() {
                let f = self.model.likelihoods_of(s);
                let reachable = (0..l_count).any(|l| belief.get(l) > 0.0 && f[l] > 0.0);
                if !reachable {
                    continue;
                }
                history[s] += 1;
                let choice = self.successor_choice(next, grouping, history, s);
                let sub = choice.and_then(|c| {
                    grouping[c] += 1;
                    let sub = self.tail(next, grouping, history, target);
                    grouping[c] -= 1;
                    sub.map(|rows| (c, rows))
                });
                history[s] -= 1;
                let (choice, sub) = sub?;
                let shift = (choice == target) as usize;
                let sub_width = remaining;
                for l in 0..l_count {
                    let w = self.model.likelihood(s, l);
                    if belief.get(l) <= 0.0 || w == 0.0 {
                        continue;
                    }
                    let src = &sub[l * sub_width..(l + 1) * sub_width];
                    let dst = &mut out[l * width..(l + 1) * width];
                    for (x, p) in src.iter().enumerate() {
                        dst[x + shift] += w * p;
                    }
                }
            }
        }
        let rows: TailRows = out.into();
        self.tails.insert(key, rows.clone());
        Ok(rows)
    }
}

impl BestResponder for Solver<'_> {
    /// Argmax of expected utility, ties to the lowest resource index.
    fn best_response(&mut self, ctx: &DecisionContext) -> Result<usize, GameError> {
        self.check(ctx, 0)?;
        let mut grouping = ctx.grouping().counts().to_vec();
        let mut history = ctx.history().counts().to_vec();
        self.decision(ctx.agent(), &mut grouping, &mut history)
    }
}

/// Best response computed with a throwaway solver.
pub fn best_response(ctx: &DecisionContext, model: &ScenarioModel) -> Result<usize, GameError> {
    Solver::new(model).best_response(ctx)
}

/// Successor-count distribution computed with a throwaway solver.
pub fn successor_count_distribution(
    ctx: &DecisionContext,
    own_choice: usize,
    target: usize,
    state: usize,
    model: &ScenarioModel,
    policy: SuccessorPolicy,
) -> Result<CountDistribution, GameError> {
    Solver::with_policy(model, policy).successor_count_distribution(ctx, own_choice, target, state)
}

/// Expected utility computed with a throwaway solver.
pub fn expected_utility(
    ctx: &DecisionContext,
    choice: usize,
    model: &ScenarioModel,
    policy: SuccessorPolicy,
) -> Result<f64, GameError> {
    Solver::with_policy(model, policy).expected_utility(ctx, choice)
}
