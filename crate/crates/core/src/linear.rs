//! Expected-count recursion for utilities linear in occupancy.
//!
//! When `u(l, j, n) = a(l, j) - d * n`, expected utility only needs the
//! expected number of agents sharing the resource, not its distribution.
//! The next agent's signal is drawn from the predictive mixture
//! `Σ_l g_l f(s | l)` under the current belief, and the recursion proceeds on
//! that agent's updated belief.
//!
//! This is a separate route from [`crate::solver`]: it keeps its own memo
//! and its own best-response decisions, so agreement between the two is a
//! meaningful check.

use std::collections::HashMap;

use crate::error::GameError;
use crate::model::{Belief, DecisionContext, ScenarioModel};
use crate::solver::{argmax_lowest, BestResponder};

pub struct LinearSolver<'m> {
    model: &'m ScenarioModel,
    slope: f64,
    decisions: HashMap<Vec<u32>, usize>,
    tails: HashMap<Vec<u32>, f64>,
}

impl<'m> LinearSolver<'m> {
    pub fn new(model: &'m ScenarioModel) -> Result<Self, GameError> {
        let slope = model.linear_slope().ok_or(GameError::ModelNotLinear)?;
        Ok(LinearSolver {
            model,
            slope,
            decisions: HashMap::new(),
            tails: HashMap::new(),
        })
    }

    /// `E[m_{i,target}]` given the deciding agent picks `own_choice`.
    pub fn expected_successor_count(
        &mut self,
        ctx: &DecisionContext,
        own_choice: usize,
        target: usize,
    ) -> Result<f64, GameError> {
        let k = self.model.num_resources();
        if own_choice >= k || target >= k {
            return Err(GameError::InvalidContext("resource out of range".into()));
        }
        let mut grouping = ctx.grouping().counts().to_vec();
        let mut history = ctx.history().counts().to_vec();
        grouping[own_choice] += 1;
        let rest = self.tail(ctx.agent(), &mut grouping, &mut history, target)?;
        Ok(rest + (own_choice == target) as u32 as f64)
    }

    /// `Σ_l g_l u(l, j, n_j + 1) - d (E[m_{i,j}] - 1)`.
    pub fn expected_utility(
        &mut self,
        ctx: &DecisionContext,
        choice: usize,
    ) -> Result<f64, GameError> {
        if choice >= self.model.num_resources() {
            return Err(GameError::InvalidContext("resource out of range".into()));
        }
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

    fn utility_at(
        &mut self,
        agent: usize,
        grouping: &mut [u32],
        history: &mut [u32],
        belief: &Belief,
        choice: usize,
    ) -> Result<f64, GameError> {
        let occupied = grouping[choice] as usize + 1;
        let immediate: f64 = (0..self.model.num_states())
            .map(|l| belief.get(l) * self.model.utility(l, choice, occupied))
            .sum();
        grouping[choice] += 1;
        let later = self.tail(agent, grouping, history, choice);
        grouping[choice] -= 1;
        Ok(immediate - self.slope * later?)
    }

    fn decision(
        &mut self,
        agent: usize,
        grouping: &mut [u32],
        history: &mut [u32],
    ) -> Result<usize, GameError> {
        let key = node_key(agent, None, grouping, history);
        if let Some(&c) = self.decisions.get(&key) {
            return Ok(c);
        }
        let belief = Belief::from_counts(self.model, history)?;
        let mut values = Vec::with_capacity(self.model.num_resources());
        for j in 0..self.model.num_resources() {
            values.push(self.utility_at(agent, grouping, history, &belief, j)?);
        }
        let choice = argmax_lowest(&values);
        self.decisions.insert(key, choice);
        Ok(choice)
    }

    // Expected number of agents in decided+1..=N picking `target`.
    fn tail(
        &mut self,
        decided: usize,
        grouping: &mut [u32],
        history: &mut [u32],
        target: usize,
    ) -> Result<f64, GameError> {
        let n = self.model.num_agents();
        if decided > n {
            return Err(GameError::RecursionDepthExceeded);
        }
        if decided == n {
            return Ok(0.0);
        }
        let key = node_key(decided, Some(target), grouping, history);
        if let Some(&e) = self.tails.get(&key) {
            return Ok(e);
        }
        let belief = Belief::from_counts(self.model, history)?;
        let mut total = 0.0;
        for s in 0..self.model.num_signals() {
            let weight = self.model.predictive(&belief, s);
            if weight <= 0.0 {
                continue;
            }
            history[s] += 1;
            let step = self.decision(decided + 1, grouping, history).and_then(|c| {
                grouping[c] += 1;
                let rest = self.tail(decided + 1, grouping, history, target);
                grouping[c] -= 1;
                rest.map(|r| r + (c == target) as u32 as f64)
            });
            history[s] -= 1;
            total += weight * step?;
        }
        self.tails.insert(key, total);
        Ok(total)
    }
}

impl BestResponder for LinearSolver<'_> {
    fn best_response(&mut self, ctx: &DecisionContext) -> Result<usize, GameError> {
        let mut grouping = ctx.grouping().counts().to_vec();
        let mut history = ctx.history().counts().to_vec();
        self.decision(ctx.agent(), &mut grouping, &mut history)
    }
}

fn node_key(agent: usize, target: Option<usize>, grouping: &[u32], history: &[u32]) -> Vec<u32> {
    let mut key = Vec::with_capacity(2 + grouping.len() + history.len());
    key.push(agent as u32);
    key.push(target.map_or(u32::MAX, |t| t as u32));
    key.extend_from_slice(grouping);
    key.extend_from_slice(history);
    key
}

/// Expected successor count with a throwaway solver.
pub fn expected_successor_count(
    ctx: &DecisionContext,
    own_choice: usize,
    target: usize,
    model: &ScenarioModel,
) -> Result<f64, GameError> {
    LinearSolver::new(model)?.expected_successor_count(ctx, own_choice, target)
}
