//! The decision rules compared in every experiment.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::model::{Belief, DecisionContext, ScenarioModel};
use crate::solver::{argmax_lowest, BestResponder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Uniform over resources.
    Random,
    /// Own signal only.
    Signal,
    /// Belief from all revealed signals, ignoring crowding.
    Learning,
    /// Belief plus the current grouping, no prediction of later agents.
    Myopic,
    /// Backward induction over later agents' choices.
    BestResponse,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Random,
        StrategyKind::Signal,
        StrategyKind::Learning,
        StrategyKind::Myopic,
        StrategyKind::BestResponse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::Signal => "signal",
            StrategyKind::Learning => "learning",
            StrategyKind::Myopic => "myopic",
            StrategyKind::BestResponse => "best_response",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// Strategy assignment for agents `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfile(Vec<StrategyKind>);

impl StrategyProfile {
    pub fn homogeneous(kind: StrategyKind, num_agents: usize) -> Self {
        StrategyProfile(vec![kind; num_agents])
    }

    pub fn new(kinds: Vec<StrategyKind>) -> Self {
        StrategyProfile(kinds)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Strategy of agent `agent` (1-based).
    pub fn of(&self, agent: usize) -> StrategyKind {
        self.0[agent - 1]
    }

    pub fn uses(&self, kind: StrategyKind) -> bool {
        self.0.contains(&kind)
    }
}

/// Uniform resource from exactly one 64-bit draw.
pub fn random_choice(ctx: &DecisionContext, rng: &mut dyn RngCore) -> usize {
    let k = ctx.grouping().counts().len() as u128;
    ((rng.next_u64() as u128 * k) >> 64) as usize
}

/// `Σ_l f(s | l) R_x(l)` for every resource `x`.
pub fn signal_values(own_signal: usize, model: &ScenarioModel) -> Vec<f64> {
    (0..model.num_resources())
        .map(|x| {
            (0..model.num_states())
                .map(|l| model.likelihood(own_signal, l) * model.resource_value(l, x))
                .sum()
        })
        .collect()
}

pub fn signal_choice(own_signal: usize, model: &ScenarioModel) -> usize {
    argmax_lowest(&signal_values(own_signal, model))
}

/// `Σ_l g_l R_x(l)`.
pub fn learning_values(belief: &Belief, model: &ScenarioModel) -> Vec<f64> {
    (0..model.num_resources())
        .map(|x| {
            (0..model.num_states())
                .map(|l| belief.get(l) * model.resource_value(l, x))
                .sum()
        })
        .collect()
}

pub fn learning_choice(ctx: &DecisionContext, model: &ScenarioModel) -> usize {
    argmax_lowest(&learning_values(ctx.belief(), model))
}

/// `Σ_l g_l u(l, x, n_x + 1)`, summed in the same order as the solver's
/// expected utility so the two agree bit for bit at the last agent.
pub fn myopic_values(belief: &Belief, grouping: &[u32], model: &ScenarioModel) -> Vec<f64> {
    (0..model.num_resources())
        .map(|x| {
            let occupied = grouping[x] as usize + 1;
            let mut total = 0.0;
            for l in 0..model.num_states() {
                let g = belief.get(l);
                if g > 0.0 {
                    total += g * model.utility(l, x, occupied);
                }
            }
            total
        })
        .collect()
}

pub fn myopic_choice(ctx: &DecisionContext, model: &ScenarioModel) -> usize {
    argmax_lowest(&myopic_values(ctx.belief(), ctx.grouping().counts(), model))
}

/// Applies `kind` to an agent holding `own_signal`. `ctx` is the agent's
/// view before its own signal; belief-based rules fold the signal in first.
pub fn decide(
    ctx: &DecisionContext,
    own_signal: usize,
    kind: StrategyKind,
    model: &ScenarioModel,
    rng: &mut dyn RngCore,
    responder: &mut dyn BestResponder,
) -> Result<usize, GameError> {
    match kind {
        StrategyKind::Random => Ok(random_choice(ctx, rng)),
        StrategyKind::Signal => Ok(signal_choice(own_signal, model)),
        StrategyKind::Learning => Ok(learning_choice(&ctx.observe(own_signal, model)?, model)),
        StrategyKind::Myopic => Ok(myopic_choice(&ctx.observe(own_signal, model)?, model)),
        StrategyKind::BestResponse => responder.best_response(&ctx.observe(own_signal, model)?),
    }
}
