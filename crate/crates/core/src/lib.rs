//! Sequential resource selection with Bayesian social learning and
//! negative network externality.
//!
//! Agents arrive one at a time, each draws a private signal about a hidden
//! state, observes every earlier agent's choice and signal, and picks one
//! of `K` resources whose utility falls as more agents share it. The
//! [`solver`] computes best responses by backward induction; [`strategy`]
//! holds the baseline rules; [`scenarios`] builds the three concrete games;
//! [`harness`] runs Monte-Carlo comparisons; [`experiment`] reads configs
//! and writes CSV tables.

pub mod error;
pub mod experiment;
pub mod harness;
pub mod linear;
pub mod model;
pub mod scenarios;
pub mod solver;
pub mod stats;
pub mod strategy;

pub use error::{ConfigError, GameError};
pub use linear::{expected_successor_count, LinearSolver};
pub use model::{
    advance_context, belief_update, Belief, DecisionContext, Grouping, ModelBuilder, ScenarioModel,
    SignalCounts,
};
pub use solver::{
    argmax_lowest, best_response, expected_utility, successor_count_distribution, BestResponder,
    CountDistribution, PolicyTable, Solver, SuccessorPolicy, TIE_EPS,
};
pub use strategy::{decide, StrategyKind, StrategyProfile};
