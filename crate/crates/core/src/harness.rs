//! Episodes, Monte-Carlo aggregation, strategy comparisons and sweeps.
//!
//! Every trial owns two random streams derived from its seed: a latent
//! stream for the hidden state and all signals, and a strategy stream for
//! random choices. The latent stream is drawn up front, so trial `t` sees
//! the same state and signals whatever strategies are played, which makes
//! comparisons across strategy kinds paired.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ConfigError, GameError};
use crate::model::{advance_context, DecisionContext, Grouping, ScenarioModel};
use crate::scenarios::{ScenarioConfig, ScenarioMetricsSpec};
use crate::solver::{PolicyTable, Solver};
use crate::stats::{CompensatedSum, MeanStat};
use crate::strategy::{decide, StrategyKind, StrategyProfile};

const LATENT_STREAM: u64 = 0;
const STRATEGY_STREAM: u64 = 1;

/// Stable seed mixing: splitmix64 over the master seed and each tag in turn.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut x = splitmix(master);
    for &t in tags {
        x = splitmix(x ^ splitmix(t.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    x
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, &[trial as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeOutcome {
    pub state: usize,
    pub signals: Vec<usize>,
    pub choices: Vec<usize>,
    /// `u(state, choice_i, n_{choice_i})` under the final grouping.
    pub utilities: Vec<f64>,
    pub grouping: Grouping,
}

impl EpisodeOutcome {
    /// Average realized utility. Summed in sorted order, so outcomes that
    /// differ only in which agent got which payoff average identically.
    pub fn mean_utility(&self) -> f64 {
        let mut sorted = self.utilities.clone();
        sorted.sort_by(f64::total_cmp);
        let mut sum = CompensatedSum::default();
        for u in sorted {
            sum.add(u);
        }
        sum.value() / self.utilities.len() as f64
    }
}

/// Hidden state and the signal of every agent for one trial.
pub fn draw_latent(model: &ScenarioModel, seed: u64) -> (usize, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[LATENT_STREAM]));
    let state = WeightedIndex::new(model.prior())
        .expect("validated prior")
        .sample(&mut rng);
    let f: Vec<f64> = (0..model.num_signals())
        .map(|s| model.likelihood(s, state))
        .collect();
    let signals = WeightedIndex::new(&f).expect("validated likelihood");
    let signals = (0..model.num_agents())
        .map(|_| signals.sample(&mut rng))
        .collect();
    (state, signals)
}

/// Plays one episode, solving best responses on demand.
pub fn run_episode(
    model: &ScenarioModel,
    profile: &StrategyProfile,
    seed: u64,
) -> Result<EpisodeOutcome, GameError> {
    let mut solver = Solver::new(model);
    play(model, profile, seed, &mut solver)
}

/// Plays one episode, reading best responses from a pre-solved table.
pub fn run_episode_with_table(
    model: &ScenarioModel,
    profile: &StrategyProfile,
    seed: u64,
    table: &PolicyTable,
) -> Result<EpisodeOutcome, GameError> {
    let mut solver = Solver::with_base(model, table);
    play(model, profile, seed, &mut solver)
}

fn play(
    model: &ScenarioModel,
    profile: &StrategyProfile,
    seed: u64,
    solver: &mut Solver<'_>,
) -> Result<EpisodeOutcome, GameError> {
    let n = model.num_agents();
    if profile.len() != n {
        return Err(GameError::InvalidContext(format!(
            "profile has {} strategies for {n} agents",
            profile.len()
        )));
    }
    let (state, signals) = draw_latent(model, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STRATEGY_STREAM]));
    let mut ctx = DecisionContext::initial(model);
    let mut choices = Vec::with_capacity(n);
    for (i, &s) in signals.iter().enumerate() {
        let choice = decide(&ctx, s, profile.of(i + 1), model, &mut rng, solver)?;
        choices.push(choice);
        ctx = advance_context(&ctx, choice, s, model)?;
    }
    let grouping = ctx.grouping().clone();
    let utilities = choices
        .iter()
        .map(|&c| model.utility(state, c, grouping.counts()[c] as usize))
        .collect();
    Ok(EpisodeOutcome {
        state,
        signals,
        choices,
        utilities,
        grouping,
    })
}

/// Per-deal customer and revenue statistics, overall and conditioned on
/// the deal's true quality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DealMetrics {
    pub customers: QualitySplit,
    pub revenue: QualitySplit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualitySplit {
    pub all: MeanStat,
    pub high: MeanStat,
    pub low: MeanStat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMetrics {
    None,
    Spectrum {
        interference: MeanStat,
    },
    Cloud {
        /// Availability of the upgraded platform and of the other one.
        reliability_high: MeanStat,
        reliability_low: MeanStat,
    },
    Groupon {
        deals: Vec<DealMetrics>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub trials: usize,
    pub seed: u64,
    /// Indexed by agent position, 0-based.
    pub agent_utility: Vec<MeanStat>,
    /// Per-trial average over agents.
    pub overall_utility: MeanStat,
    /// Occupancy of each resource at the end of an episode.
    pub resource_load: Vec<MeanStat>,
    pub scenario: ScenarioMetrics,
}

impl RunMetrics {
    pub fn from_outcomes(model: &ScenarioModel, outcomes: &[EpisodeOutcome], seed: u64) -> Self {
        let agent_utility = (0..model.num_agents())
            .map(|i| MeanStat::of(outcomes.iter().map(|o| o.utilities[i])))
            .collect();
        let resource_load = (0..model.num_resources())
            .map(|j| MeanStat::of(outcomes.iter().map(|o| o.grouping.counts()[j] as f64)))
            .collect();
        RunMetrics {
            trials: outcomes.len(),
            seed,
            agent_utility,
            overall_utility: MeanStat::of(outcomes.iter().map(EpisodeOutcome::mean_utility)),
            resource_load,
            scenario: scenario_metrics(model, outcomes),
        }
    }
}

/// Number of agents on the occupied channel (state `l` means channel `l`).
pub fn interference(outcome: &EpisodeOutcome) -> f64 {
    outcome
        .choices
        .iter()
        .filter(|&&c| c == outcome.state)
        .count() as f64
}

/// Availability of the upgraded platform and of the other platform.
pub fn reliability_pair(
    outcome: &EpisodeOutcome,
    crash: &[f64],
    high_platform: &[usize],
) -> (f64, f64) {
    let k = outcome.grouping.counts().len();
    let high = high_platform[outcome.state];
    let availability =
        |x: usize| (1.0 - crash[outcome.state * k + x]).powi(outcome.grouping.counts()[x] as i32);
    let low = (0..k).find(|&x| x != high).unwrap_or(high);
    (availability(high), availability(low))
}

fn scenario_metrics(model: &ScenarioModel, outcomes: &[EpisodeOutcome]) -> ScenarioMetrics {
    match model.metrics() {
        ScenarioMetricsSpec::None => ScenarioMetrics::None,
        ScenarioMetricsSpec::Interference => ScenarioMetrics::Spectrum {
            interference: MeanStat::of(outcomes.iter().map(interference)),
        },
        ScenarioMetricsSpec::Reliability {
            crash,
            high_platform,
        } => {
            let pairs: Vec<_> = outcomes
                .iter()
                .map(|o| reliability_pair(o, crash, high_platform))
                .collect();
            ScenarioMetrics::Cloud {
                reliability_high: MeanStat::of(pairs.iter().map(|p| p.0)),
                reliability_low: MeanStat::of(pairs.iter().map(|p| p.1)),
            }
        }
        ScenarioMetricsSpec::Revenue { prices, high } => {
            let k = model.num_resources();
            let deals = (0..k)
                .map(|j| {
                    let customers = |o: &EpisodeOutcome| o.grouping.counts()[j] as f64;
                    let is_high = |o: &&EpisodeOutcome| high[o.state * k + j];
                    let split = |f: &dyn Fn(&EpisodeOutcome) -> f64| QualitySplit {
                        all: MeanStat::of(outcomes.iter().map(f)),
                        high: MeanStat::of(outcomes.iter().filter(is_high).map(f)),
                        low: MeanStat::of(outcomes.iter().filter(|o| !is_high(o)).map(f)),
                    };
                    DealMetrics {
                        customers: split(&customers),
                        revenue: split(&|o| customers(o) * prices[j]),
                    }
                })
                .collect();
            ScenarioMetrics::Groupon { deals }
        }
    }
}

/// A Monte-Carlo run that keeps its episodes for paired analysis.
#[derive(Debug, Clone)]
pub struct Run {
    pub kind: Option<StrategyKind>,
    pub outcomes: Vec<EpisodeOutcome>,
    pub metrics: RunMetrics,
}

/// Episodes for trials `0..trials`, in trial order. Runs in parallel; the
/// result does not depend on the number of worker threads.
pub fn simulate(
    model: &ScenarioModel,
    profile: &StrategyProfile,
    trials: usize,
    seed: u64,
) -> Result<Vec<EpisodeOutcome>, GameError> {
    let table = if profile.uses(StrategyKind::BestResponse) {
        Some(PolicyTable::solve(model)?)
    } else {
        None
    };
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            match &table {
                Some(table) => run_episode_with_table(model, profile, s, table),
                None => run_episode(model, profile, s),
            }
        })
        .collect()
}

pub fn monte_carlo(
    model: &ScenarioModel,
    profile: &StrategyProfile,
    trials: usize,
    seed: u64,
) -> Result<RunMetrics, GameError> {
    if trials == 0 {
        return Err(GameError::InvalidContext(
            "trials must be at least 1".into(),
        ));
    }
    let outcomes = simulate(model, profile, trials, seed)?;
    Ok(RunMetrics::from_outcomes(model, &outcomes, seed))
}

/// Homogeneous runs of several kinds on common random numbers.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub runs: Vec<Run>,
}

impl Comparison {
    pub fn get(&self, kind: StrategyKind) -> Option<&Run> {
        self.runs.iter().find(|r| r.kind == Some(kind))
    }

    pub fn metrics(&self, kind: StrategyKind) -> Option<&RunMetrics> {
        self.get(kind).map(|r| &r.metrics)
    }

    /// Mean and standard error of `f(a) - f(b)` over paired trials.
    pub fn paired(
        &self,
        a: StrategyKind,
        b: StrategyKind,
        f: impl Fn(&EpisodeOutcome) -> f64,
    ) -> Option<MeanStat> {
        let (ra, rb) = (self.get(a)?, self.get(b)?);
        Some(MeanStat::of(
            ra.outcomes
                .iter()
                .zip(&rb.outcomes)
                .map(|(x, y)| f(x) - f(y)),
        ))
    }

    /// Paired difference of overall mean utilities.
    pub fn paired_overall(&self, a: StrategyKind, b: StrategyKind) -> Option<MeanStat> {
        self.paired(a, b, EpisodeOutcome::mean_utility)
    }
}

pub fn compare_strategies(
    model: &ScenarioModel,
    kinds: &[StrategyKind],
    trials: usize,
    seed: u64,
) -> Result<Comparison, GameError> {
    if kinds.is_empty() {
        return Err(GameError::InvalidContext("no strategies to compare".into()));
    }
    if trials == 0 {
        return Err(GameError::InvalidContext(
            "trials must be at least 1".into(),
        ));
    }
    let runs = kinds
        .iter()
        .map(|&kind| {
            let profile = StrategyProfile::homogeneous(kind, model.num_agents());
            let outcomes = simulate(model, &profile, trials, seed)?;
            let metrics = RunMetrics::from_outcomes(model, &outcomes, seed);
            Ok(Run {
                kind: Some(kind),
                outcomes,
                metrics,
            })
        })
        .collect::<Result<_, GameError>>()?;
    Ok(Comparison { runs })
}

/// How grid points are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// Each point hashes its grid index into the master seed.
    #[default]
    Independent,
    /// Every point reuses the master seed, so trial `t` is paired across
    /// points as well as across strategies.
    Common,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

/// A one- or two-dimensional parameter grid over a base scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    /// Outer axis first. Empty means a single point at `base`.
    pub axes: Vec<SweepAxis>,
    pub kinds: Vec<StrategyKind>,
    pub trials: usize,
    pub seed: u64,
    pub seed_mode: SeedMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    /// One value per axis.
    pub values: Vec<f64>,
    pub config: ScenarioConfig,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub point: GridPoint,
    /// `(kind, metrics)` in the order of `SweepSpec::kinds`.
    pub metrics: Vec<(StrategyKind, RunMetrics)>,
}

impl SweepSpec {
    /// Every grid point with its validated scenario config, outer axis
    /// slowest. Fails on the first out-of-domain value.
    pub fn grid(&self) -> Result<Vec<GridPoint>, ConfigError> {
        if self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(ConfigError::invalid("values", "sweep grid is empty"));
        }
        let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.axes {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut next = prefix.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .enumerate()
            .map(|(index, values)| {
                let mut config = self.base.clone();
                for (axis, &v) in self.axes.iter().zip(&values) {
                    config = config.with_param(&axis.param, v)?;
                }
                let seed = match self.seed_mode {
                    SeedMode::Independent if !self.axes.is_empty() => {
                        derive_seed(self.seed, &[u64::MAX, index as u64])
                    }
                    _ => self.seed,
                };
                Ok(GridPoint {
                    index,
                    values,
                    config,
                    seed,
                })
            })
            .collect()
    }
}

/// Runs the sweep, handing each point's full comparison to `visit` before
/// its episodes are dropped.
pub fn run_sweep_with(
    spec: &SweepSpec,
    mut visit: impl FnMut(&GridPoint, &Comparison),
) -> Result<Vec<SweepPoint>, SweepError> {
    let grid = spec.grid()?;
    let mut out = Vec::with_capacity(grid.len());
    for point in grid {
        let model = point.config.build()?;
        let cmp = compare_strategies(&model, &spec.kinds, spec.trials, point.seed)?;
        visit(&point, &cmp);
        let metrics = cmp
            .runs
            .into_iter()
            .map(|r| (r.kind.expect("homogeneous run"), r.metrics))
            .collect();
        out.push(SweepPoint { point, metrics });
    }
    Ok(out)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>, SweepError> {
    run_sweep_with(spec, |_, _| {})
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{build_spectrum, SpectrumConfig};

    fn spectrum() -> ScenarioModel {
        build_spectrum(&SpectrumConfig::default()).unwrap()
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(trial_seed(0, 0), trial_seed(0, 1));
        assert_ne!(trial_seed(0, 0), trial_seed(1, 0));
    }

    #[test]
    fn episode_invariants() {
        let m = spectrum();
        let table = PolicyTable::solve(&m).unwrap();
        for kind in StrategyKind::ALL {
            let p = StrategyProfile::homogeneous(kind, m.num_agents());
            for seed in 0..20 {
                let o = run_episode_with_table(&m, &p, seed, &table).unwrap();
                assert_eq!(o.grouping, Grouping::tally(&o.choices, m.num_resources()));
                assert_eq!(o.grouping.total() as usize, m.num_agents());
                for (i, &c) in o.choices.iter().enumerate() {
                    assert_eq!(
                        o.utilities[i],
                        m.utility(o.state, c, o.grouping.counts()[c] as usize)
                    );
                }
                assert_eq!(o, run_episode_with_table(&m, &p, seed, &table).unwrap());
            }
        }
    }

    #[test]
    fn single_agent_episode() {
        let m = build_spectrum(&SpectrumConfig {
            n: 1,
            ..SpectrumConfig::default()
        })
        .unwrap();
        let p = StrategyProfile::homogeneous(StrategyKind::BestResponse, 1);
        let o = run_episode(&m, &p, 3).unwrap();
        assert_eq!(o.grouping.total(), 1);
        assert_eq!(o.utilities[0], m.utility(o.state, o.choices[0], 1));
    }

    #[test]
    fn latent_draws_shared_across_kinds() {
        let m = spectrum();
        for seed in 0..10 {
            let a = run_episode(
                &m,
                &StrategyProfile::homogeneous(StrategyKind::Random, 7),
                seed,
            )
            .unwrap();
            let b = run_episode(
                &m,
                &StrategyProfile::homogeneous(StrategyKind::Myopic, 7),
                seed,
            )
            .unwrap();
            assert_eq!((a.state, &a.signals), (b.state, &b.signals));
        }
    }

    #[test]
    fn table_and_lazy_agree() {
        let m = spectrum();
        let p = StrategyProfile::homogeneous(StrategyKind::BestResponse, 7);
        let table = PolicyTable::solve(&m).unwrap();
        for seed in 0..3 {
            assert_eq!(
                run_episode(&m, &p, seed).unwrap(),
                run_episode_with_table(&m, &p, seed, &table).unwrap()
            );
        }
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let m = spectrum();
        let p = StrategyProfile::homogeneous(StrategyKind::Signal, 7);
        let r = monte_carlo(&m, &p, 1, 9).unwrap();
        let o = run_episode(&m, &p, trial_seed(9, 0)).unwrap();
        assert_eq!(r.overall_utility.mean, o.mean_utility());
        assert_eq!(r.overall_utility.stderr, 0.0);
        assert_eq!(r.agent_utility[2].mean, o.utilities[2]);
    }

    #[test]
    fn longer_runs_extend_shorter_ones() {
        let m = spectrum();
        let p = StrategyProfile::homogeneous(StrategyKind::Learning, 7);
        let short = simulate(&m, &p, 50, 4).unwrap();
        let long = simulate(&m, &p, 100, 4).unwrap();
        assert_eq!(short[..], long[..50]);
    }

    #[test]
    fn sweep_grid_shape_and_seeds() {
        let spec = SweepSpec {
            base: ScenarioConfig::Spectrum(SpectrumConfig::default()),
            axes: vec![SweepAxis {
                param: "d".into(),
                values: vec![0.1, 0.2, 0.3],
            }],
            kinds: vec![StrategyKind::Signal],
            trials: 10,
            seed: 1,
            seed_mode: SeedMode::Independent,
        };
        let grid = spec.grid().unwrap();
        assert_eq!(grid.len(), 3);
        assert_ne!(grid[0].seed, grid[1].seed);
        let common = SweepSpec {
            seed_mode: SeedMode::Common,
            ..spec.clone()
        }
        .grid()
        .unwrap();
        assert!(common.iter().all(|g| g.seed == 1));

        let bad = SweepSpec {
            axes: vec![SweepAxis {
                param: "p_f".into(),
                values: vec![0.1, 2.0],
            }],
            ..spec
        };
        assert_eq!(bad.grid().unwrap_err().key(), Some("p_f"));
    }
}
