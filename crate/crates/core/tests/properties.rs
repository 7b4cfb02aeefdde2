//! Structural invariants over randomly generated games.

use crg_core::strategy::{decide, myopic_choice};
use crg_core::{
    advance_context, belief_update, Belief, BestResponder, DecisionContext, Grouping,
    ScenarioModel, SignalCounts, Solver, StrategyKind,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Raw ingredients of a game, kept so a test can rebuild it transformed.
#[derive(Debug, Clone)]
struct Game {
    n: usize,
    prior: Vec<f64>,
    /// `lik[l][s]`
    lik: Vec<Vec<f64>>,
    /// `util[l][j][n - 1]`, non-increasing in `n`
    util: Vec<Vec<Vec<f64>>>,
}

impl Game {
    fn random(seed: u64) -> Game {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = rng.gen_range(2..=3);
        let resources = rng.gen_range(2..=3);
        let signals = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=4);
        let normalized = |rng: &mut ChaCha8Rng, len: usize| {
            let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect::<Vec<_>>()
        };
        let prior = normalized(&mut rng, states);
        let lik = (0..states).map(|_| normalized(&mut rng, signals)).collect();
        let util = (0..states)
            .map(|_| {
                (0..resources)
                    .map(|_| {
                        let mut v = rng.gen_range(0.0..10.0);
                        (0..n)
                            .map(|_| {
                                let here = v;
                                v -= rng.gen_range(0.0..4.0);
                                here
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Game {
            n,
            prior,
            lik,
            util,
        }
    }

    fn resources(&self) -> usize {
        self.util[0].len()
    }

    fn model(&self) -> ScenarioModel {
        self.model_with(|l, j, n| self.util[l][j][n - 1])
    }

    fn model_with(&self, u: impl Fn(usize, usize, usize) -> f64) -> ScenarioModel {
        ScenarioModel::builder(self.prior.len(), self.resources(), self.n)
            .prior(self.prior.clone())
            .signals(self.lik[0].len(), |s, l| self.lik[l][s])
            .utility(u)
            .build()
            .unwrap()
    }
}

/// A post-signal context for a random agent reached by random play.
fn random_context(m: &ScenarioModel, rng: &mut ChaCha8Rng) -> (Vec<(usize, usize)>, usize) {
    let agent = rng.gen_range(1..=m.num_agents());
    let hist = (1..agent)
        .map(|_| {
            (
                rng.gen_range(0..m.num_resources()),
                rng.gen_range(0..m.num_signals()),
            )
        })
        .collect();
    (hist, rng.gen_range(0..m.num_signals()))
}

fn build_context(
    m: &ScenarioModel,
    hist: &[(usize, usize)],
    own: usize,
    relabel: &[usize],
) -> DecisionContext {
    let choices: Vec<usize> = hist.iter().map(|h| relabel[h.0]).collect();
    let mut counts = vec![0u32; m.num_signals()];
    for h in hist {
        counts[h.1] += 1;
    }
    counts[own] += 1;
    DecisionContext::new(
        m,
        hist.len() + 1,
        Grouping::tally(&choices, m.num_resources()),
        SignalCounts(counts),
    )
    .unwrap()
}

fn identity(k: usize) -> Vec<usize> {
    (0..k).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn beliefs_stay_normalized_and_order_free(seed in any::<u64>(), len in 0usize..30) {
        let m = Game::random(seed).model();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut signals: Vec<usize> = (0..len).map(|_| rng.gen_range(0..m.num_signals())).collect();
        let mut counts = vec![0u32; m.num_signals()];
        for &s in &signals {
            counts[s] += 1;
        }
        let canonical = Belief::from_counts(&m, &counts).unwrap();
        signals.shuffle(&mut rng);
        let mut b = Belief::prior(&m);
        for &s in &signals {
            b = belief_update(&b, s, &m).unwrap();
            let total: f64 = b.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
        for (x, y) in b.probs().iter().zip(canonical.probs()) {
            prop_assert!((x - y).abs() < 1e-12, "{:?} vs {:?}", b.probs(), canonical.probs());
        }
    }

    #[test]
    fn relabeling_resources_permutes_values(seed in any::<u64>()) {
        let game = Game::random(seed);
        let k = game.resources();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut perm = identity(k);
        perm.shuffle(&mut rng);
        let mut inverse = vec![0; k];
        for (j, &p) in perm.iter().enumerate() {
            inverse[p] = j;
        }
        let m = game.model();
        let relabeled = game.model_with(|l, j, n| game.util[l][inverse[j]][n - 1]);
        let (hist, own) = random_context(&m, &mut rng);
        let eu = Solver::new(&m).expected_utilities(&build_context(&m, &hist, own, &identity(k))).unwrap();
        let eu2 = Solver::new(&relabeled)
            .expected_utilities(&build_context(&relabeled, &hist, own, &perm))
            .unwrap();
        for j in 0..k {
            prop_assert!((eu[j] - eu2[perm[j]]).abs() < 1e-9, "{eu:?} vs {eu2:?} under {perm:?}");
        }
    }

    #[test]
    fn affine_utilities_rescale_values(seed in any::<u64>(), a in 0.25f64..4.0, b in -10.0f64..10.0) {
        let game = Game::random(seed);
        let m = game.model();
        let shifted = game.model_with(|l, j, n| a * game.util[l][j][n - 1] + b);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let (hist, own) = random_context(&m, &mut rng);
        let k = game.resources();
        let ctx = build_context(&m, &hist, own, &identity(k));
        let ctx2 = build_context(&shifted, &hist, own, &identity(k));
        let mut s1 = Solver::new(&m);
        let mut s2 = Solver::new(&shifted);
        let eu = s1.expected_utilities(&ctx).unwrap();
        let eu2 = s2.expected_utilities(&ctx2).unwrap();
        for j in 0..k {
            prop_assert!((a * eu[j] + b - eu2[j]).abs() < 1e-9 * (1.0 + eu2[j].abs()));
        }
        prop_assert_eq!(s1.best_response(&ctx).unwrap(), s2.best_response(&ctx2).unwrap());
    }

    #[test]
    fn expected_counts_cover_remaining_agents(seed in any::<u64>()) {
        let m = Game::random(seed).model();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let (hist, own) = random_context(&m, &mut rng);
        let ctx = build_context(&m, &hist, own, &identity(m.num_resources()));
        let mut solver = Solver::new(&m);
        let remaining = (m.num_agents() - ctx.agent() + 1) as f64;
        for own_choice in 0..m.num_resources() {
            for l in 0..m.num_states() {
                let mut total = 0.0;
                for target in 0..m.num_resources() {
                    let d = solver.successor_count_distribution(&ctx, own_choice, target, l).unwrap();
                    prop_assert!((d.total() - 1.0).abs() < 1e-12);
                    total += d.mean();
                }
                prop_assert!((total - remaining).abs() < 1e-9, "{total} vs {remaining}");
            }
        }
    }

    #[test]
    fn last_agent_is_myopic(seed in any::<u64>()) {
        let m = Game::random(seed).model();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let hist: Vec<(usize, usize)> = (1..m.num_agents())
            .map(|_| (rng.gen_range(0..m.num_resources()), rng.gen_range(0..m.num_signals())))
            .collect();
        let ctx = build_context(&m, &hist, rng.gen_range(0..m.num_signals()), &identity(m.num_resources()));
        prop_assert_eq!(ctx.agent(), m.num_agents());
        prop_assert_eq!(Solver::new(&m).best_response(&ctx).unwrap(), myopic_choice(&ctx, &m));
    }

    #[test]
    fn signal_and_learning_ignore_what_they_should(seed in any::<u64>()) {
        let m = Game::random(seed).model();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
        let mut solver = Solver::new(&m);
        let own = rng.gen_range(0..m.num_signals());
        // the same signals revealed, different predecessor choices
        let mut a = DecisionContext::initial(&m);
        let mut b = DecisionContext::initial(&m);
        let mut c = DecisionContext::initial(&m);
        for _ in 1..m.num_agents() {
            let s = rng.gen_range(0..m.num_signals());
            a = advance_context(&a, rng.gen_range(0..m.num_resources()), s, &m).unwrap();
            b = advance_context(&b, rng.gen_range(0..m.num_resources()), s, &m).unwrap();
            c = advance_context(&c, rng.gen_range(0..m.num_resources()), rng.gen_range(0..m.num_signals()), &m).unwrap();
        }
        let mut pick = |ctx: &DecisionContext, kind| decide(ctx, own, kind, &m, &mut rng.clone(), &mut solver).unwrap();
        prop_assert_eq!(pick(&a, StrategyKind::Learning), pick(&b, StrategyKind::Learning));
        prop_assert_eq!(pick(&a, StrategyKind::Signal), pick(&c, StrategyKind::Signal));
    }
}
