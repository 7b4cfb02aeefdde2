//! Shared test fixtures: a brute-force game-tree oracle and model corpora.
#![allow(dead_code)]

pub mod oracle;

use crg_core::scenarios::{build_groupon, GrouponConfig};
use crg_core::ScenarioModel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random 2-state, 2-resource, binary-signal models with `N <= 4`.
/// Includes flat utilities, degenerate priors and impossible signals so
/// ties and zero-mass branches are exercised.
pub fn binary_corpus(count: usize, seed: u64) -> Vec<ScenarioModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| random_binary_model(&mut rng, i))
        .collect()
}

fn random_binary_model(rng: &mut ChaCha8Rng, index: usize) -> ScenarioModel {
    let n = rng.gen_range(1..=4);
    let g = match index % 10 {
        0 => 1.0,
        1 => 0.5,
        _ => rng.gen_range(0.05..0.95),
    };
    let mut f0 = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
    match index % 7 {
        0 => f0 = [1.0, rng.gen_range(0.0..1.0)],
        1 => f0 = [0.75, 0.25],
        _ => {}
    }
    // u(l, j, n) = base - sum of the first n-1 decrements
    let mut table = [[[0.0f64; 4]; 2]; 2];
    let flat = index.is_multiple_of(5);
    for state in table.iter_mut() {
        for row in state.iter_mut() {
            let mut v = rng.gen_range(0.0..10.0f64).round();
            for cell in row.iter_mut() {
                *cell = v;
                if !flat {
                    v -= rng.gen_range(0.0..5.0f64);
                }
            }
        }
    }
    if index.is_multiple_of(3) {
        // symmetric payoffs: resource j is good in state j
        let hi = table[0][0];
        let lo = table[0][1];
        table[1][1] = hi;
        table[1][0] = lo;
    }
    ScenarioModel::builder(2, 2, n)
        .name(format!("corpus-{index}"))
        .prior(vec![g, 1.0 - g])
        .signals(2, |s, l| if s == 0 { f0[l] } else { 1.0 - f0[l] })
        .utility(|l, j, n| table[l][j][n - 1])
        .build()
        .expect("corpus model is valid")
}

/// Random two-deal groupon models with up to `max_n` customers.
pub fn groupon_corpus(count: usize, max_n: usize, seed: u64) -> Vec<ScenarioModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let q_l = rng.gen_range(0.0..20.0);
            let cfg = GrouponConfig {
                n: rng.gen_range(1..=max_n),
                q_h: q_l + rng.gen_range(1.0..20.0),
                q_l,
                c: vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)],
                d: rng.gen_range(0.0..4.0),
                p: rng.gen_range(0.5..1.0),
                prior_high: vec![rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)],
                ..GrouponConfig::default()
            };
            build_groupon(&cfg).expect("valid groupon config")
        })
        .collect()
}

use crg_core::{DecisionContext, Grouping, LinearSolver, SignalCounts, Solver};
use oracle::Oracle;

/// The solver's view of an explicit history plus the decider's own signal.
pub fn context(m: &ScenarioModel, hist: &[(usize, usize)], own: usize) -> DecisionContext {
    let choices: Vec<usize> = hist.iter().map(|h| h.0).collect();
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
    .expect("well-formed context")
}

/// Compares best responses (exact) and successor-count distributions
/// (within `tol`) with the oracle at every reachable context. Returns the
/// number of contexts checked.
pub fn check_against_oracle(m: &ScenarioModel, tol: f64) -> Result<usize, String> {
    let oracle = Oracle::new(m);
    let mut solver = Solver::new(m);
    let reachable = oracle.reachable();
    for (hist, own) in &reachable {
        let ctx = context(m, hist, *own);
        let expect = oracle.choice(hist, *own);
        let got =
            crg_core::BestResponder::best_response(&mut solver, &ctx).map_err(|e| e.to_string())?;
        if got != expect {
            return Err(format!(
                "{}: history {hist:?} own {own}: solver {got}, oracle {expect}",
                m.name()
            ));
        }
        for own_choice in 0..m.num_resources() {
            for target in 0..m.num_resources() {
                for l in 0..m.num_states() {
                    if ctx.belief().get(l) <= 0.0 {
                        continue;
                    }
                    let want = oracle.count_distribution(hist, *own, own_choice, target, l);
                    let have = solver
                        .successor_count_distribution(&ctx, own_choice, target, l)
                        .map_err(|e| e.to_string())?;
                    if have.probs().len() != want.len()
                        || have
                            .probs()
                            .iter()
                            .zip(&want)
                            .any(|(a, b)| (a - b).abs() > tol)
                    {
                        return Err(format!(
                            "{}: history {hist:?} own {own} choice {own_choice} target {target} state {l}: {:?} vs {want:?}",
                            m.name(),
                            have.probs()
                        ));
                    }
                }
            }
        }
    }
    Ok(reachable.len())
}

/// Compares linear-shortcut and full expected utilities at every context
/// reachable under best response. Returns (contexts, worst difference).
pub fn check_linear_shortcut(m: &ScenarioModel) -> Result<(usize, f64), String> {
    let mut full = Solver::new(m);
    let mut linear = LinearSolver::new(m).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut seen = 0;
    let mut stack = vec![DecisionContext::initial(m)];
    while let Some(pre) = stack.pop() {
        for s in 0..m.num_signals() {
            if m.predictive(pre.belief(), s) <= 0.0 {
                continue;
            }
            let ctx = pre.observe(s, m).map_err(|e| e.to_string())?;
            seen += 1;
            for j in 0..m.num_resources() {
                let a = full.expected_utility(&ctx, j).map_err(|e| e.to_string())?;
                let b = linear
                    .expected_utility(&ctx, j)
                    .map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs());
            }
            if pre.agent() < m.num_agents() {
                let c = crg_core::BestResponder::best_response(&mut full, &ctx)
                    .map_err(|e| e.to_string())?;
                stack.push(crg_core::advance_context(&pre, c, s, m).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok((seen, worst))
}
