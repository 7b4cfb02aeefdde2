//! Exhaustive extensive-form evaluation with explicit histories.
//!
//! No memo, no count-vector keys: every decision is recomputed from the raw
//! sequence of (choice, signal) pairs, beliefs come from the direct product
//! `prior * Π f(s_t | l)`, and successors' plays are enumerated signal
//! sequence by signal sequence. Tied values (within 1e-9) go to the lower
//! index, scanning upward and only switching on a strict improvement.

use crg_core::ScenarioModel;

pub type History = Vec<(usize, usize)>;

pub struct Oracle<'m> {
    pub m: &'m ScenarioModel,
}

impl<'m> Oracle<'m> {
    pub fn new(m: &'m ScenarioModel) -> Self {
        Oracle { m }
    }

    /// Posterior after `signals`, or `None` when they are impossible.
    pub fn posterior(&self, signals: &[usize]) -> Option<Vec<f64>> {
        let w: Vec<f64> = (0..self.m.num_states())
            .map(|l| {
                self.m.prior()[l]
                    * signals
                        .iter()
                        .map(|&s| self.m.likelihood(s, l))
                        .product::<f64>()
            })
            .collect();
        let z: f64 = w.iter().sum();
        (z > 0.0).then(|| w.iter().map(|x| x / z).collect())
    }

    /// Best response of the agent after `hist` holding `own`.
    pub fn choice(&self, hist: &[(usize, usize)], own: usize) -> usize {
        let mut best = 0;
        let mut best_v = self.value(hist, own, 0);
        for j in 1..self.m.num_resources() {
            let v = self.value(hist, own, j);
            if v > best_v + 1e-9 {
                best = j;
                best_v = v;
            }
        }
        best
    }

    pub fn value(&self, hist: &[(usize, usize)], own: usize, choice: usize) -> f64 {
        let mut signals: Vec<usize> = hist.iter().map(|h| h.1).collect();
        signals.push(own);
        let g = self.posterior(&signals).expect("reachable history");
        let mut total = 0.0;
        for (l, &gl) in g.iter().enumerate() {
            if gl <= 0.0 {
                continue;
            }
            let mut path = hist.to_vec();
            path.push((choice, own));
            let mut ev = 0.0;
            for (w, final_choices) in self.play_out(&mut path, l) {
                let n = final_choices.iter().filter(|&&c| c == choice).count();
                ev += w * self.m.utility(l, choice, n);
            }
            total += gl * ev;
        }
        total
    }

    /// Every completion of `path` under state `l`, with its probability and
    /// the full choice sequence.
    pub fn play_out(&self, path: &mut History, l: usize) -> Vec<(f64, Vec<usize>)> {
        let mut out = Vec::new();
        self.walk(path, l, 1.0, &mut out);
        out
    }

    fn walk(&self, path: &mut History, l: usize, weight: f64, out: &mut Vec<(f64, Vec<usize>)>) {
        if path.len() == self.m.num_agents() {
            out.push((weight, path.iter().map(|h| h.0).collect()));
            return;
        }
        for s in 0..self.m.num_signals() {
            let w = self.m.likelihood(s, l);
            if w == 0.0 {
                continue;
            }
            let c = self.choice(path, s);
            path.push((c, s));
            self.walk(path, l, weight * w, out);
            path.pop();
        }
    }

    /// `Pr(m = x)` for the number of agents from the decider onward on
    /// `target`, given the decider picks `own_choice` in state `l`.
    pub fn count_distribution(
        &self,
        hist: &[(usize, usize)],
        own: usize,
        own_choice: usize,
        target: usize,
        l: usize,
    ) -> Vec<f64> {
        let before = hist.iter().filter(|h| h.0 == target).count();
        let width = self.m.num_agents() - hist.len();
        let mut probs = vec![0.0; width + 1];
        let mut path = hist.to_vec();
        path.push((own_choice, own));
        for (w, choices) in self.play_out(&mut path, l) {
            let n = choices.iter().filter(|&&c| c == target).count();
            probs[n - before] += w;
        }
        probs
    }

    /// Every (history, own signal) an agent can face when all predecessors
    /// best-respond and signals have positive probability.
    pub fn reachable(&self) -> Vec<(History, usize)> {
        let mut out = Vec::new();
        let mut hist = Vec::new();
        self.collect(&mut hist, &mut out);
        out
    }

    fn collect(&self, hist: &mut History, out: &mut Vec<(History, usize)>) {
        if hist.len() == self.m.num_agents() {
            return;
        }
        let seen: Vec<usize> = hist.iter().map(|h| h.1).collect();
        for s in 0..self.m.num_signals() {
            let mut with = seen.clone();
            with.push(s);
            if self.posterior(&with).is_none() {
                continue;
            }
            out.push((hist.clone(), s));
            let c = self.choice(hist, s);
            hist.push((c, s));
            self.collect(hist, out);
            hist.pop();
        }
    }
}
