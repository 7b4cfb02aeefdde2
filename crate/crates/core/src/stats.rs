//! Sample means with standard errors.

use serde::Serialize;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Mean of a sample with its standard error (sample standard deviation over
/// `sqrt(count)`; zero for a single observation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStat {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanStat {
    /// Two passes over the data: compensated mean, then compensated sum of
    /// squared deviations. Results depend only on the iteration order.
    pub fn of<I>(values: I) -> MeanStat
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: Clone,
    {
        let iter = values.into_iter();
        let mut sum = CompensatedSum::default();
        let mut count = 0usize;
        for x in iter.clone() {
            sum.add(x);
            count += 1;
        }
        if count == 0 {
            return MeanStat {
                mean: f64::NAN,
                stderr: f64::NAN,
                count,
            };
        }
        let mean = sum.value() / count as f64;
        if count == 1 {
            return MeanStat {
                mean,
                stderr: 0.0,
                count,
            };
        }
        let mut sq = CompensatedSum::default();
        for x in iter {
            sq.add((x - mean) * (x - mean));
        }
        let var = sq.value() / (count - 1) as f64;
        MeanStat {
            mean,
            stderr: (var / count as f64).sqrt(),
            count,
        }
    }

    /// Mean `sigmas` standard errors above zero.
    pub fn exceeds_zero_by(&self, sigmas: f64) -> bool {
        self.mean > sigmas * self.stderr
    }
}
