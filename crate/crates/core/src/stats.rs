//! Streaming moment accumulation with order-stable merging.

use crate::scalar::{real, Real};

/// Single-pass mean and variance (Welford), mergeable across partitions.
///
/// Merging is associative up to round-off; the runner always merges partial
/// accumulators pairwise in a fixed index order, so results do not depend
/// on how work was scheduled.
#[derive(Debug, Clone, Copy)]
pub struct RunningMoments<F> {
    count: u64,
    mean: F,
    m2: F,
}

impl<F: Real> Default for RunningMoments<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> RunningMoments<F> {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: F::zero(),
            m2: F::zero(),
        }
    }

    pub fn push(&mut self, x: F) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / real(self.count as f64);
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. parallel combination of two accumulators.
    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let n_a = real::<F>(self.count as f64);
        let n_b = real::<F>(other.count as f64);
        let n = n_a + n_b;
        let delta = other.mean - self.mean;
        Self {
            count: self.count + other.count,
            mean: self.mean + delta * n_b / n,
            m2: self.m2 + other.m2 + delta * delta * n_a * n_b / n,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> F {
        self.mean
    }

    /// Unbiased sample variance; zero below two observations.
    pub fn variance(&self) -> F {
        if self.count > 1 {
            self.m2 / real((self.count - 1) as f64)
        } else {
            F::zero()
        }
    }

    pub fn std_dev(&self) -> F {
        self.variance().sqrt()
    }

    pub fn std_error(&self) -> F {
        (self.variance() / real(self.count as f64)).sqrt()
    }
}

/// Reduce partial accumulators by pairwise rounds in index order.
pub fn merge_pairwise<F: Real>(mut parts: Vec<RunningMoments<F>>) -> RunningMoments<F> {
    if parts.is_empty() {
        return RunningMoments::new();
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|pair| {
                if pair.len() == 2 {
                    pair[0].merge(&pair[1])
                } else {
                    pair[0]
                }
            })
            .collect();
    }
    parts[0]
}
