//! Replication engine: turns single draws into estimates with error bars.
//!
//! Replication `i` of a run draws from substream `offset + i` of the seed,
//! so the result is a pure function of `(config, seed)` no matter how many
//! workers execute it. Work is split into fixed 1024-replication chunks;
//! each chunk accumulates its own moments sequentially and the chunk
//! accumulators are merged pairwise in index order, which keeps the mean
//! reproducible bit for bit across thread counts and retains precision
//! across the ten-plus orders of magnitude a heavy-tail run can span.

use std::time::Instant;

use rayon::prelude::*;

use crate::coefficients::CoefficientSequence;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::outer_randomizer::OuterLaw;
use crate::rng::{substream, SubstreamRng};
use crate::scalar::{real, Real};
use crate::stats::{merge_pairwise, RunningMoments};

/// Which estimator a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    /// Random level + conditional Monte Carlo local estimator.
    Proposed,
    /// Random level + raw indicator difference `1{S_N > b} - 1{S_{N-1} > b}`
    /// divided by `p_N`: unbiased but without the conditional smoothing.
    NaiveDebiased,
    /// Plain Monte Carlo on the series truncated at a fixed level
    /// (biased for the infinite sum; the baseline crude approach).
    CrudeTruncated(usize),
}

/// Per-run settings shared by every estimator choice.
#[derive(Debug, Clone, Copy)]
pub struct RunParams<F> {
    pub b: F,
    pub r: F,
    pub replications: u64,
    pub seed: u64,
    pub threads: Option<usize>,
    stream_offset: u64,
}

impl<F: Real> RunParams<F> {
    pub fn new(b: F, r: F, replications: u64, seed: u64) -> Self {
        Self {
            b,
            r,
            replications,
            seed,
            threads: None,
            stream_offset: 0,
        }
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }
}

/// Summary statistics of one run.
#[derive(Debug, Clone, Copy)]
pub struct RunStats<F> {
    pub replications: u64,
    pub mean: F,
    /// Sample standard deviation over sqrt(replications).
    pub std_error: F,
    /// Sample standard deviation over the mean (relative error).
    pub cv: F,
    /// Mean realized level (truncation level for the crude baseline).
    pub mean_n: F,
    /// Total random samples drawn across all replications.
    pub total_work: u64,
    pub wall_seconds: f64,
}

#[derive(Clone, Copy)]
struct ChunkStats<F> {
    moments: RunningMoments<F>,
    level_sum: u64,
    work_sum: u64,
}

/// `P{S > b} ~ tail(b) * sum_n a_n^alpha`: the single-big-jump asymptote
/// reported alongside estimates.
pub fn asymptotic<F: Real>(b: F, dist: &Distribution<F>, seq: &CoefficientSequence<F>) -> F {
    dist.tail(b) * seq.sum_a_alpha(dist.alpha())
}

/// Execute `params.replications` independent draws of the chosen estimator.
pub fn run<F: Real>(
    choice: EstimatorChoice,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
    params: &RunParams<F>,
) -> Result<RunStats<F>> {
    if params.replications < 2 {
        return Err(Error::invalid(
            "replications",
            format!("need at least 2 replications, got {}", params.replications),
        ));
    }
    let law = match choice {
        EstimatorChoice::CrudeTruncated(m) => {
            if m < 1 {
                return Err(Error::invalid(
                    "m",
                    "crude truncation level must be at least 1",
                ));
            }
            None
        }
        _ => Some(OuterLaw::new(params.b, params.r, seq, dist.alpha())?),
    };
    let crude_weights: Vec<F> = match choice {
        EstimatorChoice::CrudeTruncated(m) => (1..=m).map(|k| seq.coeff(k)).collect(),
        _ => Vec::new(),
    };

    let started = Instant::now();
    let replicate = |rng: &mut SubstreamRng| -> (F, u64, u64) {
        match choice {
            EstimatorChoice::Proposed => {
                let draw = law.as_ref().unwrap().estimate_once(dist, rng);
                (draw.z, draw.n_used as u64, draw.work)
            }
            EstimatorChoice::NaiveDebiased => {
                let law = law.as_ref().unwrap();
                let (n, p_n) = law.sample_level_with_prob(rng);
                let mut sum = F::zero();
                let mut last = F::zero();
                for i in 1..=n {
                    let w = seq.coeff(i) * dist.sample(rng);
                    sum += w;
                    if i == n {
                        last = w;
                    }
                }
                let hit_n = if sum > params.b { F::one() } else { F::zero() };
                let hit_prev = if sum - last > params.b {
                    F::one()
                } else {
                    F::zero()
                };
                ((hit_n - hit_prev) / p_n, n as u64, 1 + n as u64)
            }
            EstimatorChoice::CrudeTruncated(m) => {
                let mut sum = F::zero();
                for &w in &crude_weights {
                    sum += w * dist.sample(rng);
                }
                let z = if sum > params.b { F::one() } else { F::zero() };
                (z, m as u64, m as u64)
            }
        }
    };

    const CHUNK: u64 = 1024;
    let total = params.replications;
    let n_chunks = total.div_ceil(CHUNK);
    let chunk_job = |chunk: u64| -> ChunkStats<F> {
        let lo = chunk * CHUNK;
        let hi = ((chunk + 1) * CHUNK).min(total);
        let mut moments = RunningMoments::new();
        let mut level_sum = 0u64;
        let mut work_sum = 0u64;
        for i in lo..hi {
            let mut rng = substream(params.seed, params.stream_offset + i);
            let (z, n, w) = replicate(&mut rng);
            moments.push(z);
            level_sum += n;
            work_sum += w;
        }
        ChunkStats {
            moments,
            level_sum,
            work_sum,
        }
    };

    let partials: Vec<ChunkStats<F>> = match params.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))?
            .install(|| (0..n_chunks).into_par_iter().map(chunk_job).collect()),
        None => (0..n_chunks).into_par_iter().map(chunk_job).collect(),
    };

    let level_sum: u64 = partials.iter().map(|c| c.level_sum).sum();
    let total_work: u64 = partials.iter().map(|c| c.work_sum).sum();
    let moments = merge_pairwise(partials.into_iter().map(|c| c.moments).collect());
    let wall_seconds = started.elapsed().as_secs_f64();

    let mean = moments.mean();
    let sd = moments.std_dev();
    Ok(RunStats {
        replications: total,
        mean,
        std_error: moments.std_error(),
        cv: sd / mean,
        mean_n: real::<F>(level_sum as f64) / real(total as f64),
        total_work,
        wall_seconds,
    })
}

/// One run per threshold, sharing the base seed with disjoint per-threshold
/// substream blocks.
pub fn sweep<F: Real>(
    choice: EstimatorChoice,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
    b_values: &[F],
    base: &RunParams<F>,
) -> Result<Vec<RunStats<F>>> {
    if b_values.is_empty() {
        return Err(Error::invalid("b_values", "need at least one threshold"));
    }
    b_values
        .iter()
        .enumerate()
        .map(|(idx, &b)| {
            let params = RunParams {
                b,
                stream_offset: (idx as u64) << 40,
                ..*base
            };
            run(choice, dist, seq, &params)
        })
        .collect()
}
