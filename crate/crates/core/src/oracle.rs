//! Independent ground truth for small instances.
//!
//! Nothing here shares code with the estimators: tails of two- and
//! three-term sums and the max-partitioned increments are computed by
//! deterministic quadrature, single-term tails in closed form, and
//! truncated sums by plain Monte Carlo. Tests and the `validate` command
//! compare the simulation estimators against these values.
//!
//! All integrals are evaluated after the change of variables `w = P{X > x}`,
//! which absorbs the density exactly (`f(x) dx = -dw`), and are split at
//! every kink (max switches, support caps, indicator boundaries) so each
//! segment is smooth. The two-term tail uses the exact decomposition
//!
//! `P{S2 > b} = P{A, a1 X1 > b/2} + P{B, a2 X2 > b/2} + P{both > b/2}`
//!
//! (with `A`, `B` the single-crossing events), whose pieces stay
//! well-conditioned however rare the event is; the direct formulation
//! loses the secondary bump once `b` is extreme.

use rayon::prelude::*;

use crate::coefficients::CoefficientSequence;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::rng::substream;
use crate::scalar::{real, Real};

/// How an oracle value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    ClosedForm,
    Quadrature,
    PlainMc,
}

/// A ground-truth value with a bound on its own error.
#[derive(Debug, Clone, Copy)]
pub struct OracleResult<F> {
    pub value: F,
    pub method: OracleMethod,
    pub error_bound: F,
}

/// Absolute tolerance targeted by the quadrature oracles.
pub const QUAD_TOLERANCE: f64 = 1e-12;

/// `P{S_1 > b} = tail(b / a_1)`, exact.
pub fn tail_s1<F: Real>(
    b: F,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
) -> OracleResult<F> {
    OracleResult {
        value: dist.tail(b / seq.coeff(1)),
        method: OracleMethod::ClosedForm,
        error_bound: F::zero(),
    }
}

/// `P{S_n > b}` for `n` in `{2, 3}` by deterministic quadrature.
pub fn tail_sn_quadrature<F: Real>(
    n: usize,
    b: F,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
) -> Result<OracleResult<F>> {
    match n {
        2 => Ok(tail_s2(b, dist, seq)),
        3 => Ok(tail_s3(b, dist, seq)),
        _ => Err(Error::UnsupportedOracle(format!(
            "quadrature tail is implemented for n in {{2, 3}}, got n = {n}"
        ))),
    }
}

/// The max-partitioned increments `p_1(n, b)` and `p_2(n, b)` for `n` in
/// `{2, 3}` by deterministic quadrature. These are the expectations of the
/// two local estimators.
pub fn local_parts_quadrature<F: Real>(
    n: usize,
    b: F,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
) -> Result<(OracleResult<F>, OracleResult<F>)> {
    match n {
        2 => Ok((p1_n2(b, dist, seq), p2_n2(b, dist, seq))),
        3 => Ok((p1_n3(b, dist, seq), p2_n3(b, dist, seq))),
        _ => Err(Error::UnsupportedOracle(format!(
            "quadrature partition is implemented for n in {{2, 3}}, got n = {n}"
        ))),
    }
}

/// Expectation of `g(X)` restricted to `X <= x_hi`, via `w = tail(x)`.
fn expect_below<F: Real>(
    dist: &Distribution<F>,
    x_hi: F,
    x_splits: &[F],
    g: &dyn Fn(F) -> F,
    atol: F,
    rtol: F,
) -> (F, F) {
    let s_low = dist.support_low();
    if !(x_hi > s_low) {
        return (F::zero(), F::zero());
    }
    let w_lo = dist.tail(x_hi).max(F::min_positive_value());
    let w_splits: Vec<F> = x_splits
        .iter()
        .filter(|&&x| x > s_low && x < x_hi && x.is_finite())
        .map(|&x| dist.tail(x))
        .collect();
    let out = integrate(
        &|w| g(dist.quantile_upper(w)),
        w_lo,
        F::one(),
        &w_splits,
        atol,
        rtol,
    );
    (out.value, out.error)
}

fn quad_bound<F: Real>(accumulated: F) -> F {
    real::<F>(QUAD_TOLERANCE) + real::<F>(4.0) * accumulated
}

fn tail_s2<F: Real>(b: F, dist: &Distribution<F>, seq: &CoefficientSequence<F>) -> OracleResult<F> {
    let (a1, a2) = (seq.coeff(1), seq.coeff(2));
    let s = dist.support_low();
    let half = b / real(2.0);
    let corner = dist.tail(half / a1) * dist.tail(half / a2);
    let atol = real::<F>(QUAD_TOLERANCE) / real(4.0);
    let rtol = real::<F>(1e-9);

    // Single-crossing piece: other increment below b/2, this one finishes.
    let mut part = |aj: F, ak: F| {
        expect_below(
            dist,
            half / ak,
            &[(b - aj * s) / ak],
            &|xk| dist.tail((b - ak * xk) / aj),
            atol,
            rtol,
        )
    };
    let (ia, ea) = part(a1, a2);
    let (ib, eb) = part(a2, a1);
    OracleResult {
        value: ia + ib + corner,
        method: OracleMethod::Quadrature,
        error_bound: quad_bound(ea + eb),
    }
}

fn tail_s3<F: Real>(b: F, dist: &Distribution<F>, seq: &CoefficientSequence<F>) -> OracleResult<F> {
    let (a1, a2, a3) = (seq.coeff(1), seq.coeff(2), seq.coeff(3));
    let s = dist.support_low();
    let x1_full = (b - (a2 + a3) * s) / a1;
    if !(x1_full > s) {
        return OracleResult {
            value: F::one(),
            method: OracleMethod::Quadrature,
            error_bound: F::zero(),
        };
    }
    let inner_atol = real::<F>(QUAD_TOLERANCE) / real(20.0);
    let rtol = real::<F>(1e-9);
    // P{a2 X2 + a3 X3 > rem} for the residual threshold.
    let two_term_tail = |rem: F| -> F {
        let x2_full = (rem - a3 * s) / a2;
        if !(x2_full > s) {
            return F::one();
        }
        let (v, _) = expect_below(
            dist,
            x2_full,
            &[],
            &|x2| dist.tail((rem - a2 * x2) / a3),
            inner_atol,
            rtol,
        );
        v + dist.tail(x2_full)
    };
    let (outer, err) = expect_below(
        dist,
        x1_full,
        &[b / (real::<F>(2.0) * a1), (b - a2 * s) / a1],
        &|x1| two_term_tail(b - a1 * x1),
        real::<F>(QUAD_TOLERANCE) / real(2.0),
        rtol,
    );
    OracleResult {
        value: outer + dist.tail(x1_full),
        method: OracleMethod::Quadrature,
        error_bound: quad_bound(err),
    }
}

fn p1_n2<F: Real>(b: F, dist: &Distribution<F>, seq: &CoefficientSequence<F>) -> OracleResult<F> {
    let (a1, a2) = (seq.coeff(1), seq.coeff(2));
    let s = dist.support_low();
    let (v, e) = expect_below(
        dist,
        b / a1,
        &[
            b / (real::<F>(2.0) * a1),
            (b - a2 * s) / a1,
            a2 * s / a1,
        ],
        &|x1| {
            let w = a1 * x1;
            dist.tail((b - w).max(w) / a2)
        },
        real::<F>(QUAD_TOLERANCE) / real(2.0),
        real::<F>(1e-9),
    );
    OracleResult {
        value: v,
        method: OracleMethod::Quadrature,
        error_bound: quad_bound(e),
    }
}

fn p2_n2<F: Real>(b: F, dist: &Distribution<F>, seq: &CoefficientSequence<F>) -> OracleResult<F> {
    let (a1, a2) = (seq.coeff(1), seq.coeff(2));
    let s = dist.support_low();
    // Integrand vanishes identically once a2 x2 >= b.
    let (v, e) = expect_below(
        dist,
        b / a2,
        &[
            b / (real::<F>(2.0) * a2),
            (b - a1 * s) / a2,
            a1 * s / a2,
        ],
        &|x2| {
            let w = a2 * x2;
            dist.tail((b - w).max(w) / a1) - dist.tail(b.max(w) / a1)
        },
        real::<F>(QUAD_TOLERANCE) / real(2.0),
        real::<F>(1e-9),
    );
    OracleResult {
        value: v,
        method: OracleMethod::Quadrature,
        error_bound: quad_bound(e),
    }
}

fn p1_n3<F: Real>(b: F, dist: &Distribution<F>, seq: &CoefficientSequence<F>) -> OracleResult<F> {
    let (a1, a2, a3) = (seq.coeff(1), seq.coeff(2), seq.coeff(3));
    let s = dist.support_low();
    let inner_atol = real::<F>(QUAD_TOLERANCE) / real(20.0);
    let rtol = real::<F>(1e-9);
    let two = real::<F>(2.0);
    let inner = |x1: F| -> F {
        let rem = b - a1 * x1;
        let w1 = a1 * x1;
        let (v, _) = expect_below(
            dist,
            rem / a2,
            &[
                w1 / a2,
                (rem - w1) / a2,
                rem / (two * a2),
                (rem - a3 * s) / a2,
                a3 * s / a2,
            ],
            &|x2| {
                let w2 = a2 * x2;
                dist.tail((rem - w2).max(w1).max(w2) / a3)
            },
            inner_atol,
            rtol,
        );
        v
    };
    let (v, e) = expect_below(
        dist,
        (b - a2 * s) / a1,
        &[b / (two * a1), (b - (a2 + a3) * s) / a1, a3 * s / a1],
        &inner,
        real::<F>(QUAD_TOLERANCE) / real(2.0),
        rtol,
    );
    OracleResult {
        value: v,
        method: OracleMethod::Quadrature,
        error_bound: quad_bound(e),
    }
}

fn p2_n3<F: Real>(b: F, dist: &Distribution<F>, seq: &CoefficientSequence<F>) -> OracleResult<F> {
    let (a1, a2, a3) = (seq.coeff(1), seq.coeff(2), seq.coeff(3));
    let s = dist.support_low();
    // For positive supports the integrand vanishes once S_2 > b; for
    // centered supports a strip above b (down-crossings of level n) still
    // contributes, up to S_2 = b - a3 * s_low.
    let reach = a3 * s.min(F::zero());
    let inner_atol = real::<F>(QUAD_TOLERANCE) / real(20.0);
    let rtol = real::<F>(1e-9);
    let two = real::<F>(2.0);
    let inner = |x1: F| -> F {
        let rem = b - a1 * x1;
        let w1 = a1 * x1;
        let (v, _) = expect_below(
            dist,
            (rem - reach) / a2,
            &[
                w1 / a2,
                (rem - w1) / a2,
                rem / (two * a2),
                (rem - a3 * s) / a2,
                a3 * s / a2,
                rem / a2,
            ],
            &|x2| {
                let w2 = a2 * x2;
                let m2 = w1.max(w2);
                let crossing =
                    (dist.tail((rem - w2) / a3) - dist.tail(m2 / a3)).max(F::zero());
                if w1 + w2 > b {
                    crossing - (F::one() - dist.tail(m2 / a3))
                } else {
                    crossing
                }
            },
            inner_atol,
            rtol,
        );
        v
    };
    let (v, e) = expect_below(
        dist,
        (b - a2 * s - reach) / a1,
        &[
            b / (two * a1),
            (b - a2 * s) / a1,
            (b - (a2 + a3) * s) / a1,
            a3 * s / a1,
        ],
        &inner,
        real::<F>(QUAD_TOLERANCE) / real(2.0),
        rtol,
    );
    OracleResult {
        value: v,
        method: OracleMethod::Quadrature,
        error_bound: quad_bound(e),
    }
}

/// Plain Monte Carlo estimate of the truncated-sum tail `P{S_m > b}`.
#[derive(Debug, Clone, Copy)]
pub struct PlainMcEstimate<F> {
    pub value: F,
    pub std_error: F,
    /// Four standard errors; infinite (degenerate) below two replications.
    pub error_bound: F,
    /// Bound on `E|S - S_m| = (sum_{i>m} a_i) E|X|`, documenting how far the
    /// truncated estimand can sit from the infinite-series tail.
    pub truncation_remainder: F,
    pub replications: u64,
    pub degenerate: bool,
}

/// Crude Monte Carlo for `P{ sum_{i<=m} a_i X_i > b }` on deterministic
/// substreams of `seed`.
pub fn tail_trunc_plain_mc<F: Real>(
    m: usize,
    b: F,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
    replications: u64,
    seed: u64,
) -> PlainMcEstimate<F> {
    assert!(m >= 1, "truncation level starts at 1");
    let weights: Vec<F> = (1..=m).map(|k| seq.coeff(k)).collect();
    const CHUNK: u64 = 4096;
    let n_chunks = replications.div_ceil(CHUNK);
    let hits: u64 = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(replications);
            let mut local = 0u64;
            for i in lo..hi {
                let mut rng = substream(seed, i);
                let mut sum = F::zero();
                for &w in &weights {
                    sum += w * dist.sample(&mut rng);
                }
                if sum > b {
                    local += 1;
                }
            }
            local
        })
        .sum();
    let r = real::<F>(replications as f64);
    let value = real::<F>(hits as f64) / r;
    let degenerate = replications < 2;
    let std_error = if degenerate {
        F::infinity()
    } else {
        (value * (F::one() - value) / r).sqrt()
    };
    let remainder =
        dist.mean_abs() * (seq.sum_a() - seq.partial_sum_a(m)).max(F::zero());
    PlainMcEstimate {
        value,
        std_error,
        error_bound: real::<F>(4.0) * std_error,
        truncation_remainder: remainder,
        replications,
        degenerate,
    }
}
