//! Self-checks wiring the estimators against the oracles (f64).
//!
//! These are the end-user checks behind the `validate` command: local
//! estimator unbiasedness against quadrature, goodness of fit of the
//! sampled truncation level against its law, normalization and identity
//! checks, and the single-big-jump cross-check.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::coefficients::CoefficientSequence;
use crate::distributions::Distribution;
use crate::local_estimator::{estimator1, estimator2};
use crate::oracle::{
    local_parts_quadrature, tail_s1, tail_sn_quadrature, tail_trunc_plain_mc,
};
use crate::outer_randomizer::OuterLaw;
use crate::rng::substream;
use crate::stats::RunningMoments;

/// Outcome of a single named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// All checks of one validation run.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Chi-square goodness of fit of sampled levels against the level law.
#[derive(Debug, Clone, Copy)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub passed: bool,
}

/// Sample `draws` levels and test the empirical counts on `{1..30}` plus a
/// tail bucket against the law's pmf at the given significance. Trailing
/// singleton cells with expected count below 5 are folded into the tail
/// bucket. `pmf_distortion` multiplies the expected mass of level 1 by
/// `1 + x` (renormalized) and exists as a negative-control hook.
pub fn chi_square_level_fit(
    law: &OuterLaw<f64>,
    draws: u64,
    seed: u64,
    significance: f64,
    pmf_distortion: Option<f64>,
) -> GofResult {
    const MAX_SINGLETON: usize = 30;
    let mut counts = [0u64; MAX_SINGLETON + 1];
    let mut rng = substream(seed, 0);
    for _ in 0..draws {
        let n = law.sample_level(&mut rng);
        if n <= MAX_SINGLETON {
            counts[n - 1] += 1;
        } else {
            counts[MAX_SINGLETON] += 1;
        }
    }

    let mut probs: Vec<f64> = (1..=MAX_SINGLETON).map(|n| law.pmf(n)).collect();
    let mut tail_prob = (1.0 - law.cdf(MAX_SINGLETON)).max(0.0);
    if let Some(d) = pmf_distortion {
        probs[0] *= 1.0 + d;
        let norm: f64 = probs.iter().sum::<f64>() + tail_prob;
        for p in &mut probs {
            *p /= norm;
        }
        tail_prob /= norm;
    }

    let r = draws as f64;
    // Fold under-populated trailing cells into the tail bucket.
    let mut keep = MAX_SINGLETON;
    while keep > 1 && r * probs[keep - 1] < 5.0 {
        keep -= 1;
    }
    let mut statistic = 0.0;
    for i in 0..keep {
        let expected = r * probs[i];
        let observed = counts[i] as f64;
        statistic += (observed - expected).powi(2) / expected;
    }
    let folded_prob: f64 = probs[keep..].iter().sum::<f64>() + tail_prob;
    let folded_count: u64 = counts[keep..].iter().sum();
    let expected_tail = r * folded_prob;
    statistic += (folded_count as f64 - expected_tail).powi(2) / expected_tail;

    let dof = keep; // keep + 1 cells, minus one for the fixed total
    let critical = ChiSquared::new(dof as f64)
        .expect("dof is positive")
        .inverse_cdf(1.0 - significance);
    GofResult {
        statistic,
        dof,
        critical,
        passed: statistic <= critical,
    }
}

/// Run the full self-check suite for one problem instance.
///
/// `b` anchors the level law used by the goodness-of-fit and mean-level
/// checks; the oracle comparisons run at fixed small thresholds where the
/// quadrature ground truth applies.
pub fn run_suite(
    dist: &Distribution<f64>,
    seq: &CoefficientSequence<f64>,
    b: f64,
    r: f64,
    seed: u64,
    pmf_distortion: Option<f64>,
) -> crate::Result<ValidationReport> {
    let mut checks = Vec::new();
    let law = OuterLaw::new(b, r, seq, dist.alpha())?;

    // Local estimator unbiasedness against the quadrature oracle.
    for (idx, (n, b_loc)) in [(2usize, 2.0f64), (2, 10.0), (3, 5.0)].iter().enumerate() {
        let (p1, p2) = local_parts_quadrature(*n, *b_loc, dist, seq)?;
        let draws = 100_000u64;
        let mut acc1 = RunningMoments::new();
        let mut acc2 = RunningMoments::new();
        let mut rng = substream(seed ^ (0x10c0 + idx as u64), 0);
        for _ in 0..draws {
            acc1.push(estimator1(*n, *b_loc, dist, seq, &mut rng).0);
            acc2.push(estimator2(*n, *b_loc, dist, seq, &mut rng).0);
        }
        let gap1 = (acc1.mean() - p1.value).abs();
        let gap2 = (acc2.mean() - p2.value).abs();
        let tol1 = 4.0 * acc1.std_error() + 2.0 * p1.error_bound;
        let tol2 = 4.0 * acc2.std_error() + 2.0 * p2.error_bound;
        checks.push(CheckOutcome {
            name: "local estimator unbiasedness",
            passed: gap1 <= tol1 && gap2 <= tol2,
            detail: format!(
                "n={n} b={b_loc}: |z1-p1|={gap1:.2e} (tol {tol1:.2e}), |z2-p2|={gap2:.2e} (tol {tol2:.2e})"
            ),
        });
    }

    // Level-law goodness of fit at significance 1e-3.
    let gof = chi_square_level_fit(&law, 1_000_000, seed ^ 0x60F, 1e-3, pmf_distortion);
    checks.push(CheckOutcome {
        name: "level-law chi-square fit",
        passed: gof.passed,
        detail: format!(
            "statistic {:.2} vs critical {:.2} at dof {}",
            gof.statistic, gof.critical, gof.dof
        ),
    });

    // Mass accounting: head sum plus certified tail mass equals one.
    let head: f64 = (1..=10_000).map(|n| law.pmf(n)).sum();
    let tail_mass = law.normalizer()
        * ((seq.sum_a_alpha(dist.alpha()) - seq.partial_sum_a_alpha(10_000, dist.alpha()))
            + (seq.sum_a() - seq.partial_sum_a(10_000)) / b.powf(r));
    let mass_gap = (head + tail_mass - 1.0).abs();
    checks.push(CheckOutcome {
        name: "level-law normalization",
        passed: mass_gap < 1e-10,
        detail: format!("|sum p_n + tail - 1| = {mass_gap:.2e}"),
    });

    // Empirical mean level against the closed form.
    let mut acc = RunningMoments::new();
    let mut rng = substream(seed ^ 0xEA2, 0);
    for _ in 0..200_000u64 {
        acc.push(law.sample_level(&mut rng) as f64);
    }
    let en_gap = (acc.mean() - law.mean_level()).abs();
    let en_tol = 3.0 * acc.std_error();
    checks.push(CheckOutcome {
        name: "mean level closed form",
        passed: en_gap <= en_tol,
        detail: format!(
            "empirical {:.4} vs closed form {:.4} (3 SE = {en_tol:.1e})",
            acc.mean(),
            law.mean_level()
        ),
    });

    // Quadrature against plain Monte Carlo on the two-term sum.
    let q2 = tail_sn_quadrature(2, 2.0, dist, seq)?;
    let mc = tail_trunc_plain_mc(2, 2.0, dist, seq, 200_000, seed ^ 0x3C);
    let mc_gap = (q2.value - mc.value).abs();
    let mc_tol = mc.error_bound + 2.0 * q2.error_bound;
    checks.push(CheckOutcome {
        name: "quadrature vs plain MC",
        passed: mc_gap <= mc_tol,
        detail: format!("|{:.6e} - {:.6e}| = {mc_gap:.2e} (tol {mc_tol:.2e})", q2.value, mc.value),
    });

    // Partition identity of the max-split increments.
    let (p1, p2) = local_parts_quadrature(2, 2.0, dist, seq)?;
    let t1 = tail_s1(2.0, dist, seq);
    let resid = (p1.value + p2.value - (q2.value - t1.value)).abs();
    let resid_tol = 2.0 * (p1.error_bound + p2.error_bound + q2.error_bound);
    checks.push(CheckOutcome {
        name: "partition identity",
        passed: resid <= resid_tol,
        detail: format!("residual {resid:.2e} (tol {resid_tol:.2e})"),
    });

    // Single-big-jump asymptote for the two-term sum at extreme threshold.
    let big = 1e6;
    let t2 = tail_sn_quadrature(2, big, dist, seq)?;
    let asym = dist.tail(big)
        * ((dist.alpha() * seq.coeff(1).ln()).exp() + (dist.alpha() * seq.coeff(2).ln()).exp());
    let ratio = t2.value / asym;
    checks.push(CheckOutcome {
        name: "single-big-jump cross-check",
        passed: (0.99..=1.01).contains(&ratio),
        detail: format!("tail/asymptote ratio {ratio:.6}"),
    });

    Ok(ValidationReport { checks })
}
