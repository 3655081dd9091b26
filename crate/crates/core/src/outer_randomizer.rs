//! The random truncation level and the combined single-run estimator.
//!
//! A level `N` is drawn with `P{N = n} = p_n = c_b (a_n^alpha + a_n / b^r)`
//! and one local simulation at level `N` is divided by `p_N`:
//!
//! `Z(b) = Z_loc(N, b) / p_N`,  `E[Z(b)] = P{S > b}`.
//!
//! Unbiasedness holds for any positive `p_n` summing to one; this family is
//! the smallest that keeps `E[Z_loc^2(n, b)] / p_n^2` bounded uniformly in
//! `n`, which is what bounds the relative error of `Z(b)`. The `a_n^alpha`
//! part weights levels like their contribution to the tail; the `a_n / b^r`
//! part keeps deep levels reachable enough that dividing by `p_N` cannot
//! explode. Both infinite sums behind the normalizer `c_b` are certified by
//! the coefficient sequence, so no truncation of the support is ever
//! applied when sampling `N`.

use rand::Rng;

use crate::coefficients::CoefficientSequence;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::local_estimator::local_simulation;
use crate::rng::open_unit;
use crate::scalar::{real, Real};

/// The law of the truncation level `N` for one `(b, r)` pair.
///
/// Immutable after construction (the normalizer is computed once);
/// freely shareable across threads.
#[derive(Debug, Clone)]
pub struct OuterLaw<F> {
    b: F,
    r: F,
    alpha: F,
    c_b: F,
    b_pow_r: F,
    seq: CoefficientSequence<F>,
}

/// One draw of the combined estimator.
#[derive(Debug, Clone, Copy)]
pub struct OuterDraw<F> {
    /// `Z(b) = Z_loc(N, b) / p_N`.
    pub z: F,
    /// The realized level `N`.
    pub n_used: usize,
    /// Samples consumed: one for the level plus `2N - 2` increments.
    pub work: u64,
}

impl<F: Real> OuterLaw<F> {
    pub fn new(b: F, r: F, seq: &CoefficientSequence<F>, alpha: F) -> Result<Self> {
        if !(b > F::zero()) || !b.is_finite() {
            return Err(Error::invalid(
                "b",
                format!("threshold must be positive and finite, got {b}"),
            ));
        }
        if !(r >= F::zero()) || !r.is_finite() {
            return Err(Error::invalid(
                "r",
                format!("level-law exponent must be nonnegative and finite, got {r}"),
            ));
        }
        let b_pow_r = b.powf(r);
        let c_b = F::one() / (seq.sum_a_alpha(alpha) + seq.sum_a() / b_pow_r);
        Ok(Self {
            b,
            r,
            alpha,
            c_b,
            b_pow_r,
            seq: seq.clone(),
        })
    }

    pub fn b(&self) -> F {
        self.b
    }

    pub fn r(&self) -> F {
        self.r
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// Normalizer `c_b = 1 / (sum a_n^alpha + (sum a_n) / b^r)`.
    pub fn normalizer(&self) -> F {
        self.c_b
    }

    pub fn seq(&self) -> &CoefficientSequence<F> {
        &self.seq
    }

    /// `P{N = n}`, positive for every `n >= 1`.
    pub fn pmf(&self, n: usize) -> F {
        assert!(n >= 1, "level starts at 1");
        let a_n = self.seq.coeff(n);
        self.c_b * ((self.alpha * a_n.ln()).exp() + a_n / self.b_pow_r)
    }

    /// `P{N <= n}`, via closed-form partial sums where the sequence has them.
    pub fn cdf(&self, n: usize) -> F {
        assert!(n >= 1, "level starts at 1");
        self.c_b
            * (self.seq.partial_sum_a_alpha(n, self.alpha)
                + self.seq.partial_sum_a(n) / self.b_pow_r)
    }

    /// `E[N] = c_b (sum n a_n^alpha + (sum n a_n) / b^r)`, finite because
    /// both weighted sums converge.
    pub fn mean_level(&self) -> F {
        self.c_b
            * (self.seq.sum_n_a_alpha(self.alpha) + self.seq.sum_n_a() / self.b_pow_r)
    }

    /// Draw `N` by sequential inverse-CDF search. The support is never
    /// truncated; the uniform is nudged below 1 by one part in 1e15 so the
    /// walk provably terminates, a distortion far below the certified
    /// accuracy of the level sums.
    pub fn sample_level<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample_level_with_prob(rng).0
    }

    pub(crate) fn sample_level_with_prob<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, F) {
        let u = open_unit::<F, R>(rng).min(real(1.0 - 1e-15));
        let mut cum = F::zero();
        let mut n = 0usize;
        loop {
            n += 1;
            let p = self.pmf(n);
            cum += p;
            if cum >= u {
                return (n, p);
            }
        }
    }

    /// One unbiased draw of `Z(b)`: sample `N`, run the local simulation at
    /// that level, divide by `p_N`.
    pub fn estimate_once<R: Rng + ?Sized>(
        &self,
        dist: &Distribution<F>,
        rng: &mut R,
    ) -> OuterDraw<F> {
        debug_assert!(dist.alpha() == self.alpha);
        let (n, p_n) = self.sample_level_with_prob(rng);
        let loc = local_simulation(n, self.b, dist, &self.seq, rng);
        OuterDraw {
            z: loc.zloc / p_n,
            n_used: n,
            work: 1 + loc.work,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_estimator::test_support::ScriptedUniforms;
    use crate::rng::substream;

    fn law(b: f64, r: f64) -> OuterLaw<f64> {
        let seq = CoefficientSequence::geometric(0.9).unwrap();
        OuterLaw::new(b, r, &seq, 4.0).unwrap()
    }

    #[test]
    fn construction_guards() {
        let seq = CoefficientSequence::geometric(0.9).unwrap();
        assert!(OuterLaw::new(0.0, 1.0, &seq, 4.0).is_err());
        assert!(OuterLaw::new(-2.0, 1.0, &seq, 4.0).is_err());
        assert!(OuterLaw::new(5.0, -0.5, &seq, 4.0).is_err());
        assert!(OuterLaw::new(5.0, 0.0, &seq, 4.0).is_ok());
    }

    // Frozen from the closed forms: c_b = 1/(0.6561/0.3439 + 9/200).
    #[test]
    fn normalizer_and_first_atom() {
        let l = law(200.0, 1.0);
        assert!((l.normalizer() - 0.5120794311).abs() < 1e-9);
        assert!((l.pmf(1) - 0.3382796722).abs() < 1e-9);
    }

    #[test]
    fn pmf_sums_to_one_with_tail_bound() {
        for (b, r) in [(200.0, 1.0), (5.0, 1.0), (1000.0, 2.0)] {
            let l = law(b, r);
            let head: f64 = (1..=10_000).map(|n| l.pmf(n)).sum();
            let seq = l.seq();
            let tail = l.normalizer()
                * ((seq.sum_a_alpha(4.0) - seq.partial_sum_a_alpha(10_000, 4.0))
                    + (seq.sum_a() - seq.partial_sum_a(10_000)) / b.powf(r));
            assert!(
                (head + tail - 1.0).abs() < 1e-10,
                "b={b}: sum deviates by {}",
                head + tail - 1.0
            );
        }
    }

    #[test]
    fn cdf_consistent_with_pmf() {
        let l = law(200.0, 1.0);
        let mut prev = 0.0;
        for n in 1..=10_000 {
            let c = l.cdf(n);
            assert!(
                (c - prev - l.pmf(n)).abs() < 1e-14,
                "n={n}: cdf increment mismatch"
            );
            prev = c;
        }
        assert!(prev <= 1.0 + 1e-12);
    }

    #[test]
    fn limit_drops_threshold_term() {
        // As b grows, c_b increases toward 1/sum a^alpha and
        // p_n -> a_n^alpha / sum a^alpha.
        let sum_a_alpha = 1.9078220412910732f64;
        let mut prev = 0.0;
        for b in [10.0, 100.0, 1e4, 1e8, 1e12] {
            let l = law(b, 1.0);
            assert!(l.normalizer() > prev);
            prev = l.normalizer();
        }
        let l = law(1e12, 1.0);
        assert!((l.normalizer() - 1.0 / sum_a_alpha).abs() < 1e-10);
        assert!((l.pmf(1) - 0.9f64.powi(4) / sum_a_alpha).abs() < 1e-10);
        assert!((l.pmf(3) - 0.9f64.powi(12) / sum_a_alpha).abs() < 1e-10);
    }

    #[test]
    fn first_cell_of_inverse_cdf() {
        let l = law(200.0, 1.0);
        // U = 0.1 < p_1 = 0.338...
        let mut rng = ScriptedUniforms::open_units(&[0.1]);
        assert_eq!(l.sample_level(&mut rng), 1);
        // U just above p_1 lands on level 2.
        let mut rng = ScriptedUniforms::open_units(&[0.34]);
        assert_eq!(l.sample_level(&mut rng), 2);
    }

    #[test]
    fn extreme_uniform_terminates() {
        let l = law(200.0, 1.0);
        let mut rng = ScriptedUniforms::open_units(&[1.0]);
        let n = l.sample_level(&mut rng);
        assert!(n > 30, "deep level expected, got {n}");
    }

    #[test]
    fn empirical_mean_level_matches_closed_form() {
        let l = law(200.0, 1.0);
        let mut rng = substream(0xE, 0);
        let draws = 200_000u64;
        let mut acc = crate::stats::RunningMoments::new();
        for _ in 0..draws {
            acc.push(l.sample_level(&mut rng) as f64);
        }
        let expect = l.mean_level();
        assert!((expect - 3.071251172).abs() < 1e-8);
        let dev = (acc.mean() - expect).abs();
        assert!(
            dev < 3.0 * acc.std_error(),
            "empirical {} vs closed form {expect}",
            acc.mean()
        );
    }

    #[test]
    fn realized_level_one_is_deterministic() {
        let d = Distribution::pareto(4.0).unwrap();
        let l = law(200.0, 1.0);
        let mut rng = ScriptedUniforms::open_units(&[0.05]);
        let draw = l.estimate_once(&d, &mut rng);
        assert_eq!(draw.n_used, 1);
        assert_eq!(draw.work, 1);
        let expect = d.tail(200.0 / 0.9) / l.pmf(1);
        assert!((draw.z - expect).abs() < 1e-18 * expect.abs().max(1.0));
    }

    #[test]
    fn ratio_is_finite_for_reachable_levels() {
        let l = law(5.0, 1.0);
        let d = Distribution::pareto(4.0).unwrap();
        let mut rng = substream(0xF, 3);
        for _ in 0..20_000 {
            let draw = l.estimate_once(&d, &mut rng);
            assert!(draw.z.is_finite());
        }
    }
}
