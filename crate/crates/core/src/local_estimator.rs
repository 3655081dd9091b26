//! Conditional Monte Carlo estimators of the telescoping increments
//! `P{S_n > b} - P{S_{n-1} > b}`.
//!
//! The increment is partitioned on whether the last summand is the largest:
//! `p_1(n, b)` covers the event that increment `n` is the maximum and lifts
//! the partial sum over `b`; `p_2(n, b)` covers crossings with the maximum
//! elsewhere. In both parts, the indicator of the rare event is replaced by
//! its exact conditional probability given all increments but one, which is
//! the Asmussen-Kroese conditioning that removes most of the variance for
//! heavy tails:
//!
//! - `Z_1(n, b) = tail((( b - S_{n-1}) v M_{n-1}) / a_n) * 1{S_{n-1} <= b}`,
//! - `Z_2(n, b) = (Z_21 - Z_22) / q(J_n, n)` with a random smoothing index
//!   `J_n ~ q(j, n) = a_j / sum_{i<n} a_i` and
//!   `Z_2k = tail(((b - S^{(-J)}) v M^{(-J)}) / a_J)` at levels `n`, `n-1`.
//!
//! `E[Z_1] = p_1(n, b)` and `E[Z_2] = p_2(n, b)` for `n > 1`; at `n = 1`
//! the estimators are defined so the level-1 draw is exactly deterministic
//! `tail(b / a_1) = P{S_1 > b}`, which keeps the telescoping identity
//! anchored at `S_0 = 0`. Each invocation draws `n - 1` fresh increments;
//! the two estimators use independent draws.
//!
//! These are pure functions of their inputs and the supplied stream;
//! parallel callers must hand each replication a disjoint substream.

use rand::Rng;

use crate::coefficients::CoefficientSequence;
use crate::distributions::Distribution;
use crate::rng::open_unit;
use crate::scalar::Real;

/// One draw of the local estimators at level `n`.
#[derive(Debug, Clone, Copy)]
pub struct LocalEstimate<F> {
    pub n: usize,
    pub z1: F,
    pub z2: F,
    /// `z1 + z2`, unbiased for `P{S_n > b} - P{S_{n-1} > b}`.
    pub zloc: F,
    /// Number of increment samples drawn: `2n - 2`.
    pub work: u64,
}

/// Estimator of `p_1(n, b)`. Returns the draw and the number of increment
/// samples consumed (`n - 1`).
pub fn estimator1<F: Real, R: Rng + ?Sized>(
    n: usize,
    b: F,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
    rng: &mut R,
) -> (F, u64) {
    assert!(n >= 1, "level starts at 1");
    let a_n = seq.coeff(n);
    if n == 1 {
        // Empty prefix: S_0 = 0 and the max over nothing never binds.
        return (dist.tail(b / a_n), 0);
    }
    let mut sum = F::zero();
    let mut max = F::neg_infinity();
    for i in 1..n {
        let w = seq.coeff(i) * dist.sample(rng);
        sum += w;
        if w > max {
            max = w;
        }
    }
    let z1 = if sum <= b {
        dist.tail((b - sum).max(max) / a_n)
    } else {
        F::zero()
    };
    (z1, (n - 1) as u64)
}

/// Draw the smoothing index `J_n` with `P{J_n = j} = a_j / sum_{i<n} a_i`,
/// returning the index together with its probability for reuse in the
/// ratio. Panics below `n = 2` (empty support).
pub fn sample_jn<F: Real, R: Rng + ?Sized>(
    n: usize,
    seq: &CoefficientSequence<F>,
    rng: &mut R,
) -> (usize, F) {
    assert!(n >= 2, "J_n has support {{1, .., n-1}}; need n >= 2");
    let total = seq.partial_sum_a(n - 1);
    let target = open_unit::<F, R>(rng) * total;
    let mut cum = F::zero();
    for j in 1..n {
        let a_j = seq.coeff(j);
        cum += a_j;
        if cum >= target || j == n - 1 {
            return (j, a_j / total);
        }
    }
    unreachable!("cumulative weights cover (0, total]")
}

/// Estimator of `p_2(n, b)`. May be negative. Returns the draw and the
/// number of increment samples consumed (`n - 1`; zero at `n = 1`, where
/// `p_2(1, b) = 0` because the single increment is always the maximum).
pub fn estimator2<F: Real, R: Rng + ?Sized>(
    n: usize,
    b: F,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
    rng: &mut R,
) -> (F, u64) {
    assert!(n >= 1, "level starts at 1");
    if n == 1 {
        return (F::zero(), 0);
    }
    let (j, q_j) = sample_jn(n, seq, rng);
    let mut sum_full = F::zero(); // S_n without increment j
    let mut max = F::neg_infinity(); // M_n without increment j
    let mut last = F::zero(); // a_n X_n
    for i in 1..=n {
        if i == j {
            continue;
        }
        let w = seq.coeff(i) * dist.sample(rng);
        sum_full += w;
        if w > max {
            max = w;
        }
        if i == n {
            last = w;
        }
    }
    let sum_prev = sum_full - last; // S_{n-1} without increment j
    let a_j = seq.coeff(j);
    let xi1 = (b - sum_full).max(max);
    let xi2 = (b - sum_prev).max(max);
    let z2 = (dist.tail(xi1 / a_j) - dist.tail(xi2 / a_j)) / q_j;
    (z2, (n - 1) as u64)
}

/// One draw of `Z_loc(n, b) = Z_1 + Z_2` on independent increments.
pub fn local_simulation<F: Real, R: Rng + ?Sized>(
    n: usize,
    b: F,
    dist: &Distribution<F>,
    seq: &CoefficientSequence<F>,
    rng: &mut R,
) -> LocalEstimate<F> {
    let (z1, w1) = estimator1(n, b, dist, seq, rng);
    let (z2, w2) = estimator2(n, b, dist, seq, rng);
    LocalEstimate {
        n,
        z1,
        z2,
        zloc: z1 + z2,
        work: w1 + w2,
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::ScriptedUniforms;
    use super::*;
    use crate::rng::substream;

    fn setup() -> (Distribution<f64>, CoefficientSequence<f64>) {
        (
            Distribution::pareto(4.0).unwrap(),
            CoefficientSequence::geometric(0.9).unwrap(),
        )
    }

    #[test]
    fn level_one_is_deterministic() {
        let (d, a) = setup();
        let mut rng = substream(1, 0);
        let (z1, w1) = estimator1(1, 10.0, &d, &a, &mut rng);
        assert!((z1 - 6.561e-5).abs() < 1e-18);
        assert_eq!(w1, 0);
        let (z2, w2) = estimator2(1, 10.0, &d, &a, &mut rng);
        assert_eq!(z2, 0.0);
        assert_eq!(w2, 0);
        let loc = local_simulation(1, 10.0, &d, &a, &mut rng);
        assert_eq!(loc.zloc, loc.z1);
        assert_eq!(loc.work, 0);
    }

    #[test]
    fn estimator1_formula_on_scripted_draw() {
        let (d, a) = setup();
        // n = 2, b = 10, X_1 = 1 (U = 1): S_1 = 0.9, M_1 = 0.9,
        // z1 = tail(max(9.1, 0.9) / 0.81) = (0.81 / 9.1)^4.
        let mut rng = ScriptedUniforms::open_units(&[1.0]);
        let (z1, work) = estimator1(2, 10.0, &d, &a, &mut rng);
        assert!((z1 - (0.81f64 / 9.1).powi(4)).abs() < 1e-15);
        assert_eq!(work, 1);
    }

    #[test]
    fn estimator1_zero_when_prefix_exceeds() {
        let (d, a) = setup();
        // X_1 = 100 => S_1 = 90 > b = 10.
        let u = d.tail(100.0);
        let mut rng = ScriptedUniforms::open_units(&[u]);
        let (z1, _) = estimator1(2, 10.0, &d, &a, &mut rng);
        assert_eq!(z1, 0.0);
    }

    #[test]
    fn estimator2_formula_on_scripted_draw() {
        let (d, a) = setup();
        // n = 2: J_2 = 1 surely (one uniform consumed), then X_2 = 1:
        // S_2^(-1) = 0.81, M = 0.81, xi1 = 9.19, xi2 = 10,
        // z2 = (0.9/9.19)^4 - (0.9/10)^4.
        let mut rng = ScriptedUniforms::open_units(&[0.3, 1.0]);
        let (z2, work) = estimator2(2, 10.0, &d, &a, &mut rng);
        let expect = (0.9f64 / 9.19).powi(4) - (0.9f64 / 10.0).powi(4);
        assert!((z2 - expect).abs() < 1e-15, "{z2} vs {expect}");
        assert!((expect - 2.633e-5).abs() < 1e-8);
        assert_eq!(work, 1);
    }

    #[test]
    fn estimator2_sign_follows_last_increment_centered() {
        let d = Distribution::centered_pareto(4.0).unwrap();
        let a = CoefficientSequence::geometric(0.9).unwrap();
        // X_2 = -0.2: U = tail(-0.2) = (1/
        // (-0.2 + 4/3))^... i.e. (17/15)^-4; prefix sums shrink, xi1 > xi2.
        let u = d.tail(-0.2);
        let mut rng = ScriptedUniforms::open_units(&[0.3, u]);
        let (z2, _) = estimator2(2, 10.0, &d, &a, &mut rng);
        assert!(z2 < 0.0, "z2 = {z2}");
    }

    #[test]
    fn jn_singleton_support() {
        let (_, a) = setup();
        let mut rng = substream(5, 0);
        for _ in 0..50 {
            let (j, q) = sample_jn(2, &a, &mut rng);
            assert_eq!(j, 1);
            assert!((q - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    #[should_panic(expected = "need n >= 2")]
    fn jn_rejects_level_one() {
        let (_, a) = setup();
        let mut rng = substream(5, 0);
        sample_jn(1, &a, &mut rng);
    }

    #[test]
    fn jn_law_matches_weights() {
        let (_, a) = setup();
        // q(1,3) = 0.9/1.71, q(2,3) = 0.81/1.71.
        let q1 = 0.9 / 1.71;
        let mut rng = substream(6, 0);
        let mut count1 = 0u64;
        let draws = 200_000;
        for _ in 0..draws {
            let (j, q) = sample_jn(3, &a, &mut rng);
            if j == 1 {
                count1 += 1;
                assert!((q - q1).abs() < 1e-15);
            } else {
                assert!((q - 0.81 / 1.71).abs() < 1e-15);
            }
            // pmf normalization over the two atoms
        }
        let freq = count1 as f64 / draws as f64;
        let se = (q1 * (1.0 - q1) / draws as f64).sqrt();
        assert!(
            (freq - q1).abs() < 4.0 * se,
            "freq {freq} vs q1 {q1} (se {se})"
        );
    }

    #[test]
    fn work_is_linear_in_level() {
        let (d, a) = setup();
        let mut rng = substream(7, 0);
        for n in [2usize, 10, 100] {
            let loc = local_simulation(n, 50.0, &d, &a, &mut rng);
            assert_eq!(loc.work, 2 * n as u64 - 2);
        }
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn z1_is_a_probability(
                n in 1usize..30,
                b in 0.5f64..100.0,
                stream in 0u64..1000,
            ) {
                let (d, a) = setup();
                let mut rng = substream(0xA11CE, stream);
                let (z1, _) = estimator1(n, b, &d, &a, &mut rng);
                prop_assert!((0.0..=1.0).contains(&z1));
            }

            #[test]
            fn zloc_is_exact_sum_and_z2_bounded(
                n in 1usize..30,
                b in 0.5f64..100.0,
                stream in 0u64..1000,
            ) {
                let (d, a) = setup();
                let mut rng = substream(0xB0B, stream);
                let loc = local_simulation(n, b, &d, &a, &mut rng);
                prop_assert_eq!(loc.zloc, loc.z1 + loc.z2);
                if n >= 2 {
                    // |z2| <= 1 / min_j q(j, n), the worst-case ratio bound.
                    let total = a.partial_sum_a(n - 1);
                    let q_min = a.coeff(n - 1) / total;
                    prop_assert!(loc.z2.abs() <= 1.0 / q_min + 1e-12);
                } else {
                    prop_assert_eq!(loc.z2, 0.0);
                }
            }
        }
    }
}
