//! Weight sequences `(a_n)` and their convergent sums.
//!
//! Admissible sequences have `a_n` in `(0, 1]` and `sum_n n a_n < inf`;
//! both built-in families are monotone decreasing. The level law of the
//! outer randomizer divides by sums of `a_n^alpha` and `a_n`, so those sums
//! must be trustworthy for the combined estimator to stay unbiased. They
//! are computed in closed form for geometric weights and by partial
//! summation plus a certified Euler-Maclaurin tail for polynomial weights;
//! arbitrary user-supplied sequences without computable tail bounds are
//! deliberately not admitted.

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Decay classification of a weight sequence:
/// `sup { k : limsup_n n^k a_n < inf }` is finite for polynomial decay and
/// infinite for geometric decay. The variance analysis of the local
/// estimators splits along this line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaClass {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SeqKind<F> {
    /// `a_n = scale * rho^n`. Fresh sequences have `scale = 1`; rescaled
    /// ones (from problem normalization) carry `scale` in `(0, 1/rho]`.
    Geometric { rho: F, scale: F },
    /// `a_n = c * n^{-s}` with `s > 2` so that `sum n a_n` converges.
    Polynomial { c: F, s: F },
}

/// A weight sequence with certified sums. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence<F> {
    kind: SeqKind<F>,
    sum_a: F,
    sum_n_a: F,
}

/// Relative accuracy certified for every infinite sum returned here. The
/// induced bias in the level law is orders of magnitude below Monte Carlo
/// noise at any realistic replication count.
pub const SUM_RELATIVE_TOLERANCE: f64 = 1e-12;

impl<F: Real> CoefficientSequence<F> {
    /// Geometric weights `a_n = rho^n`, `rho` in `(0, 1)`.
    pub fn geometric(rho: F) -> Result<Self> {
        if !(rho > F::zero() && rho < F::one()) {
            return Err(Error::invalid(
                "rho",
                format!("geometric ratio must lie in (0, 1), got {rho}"),
            ));
        }
        Ok(Self::from_kind(SeqKind::Geometric {
            rho,
            scale: F::one(),
        }))
    }

    /// Polynomial weights `a_n = c n^{-s}`, `c` in `(0, 1]`, `s > 2`.
    pub fn polynomial(c: F, s: F) -> Result<Self> {
        if !(c > F::zero() && c <= F::one()) {
            return Err(Error::invalid(
                "c",
                format!("polynomial prefactor must lie in (0, 1], got {c}"),
            ));
        }
        if !(s > real(2.0)) {
            return Err(Error::invalid(
                "s",
                format!("polynomial exponent must exceed 2 so that sum of n*a_n converges, got {s}"),
            ));
        }
        Ok(Self::from_kind(SeqKind::Polynomial { c, s }))
    }

    fn from_kind(kind: SeqKind<F>) -> Self {
        let (sum_a, sum_n_a) = match kind {
            SeqKind::Geometric { rho, scale } => {
                let one_minus = F::one() - rho;
                (
                    scale * rho / one_minus,
                    scale * rho / (one_minus * one_minus),
                )
            }
            SeqKind::Polynomial { c, s } => {
                (c * power_sum(s), c * power_sum(s - F::one()))
            }
        };
        Self {
            kind,
            sum_a,
            sum_n_a,
        }
    }

    /// `a_n` for `n >= 1`. Panics on `n = 0`.
    pub fn coeff(&self, n: usize) -> F {
        assert!(n >= 1, "coefficient index starts at 1");
        match self.kind {
            SeqKind::Geometric { rho, scale } => {
                scale * (real::<F>(n as f64) * rho.ln()).exp()
            }
            SeqKind::Polynomial { c, s } => c * (-s * real::<F>(n as f64).ln()).exp(),
        }
    }

    /// Largest weight; equals `a_1` for the monotone built-in families.
    pub fn sup(&self) -> F {
        self.coeff(1)
    }

    /// `sum_n a_n`, cached at construction.
    pub fn sum_a(&self) -> F {
        self.sum_a
    }

    /// `sum_n n a_n`, cached at construction.
    pub fn sum_n_a(&self) -> F {
        self.sum_n_a
    }

    /// `sum_n a_n^alpha` for `alpha > 2`.
    pub fn sum_a_alpha(&self, alpha: F) -> F {
        match self.kind {
            SeqKind::Geometric { rho, scale } => {
                let ra = (alpha * rho.ln()).exp();
                let ka = (alpha * scale.ln()).exp();
                ka * ra / (F::one() - ra)
            }
            SeqKind::Polynomial { c, s } => {
                (alpha * c.ln()).exp() * power_sum(s * alpha)
            }
        }
    }

    /// `sum_n n a_n^alpha` for `alpha > 2`.
    pub fn sum_n_a_alpha(&self, alpha: F) -> F {
        match self.kind {
            SeqKind::Geometric { rho, scale } => {
                let ra = (alpha * rho.ln()).exp();
                let ka = (alpha * scale.ln()).exp();
                let one_minus = F::one() - ra;
                ka * ra / (one_minus * one_minus)
            }
            SeqKind::Polynomial { c, s } => {
                (alpha * c.ln()).exp() * power_sum(s * alpha - F::one())
            }
        }
    }

    /// `sum_{k<=n} a_k`; closed form for geometric weights.
    pub fn partial_sum_a(&self, n: usize) -> F {
        match self.kind {
            SeqKind::Geometric { rho, scale } => {
                let rn = (real::<F>(n as f64) * rho.ln()).exp();
                scale * rho * (F::one() - rn) / (F::one() - rho)
            }
            SeqKind::Polynomial { .. } => (1..=n).map(|k| self.coeff(k)).sum(),
        }
    }

    /// `sum_{k<=n} a_k^alpha`; closed form for geometric weights.
    pub fn partial_sum_a_alpha(&self, n: usize, alpha: F) -> F {
        match self.kind {
            SeqKind::Geometric { rho, scale } => {
                let ra = (alpha * rho.ln()).exp();
                let ka = (alpha * scale.ln()).exp();
                let ran = (real::<F>(n as f64) * ra.ln()).exp();
                ka * ra * (F::one() - ran) / (F::one() - ra)
            }
            SeqKind::Polynomial { c, s } => {
                let ca = (alpha * c.ln()).exp();
                (1..=n)
                    .map(|k| (-s * alpha * real::<F>(k as f64).ln()).exp())
                    .sum::<F>()
                    * ca
            }
        }
    }

    pub fn kappa_class(&self) -> KappaClass {
        match self.kind {
            SeqKind::Geometric { .. } => KappaClass::Infinite,
            SeqKind::Polynomial { .. } => KappaClass::Finite,
        }
    }

    /// The sequence `factor * a_n`. Fails if the rescaled `a_1` leaves `(0, 1]`.
    pub fn scaled(&self, factor: F) -> Result<Self> {
        if !(factor > F::zero()) || !factor.is_finite() {
            return Err(Error::invalid(
                "factor",
                format!("scale factor must be positive and finite, got {factor}"),
            ));
        }
        let kind = match self.kind {
            SeqKind::Geometric { rho, scale } => SeqKind::Geometric {
                rho,
                scale: scale * factor,
            },
            SeqKind::Polynomial { c, s } => SeqKind::Polynomial { c: c * factor, s },
        };
        let rescaled = Self::from_kind(kind);
        let a1 = rescaled.coeff(1);
        if !(a1 > F::zero() && a1 <= F::one() + real(1e-12)) {
            return Err(Error::invalid(
                "factor",
                format!("rescaled leading weight {a1} leaves (0, 1]"),
            ));
        }
        Ok(rescaled)
    }
}

/// Translate an instance with non-zero increment mean or weights above 1
/// into an equivalent standard instance:
///
/// `P{ sum a_n X_n > b } = P{ sum (a_n/sup a) (X_n - E X) > (b - (sum a_n) E X) / sup a }`.
///
/// Instances that are already standard (`E X = 0`, `sup a_n <= 1`) are
/// returned unchanged. Fails when the translated threshold is not positive,
/// since the estimand is then no longer a right tail.
pub fn normalize_problem<F: Real>(
    seq: &CoefficientSequence<F>,
    dist: &Distribution<F>,
    b: F,
) -> Result<(CoefficientSequence<F>, Distribution<F>, F)> {
    let mean = dist.mean();
    let sup = seq.sup();
    if mean == F::zero() && sup <= F::one() {
        return Ok((seq.clone(), *dist, b));
    }
    let b_tilde = (b - seq.sum_a() * mean) / sup;
    if !(b_tilde > F::zero()) {
        return Err(Error::NonPositiveThreshold(format!("{b_tilde}")));
    }
    Ok((seq.scaled(F::one() / sup)?, dist.centered(), b_tilde))
}

/// `sum_{n>=1} n^{-t}` for `t > 1`, with certified relative error.
///
/// Partial summation until the analytic remainder bracket (integral term
/// plus Euler-Maclaurin corrections, error within the magnitude of the
/// first omitted correction) is below the tolerance; the bracket midpoint
/// is added to the partial sum.
fn power_sum<F: Real>(t: F) -> F {
    debug_assert!(t > F::one());
    // f32 cannot certify 1e-12; fall back to a few epsilon there.
    let tol = real::<F>(SUM_RELATIVE_TOLERANCE).max(F::epsilon() * real(8.0));
    let mut partial = F::zero();
    let mut m: usize = 0;
    let mut batch: usize = 64;
    loop {
        for n in (m + 1)..=(m + batch) {
            partial += (-t * real::<F>(n as f64).ln()).exp();
        }
        m += batch;
        batch = m;

        let a = real::<F>((m + 1) as f64);
        let inv = F::one() / a;
        let a_t = (-t * a.ln()).exp();
        let integral = a_t * a / (t - F::one());
        let correction = a_t / real(2.0) + t * a_t * inv / real(12.0);
        let half_bound = t * (t + F::one()) * (t + real(2.0)) * a_t * inv * inv * inv
            / real(1440.0);
        let total = partial + integral + correction - half_bound;
        if half_bound <= tol * total || m > (1 << 26) {
            return total;
        }
    }
}
