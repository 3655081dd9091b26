//! Adaptive Simpson quadrature with explicit break points.
//!
//! Used only by the oracle: integrands are piecewise smooth once split at
//! their kinks (max switches, support caps, indicator boundaries), so the
//! caller passes those abscissas and each segment is refined independently.
//! Tolerances combine an absolute target with a relative one measured
//! against a coarse first pass, which keeps extreme-tail integrals (values
//! around 1e-24) honest where an absolute tolerance alone would accept 0.

use crate::scalar::{real, Real};

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadOutcome<F> {
    pub value: F,
    /// Accumulated local error estimates (Richardson residuals).
    pub error: F,
}

pub(crate) fn integrate<F: Real>(
    f: &dyn Fn(F) -> F,
    lo: F,
    hi: F,
    splits: &[F],
    atol: F,
    rtol: F,
) -> QuadOutcome<F> {
    if !(hi > lo) {
        return QuadOutcome {
            value: F::zero(),
            error: F::zero(),
        };
    }
    let mut bounds: Vec<F> = Vec::with_capacity(splits.len() + 2);
    bounds.push(lo);
    for &s in splits {
        if s > lo && s < hi {
            bounds.push(s);
        }
    }
    bounds.push(hi);
    bounds.sort_by(|a, b| a.partial_cmp(b).expect("split points must be ordered"));
    bounds.dedup_by(|a, b| (*a - *b).abs() <= F::epsilon() * a.abs().max(F::one()));

    // Coarse pass to anchor the relative tolerance.
    let mut rough = F::zero();
    for pair in bounds.windows(2) {
        rough += composite_simpson(f, pair[0], pair[1], 16);
    }
    let target = atol.max(rtol * rough.abs());
    let seg_tol = target / real(bounds.len() as f64 - 1.0);

    let mut value = F::zero();
    let mut error = F::zero();
    for pair in bounds.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let m = (a + b) / real(2.0);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        let out = refine(f, a, fa, m, fm, b, fb, whole, seg_tol, 64);
        value += out.value;
        error += out.error;
    }
    QuadOutcome { value, error }
}

fn simpson<F: Real>(a: F, b: F, fa: F, fm: F, fb: F) -> F {
    (b - a) / real(6.0) * (fa + real::<F>(4.0) * fm + fb)
}

fn composite_simpson<F: Real>(f: &dyn Fn(F) -> F, a: F, b: F, panels: usize) -> F {
    let h = (b - a) / real(panels as f64);
    let mut acc = F::zero();
    for i in 0..panels {
        let lo = a + h * real(i as f64);
        let hi = lo + h;
        let m = (lo + hi) / real(2.0);
        acc += simpson(lo, hi, f(lo), f(m), f(hi));
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Real>(
    f: &dyn Fn(F) -> F,
    a: F,
    fa: F,
    m: F,
    fm: F,
    b: F,
    fb: F,
    whole: F,
    tol: F,
    depth: u32,
) -> QuadOutcome<F> {
    let lm = (a + m) / real(2.0);
    let rm = (m + b) / real(2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = real::<F>(15.0);
    if delta.abs() <= fifteen * tol || depth == 0 {
        return QuadOutcome {
            value: left + right + delta / fifteen,
            error: delta.abs() / fifteen,
        };
    }
    let half = tol / real(2.0);
    let l = refine(f, a, fa, lm, flm, m, fm, left, half, depth - 1);
    let r = refine(f, m, fm, rm, frm, b, fb, right, half, depth - 1);
    QuadOutcome {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // Simpson is exact on cubics.
        let out = integrate(&|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, &[], 1e-14, 0.0);
        assert!((out.value - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_split() {
        let f = |x: f64| if x < 1.0 { x } else { 2.0 - x };
        let out = integrate(&f, 0.0, 2.0, &[1.0], 1e-13, 0.0);
        assert!((out.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_scale_relative_mode() {
        // Integrand of size ~1e-24: relative tolerance must carry it.
        let c = 1e-24;
        let f = move |x: f64| c * (1.0 + x * x);
        let out = integrate(&f, 0.0, 1.0, &[], 1e-30, 1e-9);
        let exact = c * (1.0 + 1.0 / 3.0);
        assert!((out.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn empty_interval_is_zero() {
        let out = integrate(&|x: f64| x, 1.0, 1.0, &[], 1e-12, 0.0);
        assert_eq!(out.value, 0.0);
        let out = integrate(&|x: f64| x, 2.0, 1.0, &[], 1e-12, 0.0);
        assert_eq!(out.value, 0.0);
    }
}
