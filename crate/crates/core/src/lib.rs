//! Unbiased rare-event simulation for tail probabilities of infinite
//! weighted sums of heavy-tailed random variables.
//!
//! The quantity of interest is `P{S > b}` for `S = sum_{n>=1} a_n X_n`,
//! where the `X_n` are i.i.d. with a regularly varying right tail of index
//! `alpha > 2` and the weights `a_n` decay fast enough that
//! `sum_n n a_n < inf`. Truncating the series at any fixed level biases a
//! plain Monte Carlo estimate; instead the tail probability is rewritten as
//! a telescoping sum over levels, a random level `N` is drawn from an
//! explicit law `p_n`, and a conditional Monte Carlo estimator of the
//! telescoping increment at level `N` is divided by `p_N`. The resulting
//! single-run estimator is unbiased, and with `p_n` proportional to
//! `a_n^alpha + a_n / b^r` its relative error stays bounded as the event
//! becomes rare, so a fixed replication budget suffices for any `b`.
//!
//! Module map:
//! - [`distributions`]: the increment laws (Pareto families) with exact
//!   tail evaluation and inverse-transform sampling,
//! - [`coefficients`]: weight sequences, their convergent sums, and the
//!   decay classification,
//! - [`local_estimator`]: conditional Monte Carlo estimators of
//!   `P{S_n > b} - P{S_{n-1} > b}`,
//! - [`outer_randomizer`]: the random truncation level and the combined
//!   single-run estimator,
//! - [`runner`]: seeded, parallel replication with streaming statistics
//!   and baseline estimators,
//! - [`oracle`]: independent small-instance ground truth (closed forms,
//!   deterministic quadrature, plain Monte Carlo),
//! - [`validation`]: self-checks wiring the estimators against the oracles.
//!
//! All numeric code is generic over the scalar type through [`scalar::Real`];
//! the `*64` aliases at the crate root fix `f64`, which is what the command
//! line front end and all shipped experiments use.

pub mod coefficients;
pub mod distributions;
pub mod error;
pub mod local_estimator;
pub mod oracle;
pub mod outer_randomizer;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod stats;
pub mod validation;

mod quad;

pub use error::{Error, Result};

/// `f64` increment distribution.
pub type Distribution64 = distributions::Distribution<f64>;
/// `f64` weight sequence.
pub type Coefficients64 = coefficients::CoefficientSequence<f64>;
/// `f64` truncation-level law.
pub type OuterLaw64 = outer_randomizer::OuterLaw<f64>;
/// `f64` replication statistics.
pub type RunStats64 = runner::RunStats<f64>;
