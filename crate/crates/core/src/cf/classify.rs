//! Golden type, coefficient bounds and the finite/infinite measure verdict.
//!
//! The total measure of the tower is `prod (1 + q_{k-1}/(a_k q_k))`, which is
//! finite exactly when `sum 1/(a_k a_{k-1})` converges. Verdicts are
//! certificates only when the tail rule pins down every future coefficient.

use num_traits::Zero;
use serde::Serialize;

use super::{CFNumber, TailRule};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Partial sums above this count as divergent in heuristic verdicts.
pub const DIVERGENCE_THRESHOLD: u64 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    /// Implied by the tail rule for every coefficient.
    Certified,
    /// Read off the inspected window only.
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureVerdict {
    Finite,
    Infinite,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientBound {
    /// Largest `a_k` over the window.
    pub window_max: u64,
    /// `Some(true)` bounded, `Some(false)` unbounded, `None` unknown.
    pub bounded: Option<bool>,
    /// `M` with `a_k < M` for every `k >= 1`, only from the tail rule.
    pub strict_bound: Option<u64>,
    pub certainty: Certainty,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub window: usize,
    /// `None` when the window cannot decide.
    pub golden_type: Option<bool>,
    pub golden_certainty: Certainty,
    pub coefficient_bound: CoefficientBound,
    pub measure: MeasureVerdict,
    pub measure_certainty: Certainty,
    /// `S_W = sum_{k=2}^{W} 1/(a_k a_{k-1})` for `W = 2..=window`.
    #[serde(with = "rational::serde_fraction_vec")]
    pub partial_sums: Vec<Rational>,
    /// `mu_k = m(C_k)` for `k = 1..=window`.
    #[serde(with = "rational::serde_fraction_vec")]
    pub partial_products: Vec<Rational>,
}

impl Classification {
    pub fn is_certified_golden(&self) -> bool {
        self.golden_type == Some(true) && self.golden_certainty == Certainty::Certified
    }
}

fn head_max(cf: &CFNumber) -> u64 {
    cf.head().iter().copied().max().unwrap_or(0)
}

/// Golden type forced by the tail rule (eventually all ones).
pub fn certified_golden(cf: &CFNumber) -> bool {
    golden_from_tail(cf) == Some(true)
}

fn golden_from_tail(cf: &CFNumber) -> Option<bool> {
    match cf.tail() {
        TailRule::Constant { value } => Some(*value == 1),
        TailRule::Periodic { period } => Some(period.iter().all(|&a| a == 1)),
        TailRule::Arithmetic { c, d } => Some(*c == 0 && *d == 1),
        TailRule::Terminate | TailRule::SeededRandom { .. } => None,
    }
}

fn bound_from_tail(cf: &CFNumber) -> Option<(bool, Option<u64>)> {
    let h = head_max(cf);
    match cf.tail() {
        TailRule::Constant { value } => Some((true, Some(h.max(*value) + 1))),
        TailRule::Periodic { period } => {
            let p = period.iter().copied().max().unwrap_or(0);
            Some((true, Some(h.max(p) + 1)))
        }
        TailRule::Arithmetic { c, d } if *c == 0 => Some((true, Some(h.max(*d as u64) + 1))),
        TailRule::Arithmetic { .. } => Some((false, None)),
        TailRule::Terminate | TailRule::SeededRandom { .. } => None,
    }
}

/// Convergence of `sum 1/(a_k a_{k-1})` implied by the tail rule.
fn measure_from_tail(cf: &CFNumber) -> Option<MeasureVerdict> {
    match cf.tail() {
        // terms bounded below by 1/M^2
        TailRule::Constant { .. } | TailRule::Periodic { .. } => Some(MeasureVerdict::Infinite),
        TailRule::Arithmetic { c: 0, .. } => Some(MeasureVerdict::Infinite),
        // terms ~ 1/(c^2 k^2)
        TailRule::Arithmetic { .. } => Some(MeasureVerdict::Finite),
        TailRule::Terminate | TailRule::SeededRandom { .. } => None,
    }
}

/// `S_W` for `W = 2..=a.len()`, with `a[0] = a_1`.
pub(crate) fn partial_sums(a: &[u64]) -> Vec<Rational> {
    let mut s = Rational::zero();
    a.windows(2)
        .map(|w| {
            s += Rational::new(1.into(), (w[0] as u128 * w[1] as u128).into());
            s.clone()
        })
        .collect()
}

pub fn classify(cf: &CFNumber, window: usize) -> Result<Classification> {
    if window < 2 {
        return Err(Error::InvalidInput("classification window must be >= 2".into()));
    }
    let window = match cf.available() {
        Some(n) if n < window => {
            if n < 2 {
                return Err(Error::InvalidInput(format!(
                    "only {n} coefficients available; classification needs 2"
                )));
            }
            n
        }
        _ => window,
    };
    let a = cf.coefficients(window)?;
    let conv = cf.fractional_part().convergents(window)?;

    let (golden_type, golden_certainty) = match golden_from_tail(cf) {
        Some(g) => (Some(g), Certainty::Certified),
        // a window ending in ones neither proves nor refutes golden type
        None if a.last() == Some(&1) => (None, Certainty::Heuristic),
        None => (Some(false), Certainty::Heuristic),
    };

    let window_max = a.iter().copied().max().unwrap_or(0);
    let coefficient_bound = match bound_from_tail(cf) {
        Some((bounded, strict_bound)) => CoefficientBound {
            window_max,
            bounded: Some(bounded),
            strict_bound,
            certainty: Certainty::Certified,
        },
        None => CoefficientBound {
            window_max,
            bounded: None,
            strict_bound: None,
            certainty: Certainty::Heuristic,
        },
    };

    let partial_sums = partial_sums(&a);
    let mut partial_products = Vec::with_capacity(window);
    let mut width = Rational::from_integer(1.into());
    for k in 1..=window {
        if k >= 2 {
            width /= Rational::from_integer(a[k - 2].into());
        }
        partial_products.push(&width * Rational::from_integer(conv.q(k).clone()));
    }

    let (measure, measure_certainty) = match measure_from_tail(cf) {
        Some(v) => (v, Certainty::Certified),
        None => {
            let last = partial_sums.last().cloned().unwrap_or_else(Rational::zero);
            let v = if last > Rational::from_integer(DIVERGENCE_THRESHOLD.into()) {
                MeasureVerdict::Infinite
            } else {
                MeasureVerdict::Undecided
            };
            (v, Certainty::Heuristic)
        }
    };

    Ok(Classification {
        window,
        golden_type,
        golden_certainty,
        coefficient_bound,
        measure,
        measure_certainty,
        partial_sums,
        partial_products,
    })
}
