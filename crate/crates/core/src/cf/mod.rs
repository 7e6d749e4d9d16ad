//! Continued-fraction numbers, their convergents and certified enclosures.
//!
//! Indexing: `a_0` is the integer part, `a_k >= 1` for `k >= 1`, and the
//! convergents are `p_0 = 1, q_0 = 0, p_1 = a_0, q_1 = 1` with
//! `q_k = a_{k-1} q_{k-1} + q_{k-2}`. So `p_k / q_k = [a_0; a_1, ..., a_{k-1}]`.

mod address;
mod approx;
mod classify;
mod literal;
mod quadratic;
pub(crate) mod random;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::rational::Rational;

pub use address::{address, Address, AddressEntry, AddressTrend, Beta};
pub use approx::{approx_errors, telescoping_check, ApproxError, TelescopeCheck};
pub use classify::{certified_golden, classify, DIVERGENCE_THRESHOLD, Certainty, Classification, CoefficientBound, MeasureVerdict};
pub use quadratic::QuadraticSource;

/// Default bit count for seeded-random sources.
pub const DEFAULT_RANDOM_BITS: u32 = 256;

/// What follows the explicit coefficient list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TailRule {
    /// The explicit list is everything; reading past it is an error.
    Terminate,
    Constant { value: u64 },
    Periodic { period: Vec<u64> },
    /// `a_k = c*k + d`, with `k` the absolute coefficient index.
    Arithmetic { c: i64, d: i64 },
    /// Continued-fraction digits of a uniform dyadic sample in `[0, 1)`,
    /// kept only while they are shared by the whole dyadic cell.
    SeededRandom { seed: u64, bits: u32 },
}

#[derive(Clone, PartialEq, Eq)]
pub struct CFNumber {
    a0: BigInt,
    head: Vec<u64>,
    tail: TailRule,
    /// Resolved digits for `SeededRandom` tails.
    random_digits: Vec<u64>,
    quadratic: Option<QuadraticSource>,
}

impl CFNumber {
    pub fn new(a0: impl Into<BigInt>, head: Vec<u64>, tail: TailRule) -> Result<Self> {
        if let Some(pos) = head.iter().position(|&a| a == 0) {
            return Err(Error::InvalidInput(format!(
                "coefficient a_{} is zero; a_k >= 1 is required for k >= 1",
                pos + 1
            )));
        }
        let random_digits = match &tail {
            TailRule::Constant { value: 0 } => {
                return Err(Error::InvalidInput("constant tail must be >= 1".into()))
            }
            TailRule::Periodic { period } if period.is_empty() || period.contains(&0) => {
                return Err(Error::InvalidInput(
                    "periodic tail must be non-empty with entries >= 1".into(),
                ))
            }
            TailRule::Arithmetic { c, d } => {
                let first = head.len() as i64 + 1;
                if *c < 0 || c.checked_mul(first).and_then(|v| v.checked_add(*d)).is_none_or(|v| v < 1) {
                    return Err(Error::InvalidInput(format!(
                        "arithmetic tail {c}*k+{d} must be >= 1 for every k >= {first}"
                    )));
                }
                Vec::new()
            }
            TailRule::SeededRandom { seed, bits } => {
                if *bits < 8 {
                    return Err(Error::InvalidInput("random tail needs at least 8 bits".into()));
                }
                random::seeded_digits(*seed, *bits)
            }
            _ => Vec::new(),
        };
        Ok(CFNumber {
            a0: a0.into(),
            head,
            tail,
            random_digits,
            quadratic: None,
        })
    }

    /// `(u + v*sqrt(d)) / w` expanded exactly; the detected period becomes
    /// the tail rule.
    pub fn from_quadratic(u: i64, v: i64, w: i64, d: i64) -> Result<Self> {
        quadratic::expand(u, v, w, d)
    }

    pub fn parse(s: &str) -> Result<Self> {
        literal::parse(s)
    }

    pub fn golden() -> Self {
        CFNumber::from_quadratic(1, 1, 2, 5).expect("golden ratio")
    }

    pub fn sqrt(d: i64) -> Result<Self> {
        CFNumber::from_quadratic(0, 1, 1, d)
    }

    /// `[0; 1, 2, 3, ...]`, i.e. `a_k = k`.
    pub fn arithmetic_identity() -> Self {
        CFNumber::new(0, vec![], TailRule::Arithmetic { c: 1, d: 0 }).expect("a_k = k")
    }

    pub fn seeded_random(seed: u64, bits: u32) -> Result<Self> {
        CFNumber::new(0, vec![], TailRule::SeededRandom { seed, bits })
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    pub fn head(&self) -> &[u64] {
        &self.head
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn quadratic(&self) -> Option<&QuadraticSource> {
        self.quadratic.as_ref()
    }

    /// Period recorded for quadratic sources (or any periodic tail):
    /// `(index of first periodic coefficient, period)`.
    pub fn period(&self) -> Option<(usize, &[u64])> {
        match &self.tail {
            TailRule::Periodic { period } => Some((self.head.len() + 1, period)),
            TailRule::Constant { value } => Some((self.head.len() + 1, std::slice::from_ref(value))),
            _ => None,
        }
    }

    /// `a_k` for `k >= 1`.
    pub fn a(&self, k: usize) -> Result<u64> {
        assert!(k >= 1, "a(k) is for k >= 1; use a0() for the integer part");
        if k <= self.head.len() {
            return Ok(self.head[k - 1]);
        }
        let j = k - self.head.len() - 1;
        match &self.tail {
            TailRule::Terminate => Err(Error::StreamExhausted { index: k }),
            TailRule::Constant { value } => Ok(*value),
            TailRule::Periodic { period } => Ok(period[j % period.len()]),
            TailRule::Arithmetic { c, d } => (k as i64)
                .checked_mul(*c)
                .and_then(|v| v.checked_add(*d))
                .map(|v| v as u64)
                .ok_or(Error::StreamExhausted { index: k }),
            TailRule::SeededRandom { .. } => self
                .random_digits
                .get(j)
                .copied()
                .ok_or(Error::StreamExhausted { index: k }),
        }
    }

    /// `a_k` as an integer for any `k >= 0`.
    pub fn coefficient(&self, k: usize) -> Result<BigInt> {
        if k == 0 {
            Ok(self.a0.clone())
        } else {
            self.a(k).map(BigInt::from)
        }
    }

    /// Number of coefficients `a_1..` available, `None` when unbounded.
    pub fn available(&self) -> Option<usize> {
        match &self.tail {
            TailRule::Terminate => Some(self.head.len()),
            TailRule::SeededRandom { .. } => Some(self.head.len() + self.random_digits.len()),
            _ => None,
        }
    }

    pub fn coefficients(&self, n: usize) -> Result<Vec<u64>> {
        (1..=n).map(|k| self.a(k)).collect()
    }

    /// The same number reduced mod 1 (`a_0 = 0`).
    pub fn fractional_part(&self) -> CFNumber {
        let mut c = self.clone();
        c.a0 = BigInt::zero();
        c.quadratic = None;
        c
    }

    /// Convergents `(p_k, q_k)` for `k = 0..=n`.
    pub fn convergents(&self, n: usize) -> Result<Convergents> {
        let mut p = vec![BigInt::one(), self.a0.clone()];
        let mut q = vec![BigInt::zero(), BigInt::one()];
        for k in 2..=n.max(1) {
            let a = BigInt::from(self.a(k - 1)?);
            p.push(&a * &p[k - 1] + &p[k - 2]);
            q.push(&a * &q[k - 1] + &q[k - 2]);
        }
        p.truncate(n + 1);
        q.truncate(n + 1);
        Ok(Convergents { p, q })
    }

    /// Every real with coefficients `a_0..=a_n` lies in this interval.
    pub fn cylinder(&self, n: usize) -> Result<RatInterval> {
        let c = self.convergents(n + 1)?;
        Ok(cylinder_from(&c, n))
    }

    /// Certified enclosure of the number with width at most `width`.
    pub fn enclosure(&self, width: &Rational) -> Result<RatInterval> {
        if width <= &Rational::zero() {
            return Err(Error::InvalidInput("enclosure width must be positive".into()));
        }
        let mut conv = Convergents {
            p: vec![BigInt::one(), self.a0.clone()],
            q: vec![BigInt::zero(), BigInt::one()],
        };
        let mut n = 0;
        loop {
            let iv = cylinder_from(&conv, n);
            if &iv.width() <= width {
                return Ok(iv);
            }
            n += 1;
            let a = match self.a(n) {
                Ok(a) => BigInt::from(a),
                Err(Error::StreamExhausted { index }) => {
                    return Err(Error::InsufficientPrecision(format!(
                        "coefficient stream ends at index {index}; enclosure width {} not reachable",
                        crate::rational::to_fraction_string(width)
                    )))
                }
                Err(e) => return Err(e),
            };
            conv.push(&a);
        }
    }

    /// Canonical literal text.
    pub fn to_literal(&self) -> String {
        literal::format(self)
    }
}

fn cylinder_from(c: &Convergents, n: usize) -> RatInterval {
    // coefficients a_0..=a_n known: p_{n+1}/q_{n+1} and the mediant with p_n/q_n
    let (p1, q1) = (&c.p[n + 1], &c.q[n + 1]);
    let (p0, q0) = (&c.p[n], &c.q[n]);
    let end = Rational::new(p1.clone(), q1.clone());
    let med = Rational::new(p1 + p0, q1 + q0);
    RatInterval::hull(end, med)
}

impl fmt::Debug for CFNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl fmt::Display for CFNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl std::str::FromStr for CFNumber {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        literal::parse(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergents {
    pub p: Vec<BigInt>,
    pub q: Vec<BigInt>,
}

impl Convergents {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Last stage index `N`.
    pub fn depth(&self) -> usize {
        self.q.len() - 1
    }

    pub fn p(&self, k: usize) -> &BigInt {
        &self.p[k]
    }

    pub fn q(&self, k: usize) -> &BigInt {
        &self.q[k]
    }

    pub fn ratio(&self, k: usize) -> Rational {
        Rational::new(self.p[k].clone(), self.q[k].clone())
    }

    fn push(&mut self, a: &BigInt) {
        let k = self.q.len();
        let p = a * &self.p[k - 1] + &self.p[k - 2];
        let q = a * &self.q[k - 1] + &self.q[k - 2];
        self.p.push(p);
        self.q.push(q);
    }
}
