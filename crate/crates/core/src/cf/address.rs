//! Addresses of candidate eigenvalue phases: `p_{k,beta}` is the integer
//! nearest to `q_k beta` and `eps_{k,beta} = |p_{k,beta} - q_k beta|`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::CFNumber;
use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::rational::{self, ratio, Rational};

/// Refinement rounds before a near-tie is reported instead of resolved.
const MAX_REFINEMENTS: usize = 24;

/// A candidate phase `beta in [0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Beta {
    /// Exact rational, reduced mod 1.
    Exact(#[serde(with = "rational::serde_fraction")] Rational),
    /// `frac(n alpha)` for the alpha under study; refinable on demand.
    MultipleOfAlpha(i64),
    /// A fixed enclosure that cannot be refined.
    Interval(RatInterval),
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Exact(r) => f.write_str(&rational::to_fraction_string(r)),
            Beta::MultipleOfAlpha(n) => write!(f, "{n}*alpha"),
            Beta::Interval(iv) => write!(f, "{iv:?}"),
        }
    }
}

/// `1/2`, `0`, `alpha`, `-3*alpha`, `[1/3, 2/5]`.
impl FromStr for Beta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let (lo, hi) = inner
                .split_once(',')
                .ok_or_else(|| Error::InvalidInput(format!("interval needs two endpoints: {t:?}")))?;
            let lo = rational::parse_fraction(lo)?;
            let hi = rational::parse_fraction(hi)?;
            if lo > hi {
                return Err(Error::InvalidInput(format!("empty interval {t:?}")));
            }
            return Ok(Beta::Interval(RatInterval::new(lo, hi)));
        }
        if let Some(n) = t.strip_suffix("alpha") {
            let n = n.trim().trim_end_matches('*').trim();
            let n = match n {
                "" | "+" => 1,
                "-" => -1,
                _ => n
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad multiple of alpha: {t:?}")))?,
            };
            return Ok(Beta::MultipleOfAlpha(n));
        }
        Ok(Beta::Exact(rational::frac(&rational::parse_fraction(t)?)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AddressEntry {
    pub k: usize,
    #[serde(with = "rational::serde_bigint")]
    pub p: BigInt,
    pub eps: RatInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AddressTrend {
    /// Upper endpoints never increase over the second half of the entries.
    pub monotone_tail: bool,
    pub last: RatInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Address {
    pub beta: Beta,
    /// Enclosure of beta used for the deepest entry.
    pub enclosure: RatInterval,
    pub entries: Vec<AddressEntry>,
    pub trend: AddressTrend,
}

impl Address {
    pub fn eps(&self, k: usize) -> &RatInterval {
        &self.entries[k - 1].eps
    }
}

/// Enclosure of `frac(n alpha)` with width at most `width`.
fn multiple_enclosure(cf: &CFNumber, n: i64, width: &Rational) -> Result<RatInterval> {
    let scale = Rational::from_integer(BigInt::from(n).abs());
    let mut w = width / &scale;
    for _ in 0..MAX_REFINEMENTS {
        let x = cf.enclosure(&w)?.scale_int(&BigInt::from(n));
        if let Some(f) = x.common_floor() {
            let shift = Rational::from_integer(f);
            return Ok(RatInterval::new(x.lo() - &shift, x.hi() - &shift));
        }
        w /= Rational::from_integer(BigInt::one() << 32);
    }
    Err(Error::InsufficientPrecision(format!("floor of {n}*alpha undetermined")))
}

pub fn address(cf: &CFNumber, beta: &Beta, depth: usize) -> Result<Address> {
    if depth < 1 {
        return Err(Error::InvalidInput("address depth must be >= 1".into()));
    }
    let beta = match beta {
        Beta::MultipleOfAlpha(0) => Beta::Exact(Rational::zero()),
        Beta::Exact(r) => Beta::Exact(rational::frac(r)),
        b => b.clone(),
    };
    let conv = cf.convergents(depth)?;
    let half = ratio(1, 2);

    let mut enclosure = match &beta {
        Beta::Exact(r) => RatInterval::point(r.clone()),
        Beta::Interval(iv) => iv.clone(),
        Beta::MultipleOfAlpha(n) => {
            let q = Rational::from_integer(conv.q(depth).clone());
            multiple_enclosure(cf, *n, &(ratio(1, 1 << 20) / q))?
        }
    };

    let mut entries = Vec::with_capacity(depth);
    for k in 1..=depth {
        let q = conv.q(k);
        let mut rounds = 0;
        let (p, eps) = loop {
            let x = enclosure.scale_int(q);
            if let Beta::Exact(_) = beta {
                // exact value: ties round half up
                let p = rational::floor(&(x.lo() + &half));
                let eps = (x.lo() - Rational::from_integer(p.clone())).abs();
                break (p, RatInterval::point(eps));
            }
            if let Some(p) = x.nearest_integer() {
                let pr = RatInterval::point(Rational::from_integer(p.clone()));
                break (p, (&x - &pr).abs());
            }
            match &beta {
                Beta::MultipleOfAlpha(n) if rounds < MAX_REFINEMENTS => {
                    rounds += 1;
                    let w = enclosure.width() / Rational::from_integer(BigInt::one() << 32);
                    enclosure = multiple_enclosure(cf, *n, &w)?;
                }
                _ => return Err(Error::TieUnresolved { k }),
            }
        };
        entries.push(AddressEntry { k, p, eps });
    }

    let tail = &entries[entries.len() / 2..];
    let monotone_tail = tail.windows(2).all(|w| w[1].eps.hi() <= w[0].eps.hi());
    let last = entries.last().expect("depth >= 1").eps.clone();
    Ok(Address {
        beta,
        enclosure,
        entries,
        trend: AddressTrend { monotone_tail, last },
    })
}
