//! Closed intervals with exact rational endpoints.
//!
//! Every operation returns an enclosure of the exact image, so a quantity
//! known to lie in the inputs is guaranteed to lie in the output. No
//! rounding happens anywhere; widths only grow through the algebra itself.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, ratio, Rational};

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatInterval {
    #[serde(with = "rational::serde_fraction")]
    lo: Rational,
    #[serde(with = "rational::serde_fraction")]
    hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RatInterval { lo, hi }
    }

    /// Interval spanned by two points in either order.
    pub fn hull(a: Rational, b: Rational) -> Self {
        if a <= b {
            RatInterval { lo: a, hi: b }
        } else {
            RatInterval { lo: b, hi: a }
        }
    }

    pub fn point(x: Rational) -> Self {
        RatInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &RatInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &RatInterval) -> Option<RatInterval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then(|| RatInterval { lo, hi })
    }

    pub fn scale(&self, k: &Rational) -> RatInterval {
        RatInterval::hull(&self.lo * k, &self.hi * k)
    }

    pub fn scale_int(&self, k: &BigInt) -> RatInterval {
        self.scale(&Rational::from_integer(k.clone()))
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let c = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RatInterval { lo, hi }
    }

    pub fn abs(&self) -> RatInterval {
        if self.lo >= Rational::zero() {
            self.clone()
        } else if self.hi <= Rational::zero() {
            -self.clone()
        } else {
            RatInterval {
                lo: Rational::zero(),
                hi: (-&self.lo).max(self.hi.clone()),
            }
        }
    }

    /// Sign of every member, if uniform and nonzero.
    pub fn strict_sign(&self) -> Option<i8> {
        if self.lo > Rational::zero() {
            Some(1)
        } else if self.hi < Rational::zero() {
            Some(-1)
        } else {
            None
        }
    }

    /// Floor shared by every member, if there is one.
    pub fn common_floor(&self) -> Option<BigInt> {
        let a = rational::floor(&self.lo);
        let b = rational::floor(&self.hi);
        (a == b).then_some(a)
    }

    /// Nearest integer shared by every member, if determined. Fails when
    /// the interval touches a half-integer.
    pub fn nearest_integer(&self) -> Option<BigInt> {
        let half = ratio(1, 2);
        let a = rational::floor(&(&self.lo + &half));
        let b = rational::floor(&(&self.hi + &half));
        if a != b {
            return None;
        }
        // exclude the tie point itself
        let tie = Rational::from_integer(a.clone()) - &half;
        let tie_hi = &tie + Rational::one();
        if self.contains(&tie) || self.contains(&tie_hi) {
            return None;
        }
        Some(a)
    }

    /// Enclosure of the distance from members to the nearest integer,
    /// always inside `[0, 1/2]`.
    pub fn dist_to_integer(&self) -> RatInterval {
        let half = ratio(1, 2);
        if self.width() >= Rational::one() {
            return RatInterval::new(Rational::zero(), half);
        }
        let m = rational::floor(&(&self.lo + &half));
        let centre = Rational::from_integer(m);
        let lo = &self.lo - &centre;
        let hi = &self.hi - &centre;
        // lo in [-1/2, 1/2)
        if hi <= half {
            RatInterval::new(lo, hi).abs()
        } else {
            // straddles m + 1/2: minimum over the two monotone pieces
            let left = if lo <= Rational::zero() {
                Rational::zero()
            } else {
                lo
            };
            let right = if hi >= Rational::one() {
                Rational::zero()
            } else {
                Rational::one() - hi
            };
            RatInterval::new(left.min(right), half)
        }
    }

    /// `x mod 1` as an interval `[lo, hi]` with `lo` in `[0, 1)`; `hi` may
    /// exceed 1 when the enclosure wraps past an integer.
    pub fn frac(&self) -> RatInterval {
        let f = rational::floor(&self.lo);
        let shift = Rational::from_integer(f);
        RatInterval {
            lo: &self.lo - &shift,
            hi: &self.hi - &shift,
        }
    }
}

impl Add for &RatInterval {
    type Output = RatInterval;
    fn add(self, rhs: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &RatInterval {
    type Output = RatInterval;
    fn sub(self, rhs: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Neg for RatInterval {
    type Output = RatInterval;
    fn neg(self) -> RatInterval {
        RatInterval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl fmt::Debug for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            rational::to_fraction_string(&self.lo),
            rational::to_fraction_string(&self.hi)
        )
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.12}, {:.12}]",
            rational::to_f64(&self.lo),
            rational::to_f64(&self.hi)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: (i64, i64), b: (i64, i64)) -> RatInterval {
        RatInterval::new(ratio(a.0, a.1), ratio(b.0, b.1))
    }

    #[test]
    fn nearest_integer_refuses_ties() {
        assert_eq!(iv((1, 3), (2, 5)).nearest_integer(), Some(BigInt::zero()));
        assert_eq!(iv((2, 5), (3, 5)).nearest_integer(), None);
        assert_eq!(iv((1, 2), (1, 2)).nearest_integer(), None);
        assert_eq!(iv((7, 5), (7, 5)).nearest_integer(), Some(BigInt::one()));
    }

    #[test]
    fn dist_to_integer_cases() {
        assert_eq!(iv((9, 10), (11, 10)).dist_to_integer(), iv((0, 1), (1, 10)));
        assert_eq!(iv((1, 10), (2, 10)).dist_to_integer(), iv((1, 10), (2, 10)));
        assert_eq!(iv((4, 10), (6, 10)).dist_to_integer(), iv((4, 10), (1, 2)));
        assert_eq!(iv((-3, 10), (-2, 10)).dist_to_integer(), iv((2, 10), (3, 10)));
    }

    #[test]
    fn frac_keeps_width() {
        let f = iv((17, 10), (19, 10)).frac();
        assert_eq!(f, iv((7, 10), (9, 10)));
        let w = iv((19, 10), (21, 10)).frac();
        assert_eq!(w, iv((9, 10), (11, 10)));
    }

    fn point_distance(x: &Rational) -> Rational {
        let f = rational::frac(x);
        let g = Rational::one() - &f;
        f.min(g)
    }

    proptest! {
        #[test]
        fn dist_to_integer_encloses_members(
            a in -2000i64..2000, w in 0i64..400, t in 0i64..=100
        ) {
            let lo = ratio(a, 97);
            let hi = ratio(a + w, 97);
            let x = &lo + (&hi - &lo) * ratio(t, 100);
            let d = RatInterval::new(lo, hi).dist_to_integer();
            prop_assert!(d.contains(&point_distance(&x)));
            prop_assert!(d.hi() <= &ratio(1, 2));
        }

        #[test]
        fn mul_encloses_products(
            a in -50i64..50, b in 0i64..20, c in -50i64..50, d in 0i64..20, s in 0i64..=10, t in 0i64..=10
        ) {
            let x = RatInterval::new(ratio(a, 7), ratio(a + b, 7));
            let y = RatInterval::new(ratio(c, 5), ratio(c + d, 5));
            let px = x.lo() + x.width() * ratio(s, 10);
            let py = y.lo() + y.width() * ratio(t, 10);
            prop_assert!(x.mul(&y).contains(&(px * py)));
        }
    }
}
