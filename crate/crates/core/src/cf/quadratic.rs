//! Periodic continued fractions of quadratic irrationals.
//!
//! The number is carried as `(P + sqrt(D)) / Q` with `Q | D - P^2`; each
//! step takes `a = floor((P + sqrt D)/Q)`, `P' = aQ - P`, `Q' = (D - P'^2)/Q`.
//! The pair `(P, Q)` determines the remainder, so the first repeated pair
//! fixes the period.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{CFNumber, TailRule};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticSource {
    pub u: i64,
    pub v: i64,
    pub w: i64,
    pub d: i64,
}

fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// `floor((P + sqrt D) / Q)` for non-square `D`.
fn step_floor(p: &BigInt, q: &BigInt, isqrt_d: &BigInt) -> BigInt {
    if q.is_positive() {
        (p + isqrt_d).div_floor(q)
    } else {
        // (P + s + theta)/Q with theta in (0, 1) and Q < 0
        let sum: BigInt = p + isqrt_d;
        let num = -(sum + BigInt::one());
        num.div_floor(&(-q))
    }
}

pub(super) fn expand(u: i64, v: i64, w: i64, d: i64) -> Result<CFNumber> {
    if w == 0 {
        return Err(Error::InvalidInput("denominator w is zero".into()));
    }
    if d < 0 {
        return Err(Error::InvalidInput(format!("sqrt({d}) is not real")));
    }
    let d_big = BigInt::from(d);
    if v == 0 || is_square(&d_big) {
        return Err(Error::RationalInput(format!("({u}+{v}*sqrt({d}))/{w}")));
    }

    // (u + v sqrt d)/w = (s u + sqrt(v^2 d)) / (s w), s = sign(v)
    let s = if v > 0 { 1 } else { -1 };
    let mut p = BigInt::from(s * u);
    let mut big_d = BigInt::from(v) * BigInt::from(v) * &d_big;
    let mut q = BigInt::from(s) * BigInt::from(w);
    if !(&big_d - &p * &p).is_multiple_of(&q) {
        let qa = q.abs();
        p *= &qa;
        big_d *= &q * &q;
        q *= &qa;
    }
    let root = big_d.sqrt();

    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut coeffs: Vec<BigInt> = Vec::new();
    let (start, end) = loop {
        if let Some(&i) = seen.get(&(p.clone(), q.clone())) {
            break (i, coeffs.len());
        }
        seen.insert((p.clone(), q.clone()), coeffs.len());
        let a = step_floor(&p, &q, &root);
        let p_next = &a * &q - &p;
        let q_next = (&big_d - &p_next * &p_next) / &q;
        debug_assert!(!q_next.is_zero());
        coeffs.push(a);
        p = p_next;
        q = q_next;
    };

    let a0 = coeffs[0].clone();
    let to_u64 = |a: &BigInt| {
        a.to_u64()
            .filter(|&x| x >= 1)
            .ok_or_else(|| Error::InvalidInput(format!("coefficient {a} out of range")))
    };
    // a periodic block starting at index 0 also repeats from index 1
    let first = start.max(1);
    let period_len = end - start;
    let head: Vec<u64> = coeffs[1..first]
        .iter()
        .map(to_u64)
        .collect::<Result<_>>()?;
    let period: Vec<u64> = (0..period_len)
        .map(|j| {
            let idx = start + (first - start + j) % period_len;
            to_u64(&coeffs[idx])
        })
        .collect::<Result<_>>()?;

    let mut cf = CFNumber::new(a0, head, TailRule::Periodic { period })?;
    cf.quadratic = Some(QuadraticSource { u, v, w, d });
    Ok(cf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    /// Independent oracle: continued fraction of `floor(x * 10^digits)` for a
    /// decimal approximation (1000 digits) computed by integer square roots.
    fn oracle_digits(u: i64, v: i64, w: i64, d: i64, count: usize) -> Vec<BigInt> {
        let scale = BigInt::from(10).pow(1000);
        let root = (BigInt::from(d) * &scale * &scale).sqrt(); // floor(sqrt(d) * 10^1000)
        // x ~ (u*scale + v*root) / (w*scale); the error is far below what
        // `count` digits can see
        let mut num = BigInt::from(u) * &scale + BigInt::from(v) * root;
        let mut den = BigInt::from(w) * &scale;
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let mut out = Vec::new();
        for _ in 0..count {
            let a = num.div_floor(&den);
            out.push(a.clone());
            let rem = &num - &a * &den;
            num = den;
            den = rem;
        }
        out
    }

    fn stream(cf: &CFNumber, n: usize) -> Vec<BigInt> {
        (0..n).map(|k| cf.coefficient(k).unwrap()).collect()
    }

    #[test]
    fn sqrt2_period_two() {
        let cf = expand(0, 1, 1, 2).unwrap();
        assert_eq!(cf.a0(), &BigInt::from(1));
        assert_eq!(cf.period().unwrap().1, &[2]);
        assert_eq!(stream(&cf, 30), oracle_digits(0, 1, 1, 2, 30));
    }

    #[test]
    fn golden_ratio_all_ones() {
        let cf = expand(1, 1, 2, 5).unwrap();
        assert_eq!(cf.a0(), &BigInt::from(1));
        assert_eq!(cf.period().unwrap().1, &[1]);
        assert!(cf.head().is_empty());
    }

    #[test]
    fn sqrt3_period_one_two() {
        let cf = expand(0, 1, 1, 3).unwrap();
        assert_eq!(cf.period().unwrap().1, &[1, 2]);
        assert_eq!(stream(&cf, 30), oracle_digits(0, 1, 1, 3, 30));
    }

    #[test]
    fn assorted_surds_match_oracle() {
        for &(u, v, w, d) in &[
            (3, 2, 7, 13),
            (-5, 1, 3, 19),
            (1, -1, 2, 5),
            (7, -3, -4, 2),
            (0, 1, 1, 94),
            (2, 5, 11, 61),
        ] {
            let cf = expand(u, v, w, d).unwrap();
            let (start, period) = cf.period().unwrap();
            let n = start + 4 * period.len() + 5;
            assert_eq!(stream(&cf, n), oracle_digits(u, v, w, d, n), "({u}+{v}sqrt{d})/{w}");
        }
    }

    #[test]
    fn rational_and_invalid_inputs() {
        assert!(matches!(expand(1, 1, 1, 4), Err(Error::RationalInput(_))));
        assert!(matches!(expand(1, 0, 1, 2), Err(Error::RationalInput(_))));
        assert!(matches!(expand(1, 1, 0, 2), Err(Error::InvalidInput(_))));
        assert!(matches!(expand(1, 1, 1, -2), Err(Error::InvalidInput(_))));
    }
}
