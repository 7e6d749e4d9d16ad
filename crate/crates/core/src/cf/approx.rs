//! Certified approximation errors `eps_k = |alpha - p_k/q_k|` and
//! `zeta_k = |q_k alpha - p_k|`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::CFNumber;
use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxError {
    pub k: usize,
    pub epsilon: RatInterval,
    pub zeta: RatInterval,
    #[serde(with = "rational::serde_fraction")]
    pub crude_bound: Rational,
    /// Sign of `alpha - p_k/q_k`.
    pub sign: i8,
}

/// Enclosure of alpha inside the depth-`depth` cylinder with width at most
/// `width`. Staying at depth >= k keeps every `p_j/q_j`, `j <= k`, outside.
fn enclosure_past(cf: &CFNumber, depth: usize, width: &Rational) -> Result<RatInterval> {
    let mut n = depth;
    loop {
        let iv = match cf.cylinder(n) {
            Ok(iv) => iv,
            Err(Error::StreamExhausted { index }) => {
                return Err(Error::InsufficientPrecision(format!(
                    "coefficient stream ends at index {index}"
                )))
            }
            Err(e) => return Err(e),
        };
        if &iv.width() <= width {
            return Ok(iv);
        }
        // widths shrink at least geometrically; jump ahead a little
        n += 4;
    }
}

fn errors_from(cf_alpha: &RatInterval, p: &BigInt, q: &BigInt, k: usize, crude: Rational) -> ApproxError {
    let r = Rational::new(p.clone(), q.clone());
    let diff = RatInterval::new(cf_alpha.lo() - &r, cf_alpha.hi() - &r);
    let sign = diff.strict_sign().expect("enclosure excludes the convergent");
    let epsilon = diff.abs();
    let zeta = epsilon.scale_int(q);
    ApproxError {
        k,
        epsilon,
        zeta,
        crude_bound: crude,
        sign,
    }
}

/// `eps_k` and `zeta_k` with interval widths at most `precision`.
pub fn approx_errors(cf: &CFNumber, k: usize, precision: &Rational) -> Result<ApproxError> {
    if k < 1 {
        return Err(Error::InvalidInput("approximation errors need k >= 1".into()));
    }
    if precision <= &Rational::zero() {
        return Err(Error::InvalidInput("precision must be positive".into()));
    }
    let c = cf.convergents(k + 1).map_err(exhausted_to_precision)?;
    let q = c.q(k);
    let width = precision / Rational::from_integer(q.clone());
    let alpha = enclosure_past(cf, k, &width)?;
    let crude = Rational::new(BigInt::one(), q * c.q(k + 1));
    Ok(errors_from(&alpha, c.p(k), q, k, crude))
}

fn exhausted_to_precision(e: Error) -> Error {
    match e {
        Error::StreamExhausted { index } => {
            Error::InsufficientPrecision(format!("coefficient stream ends at index {index}"))
        }
        e => e,
    }
}

/// `zeta_0..=zeta_to` from one shared enclosure. `zeta_0 = 1` exactly.
pub(crate) fn zetas(cf: &CFNumber, to: usize, precision: &Rational) -> Result<Vec<RatInterval>> {
    let c = cf.convergents(to + 1).map_err(exhausted_to_precision)?;
    let width = precision / Rational::from_integer(c.q(to).clone());
    let alpha = enclosure_past(cf, to, &width)?;
    let mut out = vec![RatInterval::point(Rational::one())];
    for k in 1..=to {
        let crude = Rational::new(BigInt::one(), c.q(k) * c.q(k + 1));
        out.push(errors_from(&alpha, c.p(k), c.q(k), k, crude).zeta);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TelescopeCheck {
    pub ell: usize,
    pub window: usize,
    /// `sum_{i=ell}^{W} (a_i - 1) zeta_i`
    pub lhs: RatInterval,
    /// `a_ell zeta_ell - sum_{i=ell+2}^{W} zeta_i - zeta_W - zeta_{W+1}`
    pub rhs: RatInterval,
    /// `a_k zeta_k + zeta_{k+1} = zeta_{k-1}` for every `ell <= k <= W`.
    pub recurrence_holds: bool,
    pub holds: bool,
}

/// Checks the telescoping identity for `(a_i - 1) zeta_i` on `[ell, window]`
/// within interval widths.
pub fn telescoping_check(cf: &CFNumber, ell: usize, window: usize, precision: &Rational) -> Result<TelescopeCheck> {
    if ell < 1 || window < ell + 1 {
        return Err(Error::InvalidInput(format!(
            "telescoping needs 1 <= ell < window (got ell={ell}, window={window})"
        )));
    }
    let z = zetas(cf, window + 1, precision)?;
    let mut lhs = RatInterval::point(Rational::zero());
    let mut recurrence_holds = true;
    for i in ell..=window {
        let a = BigInt::from(cf.a(i)?);
        lhs = &lhs + &z[i].scale_int(&(&a - 1));
        let combo = &z[i].scale_int(&a) + &z[i + 1];
        recurrence_holds &= combo.intersect(&z[i - 1]).is_some();
    }
    let a_ell = BigInt::from(cf.a(ell)?);
    let mut rhs = z[ell].scale_int(&a_ell);
    for zi in &z[(ell + 2).min(window + 1)..=window] {
        rhs = &rhs - zi;
    }
    rhs = &(&rhs - &z[window]) - &z[window + 1];
    let holds = lhs.intersect(&rhs).is_some();
    Ok(TelescopeCheck {
        ell,
        window,
        lhs,
        rhs,
        recurrence_holds,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::TailRule;
    use crate::rational::ratio;

    #[test]
    fn sqrt2_zeta_2() {
        let cf = CFNumber::sqrt(2).unwrap();
        let e = approx_errors(&cf, 2, &ratio(1, 100_000)).unwrap();
        // |2 sqrt2 - 3| = 0.171572875...
        assert!(e.zeta.lo() >= &ratio(1715, 10_000) && e.zeta.hi() <= &ratio(1716, 10_000));
        assert_eq!(e.crude_bound, ratio(1, 10));
        assert_eq!(e.zeta, e.epsilon.scale_int(&BigInt::from(2)));
        assert!(e.epsilon.hi() < &e.crude_bound);
    }

    #[test]
    fn signs_alternate() {
        let cf = CFNumber::sqrt(3).unwrap();
        for k in 1..20 {
            let e = approx_errors(&cf, k, &ratio(1, 1000)).unwrap();
            assert_eq!(e.sign, if k % 2 == 1 { 1 } else { -1 }, "k = {k}");
        }
    }

    #[test]
    fn recurrence_and_telescoping() {
        for cf in [CFNumber::sqrt(2).unwrap(), CFNumber::arithmetic_identity(), CFNumber::sqrt(7).unwrap()] {
            for ell in 1..4 {
                let t = telescoping_check(&cf, ell, 12, &ratio(1, 1 << 40)).unwrap();
                assert!(t.holds && t.recurrence_holds, "{cf} ell={ell}: {t:?}");
            }
        }
    }

    #[test]
    fn finite_source_is_insufficient() {
        let cf = CFNumber::new(0, vec![2, 2, 2], TailRule::Terminate).unwrap();
        assert!(matches!(
            approx_errors(&cf, 2, &ratio(1, 1_000_000)),
            Err(Error::InsufficientPrecision(_))
        ));
    }
}
