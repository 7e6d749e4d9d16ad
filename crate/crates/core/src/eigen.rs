//! The eigenfunction `f(x) = lim e^{2 pi i alpha l_N(x)}` with eigenvalue
//! `e^{2 pi i alpha}`.
//!
//! `f_N` is carried as the integer exponent `H = l_N`, so `f_N(Tx) =
//! e^{2 pi i alpha} f_N(x)` off the top level is the integer statement
//! `H(Tx) = H(x) + 1`. The truncation error is bounded through
//! `|f_{k+1} - f_k| < 2 pi eps_k a_k q_k < 2 pi / q_k`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cf::{certified_golden, CFNumber};
use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::rational::{self, ratio, Rational};
use crate::tower::{PointCode, Tower};

/// Explicit terms summed before the geometric closure.
const EXPLICIT_TERMS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseExponent {
    #[serde(with = "rational::serde_bigint")]
    pub h: BigInt,
    pub depth: usize,
    pub code: PointCode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBound {
    pub depth: usize,
    /// Upper bound on `sup |f - f_N|`.
    #[serde(with = "rational::serde_fraction")]
    pub bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleSample {
    #[serde(with = "rational::serde_bigint")]
    pub h: BigInt,
    /// `frac(alpha H)`, the argument of `f_N(x)` over `2 pi`.
    pub angle: RatInterval,
    #[serde(with = "rational::serde_fraction")]
    pub error_radius: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenCheck {
    pub exact_increment: bool,
    /// Bound on `|f(Tx) - e^{2 pi i alpha} f(x)|` for the limit `f`.
    #[serde(with = "rational::serde_fraction")]
    pub residual_bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityResult {
    /// `true` only with a certified positive gap; `false` is inconclusive.
    pub separated: bool,
    /// Lower bound on `|f(a) - f(b)|` at the final depth.
    #[serde(with = "rational::serde_fraction")]
    pub gap_lower_bound: Rational,
    pub depth: usize,
}

pub fn phase_exponent(tower: &Tower, code: &PointCode, n: usize) -> Result<PhaseExponent> {
    let h = tower.level_index(code, n)?;
    Ok(PhaseExponent {
        h: BigInt::from(h),
        depth: n,
        code: code.clone(),
    })
}

/// `2 pi (sum_{k=N}^{M-1} 1/q_k + 2/q_M + 2/q_{M+1})`, using
/// `q_{k+2} >= 2 q_k` for the closure.
pub fn tail_bound(cf: &CFNumber, n: usize) -> Result<TailBound> {
    if n < 1 {
        return Err(Error::InvalidInput("tail bound needs N >= 1".into()));
    }
    if certified_golden(cf) {
        return Err(Error::GoldenTypeRejected);
    }
    let cf = cf.fractional_part();
    let m = match cf.available() {
        Some(avail) if avail < n + EXPLICIT_TERMS => {
            if avail < n {
                return Err(Error::StreamExhausted { index: n });
            }
            avail
        }
        _ => n + EXPLICIT_TERMS,
    };
    let c = cf.convergents(m + 1)?;
    let recip = |k: usize| Rational::new(BigInt::one(), c.q(k).clone());
    let mut sum = Rational::zero();
    for k in n..m {
        sum += recip(k);
    }
    let two = Rational::from_integer(2.into());
    sum += &two * recip(m) + &two * recip(m + 1);
    Ok(TailBound {
        depth: n,
        bound: rational::two_pi_upper() * sum,
    })
}

/// Smallest `N` with `tail_bound(N) < threshold`.
pub fn depth_for_tail(cf: &CFNumber, threshold: &Rational, cap: usize) -> Result<usize> {
    for n in 1..=cap {
        if &tail_bound(cf, n)?.bound < threshold {
            return Ok(n);
        }
    }
    Err(Error::DepthCapExceeded {
        cap,
        required: cap + 1,
    })
}

/// Default evaluation depth: three decimal places.
pub fn default_depth(cf: &CFNumber) -> Result<usize> {
    depth_for_tail(cf, &ratio(1, 1000), 200)
}

pub fn eigen_check(tower: &Tower, code: &PointCode, n: usize) -> Result<EigenCheck> {
    let before = tower.level_index(code, n)?;
    let image = tower.apply_t(code, n)?;
    let after = tower.level_index(&image, n)?;
    let tb = tail_bound(tower.cf(), n)?;
    Ok(EigenCheck {
        exact_increment: after == before + 1,
        residual_bound: Rational::from_integer(2.into()) * tb.bound,
    })
}

/// Enclosure of `alpha * h mod 1`, width at most `precision` once `alpha`
/// is narrow enough.
fn angle_from(alpha: &RatInterval, h: &BigInt) -> RatInterval {
    if h.is_zero() {
        return RatInterval::point(Rational::zero());
    }
    alpha.scale_int(h).frac()
}

fn alpha_for(cf: &CFNumber, h_max: &BigInt, precision: &Rational) -> Result<RatInterval> {
    let scale = Rational::from_integer(h_max.abs().max(BigInt::one()));
    cf.fractional_part().enclosure(&(precision / scale))
}

pub fn circle_value(tower: &Tower, code: &PointCode, n: usize, precision: &Rational) -> Result<CircleSample> {
    let h = BigInt::from(tower.level_index(code, n)?);
    let alpha = alpha_for(tower.cf(), &h, precision)?;
    Ok(CircleSample {
        angle: angle_from(&alpha, &h),
        h,
        error_radius: tail_bound(tower.cf(), n)?.bound,
    })
}

/// Certified upper bound on `|e^{2 pi i alpha d} - 1|`: `2 pi |alpha d|`
/// with `|.|` the distance to the nearest integer.
pub fn chord_upper(alpha: &RatInterval, d: &BigInt) -> Rational {
    let dist = alpha.scale_int(d).dist_to_integer();
    rational::two_pi_upper() * dist.hi()
}

/// Certified lower bound on `|e^{2 pi i alpha d} - 1| = 2 sin(pi |alpha d|)`,
/// using `sin(pi t) >= 2t` on `[0, 1/2]`.
pub fn chord_lower(alpha: &RatInterval, d: &BigInt) -> Rational {
    let dist = alpha.scale_int(d).dist_to_integer();
    Rational::from_integer(4.into()) * dist.lo()
}

/// Tries depths `n, n+1, ..., cap` until the two points are certified
/// apart. Both codes must be valid in `tower`, built at least to `cap`.
pub fn injectivity_screen(
    tower: &Tower,
    a: &PointCode,
    b: &PointCode,
    n: usize,
    cap: usize,
) -> Result<InjectivityResult> {
    if a == b {
        return Err(Error::SamePoint);
    }
    let cap = cap.min(tower.depth());
    let start = n.max(a.k_x()).max(b.k_x());
    let mut last = InjectivityResult {
        separated: false,
        gap_lower_bound: Rational::zero(),
        depth: start,
    };
    let mut alpha: Option<RatInterval> = None;
    for depth in start..=cap {
        let ha = tower.level_index(a, depth)?;
        let hb = tower.level_index(b, depth)?;
        let tail = tail_bound(tower.cf(), depth)?.bound;
        let d = BigInt::from(ha) - BigInt::from(hb);
        let gap = if d.is_zero() {
            -Rational::from_integer(2.into()) * &tail
        } else {
            let need = ratio(1, 1 << 30) / Rational::from_integer(tower.height(depth).into());
            let al = match &alpha {
                Some(al) if al.width() <= need => al.clone(),
                _ => {
                    let fresh = tower.cf().enclosure(&(need / Rational::from_integer(1024.into())))?;
                    alpha = Some(fresh.clone());
                    fresh
                }
            };
            chord_lower(&al, &d) - Rational::from_integer(2.into()) * &tail
        };
        last = InjectivityResult {
            separated: gap > Rational::zero(),
            gap_lower_bound: gap,
            depth,
        };
        if last.separated {
            break;
        }
    }
    Ok(last)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    #[serde(with = "rational::serde_fraction")]
    pub start: Rational,
    #[serde(with = "rational::serde_fraction")]
    pub end: Rational,
    pub count: u64,
    /// `count / samples`, approximate.
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub alpha: String,
    pub depth: usize,
    pub samples: u64,
    pub seed: u64,
    #[serde(with = "rational::serde_fraction")]
    pub tail_bound: Rational,
    /// Kolmogorov–Smirnov distance to the uniform law, approximate.
    pub ks_statistic: f64,
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start,bin_end,mass\n");
        for b in &self.bins {
            out.push_str(&format!(
                "{},{},{}\n",
                rational::to_fraction_string(&b.start),
                rational::to_fraction_string(&b.end),
                b.mass
            ));
        }
        out
    }
}

/// KS distance between the empirical law of `xs` (in `[0,1)`) and uniform.
pub fn ks_uniform(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let above = (i + 1) as f64 / n - x;
            let below = x - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Angles of `f_N` at points drawn from `m` restricted to `C_N`.
///
/// Every level of `C_N` has the same width, so a uniform level index is an
/// `m`-uniform point of `C_N` as far as `f_N` can see.
pub fn pushforward_histogram(
    tower: &Tower,
    samples: u64,
    n: usize,
    bins: usize,
    seed: u64,
) -> Result<Histogram> {
    use rand::Rng;
    if bins < 2 {
        return Err(Error::InvalidParameter("need at least 2 bins".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if n < 1 || n > tower.depth() {
        return Err(Error::DepthUnavailable {
            requested: n,
            built: tower.depth(),
        });
    }
    let height = tower.height(n);
    let alpha = alpha_for(tower.cf(), &BigInt::from(height), &ratio(1, 1 << 40))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; bins];
    let mut xs = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let h = BigInt::from(rng.gen_range(0..height));
        let angle = angle_from(&alpha, &h);
        let x = rational::to_f64(angle.lo()).rem_euclid(1.0);
        let bin = ((x * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
        xs.push(x);
    }
    let ks_statistic = ks_uniform(&mut xs);
    let bins_out = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            start: ratio(i as i64, bins as i64),
            end: ratio(i as i64 + 1, bins as i64),
            count,
            mass: count as f64 / samples as f64,
        })
        .collect();
    Ok(Histogram {
        alpha: tower.cf().to_literal(),
        depth: n,
        samples,
        seed,
        tail_bound: tail_bound(tower.cf(), n)?.bound,
        ks_statistic,
        bins: bins_out,
    })
}
