//! The cutting-and-stacking tower of `T_alpha`.
//!
//! `C_1 = [0, mu_1)` has one level. `C_{k+1}` is `C_k` cut into `a_k`
//! sub-columns of equal width, stacked left to right from the bottom up,
//! with `q_{k-1}` spacer levels on top, so `C_k` has height `q_k`. Spacers
//! are fresh intervals appended to the right of the support built so far.
//!
//! Every level is a single half-open interval. A point is coded by the
//! first column it lies in, its level there, and the sub-column digits it
//! picks at every later cut.

mod level_set;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cf::{certified_golden, CFNumber};
use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::rational::{self, Rational};

pub use level_set::LevelSet;

pub const SPACER_PLACEMENT: &str = "spacers appended contiguously to the right of the current support";
pub const SUBCOLUMN_ORDER: &str = "sub-columns cut left to right, stacked bottom to top";

/// One column `C_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageDescriptor {
    pub k: usize,
    pub height: u64,
    /// `a_k`, the number of sub-columns `C_k` is cut into.
    pub cuts: u64,
    /// Spacer levels added on top when `C_k` was stacked (`q_{k-2}`).
    pub spacers: u64,
    #[serde(with = "rational::serde_fraction")]
    pub level_width: Rational,
    /// The spacers added at this stage, as one block of `spacers` levels.
    pub spacer_block: Option<RatInterval>,
}

/// Symbolic address of a point: level `ell` of `C_{k_x}`, then digit `m_i`
/// (sub-column of `C_i`) for `i >= k_x`; unstored digits are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointCode {
    k_x: usize,
    ell: u64,
    digits: Vec<u64>,
}

impl PointCode {
    /// Trailing zero digits are dropped, so equal points compare equal.
    pub fn new(k_x: usize, ell: u64, mut digits: Vec<u64>) -> Self {
        assert!(k_x >= 1, "columns start at C_1");
        while digits.last() == Some(&0) {
            digits.pop();
        }
        PointCode { k_x, ell, digits }
    }

    /// Bottom of `C_1` with every digit zero.
    pub fn base() -> Self {
        PointCode::new(1, 0, Vec::new())
    }

    pub fn k_x(&self) -> usize {
        self.k_x
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// Stored digits, starting at stage `k_x`.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// `m_i`; zero past the stored digits.
    pub fn digit(&self, i: usize) -> u64 {
        assert!(i >= self.k_x, "digit m_{i} precedes k_x = {}", self.k_x);
        self.digits.get(i - self.k_x).copied().unwrap_or(0)
    }

    /// Last stage with a nonzero digit, if any.
    fn last_nonzero(&self) -> Option<usize> {
        (!self.digits.is_empty()).then(|| self.k_x + self.digits.len() - 1)
    }
}

#[derive(Clone, Debug)]
pub struct Tower {
    cf: CFNumber,
    mu1: Rational,
    /// `a[k]` for `k = 1..=depth`; `a[0]` unused.
    a: Vec<u64>,
    /// `q[k]` for `k = 0..=depth`.
    q: Vec<u64>,
    stages: Vec<StageDescriptor>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerDump {
    pub alpha: String,
    pub spacer_placement: &'static str,
    pub subcolumn_order: &'static str,
    pub depth: usize,
    #[serde(with = "rational::serde_fraction")]
    pub base_measure: Rational,
    #[serde(with = "rational::serde_fraction")]
    pub total_measure: Rational,
    pub stages: Vec<StageDescriptor>,
    pub support: Vec<RatInterval>,
}

pub fn build_tower(cf: &CFNumber, depth: usize) -> Result<Tower> {
    Tower::build(cf, depth)
}

impl Tower {
    pub fn build(cf: &CFNumber, depth: usize) -> Result<Tower> {
        Tower::build_with_base(cf, depth, Rational::from_integer(1.into()))
    }

    /// Tower with `m(C_1) = mu1`.
    pub fn build_with_base(cf: &CFNumber, depth: usize, mu1: Rational) -> Result<Tower> {
        if depth < 1 {
            return Err(Error::InvalidInput("tower depth must be >= 1".into()));
        }
        if mu1 <= Rational::zero() {
            return Err(Error::InvalidParameter("base measure must be positive".into()));
        }
        if certified_golden(cf) {
            return Err(Error::GoldenTypeRejected);
        }
        let cf = cf.fractional_part();
        let mut a = vec![0];
        a.extend(cf.coefficients(depth)?);
        let mut q = vec![0u64, 1];
        for k in 2..=depth {
            let next = a[k - 1]
                .checked_mul(q[k - 1])
                .and_then(|v| v.checked_add(q[k - 2]))
                .ok_or(Error::HeightOverflow { stage: k })?;
            q.push(next);
        }
        q.truncate(depth + 1);

        let mut stages = Vec::with_capacity(depth);
        let mut width = mu1.clone();
        let mut right = mu1.clone();
        for k in 1..=depth {
            if k >= 2 {
                width /= Rational::from_integer(a[k - 1].into());
            }
            let spacers = if k >= 2 { q[k - 2] } else { 0 };
            let spacer_block = (spacers > 0).then(|| {
                let end = &right + &width * Rational::from_integer(spacers.into());
                let block = RatInterval::new(right.clone(), end.clone());
                right = end;
                block
            });
            stages.push(StageDescriptor {
                k,
                height: q[k],
                cuts: a[k],
                spacers,
                level_width: width.clone(),
                spacer_block,
            });
        }
        Ok(Tower {
            cf,
            mu1,
            a,
            q,
            stages,
        })
    }

    pub fn cf(&self) -> &CFNumber {
        &self.cf
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[StageDescriptor] {
        &self.stages
    }

    pub fn stage(&self, k: usize) -> &StageDescriptor {
        &self.stages[k - 1]
    }

    /// `q_k`, for `0 <= k <= depth`.
    pub fn height(&self, k: usize) -> u64 {
        self.q[k]
    }

    /// `a_k`, for `1 <= k <= depth`.
    pub fn cuts(&self, k: usize) -> u64 {
        self.a[k]
    }

    pub fn level_width(&self, k: usize) -> &Rational {
        &self.stage(k).level_width
    }

    fn check_depth(&self, n: usize) -> Result<()> {
        if n < 1 || n > self.depth() {
            return Err(Error::DepthUnavailable {
                requested: n,
                built: self.depth(),
            });
        }
        Ok(())
    }

    /// `mu_n = m(C_n) = q_n * (level width at n)`.
    pub fn total_measure(&self, n: usize) -> Result<Rational> {
        self.check_depth(n)?;
        Ok(self.level_width(n) * Rational::from_integer(self.q[n].into()))
    }

    /// Disjoint intervals making up `C_depth`: `C_1` and every spacer block.
    pub fn support_layout(&self) -> Vec<RatInterval> {
        let mut out = vec![RatInterval::new(Rational::zero(), self.mu1.clone())];
        out.extend(self.stages.iter().filter_map(|s| s.spacer_block.clone()));
        out
    }

    pub fn dump(&self) -> TowerDump {
        TowerDump {
            alpha: self.cf.to_literal(),
            spacer_placement: SPACER_PLACEMENT,
            subcolumn_order: SUBCOLUMN_ORDER,
            depth: self.depth(),
            base_measure: self.mu1.clone(),
            total_measure: self.total_measure(self.depth()).expect("built depth"),
            stages: self.stages.clone(),
            support: self.support_layout(),
        }
    }

    /// Checks that `code` names a point of the tower visible at depth `n`.
    pub fn validate(&self, code: &PointCode, n: usize) -> Result<()> {
        self.check_depth(n)?;
        let k = code.k_x;
        if k > n {
            return Err(Error::NeedsDeeperStage { required: k });
        }
        if code.ell >= self.q[k] {
            return Err(Error::InvalidInput(format!(
                "level {} is outside C_{k} (height {})",
                code.ell, self.q[k]
            )));
        }
        if k > 1 && code.ell < self.a[k - 1] * self.q[k - 1] {
            return Err(Error::InvalidInput(format!(
                "level {} of C_{k} is not a spacer added at stage {k}",
                code.ell
            )));
        }
        for i in k..k + code.digits.len() {
            if i <= self.depth() && code.digit(i) >= self.a[i] {
                return Err(Error::InvalidInput(format!(
                    "digit m_{i} = {} exceeds a_{i} - 1 = {}",
                    code.digit(i),
                    self.a[i] - 1
                )));
            }
        }
        Ok(())
    }

    /// `l_n = ell + sum_{i=k_x}^{n-1} m_i q_i`, the level of `C_n` holding
    /// the point.
    pub fn level_index(&self, code: &PointCode, n: usize) -> Result<u64> {
        self.validate(code, n)?;
        Ok(self.level_unchecked(code, n))
    }

    fn level_unchecked(&self, code: &PointCode, n: usize) -> u64 {
        (code.k_x..n).fold(code.ell, |l, i| l + code.digit(i) * self.q[i])
    }

    /// The code of level `level` of `C_n`, with digits from stage `n` on
    /// taken from `tail`.
    pub fn decompose(&self, level: u64, n: usize, tail: &[u64]) -> PointCode {
        let mut digits_rev = Vec::new();
        let mut l = level;
        let mut j = n;
        while j > 1 && l < self.a[j - 1] * self.q[j - 1] {
            digits_rev.push(l / self.q[j - 1]);
            l %= self.q[j - 1];
            j -= 1;
        }
        let mut digits: Vec<u64> = digits_rev.into_iter().rev().collect();
        digits.extend_from_slice(tail);
        PointCode::new(j, l, digits)
    }

    /// Stored digits of `code` from stage `n` on.
    fn tail_from<'c>(&self, code: &'c PointCode, n: usize) -> &'c [u64] {
        let skip = n - code.k_x;
        if skip >= code.digits.len() {
            &[]
        } else {
            &code.digits[skip..]
        }
    }

    /// `T` on a code, read in `C_n`.
    pub fn apply_t(&self, code: &PointCode, n: usize) -> Result<PointCode> {
        let l = self.level_index(code, n)?;
        if l + 1 < self.q[n] {
            return Ok(self.decompose(l + 1, n, self.tail_from(code, n)));
        }
        Err(Error::NeedsDeeperStage {
            required: self.forward_resolution(code, n),
        })
    }

    /// Smallest depth past `n` at which the top of `C_n` is left.
    fn forward_resolution(&self, code: &PointCode, n: usize) -> usize {
        let mut l = self.q[n] - 1;
        for m in n..self.depth() {
            l += code.digit(m) * self.q[m];
            if l + 1 < self.q[m + 1] {
                return m + 1;
            }
        }
        self.depth() + 1
    }

    /// `T^{-1}` on a code, read in `C_n`.
    pub fn apply_t_inv(&self, code: &PointCode, n: usize) -> Result<PointCode> {
        let l = self.level_index(code, n)?;
        if l > 0 {
            return Ok(self.decompose(l - 1, n, self.tail_from(code, n)));
        }
        // the bottom of C_n is left only through a later nonzero digit
        match code.last_nonzero() {
            Some(last) if last >= n => {
                let first = (n..=last).find(|&i| code.digit(i) > 0).expect("nonzero digit");
                Err(Error::NeedsDeeperStage { required: first + 1 })
            }
            _ => Err(Error::NoPreimage),
        }
    }

    /// `T` read at the deepest built column.
    pub fn forward(&self, code: &PointCode) -> Result<PointCode> {
        self.apply_t(code, self.depth().max(code.k_x))
    }

    /// Interval of level `level` of `C_n`.
    pub fn level_interval(&self, n: usize, level: u64) -> Result<RatInterval> {
        self.check_depth(n)?;
        if level >= self.q[n] {
            return Err(Error::InvalidInput(format!("level {level} outside C_{n}")));
        }
        self.geometric_realize(&self.decompose(level, n, &[]), n)
    }

    /// The interval of `C_n` level `l_n` holding the point.
    pub fn geometric_realize(&self, code: &PointCode, n: usize) -> Result<RatInterval> {
        self.validate(code, n)?;
        let k = code.k_x;
        let mut lo = if k == 1 {
            Rational::zero()
        } else {
            let block = self.stage(k).spacer_block.as_ref().expect("spacer stage");
            let s = code.ell - self.a[k - 1] * self.q[k - 1];
            block.lo() + self.level_width(k) * Rational::from_integer(s.into())
        };
        for i in k..n {
            let m = code.digit(i);
            if m > 0 {
                lo += self.level_width(i + 1) * Rational::from_integer(m.into());
            }
        }
        let hi = &lo + self.level_width(n);
        Ok(RatInterval::new(lo, hi))
    }

    /// Uniform point of `C_n` (w.r.t. `m`) with `extra` random digits past
    /// stage `n`.
    pub fn random_code<R: Rng>(&self, rng: &mut R, n: usize, extra: usize) -> PointCode {
        let level = rng.gen_range(0..self.q[n]);
        let tail: Vec<u64> = (n..(n + extra).min(self.depth() + 1))
            .map(|i| rng.gen_range(0..self.a[i]))
            .collect();
        self.decompose(level, n, &tail)
    }

    pub fn measure(&self, set: &LevelSet) -> Rational {
        self.level_width(set.stage()) * Rational::from_integer(set.len().into())
    }

    /// The same set as a union of levels of `C_n`, `n >= stage`.
    pub fn refine(&self, set: &LevelSet, n: usize) -> Result<LevelSet> {
        self.check_depth(n)?;
        if n < set.stage() {
            return Err(Error::StageMismatch(set.stage(), n));
        }
        let mut cur = set.indices().to_vec();
        for i in set.stage()..n {
            let q = self.q[i];
            let mut next = Vec::with_capacity(cur.len() * self.a[i] as usize);
            for m in 0..self.a[i] {
                next.extend(cur.iter().map(|l| l + m * q));
            }
            cur = next;
        }
        Ok(LevelSet::from_sorted(n, cur))
    }

    /// Smallest depth at which `T^p` of every point of `set` is read inside
    /// the column. `None` when some points never resolve (`p < 0` below
    /// the base).
    pub fn resolution_depth(&self, set: &LevelSet, p: i64) -> Option<usize> {
        let j = set.stage();
        let (Some(&lo), Some(&hi)) = (set.indices().first(), set.indices().last()) else {
            return Some(j);
        };
        if p < 0 {
            return (lo >= p.unsigned_abs()).then_some(j);
        }
        // room above the topmost copy: q_j - 1 - hi + sum_{i=j-1}^{n-2} q_i
        let p = p as u128;
        let mut room = (self.q[j] - 1 - hi) as u128;
        let mut n = j;
        loop {
            if room >= p {
                return Some(n);
            }
            // q_{n-1}; grows without bound, computed past the built depth
            room += self.q_any(n - 1) as u128;
            n += 1;
            if n > 4096 {
                return None;
            }
        }
    }

    /// `q_k` past the built depth, saturating.
    fn q_any(&self, k: usize) -> u64 {
        if k < self.q.len() {
            return self.q[k];
        }
        let mut q0 = self.q[self.q.len() - 2];
        let mut q1 = self.q[self.q.len() - 1];
        for i in self.q.len()..=k {
            let a = self.cf.a(i - 1).unwrap_or(1);
            let next = a.saturating_mul(q1).saturating_add(q0);
            q0 = q1;
            q1 = next;
        }
        q1
    }

    /// `T^p(set)` as levels of `C_n`.
    pub fn push_level(&self, set: &LevelSet, p: i64, n: usize) -> Result<LevelSet> {
        self.check_depth(n)?;
        let required = self.resolution_depth(set, p).ok_or(Error::NoPreimage)?;
        if required > n {
            return Err(Error::NeedsDeeperStage { required });
        }
        let refined = self.refine(set, n)?;
        let moved = refined
            .indices()
            .iter()
            .map(|&l| (l as i128 + p as i128) as u64)
            .collect();
        Ok(LevelSet::from_sorted(n, moved))
    }

    /// `m(T^p(set) ∩ set) / m(set)`, read at the smallest resolving depth.
    pub fn return_ratio(&self, set: &LevelSet, p: i64) -> Result<Rational> {
        if set.is_empty() {
            return Err(Error::InvalidInput("return ratio of an empty set".into()));
        }
        let n = self.resolution_depth(set, p).ok_or(Error::NoPreimage)?;
        if n > self.depth() {
            return Err(Error::NeedsDeeperStage { required: n });
        }
        let refined = self.refine(set, n)?;
        let hits = refined.overlap_count(p);
        Ok(Rational::new(BigInt::from(hits), BigInt::from(refined.len())))
    }
}

/// `m(A ∩ B)`.
pub fn intersection_measure(tower: &Tower, a: &LevelSet, b: &LevelSet) -> Result<Rational> {
    Ok(tower.measure(&a.intersection(b)?))
}
