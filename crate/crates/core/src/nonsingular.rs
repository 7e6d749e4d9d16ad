//! Weighted cutting and stacking: the same combinatorics as [`Tower`], with
//! unequal sub-column widths so that `T` contracts or expands levels.
//!
//! Every level of `C_N` is a single interval. In the III_lambda and III_1
//! variants its width is `W_N * prod g^e` for a common constant `W_N` and an
//! integer exponent vector `e` over the generators `g`, so the
//! Radon-Nikodym derivative `w(l + n)/w(l)` of `T^n` on level `l` is read
//! off the exponents and checked against the exact widths.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::cf::{classify, CFNumber};
use crate::eigen::{self, PhaseExponent};
use crate::error::{Error, Result};
use crate::interval::RatInterval;
use crate::rational::{self, Rational};
use crate::tower::{LevelSet, PointCode, Tower};

pub const PIECE_ORDER: &str = "wide pieces left, narrow pieces right within each level";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Variant {
    /// Narrow pieces are `lambda` times the wide ones at every stage with
    /// `a_k >= 2`.
    IIILambda {
        #[serde(with = "rational::serde_fraction")]
        lambda: Rational,
    },
    /// On stages `k_j` (smallest `k` with `a_k >= j`, `j >= 2`) the first
    /// piece is half the level and the rest share the other half equally;
    /// other stages cut equally.
    III0,
    /// As III_lambda, alternating `lambda` and `beta` over the stages with
    /// `a_k >= 2`.
    III1 {
        #[serde(with = "rational::serde_fraction")]
        lambda: Rational,
        #[serde(with = "rational::serde_fraction")]
        beta: Rational,
    },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::IIILambda { .. } => "III_lambda",
            Variant::III0 => "III_0",
            Variant::III1 { .. } => "III_1",
        }
    }

    fn generators(&self) -> Vec<Rational> {
        match self {
            Variant::IIILambda { lambda } => vec![lambda.clone()],
            Variant::III0 => Vec::new(),
            Variant::III1 { lambda, beta } => vec![lambda.clone(), beta.clone()],
        }
    }
}

/// Width of the spacers added when `C_k` is stacked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacerWidth {
    /// The rightmost piece of the base level of `C_{k-1}`. Keeps every
    /// single-step ratio in `{1, lambda, 1/lambda}`.
    #[default]
    RightmostOfBase,
    /// The rightmost piece of the top level of `C_{k-1}`. Exponents drift
    /// with the stage, so single steps can reach `lambda^{-2}` and beyond.
    RightmostOfTop,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsStage {
    pub k: usize,
    pub height: u64,
    pub cuts: u64,
    /// Width fractions of the `a_k` pieces, left to right.
    #[serde(with = "rational::serde_fraction_vec")]
    pub fractions: Vec<Rational>,
    /// Generator used by the narrow pieces, if any.
    pub generator: Option<usize>,
    /// Index of the first narrow piece.
    pub narrow_from: u64,
    pub spacers: u64,
    #[serde(with = "rational::serde_fraction_opt")]
    pub spacer_width: Option<Rational>,
    pub spacer_exponent: Vec<i64>,
    pub spacer_block: Option<RatInterval>,
}

#[derive(Clone, Debug)]
pub struct NsTower {
    tower: Tower,
    variant: Variant,
    spacer_rule: SpacerWidth,
    generators: Vec<Rational>,
    stages: Vec<NsStage>,
    warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsDump {
    pub alpha: String,
    pub variant: Variant,
    pub spacer_rule: SpacerWidth,
    pub piece_order: &'static str,
    pub spacer_placement: &'static str,
    pub depth: usize,
    pub stages: Vec<NsStage>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RnExponent {
    pub n: i64,
    pub depth: usize,
    /// `omega_n = prod g_i^{e_i}` on the level nest of the point.
    pub exponents: Vec<i64>,
    #[serde(with = "rational::serde_fraction")]
    pub omega: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSetWitness {
    pub variant: &'static str,
    #[serde(with = "rational::serde_fraction")]
    pub lambda: Rational,
    #[serde(with = "rational::serde_fraction_opt")]
    pub beta: Option<Rational>,
    /// `A` is the base level of `C_stage`.
    pub stage: usize,
    /// Levels were resolved in `C_depth`.
    pub depth: usize,
    pub n: u64,
    pub exponent: Vec<i64>,
    #[serde(with = "rational::serde_fraction")]
    pub omega: Rational,
    /// `m(A ∩ T^{-n} A ∩ {omega_n = omega})` carried by levels of `C_depth`
    /// whose `n`-step orbit stays in the column.
    #[serde(with = "rational::serde_fraction")]
    pub measure: Rational,
}

fn check_unit_interval(name: &str, x: &Rational) -> Result<()> {
    if *x <= Rational::zero() || *x >= Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "{name} = {} must lie in (0, 1)",
            rational::to_fraction_string(x)
        )));
    }
    Ok(())
}

fn ceil_half(a: u64) -> u64 {
    a.div_ceil(2)
}

/// `lambda`/`beta` pieces: `ceil(a/2)` wide then `floor(a/2)` narrow.
pub fn weighted_fractions(a: u64, g: &Rational) -> Vec<Rational> {
    let wide = ceil_half(a);
    let narrow = a / 2;
    let denom = Rational::from_integer(wide.into()) + g * Rational::from_integer(narrow.into());
    let w = denom.recip();
    let nw = g * &w;
    (0..a).map(|m| if m < wide { w.clone() } else { nw.clone() }).collect()
}

/// First piece half the level, the other `a - 1` sharing the second half.
pub fn half_first_fractions(a: u64) -> Vec<Rational> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let rest = Rational::new(BigInt::one(), BigInt::from(2 * (a - 1)));
    std::iter::once(half).chain((1..a).map(|_| rest.clone())).collect()
}

fn equal_fractions(a: u64) -> Vec<Rational> {
    vec![Rational::new(BigInt::one(), BigInt::from(a)); a as usize]
}

fn small_factor(mut n: u64, sign: i64, out: &mut BTreeMap<u64, i64>) {
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            *out.entry(p).or_insert(0) += sign;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += sign;
    }
}

/// Prime exponent vector of a positive rational, if it fits in 64 bits.
fn prime_exponents(x: &Rational) -> Option<BTreeMap<u64, i64>> {
    let mut out = BTreeMap::new();
    small_factor(x.numer().to_u64()?, 1, &mut out);
    small_factor(x.denom().to_u64()?, -1, &mut out);
    out.retain(|_, e| *e != 0);
    Some(out)
}

/// `lambda^x beta^y = 1` only for `x = y = 0`, decided on prime exponents.
/// `None` when the factorisation is out of reach.
pub fn multiplicatively_independent(lambda: &Rational, beta: &Rational) -> Option<bool> {
    let u = prime_exponents(lambda)?;
    let v = prime_exponents(beta)?;
    if u.is_empty() || v.is_empty() {
        return Some(false);
    }
    let primes: Vec<u64> = u.keys().chain(v.keys()).copied().collect();
    let get = |m: &BTreeMap<u64, i64>, p: u64| *m.get(&p).unwrap_or(&0) as i128;
    // rank 2 iff some 2x2 minor is nonzero
    for &p in &primes {
        for &q in &primes {
            if get(&u, p) * get(&v, q) != get(&u, q) * get(&v, p) {
                return Some(true);
            }
        }
    }
    Some(false)
}

fn add_exp(a: &mut [i64], b: &[i64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

impl NsTower {
    pub fn build(cf: &CFNumber, variant: Variant, depth: usize) -> Result<NsTower> {
        NsTower::build_with_spacers(cf, variant, depth, SpacerWidth::default())
    }

    pub fn build_with_spacers(
        cf: &CFNumber,
        variant: Variant,
        depth: usize,
        spacer_rule: SpacerWidth,
    ) -> Result<NsTower> {
        let mut warnings = Vec::new();
        match &variant {
            Variant::IIILambda { lambda } => check_unit_interval("lambda", lambda)?,
            Variant::III1 { lambda, beta } => {
                check_unit_interval("lambda", lambda)?;
                check_unit_interval("beta", beta)?;
                match multiplicatively_independent(lambda, beta) {
                    Some(true) => {}
                    Some(false) => warnings.push(
                        "lambda and beta are multiplicatively dependent; the III_1 criterion does not apply"
                            .into(),
                    ),
                    None => warnings.push("independence of lambda and beta not checked".into()),
                }
            }
            Variant::III0 => {}
        }
        let tower = Tower::build(cf, depth)?;
        if variant == Variant::III0 && classify(cf, depth.max(2))?.coefficient_bound.bounded != Some(false) {
            return Err(Error::InvalidParameter(
                "III_0 needs a tail rule with unbounded coefficients".into(),
            ));
        }
        let generators = variant.generators();
        let mut ns = NsTower {
            tower,
            variant,
            spacer_rule,
            generators,
            stages: Vec::with_capacity(depth),
            warnings,
        };

        let mut weighted_seen = 0usize;
        let mut next_k_j = 2u64;
        let mut right = Rational::one();
        for k in 1..=depth {
            let a = ns.tower.cuts(k);
            let (fractions, generator, narrow_from) = match &ns.variant {
                _ if a == 1 => (vec![Rational::one()], None, 1),
                Variant::III0 => {
                    if a >= next_k_j {
                        next_k_j = a + 1;
                        (half_first_fractions(a), None, a)
                    } else {
                        (equal_fractions(a), None, a)
                    }
                }
                Variant::IIILambda { .. } | Variant::III1 { .. } => {
                    let g = weighted_seen % ns.generators.len();
                    weighted_seen += 1;
                    (weighted_fractions(a, &ns.generators[g]), Some(g), ceil_half(a))
                }
            };
            let spacers = if k >= 2 { ns.tower.height(k - 2) } else { 0 };
            let (spacer_width, spacer_exponent, spacer_block) = if k >= 2 {
                let prev = &ns.stages[k - 2];
                let source = match spacer_rule {
                    SpacerWidth::RightmostOfBase => 0,
                    SpacerWidth::RightmostOfTop => ns.tower.height(k - 1) - 1,
                };
                let last = prev.cuts - 1;
                let w = ns.level_width(k - 1, source)? * &prev.fractions[last as usize];
                let mut e = ns.level_exponent(k - 1, source)?;
                add_exp(&mut e, &ns.piece_exponent(k - 1, last));
                let block = (spacers > 0).then(|| {
                    let end = &right + &w * Rational::from_integer(spacers.into());
                    let b = RatInterval::new(right.clone(), end.clone());
                    right = end;
                    b
                });
                (Some(w), e, block)
            } else {
                (None, vec![0; ns.generators.len()], None)
            };
            ns.stages.push(NsStage {
                k,
                height: ns.tower.height(k),
                cuts: a,
                fractions,
                generator,
                narrow_from,
                spacers,
                spacer_width,
                spacer_exponent,
                spacer_block,
            });
        }
        Ok(ns)
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn spacer_rule(&self) -> SpacerWidth {
        self.spacer_rule
    }

    pub fn generators(&self) -> &[Rational] {
        &self.generators
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn stage(&self, k: usize) -> &NsStage {
        &self.stages[k - 1]
    }

    pub fn dump(&self) -> NsDump {
        NsDump {
            alpha: self.tower.cf().to_literal(),
            variant: self.variant.clone(),
            spacer_rule: self.spacer_rule,
            piece_order: PIECE_ORDER,
            spacer_placement: crate::tower::SPACER_PLACEMENT,
            depth: self.depth(),
            stages: self.stages.clone(),
            warnings: self.warnings.clone(),
        }
    }

    fn piece_exponent(&self, k: usize, m: u64) -> Vec<i64> {
        let s = self.stage(k);
        let mut e = vec![0; self.generators.len()];
        if let Some(g) = s.generator {
            if m >= s.narrow_from {
                e[g] = 1;
            }
        }
        e
    }

    fn check_level(&self, n: usize, level: u64) -> Result<()> {
        if n < 1 || n > self.stages.len() {
            return Err(Error::DepthUnavailable {
                requested: n,
                built: self.stages.len(),
            });
        }
        if level >= self.tower.height(n) {
            return Err(Error::InvalidInput(format!("level {level} outside C_{n}")));
        }
        Ok(())
    }

    /// Width and exponent of the level of `C_n` holding `code`.
    fn code_weight(&self, code: &PointCode, n: usize) -> (Rational, Vec<i64>) {
        let k = code.k_x();
        let (mut w, mut e) = if k == 1 {
            (Rational::one(), vec![0; self.generators.len()])
        } else {
            let s = self.stage(k);
            (s.spacer_width.clone().expect("spacer stage"), s.spacer_exponent.clone())
        };
        for i in k..n {
            let m = code.digit(i);
            w *= &self.stage(i).fractions[m as usize];
            add_exp(&mut e, &self.piece_exponent(i, m));
        }
        (w, e)
    }

    pub fn level_width(&self, n: usize, level: u64) -> Result<Rational> {
        self.check_level(n, level)?;
        Ok(self.code_weight(&self.tower.decompose(level, n, &[]), n).0)
    }

    /// Exponent vector of a level; empty for III_0.
    pub fn level_exponent(&self, n: usize, level: u64) -> Result<Vec<i64>> {
        self.check_level(n, level)?;
        Ok(self.code_weight(&self.tower.decompose(level, n, &[]), n).1)
    }

    pub fn level_interval(&self, n: usize, level: u64) -> Result<RatInterval> {
        self.check_level(n, level)?;
        let code = self.tower.decompose(level, n, &[]);
        let k = code.k_x();
        let (mut lo, mut w) = if k == 1 {
            (Rational::zero(), Rational::one())
        } else {
            let s = self.stage(k);
            let sw = s.spacer_width.clone().expect("spacer stage");
            let idx = code.ell() - self.tower.cuts(k - 1) * self.tower.height(k - 1);
            let start = s.spacer_block.as_ref().expect("spacer block").lo().clone();
            (start + &sw * Rational::from_integer(idx.into()), sw)
        };
        for i in k..n {
            let m = code.digit(i) as usize;
            let f = &self.stage(i).fractions;
            let before: Rational = f[..m].iter().sum();
            lo += &w * before;
            w *= &f[m];
        }
        let hi = &lo + &w;
        Ok(RatInterval::new(lo, hi))
    }

    /// `w(l + 1)/w(l)` for every non-top level `l` of `C_n`.
    pub fn transition_ratios(&self, n: usize) -> Result<Vec<Rational>> {
        self.check_level(n, 0)?;
        let widths: Vec<Rational> = (0..self.tower.height(n))
            .map(|l| self.level_width(n, l))
            .collect::<Result<_>>()?;
        Ok(widths.windows(2).map(|w| &w[1] / &w[0]).collect())
    }

    /// `g_0^{e_0} g_1^{e_1} ...`
    pub fn evaluate(&self, exponents: &[i64]) -> Rational {
        self.generators
            .iter()
            .zip(exponents)
            .fold(Rational::one(), |acc, (g, &e)| acc * rational::pow(g, e))
    }

    /// Levels of `code` and of `T^n code` in `C_depth`.
    fn resolve(&self, code: &PointCode, n: i64, depth: usize) -> Result<(u64, u64)> {
        let l = self.tower.level_index(code, depth)?;
        let target = l as i128 + n as i128;
        if target >= 0 && target < self.tower.height(depth) as i128 {
            return Ok((l, target as u64));
        }
        // exact depth at which the orbit segment fits
        let conv = self.tower.cf().convergents(depth + 128)?;
        let mut lm = BigInt::from(l);
        let last = code.k_x() + code.digits().len();
        for m in depth..depth + 128 {
            lm += BigInt::from(code.digit(m)) * conv.q(m);
            let t = &lm + BigInt::from(n);
            if t >= BigInt::zero() && &t < conv.q(m + 1) {
                return Err(Error::NeedsDeeperStage { required: m + 1 });
            }
            if n < 0 && m >= last {
                return Err(Error::NoPreimage);
            }
        }
        Err(Error::NeedsDeeperStage { required: depth + 129 })
    }

    /// `omega_n` at the point, as an exact ratio of level widths.
    pub fn rn_ratio(&self, code: &PointCode, n: i64, depth: usize) -> Result<Rational> {
        let (from, to) = self.resolve(code, n, depth)?;
        Ok(self.level_width(depth, to)? / self.level_width(depth, from)?)
    }

    pub fn rn_exponent(&self, code: &PointCode, n: i64, depth: usize) -> Result<RnExponent> {
        if self.generators.is_empty() {
            return Err(Error::InvalidParameter(
                "III_0 widths are not powers of a fixed generator; use rn_ratio".into(),
            ));
        }
        let (from, to) = self.resolve(code, n, depth)?;
        let omega = self.level_width(depth, to)? / self.level_width(depth, from)?;
        let mut exponents = self.level_exponent(depth, to)?;
        let base = self.level_exponent(depth, from)?;
        for (x, y) in exponents.iter_mut().zip(&base) {
            *x -= y;
        }
        if let [e_div] = self.peel(&omega)?[..] {
            if exponents != [e_div] {
                return Err(Error::InternalInvariantViolation(format!(
                    "exponent bookkeeping {exponents:?} disagrees with width ratio (lambda^{e_div})"
                )));
            }
        }
        if self.evaluate(&exponents) != omega {
            return Err(Error::InternalInvariantViolation(format!(
                "width ratio {} is not g^{exponents:?}",
                rational::to_fraction_string(&omega)
            )));
        }
        Ok(RnExponent {
            n,
            depth,
            exponents,
            omega,
        })
    }

    /// For one generator, the exponent of `r` found by repeated exact
    /// division; empty otherwise.
    fn peel(&self, r: &Rational) -> Result<Vec<i64>> {
        let [lambda] = &self.generators[..] else {
            return Ok(Vec::new());
        };
        let mut r = r.clone();
        let mut e = 0i64;
        let one = Rational::one();
        if r < one {
            while r < one {
                r /= lambda;
                e += 1;
            }
        } else {
            while r > one {
                r *= lambda;
                e -= 1;
            }
        }
        if r != one {
            return Err(Error::InternalInvariantViolation(
                "width ratio is not a power of lambda".into(),
            ));
        }
        Ok(vec![e])
    }
}

/// Smallest `n > 0` with `m(A ∩ T^{-n} A ∩ {omega_n = g^target}) > 0` for `A`
/// the base of `C_k`, read in `C_depth`. Stages with `a_k = 1`, or with no
/// witness, pass the search on to the next stage below `depth`.
pub fn ratio_set_witness(ns: &NsTower, k: usize, target: &[i64], depth: usize) -> Result<RatioSetWitness> {
    if ns.generators.is_empty() {
        return Err(Error::InvalidParameter("III_0 has no exponent lattice to target".into()));
    }
    if target.len() != ns.generators.len() {
        return Err(Error::InvalidInput(format!(
            "target needs {} exponents",
            ns.generators.len()
        )));
    }
    if depth > ns.depth() {
        return Err(Error::DepthUnavailable {
            requested: depth,
            built: ns.depth(),
        });
    }
    let t = ns.tower();
    for stage in k.max(1)..depth {
        if t.cuts(stage) < 2 {
            continue;
        }
        let nest = t.refine(&LevelSet::single(stage, 0), depth)?;
        let weights: Vec<(u64, Rational, Vec<i64>)> = nest
            .indices()
            .iter()
            .map(|&l| {
                let (w, e) = ns.code_weight(&t.decompose(l, depth, &[]), depth);
                (l, w, e)
            })
            .collect();
        let last = *nest.indices().last().expect("nonempty nest");
        for n in 1..=last {
            let mut measure = Rational::zero();
            for (i, (l, w, e)) in weights.iter().enumerate() {
                if let Ok(j) = weights[i..].binary_search_by_key(&(l + n), |x| x.0) {
                    let e2 = &weights[i + j].2;
                    if e2.iter().zip(e).map(|(a, b)| a - b).eq(target.iter().copied()) {
                        measure += w;
                    }
                }
            }
            if measure > Rational::zero() {
                let gens = ns.generators();
                return Ok(RatioSetWitness {
                    variant: ns.variant.name(),
                    lambda: gens[0].clone(),
                    beta: gens.get(1).cloned(),
                    stage,
                    depth,
                    n,
                    exponent: target.to_vec(),
                    omega: ns.evaluate(target),
                    measure,
                });
            }
        }
    }
    Err(Error::WitnessNotFound(format!(
        "no stage in {k}..{depth} carries exponent {target:?}"
    )))
}

/// The phase exponent depends only on level indices, so it is read from
/// the underlying measure-preserving combinatorics.
pub fn eigen_phase_ns(ns: &NsTower, code: &PointCode, n: usize) -> Result<PhaseExponent> {
    eigen::phase_exponent(ns.tower(), code, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn half() -> Variant {
        Variant::IIILambda { lambda: ratio(1, 2) }
    }

    #[test]
    fn piece_fractions() {
        assert_eq!(weighted_fractions(2, &ratio(1, 2)), vec![ratio(2, 3), ratio(1, 3)]);
        assert_eq!(weighted_fractions(3, &ratio(1, 2)), vec![ratio(2, 5), ratio(2, 5), ratio(1, 5)]);
        assert_eq!(weighted_fractions(1, &ratio(1, 2)), vec![ratio(1, 1)]);
        let h: Rational = half_first_fractions(4).iter().sum();
        assert_eq!(h, ratio(1, 1));
    }

    #[test]
    fn rejects_bad_parameters() {
        let cf = CFNumber::sqrt(2).unwrap();
        for l in [ratio(0, 1), ratio(1, 1), ratio(3, 2)] {
            assert!(matches!(
                NsTower::build(&cf, Variant::IIILambda { lambda: l }, 4),
                Err(Error::InvalidParameter(_))
            ));
        }
        assert_eq!(
            NsTower::build(&CFNumber::golden(), half(), 4).err(),
            Some(Error::GoldenTypeRejected)
        );
        assert!(matches!(NsTower::build(&cf, Variant::III0, 4), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn widths_conserved_and_intervals_tile() {
        let cf = CFNumber::sqrt(2).unwrap();
        let ns = NsTower::build(&cf, half(), 5).unwrap();
        for n in 1..5 {
            for l in 0..ns.tower().height(n) {
                let parent = ns.level_width(n, l).unwrap();
                let kids: Rational = (0..ns.tower().cuts(n))
                    .map(|m| ns.level_width(n + 1, l + m * ns.tower().height(n)).unwrap())
                    .sum();
                assert_eq!(parent, kids);
                let iv = ns.level_interval(n, l).unwrap();
                assert_eq!(iv.width(), parent);
            }
        }
        let mut ivs: Vec<RatInterval> = (0..ns.tower().height(5)).map(|l| ns.level_interval(5, l).unwrap()).collect();
        ivs.sort_by(|a, b| a.lo().cmp(b.lo()));
        for w in ivs.windows(2) {
            assert_eq!(w[0].hi(), w[1].lo());
        }
    }

    #[test]
    fn single_steps_are_lambda_powers() {
        let cf = CFNumber::sqrt(2).unwrap();
        let ns = NsTower::build(&cf, half(), 6).unwrap();
        let ok = [ratio(1, 1), ratio(1, 2), ratio(2, 1)];
        assert!(ns.transition_ratios(6).unwrap().iter().all(|r| ok.contains(r)));
        let top = NsTower::build_with_spacers(&cf, half(), 6, SpacerWidth::RightmostOfTop).unwrap();
        assert!(top.transition_ratios(6).unwrap().contains(&ratio(4, 1)));
    }

    #[test]
    fn wide_to_narrow_is_one_power() {
        let cf = CFNumber::sqrt(2).unwrap();
        let ns = NsTower::build(&cf, half(), 4).unwrap();
        // C_2 = two copies of C_1: wide then narrow
        let e = ns.rn_exponent(&PointCode::new(1, 0, vec![0]), 1, 2).unwrap();
        assert_eq!(e.exponents, vec![1]);
        assert_eq!(e.omega, ratio(1, 2));
        let z = ns.rn_exponent(&PointCode::new(1, 0, vec![0]), 0, 2).unwrap();
        assert_eq!(z.exponents, vec![0]);
    }

    #[test]
    fn witnesses_for_sqrt2() {
        let cf = CFNumber::sqrt(2).unwrap();
        let ns = NsTower::build(&cf, half(), 6).unwrap();
        let w = ratio_set_witness(&ns, 3, &[1], 5).unwrap();
        assert_eq!((w.stage, w.n), (3, 5));
        assert!(w.measure > Rational::zero());
        assert_eq!(ratio_set_witness(&ns, 3, &[0], 5).unwrap().n, 7);
        let json = serde_json::to_value(&w).unwrap();
        assert_eq!(json["lambda"], "1/2");
    }

    #[test]
    fn independence() {
        assert_eq!(multiplicatively_independent(&ratio(1, 2), &ratio(1, 3)), Some(true));
        assert_eq!(multiplicatively_independent(&ratio(1, 2), &ratio(1, 4)), Some(false));
        assert_eq!(multiplicatively_independent(&ratio(2, 3), &ratio(4, 9)), Some(false));
        assert_eq!(multiplicatively_independent(&ratio(2, 3), &ratio(3, 4)), Some(true));
        let cf = CFNumber::sqrt(2).unwrap();
        let ns = NsTower::build(&cf, Variant::III1 { lambda: ratio(1, 2), beta: ratio(1, 4) }, 3).unwrap();
        assert_eq!(ns.warnings().len(), 1);
    }

    #[test]
    fn third_type_alternates_and_half_cuts() {
        let cf = CFNumber::sqrt(2).unwrap();
        let ns = NsTower::build(&cf, Variant::III1 { lambda: ratio(1, 2), beta: ratio(1, 3) }, 5).unwrap();
        let gens: Vec<Option<usize>> = (1..=4).map(|k| ns.stage(k).generator).collect();
        assert_eq!(gens, vec![Some(0), Some(1), Some(0), Some(1)]);
        let z = NsTower::build(&CFNumber::arithmetic_identity(), Variant::III0, 6).unwrap();
        assert_eq!(z.stage(1).fractions, vec![ratio(1, 1)]);
        assert_eq!(z.stage(3).fractions, vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]);
        for n in 2..=6 {
            assert!(z.transition_ratios(n).unwrap().iter().all(|r| r > &Rational::zero()));
        }
    }
}
