//! Finite, exact checks of the dynamical statements: coprime heights and
//! rational eigenvalues, the address screen for eigenvalues, partial
//! rigidity along `q_k`, and the rigid / nonrigid dichotomy.

use std::borrow::Cow;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cf::{address, classify, Beta, CFNumber, TailRule};
use crate::error::{Error, Result};
use crate::rational::{self, ratio, Rational};
use crate::tower::{LevelSet, Tower};

/// Exit codes for reports.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// `gcd(q_k, q_{k+1}) = 1` for every `k < n`.
pub fn coprime_heights(cf: &CFNumber, n: usize) -> Result<bool> {
    let c = cf.convergents(n)?;
    Ok((0..n).all(|k| c.q(k).gcd(c.q(k + 1)).is_one()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueCycle {
    /// First index of the repeating block.
    pub start: usize,
    pub period: usize,
    /// `q_k mod s` over one period.
    pub residues: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RationalVerdict {
    /// `q = 1`: the eigenvalue 1 is always present.
    NotAConstraint,
    /// `q` fails to divide infinitely many heights.
    Excluded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalScreen {
    pub q: u64,
    pub verdict: RationalVerdict,
    /// `q_k mod q` for `k = 0..=n`.
    pub residues: Vec<u64>,
    /// Exact period of `q_k mod q` when the tail rule fixes it.
    pub cycle: Option<ResidueCycle>,
    /// How the exclusion is certified.
    pub certificate: String,
}

/// Position of `k` in the tail rule's own period, for `k` past the head.
fn tail_position(cf: &CFNumber, k: usize, s: u64) -> Option<u64> {
    let h = cf.head().len();
    match cf.tail() {
        TailRule::Constant { .. } => Some(0),
        TailRule::Periodic { period } => Some(((k - h - 1) % period.len()) as u64),
        TailRule::Arithmetic { .. } => Some(k as u64 % s),
        TailRule::Terminate | TailRule::SeededRandom { .. } => None,
    }
}

/// The eventual cycle of `q_k mod s`, when the tail rule determines it.
pub fn residue_cycle(cf: &CFNumber, s: u64) -> Result<Option<ResidueCycle>> {
    if s < 2 {
        return Ok(None);
    }
    let h = cf.head().len();
    let start = h + 1;
    if tail_position(cf, start, s).is_none() {
        return Ok(None);
    }
    let c = cf.convergents(start)?;
    let md = |x: &BigInt| x.mod_floor(&BigInt::from(s)).to_u64().expect("residue");
    let (mut prev, mut cur) = (md(c.q(start - 1)), md(c.q(start)));
    let mut seen: HashMap<(u64, u64, u64), usize> = HashMap::new();
    let mut residues = Vec::new();
    let mut k = start;
    loop {
        let pos = tail_position(cf, k, s).expect("tail rule");
        if let Some(&first) = seen.get(&(prev, cur, pos)) {
            return Ok(Some(ResidueCycle {
                start: first,
                period: k - first,
                residues: residues[first - start..].to_vec(),
            }));
        }
        if seen.len() > 50_000_000 {
            return Ok(None);
        }
        seen.insert((prev, cur, pos), k);
        residues.push(cur);
        let a = cf.a(k)? % s;
        let next = ((a as u128 * cur as u128 + prev as u128) % s as u128) as u64;
        prev = cur;
        cur = next;
        k += 1;
    }
}

pub fn rational_eigenvalue_screen(cf: &CFNumber, q: u64, n: usize) -> Result<RationalScreen> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be >= 1".into()));
    }
    let c = cf.convergents(n.max(2))?;
    let residues: Vec<u64> = (0..=n.max(2))
        .map(|k| (c.q(k) % BigInt::from(q)).to_u64().expect("residue"))
        .collect();
    if q == 1 {
        return Ok(RationalScreen {
            q,
            verdict: RationalVerdict::NotAConstraint,
            residues,
            cycle: None,
            certificate: "lambda = 1 is always an eigenvalue".into(),
        });
    }
    let cycle = residue_cycle(cf, q)?;
    let certificate = match &cycle {
        Some(cy) if cy.residues.iter().any(|&r| r != 0) => format!(
            "q_k mod {q} repeats with period {} from k = {}; nonzero residues recur",
            cy.period, cy.start
        ),
        _ => format!("gcd(q_k, q_{{k+1}}) = 1, so {q} divides at most one of any two consecutive heights"),
    };
    Ok(RationalScreen {
        q,
        verdict: RationalVerdict::Excluded,
        residues,
        cycle,
        certificate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenVerdict {
    ConsistentWithEigenvalue,
    Excluded,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExclusionCertificate {
    pub denominator: u64,
    /// `eps_{k,beta} >= 1/denominator` whenever `denominator` does not
    /// divide `q_k`.
    #[serde(with = "rational::serde_fraction")]
    pub eps_lower_bound: Rational,
    pub screen: RationalScreen,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenScreenReport {
    pub alpha: String,
    pub beta: Beta,
    pub depth: usize,
    /// Upper endpoints of `eps_{k,beta}`, `k = 1..=depth`.
    #[serde(with = "rational::serde_fraction_vec")]
    pub eps_upper: Vec<Rational>,
    pub verdict: ScreenVerdict,
    /// `n` with `beta = n alpha mod 1` found by matching addresses.
    pub matched_multiple: Option<i64>,
    /// Matching tolerance `1/(4M)`, when `M` is certified.
    #[serde(with = "rational::serde_fraction_opt")]
    pub tolerance: Option<Rational>,
    pub exclusion: Option<ExclusionCertificate>,
}

impl EigenScreenReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            ScreenVerdict::Inconclusive => EXIT_INCONCLUSIVE,
            _ => EXIT_OK,
        }
    }
}

/// `n` in `(-q/2, q/2]` with `n p = target (mod q)`.
fn solve_multiple(p: &BigInt, q: &BigInt, target: &BigInt) -> Option<BigInt> {
    if q.is_one() {
        return Some(BigInt::zero());
    }
    let e = p.extended_gcd(q);
    if !e.gcd.is_one() {
        return None;
    }
    let mut n = (target * &e.x).mod_floor(q);
    if &n * 2 > *q {
        n -= q;
    }
    Some(n)
}

pub fn eigenvalue_screen(cf: &CFNumber, beta: &Beta, depth: usize) -> Result<EigenScreenReport> {
    let addr = address(cf, beta, depth)?;
    let eps_upper: Vec<Rational> = addr.entries.iter().map(|e| e.eps.hi().clone()).collect();
    let class = classify(cf, depth.max(2))?;
    let strict = class.coefficient_bound.strict_bound;
    let tolerance = strict.map(|m| ratio(1, 4 * m as i64));

    let mut report = EigenScreenReport {
        alpha: cf.to_literal(),
        beta: addr.beta.clone(),
        depth,
        eps_upper,
        verdict: ScreenVerdict::Inconclusive,
        matched_multiple: None,
        tolerance: tolerance.clone(),
        exclusion: None,
    };

    if let Beta::Exact(r) = &addr.beta {
        if r.is_zero() {
            report.verdict = ScreenVerdict::ConsistentWithEigenvalue;
            report.matched_multiple = Some(0);
            return Ok(report);
        }
        let s = r.denom().to_u64().ok_or_else(|| Error::InvalidInput("denominator too large".into()))?;
        let screen = rational_eigenvalue_screen(cf, s, depth)?;
        report.verdict = ScreenVerdict::Excluded;
        report.exclusion = Some(ExclusionCertificate {
            denominator: s,
            eps_lower_bound: ratio(1, s as i64),
            screen,
        });
        return Ok(report);
    }

    // match p_{k,beta} against n p_k mod q_k over the back half of the window
    let conv = cf.convergents(depth)?;
    let threshold = tolerance.clone().unwrap_or_else(|| ratio(1, 8));
    let from = (depth / 2).max(2);
    let mut candidate: Option<BigInt> = None;
    let mut stable = true;
    for k in from..=depth {
        let entry = &addr.entries[k - 1];
        if entry.eps.hi() >= &threshold {
            stable = false;
            break;
        }
        let n = solve_multiple(conv.p(k), conv.q(k), &entry.p);
        match (&candidate, n) {
            (_, None) => stable = false,
            (None, Some(n)) => candidate = Some(n),
            (Some(c), Some(n)) if *c == n => {}
            _ => stable = false,
        }
    }
    if let (true, Some(n)) = (stable, candidate) {
        let q_last = conv.q(depth);
        // a genuine multiple is small against the deepest height
        if BigInt::from(4) * n.abs() < *q_last {
            report.matched_multiple = n.to_i64();
            report.verdict = ScreenVerdict::ConsistentWithEigenvalue;
        }
    }
    Ok(report)
}

/// Which levels a rigidity scan tests at stage `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "stage")]
pub enum LevelSample {
    /// All levels of `C_{min(k,6)}` plus the base of `C_1`.
    Default,
    /// The base level of `C_k` only.
    BaseOfStage,
    /// Every level of `C_j` for `j <= min(k, stage)`.
    AllLevelsThrough(usize),
}

impl LevelSample {
    fn sets(&self, tower: &Tower, k: usize) -> Vec<LevelSet> {
        let all = |j: usize| (0..tower.height(j)).map(move |l| LevelSet::single(j, l));
        match *self {
            LevelSample::Default => {
                let j = k.min(6);
                let mut v: Vec<LevelSet> = all(j).collect();
                if j > 1 {
                    v.push(LevelSet::single(1, 0));
                }
                v
            }
            LevelSample::BaseOfStage => vec![LevelSet::single(k, 0)],
            LevelSample::AllLevelsThrough(s) => (1..=k.min(s)).flat_map(all).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RigidityVerdict {
    /// Partial rigidity bound `(a_k - 1)/a_k >= 1/2` held at every tested k.
    PartialRigidityHolds,
    /// Deficiencies along a subsequence shrink toward 0; evidence only.
    RigidAlongSubsequence,
    /// `m(T^p I \ I) >= m(I)/M^2` for every tested `p`.
    NonrigidCertified,
    /// An asserted bound failed.
    Violation,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KRecord {
    pub k: usize,
    pub a_k: u64,
    /// Minimum of `m(T^{q_k} I ∩ I)/m(I)` over the tested levels.
    #[serde(with = "rational::serde_fraction_opt")]
    pub ratio: Option<Rational>,
    /// `(a_k - 1)/a_k`.
    #[serde(with = "rational::serde_fraction")]
    pub bound: Rational,
    /// `1 - ratio`.
    #[serde(with = "rational::serde_fraction_opt")]
    pub deficiency: Option<Rational>,
    pub levels_tested: usize,
    pub skipped: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EscapeRecord {
    pub p: u64,
    /// `m(T^p I \ I) / m(I)`.
    #[serde(with = "rational::serde_fraction")]
    pub escape: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonrigidCertificate {
    pub max_p: u64,
    pub coefficient_bound: u64,
    #[serde(with = "rational::serde_fraction")]
    pub required: Rational,
    #[serde(with = "rational::serde_fraction")]
    pub min_escape: Rational,
    pub argmin_p: u64,
    /// Escapes at `p = q_k`.
    pub at_heights: Vec<EscapeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityReport {
    pub alpha: String,
    pub mode: String,
    pub per_k: Vec<KRecord>,
    pub nonrigid: Option<NonrigidCertificate>,
    pub verdict: RigidityVerdict,
    pub note: String,
}

impl RigidityReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            RigidityVerdict::Violation => EXIT_VIOLATION,
            RigidityVerdict::Inconclusive => EXIT_INCONCLUSIVE,
            _ => EXIT_OK,
        }
    }
}

/// Extends `tower` to `required` if the cap allows.
fn ensure_depth<'t>(tower: &mut Cow<'t, Tower>, required: usize, cap: usize) -> Result<()> {
    if required <= tower.depth() {
        return Ok(());
    }
    if required > cap {
        return Err(Error::DepthCapExceeded { cap, required });
    }
    *tower = Cow::Owned(Tower::build(tower.cf(), required)?);
    Ok(())
}

/// `m(T^p S ∩ S)/m(S)`, extending the tower as needed.
fn ratio_at<'t>(tower: &mut Cow<'t, Tower>, set: &LevelSet, p: u64, cap: usize) -> Result<Rational> {
    let p = i64::try_from(p).map_err(|_| Error::InvalidInput("shift too large".into()))?;
    let required = tower.resolution_depth(set, p).ok_or(Error::NoPreimage)?;
    ensure_depth(tower, required, cap)?;
    tower.return_ratio(set, p)
}

/// Return ratios along `T^{q_k}` for `k` in `ks`.
pub fn partial_rigidity_scan(
    tower: &Tower,
    ks: std::ops::RangeInclusive<usize>,
    sample: LevelSample,
    cap: usize,
) -> Result<RigidityReport> {
    let mut t = Cow::Borrowed(tower);
    ensure_depth(&mut t, *ks.end(), cap)?;
    let mut per_k = Vec::new();
    for k in ks {
        let a_k = t.cuts(k);
        let bound = Rational::new(BigInt::from(a_k - 1), BigInt::from(a_k));
        if a_k == 1 {
            per_k.push(KRecord {
                k,
                a_k,
                ratio: None,
                bound,
                deficiency: None,
                levels_tested: 0,
                skipped: true,
                holds: true,
            });
            continue;
        }
        let sets = sample.sets(&t, k);
        let q_k = t.height(k);
        let mut min: Option<Rational> = None;
        for s in &sets {
            let r = ratio_at(&mut t, s, q_k, cap)?;
            if min.as_ref().is_none_or(|m| &r < m) {
                min = Some(r);
            }
        }
        let min = min.expect("nonempty sample");
        per_k.push(KRecord {
            k,
            a_k,
            holds: min >= bound,
            deficiency: Some(Rational::one() - &min),
            ratio: Some(min),
            bound,
            levels_tested: sets.len(),
            skipped: false,
        });
    }
    let tested: Vec<&KRecord> = per_k.iter().filter(|r| !r.skipped).collect();
    let verdict = if tested.is_empty() {
        RigidityVerdict::Inconclusive
    } else if tested.iter().all(|r| r.holds) {
        RigidityVerdict::PartialRigidityHolds
    } else {
        RigidityVerdict::Violation
    };
    Ok(RigidityReport {
        alpha: tower.cf().to_literal(),
        mode: "partial".into(),
        per_k,
        nonrigid: None,
        verdict,
        note: "ratios are exact over level sets; k with a_k = 1 are skipped".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RigidityMode {
    /// Look for deficiencies shrinking along `k_j` with `a_{k_j}` growing.
    RigidSearch { max_k: usize },
    /// Certify escape `>= 1/M^2` from the base of `C_1` for `1 < p <= max_p`.
    NonrigidCertify { max_p: u64 },
}

pub fn rigidity_scan(tower: &Tower, mode: RigidityMode, cap: usize) -> Result<RigidityReport> {
    let cf = tower.cf();
    match mode {
        RigidityMode::RigidSearch { max_k } => {
            let mut t = Cow::Borrowed(tower);
            ensure_depth(&mut t, max_k, cap)?;
            // k_j: the first k >= 2 where a_k reaches a new record
            let mut per_k = Vec::new();
            let mut record = 1;
            for k in 2..=max_k {
                let a_k = t.cuts(k);
                if a_k <= record {
                    continue;
                }
                record = a_k;
                let q_k = t.height(k);
                let r = ratio_at(&mut t, &LevelSet::single(k, 0), q_k, cap)?;
                let bound = Rational::new(BigInt::from(a_k - 1), BigInt::from(a_k));
                per_k.push(KRecord {
                    k,
                    a_k,
                    holds: r >= bound,
                    deficiency: Some(Rational::one() - &r),
                    ratio: Some(r),
                    bound,
                    levels_tested: 1,
                    skipped: false,
                });
            }
            let defs: Vec<&Rational> = per_k.iter().filter_map(|r| r.deficiency.as_ref()).collect();
            let shrinking = defs.len() >= 3 && defs.windows(2).all(|w| w[1] < w[0]);
            let verdict = if per_k.iter().any(|r| !r.holds) {
                RigidityVerdict::Violation
            } else if shrinking {
                RigidityVerdict::RigidAlongSubsequence
            } else {
                RigidityVerdict::Inconclusive
            };
            Ok(RigidityReport {
                alpha: cf.to_literal(),
                mode: "rigid-search".into(),
                per_k,
                nonrigid: None,
                verdict,
                note: "evidence only: rigidity is not certifiable from finitely many k; \
                       m(T^{q_k} I Δ I)/m(I) = 2 * deficiency"
                    .into(),
            })
        }
        RigidityMode::NonrigidCertify { max_p } => {
            let class = classify(cf, 2)?;
            let m = class.coefficient_bound.strict_bound.ok_or_else(|| {
                Error::InvalidMode("nonrigid-certify needs a coefficient bound M certified by the tail rule".into())
            })?;
            let required = Rational::new(BigInt::one(), BigInt::from(m) * BigInt::from(m));
            let base = LevelSet::single(1, 0);
            let mut t = Cow::Borrowed(tower);
            let mut min: Option<(Rational, u64)> = None;
            let mut at_heights = Vec::new();
            for p in 2..=max_p {
                let escape = Rational::one() - ratio_at(&mut t, &base, p, cap)?;
                if (1..=t.depth()).any(|k| t.height(k) == p) {
                    at_heights.push(EscapeRecord { p, escape: escape.clone() });
                }
                if min.as_ref().is_none_or(|(m, _)| &escape < m) {
                    min = Some((escape, p));
                }
            }
            let (min_escape, argmin_p) = min.ok_or_else(|| Error::InvalidInput("max_p must be >= 2".into()))?;
            let verdict = if min_escape >= required {
                RigidityVerdict::NonrigidCertified
            } else {
                RigidityVerdict::Violation
            };
            Ok(RigidityReport {
                alpha: cf.to_literal(),
                mode: "nonrigid-certify".into(),
                per_k: Vec::new(),
                nonrigid: Some(NonrigidCertificate {
                    max_p,
                    coefficient_bound: m,
                    required,
                    min_escape,
                    argmin_p,
                    at_heights,
                }),
                verdict,
                note: format!("certified for 1 < p <= {max_p} only"),
            })
        }
    }
}
