//! Acceptance battery. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any failed.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankone::cf::{classify, Beta, CFNumber, MeasureVerdict};
use rankone::dynamics::{
    eigenvalue_screen, partial_rigidity_scan, rigidity_scan, LevelSample, RigidityMode, RigidityVerdict,
    ScreenVerdict,
};
use rankone::eigen::{
    chord_upper, default_depth, depth_for_tail, eigen_check, injectivity_screen, pushforward_histogram, tail_bound,
};
use rankone::gk::{gk_conditional, gk_limit, montecarlo, MonteCarloConfig};
use rankone::nonsingular::{ratio_set_witness, NsTower, Variant};
use rankone::rational::{ratio, to_fraction_string, Rational};
use rankone::tower::{PointCode, Tower};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn frac(r: &Rational) -> String {
    to_fraction_string(r)
}

/// Reference coefficients written out by hand.
fn reference_coefficient(name: &str, k: usize) -> u64 {
    match name {
        "sqrt2" => if k == 0 { 1 } else { 2 },
        "sqrt3" => match k {
            0 => 1,
            k if k % 2 == 1 => 1,
            _ => 2,
        },
        "golden" => 1,
        "arith" => k as u64,
        _ => unreachable!(),
    }
}

fn convergent_recursion() -> Outcome {
    let cases = [
        ("sqrt2", CFNumber::sqrt(2).map_err(err)?),
        ("sqrt3", CFNumber::sqrt(3).map_err(err)?),
        ("golden", CFNumber::golden()),
        ("arith", CFNumber::arithmetic_identity()),
    ];
    for (name, cf) in &cases {
        let c = cf.convergents(51).map_err(err)?;
        let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
        let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
        for k in 0..=51 {
            if k >= 1 {
                let a = BigInt::from(reference_coefficient(name, k - 1));
                ensure!(cf.coefficient(k - 1).map_err(err)? == a, "{name}: a_{} differs", k - 1);
                let (p, q) = (&a * &p1 + &p2, &a * &q1 + &q2);
                p2 = std::mem::replace(&mut p1, p);
                q2 = std::mem::replace(&mut q1, q);
            }
            ensure!(c.p(k) == &p1 && c.q(k) == &q1, "{name}: convergent {k} differs from the recursion");
        }
        for k in 1..=50 {
            ensure!(c.q(k).gcd(c.q(k + 1)).is_one(), "{name}: gcd(q_{k}, q_{}) != 1", k + 1);
            let det = c.p(k) * c.q(k - 1) - c.p(k - 1) * c.q(k);
            let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            ensure!(det == sign, "{name}: determinant at k = {k} is {det}");
        }
    }
    Ok("4 expansions, k <= 50, exact".into())
}

fn finiteness_classifier() -> Outcome {
    let s2 = CFNumber::sqrt(2).map_err(err)?;
    let c = classify(&s2, 50).map_err(err)?;
    ensure!(c.measure == MeasureVerdict::Infinite, "sqrt2 verdict {:?}", c.measure);
    for (i, s) in c.partial_sums.iter().enumerate() {
        let w = i as i64 + 2;
        ensure!(*s == ratio(w - 1, 4), "S_{w} = {}", frac(s));
    }
    let conv = s2.fractional_part().convergents(50).map_err(err)?;
    for (i, mu) in c.partial_products.iter().enumerate() {
        let k = i + 1;
        let expect = Rational::new(conv.q(k).clone(), BigInt::one() << (k - 1));
        ensure!(*mu == expect, "mu_{k} = {}", frac(mu));
    }
    let first_over_two = c
        .partial_products
        .iter()
        .position(|m| *m > ratio(2, 1))
        .map(|i| i + 1)
        .ok_or("mu_k never exceeds 2")?;
    ensure!(first_over_two <= 7, "mu_k first exceeds 2 at k = {first_over_two}");

    let ar = classify(&CFNumber::arithmetic_identity(), 50).map_err(err)?;
    ensure!(ar.measure == MeasureVerdict::Finite, "a_k = k verdict {:?}", ar.measure);
    let max = ar.partial_products.iter().max().expect("nonempty");
    ensure!(*max <= ratio(3, 1), "a_k = k: mu_k reaches {}", frac(max));
    Ok(format!(
        "sqrt2: S_W = (W-1)/4, mu_k = q_k/2^(k-1) > 2 from k = {first_over_two}; a_k = k: max mu_k ~ {:.4}",
        rankone::rational::to_f64(max)
    ))
}

fn eigen_relation() -> Outcome {
    let cf = CFNumber::sqrt(2).map_err(err)?;
    let n = 10;
    let tower = Tower::build(&cf, n + 5).map_err(err)?;
    let q = tower.height(n);
    for l in 0..q - 1 {
        let code = tower.decompose(l, n, &[]);
        let check = eigen_check(&tower, &code, n).map_err(err)?;
        ensure!(check.exact_increment, "H(Tx) != H(x) + 1 at level {l}");
    }
    let tb = tail_bound(&cf, n).map_err(err)?.bound;
    let alpha = cf.fractional_part().enclosure(&ratio(1, 1 << 62)).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = Rational::zero();
    for _ in 0..1000 {
        let code = tower.random_code(&mut rng, n, 5);
        let h0 = BigInt::from(tower.level_index(&code, n).map_err(err)?);
        let h5 = BigInt::from(tower.level_index(&code, n + 5).map_err(err)?);
        let bound = chord_upper(&alpha, &(h5 - h0));
        ensure!(bound <= tb, "|f_15 - f_10| may reach {}", frac(&bound));
        worst = worst.max(bound);
    }
    Ok(format!(
        "{} exact increments; max certified |f_15 - f_10| <= {:.3e} <= tail {:.3e}",
        q - 1,
        rankone::rational::to_f64(&worst),
        rankone::rational::to_f64(&tb)
    ))
}

fn partial_rigidity() -> Outcome {
    let mut notes = Vec::new();
    for (name, cf) in [
        ("sqrt2", CFNumber::sqrt(2).map_err(err)?),
        ("a_k=k", CFNumber::arithmetic_identity()),
    ] {
        let tower = Tower::build(&cf, 8).map_err(err)?;
        let r = partial_rigidity_scan(&tower, 3..=8, LevelSample::AllLevelsThrough(5), 16).map_err(err)?;
        for rec in &r.per_k {
            let ratio = rec.ratio.as_ref().ok_or(format!("{name}: k = {} skipped", rec.k))?;
            ensure!(
                rec.holds,
                "{name}: k = {} ratio {} < {}",
                rec.k,
                frac(ratio),
                frac(&rec.bound)
            );
        }
        let mins: Vec<String> = r.per_k.iter().map(|x| frac(x.ratio.as_ref().unwrap())).collect();
        notes.push(format!("{name} min ratios k=3..8: {}", mins.join(" ")));
    }
    Ok(notes.join("; "))
}

fn nonrigidity() -> Outcome {
    let cf = CFNumber::sqrt(2).map_err(err)?;
    let tower = Tower::build(&cf, 4).map_err(err)?;
    let r = rigidity_scan(&tower, RigidityMode::NonrigidCertify { max_p: 169 }, 16).map_err(err)?;
    let cert = r.nonrigid.as_ref().ok_or("no certificate")?;
    ensure!(cert.coefficient_bound == 3, "M = {}", cert.coefficient_bound);
    ensure!(r.verdict == RigidityVerdict::NonrigidCertified, "verdict {:?}", r.verdict);
    ensure!(cert.min_escape >= ratio(1, 9), "escape {} < 1/9", frac(&cert.min_escape));
    Ok(format!(
        "min escape over 1 < p <= 169 is {} at p = {} (required 1/9)",
        frac(&cert.min_escape),
        cert.argmin_p
    ))
}

fn rigidity_evidence() -> Outcome {
    let tower = Tower::build(&CFNumber::arithmetic_identity(), 12).map_err(err)?;
    let r = rigidity_scan(&tower, RigidityMode::RigidSearch { max_k: 12 }, 16).map_err(err)?;
    let ks: Vec<usize> = r.per_k.iter().map(|x| x.k).collect();
    ensure!(ks == (2..=12).collect::<Vec<_>>(), "subsequence {ks:?}");
    for rec in &r.per_k {
        let d = rec.deficiency.as_ref().unwrap();
        ensure!(*d == ratio(1, rec.a_k as i64), "k = {}: deficiency {}", rec.k, frac(d));
    }
    ensure!(r.verdict == RigidityVerdict::RigidAlongSubsequence, "verdict {:?}", r.verdict);
    Ok("deficiency = 1/k exactly for k = 2..12, strictly decreasing".into())
}

fn eigenvalue_screens() -> Outcome {
    let cf = CFNumber::sqrt(2).map_err(err)?;
    for n in -10i64..=10 {
        let r = eigenvalue_screen(&cf, &Beta::MultipleOfAlpha(n), 24).map_err(err)?;
        ensure!(r.verdict == ScreenVerdict::ConsistentWithEigenvalue, "n = {n}: {:?}", r.verdict);
        ensure!(r.matched_multiple == Some(n), "n = {n}: matched {:?}", r.matched_multiple);
    }
    let half = eigenvalue_screen(&cf, &Beta::Exact(ratio(1, 2)), 24).map_err(err)?;
    ensure!(half.verdict == ScreenVerdict::Excluded, "1/2: {:?}", half.verdict);
    let cert = half.exclusion.as_ref().ok_or("no exclusion certificate")?;
    ensure!(cert.eps_lower_bound == ratio(1, 2), "bound {}", frac(&cert.eps_lower_bound));
    let cycle = cert.screen.cycle.as_ref().ok_or("no residue cycle")?;
    ensure!(cycle.period == 2, "parity period {}", cycle.period);
    let mut rs = cycle.residues.clone();
    rs.sort();
    ensure!(rs == vec![0, 1], "parity residues {:?}", cycle.residues);
    Ok("frac(n alpha) matched for |n| <= 10; 1/2 excluded by the parity cycle of q_k".into())
}

fn type_three() -> Outcome {
    let cf = CFNumber::sqrt(2).map_err(err)?;
    let ns = NsTower::build(&cf, Variant::IIILambda { lambda: ratio(1, 2) }, 6).map_err(err)?;
    let allowed = [ratio(1, 1), ratio(1, 2), ratio(2, 1)];
    for n in 1..=6 {
        for r in ns.transition_ratios(n).map_err(err)? {
            ensure!(allowed.contains(&r), "C_{n}: single-step ratio {}", frac(&r));
        }
    }
    let tower = ns.tower();
    let h = tower.height(6);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let code = tower.random_code(&mut rng, 6, 0);
        let l = tower.level_index(&code, 6).map_err(err)?;
        let room = h - 1 - l;
        let n = rng.gen_range(0..=room);
        let m = rng.gen_range(0..=room - n);
        let total = ns.rn_exponent(&code, (n + m) as i64, 6).map_err(err)?;
        let first = ns.rn_exponent(&code, n as i64, 6).map_err(err)?;
        let shifted: PointCode = tower.decompose(l + n, 6, &[]);
        let second = ns.rn_exponent(&shifted, m as i64, 6).map_err(err)?;
        ensure!(
            total.exponents[0] == first.exponents[0] + second.exponents[0],
            "cocycle fails at level {l}, n = {n}, m = {m}"
        );
    }
    let mut stages = Vec::new();
    for k in 1..6 {
        if tower.cuts(k) != 2 {
            continue;
        }
        let w = ratio_set_witness(&ns, k, &[1], 6).map_err(err)?;
        ensure!(w.stage == k, "exponent-1 witness for stage {k} found at stage {}", w.stage);
        ensure!(w.measure > Rational::zero(), "stage {k}: witness measure {}", frac(&w.measure));
        stages.push(format!("k={k}:n={}", w.n));
    }
    ensure!(!stages.is_empty(), "no stage with a_k = 2");

    let ns1 = NsTower::build(
        &cf,
        Variant::III1 {
            lambda: ratio(1, 2),
            beta: ratio(1, 3),
        },
        6,
    )
    .map_err(err)?;
    ensure!(ns1.warnings().is_empty(), "III_1 warnings {:?}", ns1.warnings());
    for target in [[1, 0], [0, 1]] {
        let w = ratio_set_witness(&ns1, 1, &target, 6).map_err(err)?;
        ensure!(w.measure > Rational::zero(), "III_1 {target:?}: measure {}", frac(&w.measure));
    }
    Ok(format!(
        "ratios in {{1, 1/2, 2}}; 1000 cocycle paths; witnesses {}; III_1 both generators",
        stages.join(" ")
    ))
}

fn gauss_kuzmin() -> Outcome {
    let r = montecarlo(&MonteCarloConfig::new(7, 100_000, 20)).map_err(err)?;
    ensure!(r.dropped * 100 < r.samples, "dropped {} of {}", r.dropped, r.samples);
    let p1 = r.digits[0].empirical;
    let pc = r.conditional_one_one.value;
    ensure!((p1 - 0.4150).abs() <= 0.01, "P(a_k = 1) = {p1:.4}");
    ensure!((pc - 0.3662).abs() <= 0.02, "P(1|1) = {pc:.4}");
    ensure!((gk_limit(1).map_err(err)? - 0.4150).abs() < 5e-5, "limit formula");
    ensure!((gk_conditional(1, 1).map_err(err)? - 0.3662).abs() < 5e-5, "conditional formula");
    Ok(format!("P(a_20 = 1) = {p1:.4}, P(1|1) = {pc:.4}, dropped {}", r.dropped))
}

fn pushforward() -> Outcome {
    let cf = CFNumber::arithmetic_identity();
    let n = depth_for_tail(&cf, &ratio(1, 1000), 60).map_err(err)?;
    let tower = Tower::build(&cf, n).map_err(err)?;
    let h = pushforward_histogram(&tower, 100_000, n, 100, 11).map_err(err)?;
    ensure!(h.ks_statistic <= 0.02, "KS = {:.4} at depth {n}", h.ks_statistic);
    let s2 = CFNumber::sqrt(2).map_err(err)?;
    let m = default_depth(&s2).map_err(err)?;
    let t2 = Tower::build(&s2, m).map_err(err)?;
    let h2 = pushforward_histogram(&t2, 100_000, m, 100, 11).map_err(err)?;
    ensure!(h2.bins.len() == 100, "sqrt2 histogram has {} bins", h2.bins.len());
    Ok(format!(
        "a_k = k: depth {n}, KS = {:.4}; sqrt2 histogram emitted (depth {m}, KS = {:.4}, not asserted)",
        h.ks_statistic, h2.ks_statistic
    ))
}

fn injectivity() -> Outcome {
    let cf = CFNumber::sqrt(2).map_err(err)?;
    let cap = 20;
    let tower = Tower::build(&cf, cap).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut deepest = 12;
    let mut smallest: Option<Rational> = None;
    let mut pairs = 0;
    while pairs < 1000 {
        let a = tower.random_code(&mut rng, 12, 6);
        let b = tower.random_code(&mut rng, 12, 6);
        if a == b {
            continue;
        }
        pairs += 1;
        let r = injectivity_screen(&tower, &a, &b, 12, cap).map_err(err)?;
        ensure!(r.separated, "pair {pairs} not separated by depth {}", r.depth);
        deepest = deepest.max(r.depth);
        if smallest.as_ref().is_none_or(|s| &r.gap_lower_bound < s) {
            smallest = Some(r.gap_lower_bound.clone());
        }
    }
    let g = smallest.expect("pairs");
    ensure!(g.is_positive(), "gap {}", frac(&g));
    Ok(format!(
        "1000 pairs separated; smallest gap {:.3e}; deepest depth used {deepest}",
        rankone::rational::to_f64(&g)
    ))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 11] = [
        (1, "convergent recursion", convergent_recursion, Duration::from_secs(1)),
        (2, "finiteness classifier", finiteness_classifier, Duration::from_secs(1)),
        (3, "eigen-relation", eigen_relation, Duration::from_secs(10)),
        (4, "partial rigidity", partial_rigidity, Duration::from_secs(30)),
        (5, "nonrigidity certificate", nonrigidity, Duration::from_secs(60)),
        (6, "rigidity evidence", rigidity_evidence, Duration::from_secs(60)),
        (7, "eigenvalue screens", eigenvalue_screens, Duration::from_secs(60)),
        (8, "type III", type_three, Duration::from_secs(60)),
        (9, "Gauss-Kuzmin", gauss_kuzmin, Duration::from_secs(300)),
        (10, "pushforward uniformity", pushforward, Duration::from_secs(300)),
        (11, "injectivity screen", injectivity, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} [{took:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
