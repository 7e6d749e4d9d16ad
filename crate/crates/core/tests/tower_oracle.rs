//! The tower against a literal cut-and-stack simulation on interval lists.

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankone::cf::CFNumber;
use rankone::interval::RatInterval;
use rankone::rational::Rational;
use rankone::tower::{LevelSet, PointCode, Tower};
use rankone::Error;

/// Columns `C_1..=C_depth` as explicit lists of level intervals.
fn oracle_columns(a: &[u64], depth: usize) -> Vec<Vec<(Rational, Rational)>> {
    let one = Rational::from_integer(BigInt::from(1));
    let mut cols = vec![vec![(Rational::from_integer(BigInt::from(0)), one.clone())]];
    let mut right = one;
    let mut prev_height = 0usize;
    for k in 1..depth {
        let cur = cols.last().unwrap().clone();
        let cuts = Rational::from_integer(BigInt::from(a[k - 1]));
        let mut next = Vec::new();
        for j in 0..a[k - 1] {
            let jr = Rational::from_integer(BigInt::from(j));
            for (lo, hi) in &cur {
                let w = (hi - lo) / &cuts;
                let start = lo + &w * &jr;
                next.push((start.clone(), start + w));
            }
        }
        let w = (&cur[0].1 - &cur[0].0) / &cuts;
        for _ in 0..prev_height {
            let end = &right + &w;
            next.push((right.clone(), end.clone()));
            right = end;
        }
        prev_height = cur.len();
        cols.push(next);
    }
    cols
}

#[test]
fn levels_and_column_map_match_the_oracle() {
    let cf = CFNumber::sqrt(2).unwrap();
    let depth = 7;
    let tower = Tower::build(&cf, depth).unwrap();
    let cols = oracle_columns(&cf.coefficients(depth).unwrap(), depth);
    for n in 1..=6 {
        let col = &cols[n - 1];
        assert_eq!(col.len() as u64, tower.height(n));
        for (l, (lo, hi)) in col.iter().enumerate() {
            let iv = tower.level_interval(n, l as u64).unwrap();
            assert_eq!(iv, RatInterval::new(lo.clone(), hi.clone()), "C_{n} level {l}");
            let code = tower.decompose(l as u64, n, &[]);
            match tower.apply_t(&code, n) {
                Ok(img) => {
                    let image = tower.geometric_realize(&img, n).unwrap();
                    let (nlo, nhi) = &col[l + 1];
                    assert_eq!(image, RatInterval::new(nlo.clone(), nhi.clone()));
                    // translation by a fixed offset
                    assert_eq!(image.lo() - iv.lo(), image.hi() - iv.hi());
                    let back = tower.apply_t_inv(&img, n).unwrap();
                    assert_eq!(back, code);
                }
                Err(Error::NeedsDeeperStage { required }) => {
                    assert_eq!(l + 1, col.len());
                    assert!(required > n);
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn oracle_with_unit_cuts() {
    let cf = CFNumber::arithmetic_identity();
    let depth = 6;
    let tower = Tower::build(&cf, depth).unwrap();
    let cols = oracle_columns(&cf.coefficients(depth).unwrap(), depth);
    for n in 1..=depth {
        for (l, (lo, hi)) in cols[n - 1].iter().enumerate() {
            let iv = tower.level_interval(n, l as u64).unwrap();
            assert_eq!(iv, RatInterval::new(lo.clone(), hi.clone()));
        }
    }
}

#[test]
fn push_matches_stepwise_orbit() {
    let tower = Tower::build(&CFNumber::sqrt(2).unwrap(), 7).unwrap();
    let set = LevelSet::single(1, 0);
    for p in 0..30i64 {
        let n = tower.resolution_depth(&set, p).unwrap().max(2);
        if n > 7 {
            continue;
        }
        let pushed = tower.push_level(&set, p, n).unwrap();
        let refined = tower.refine(&set, n).unwrap();
        for (&l, &img) in refined.indices().iter().zip(pushed.indices()) {
            let mut code = tower.decompose(l, n, &[]);
            for _ in 0..p {
                code = tower.apply_t(&code, n).unwrap();
            }
            assert_eq!(tower.level_index(&code, n).unwrap(), img);
        }
        assert_eq!(tower.measure(&pushed), tower.measure(&refined));
    }
}

proptest! {
    #[test]
    fn forward_then_back_is_identity(seed in 0u64..10_000, n in 2usize..9) {
        let tower = Tower::build(&CFNumber::sqrt(3).unwrap(), 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = tower.random_code(&mut rng, n, 2);
        if let Ok(img) = tower.apply_t(&code, n) {
            prop_assert_eq!(tower.apply_t_inv(&img, n).unwrap(), code.clone());
            let a = tower.geometric_realize(&code, n).unwrap();
            let b = tower.geometric_realize(&img, n).unwrap();
            prop_assert_eq!(a.width(), b.width());
        }
        let deep = tower.forward(&code);
        let resolved_or_deeper = deep.is_ok() || matches!(deep, Err(Error::NeedsDeeperStage { .. }));
        prop_assert!(resolved_or_deeper);
    }

    #[test]
    fn push_conserves_measure(levels in prop::collection::btree_set(0u64..12, 1..6), p in -3i64..40) {
        let tower = Tower::build(&CFNumber::sqrt(2).unwrap(), 9).unwrap();
        let set = LevelSet::new(4, levels.into_iter().collect());
        match tower.resolution_depth(&set, p) {
            Some(n) if n <= 9 => {
                let pushed = tower.push_level(&set, p, n.max(4)).unwrap();
                prop_assert_eq!(tower.measure(&pushed), tower.measure(&set));
                prop_assert!(pushed.indices().iter().all(|&l| l < tower.height(n.max(4))));
            }
            _ => {
                prop_assert!(tower.push_level(&set, p, 9).is_err());
            }
        }
    }

    #[test]
    fn level_index_matches_digit_sum(seed in 0u64..10_000) {
        let tower = Tower::build(&CFNumber::sqrt(2).unwrap(), 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = tower.random_code(&mut rng, 6, 5);
        let mut expect = code.ell();
        for n in code.k_x()..=11 {
            prop_assert_eq!(tower.level_index(&code, n).unwrap(), expect);
            expect += code.digit(n) * tower.height(n);
        }
        let _ = PointCode::base();
    }
}
