use overrank::oracle::{deviation, deviations, enumerate, pbar_counts, RankTable, Which, DEFAULT_ORACLE_RANGE};
use overrank::par::{self, Mode};
use overrank::theorems::{single_deviation, thm1_suite, thm2_suite, verify_single};
use overrank::{QSeries, Rational};

#[test]
fn overpartition_counts() {
    // p-bar(n) for n = 0..16
    let known = [1u64, 2, 4, 8, 14, 24, 40, 64, 100, 154, 232, 344, 504, 728, 1040, 1472, 2062];
    assert_eq!(pbar_counts(16).unwrap(), known);
    for (n, &c) in known.iter().enumerate().take(12) {
        assert_eq!(enumerate(n as u32).count() as u64, c);
    }
}

#[test]
fn tables_agree_with_enumeration() {
    for which in [Which::Rank, Which::M2] {
        let dp = RankTable::build(which, 14).unwrap();
        assert_eq!(dp, RankTable::from_enumeration(which, 14));
        for n in 0..=14 {
            for (&m, &c) in dp.row(n) {
                assert_eq!(dp.count(-m, n), c, "{which} N({m},{n})");
            }
        }
    }
}

#[test]
fn deviations_sum_to_zero_and_reflect() {
    for which in [Which::Rank, Which::M2] {
        for m in 2..=7 {
            let d = deviations(m, which, 40, DEFAULT_ORACLE_RANGE).unwrap();
            let mut total = QSeries::zero(40);
            for s in d.iter() {
                total = total.try_add(s).unwrap();
            }
            assert!(total.is_zero(), "{which} M={m}");
            for a in 1..m {
                assert_eq!(d[a as usize], d[(m - a) as usize], "{which} D({a},{m})");
            }
        }
    }
}

#[test]
fn extension_past_the_table_keeps_the_table() {
    for which in [Which::Rank, Which::M2] {
        let short = deviation(1, 4, which, 20, DEFAULT_ORACLE_RANGE).unwrap();
        let long = deviation(1, 4, which, 70, DEFAULT_ORACLE_RANGE).unwrap();
        assert_eq!(long.prec(), 70);
        assert!(long.truncate(20).first_difference(&short).is_none());
        assert!(long.rational_coeffs().is_some());
    }
}

#[test]
fn first_coefficients_by_hand() {
    // overpartitions of 0, 1, 2 have ranks {0}, {0, 0}, {1, 1, -1, -1}
    let d = deviation(2, 3, Which::Rank, 3, DEFAULT_ORACLE_RANGE).unwrap();
    let third = |n: i64| Rational::from_parts(n.into(), 3u8.into());
    assert_eq!(d.rational_coeffs().unwrap(), vec![third(-1), third(-2), third(2)]);
}

#[test]
fn singles_for_odd_moduli() {
    for which in [Which::Rank, Which::M2] {
        for m in [3, 5] {
            for a in 0..=(m - 1) / 2 {
                let r = verify_single(a, m, which, 40);
                assert!(r.passed(), "{}", r.summary_line());
            }
        }
    }
    assert!(single_deviation(1, 4, Which::Rank, 10).is_err());
}

#[test]
fn parallel_mode_does_not_change_results() {
    let cases = [(3, 2), (4, 4), (5, 3)];
    let strip = |mut v: Vec<overrank::VerificationReport>| {
        v.iter_mut().for_each(|r| r.elapsed_ms = 0);
        v
    };
    par::set_mode(Mode::Sequential);
    let seq = (strip(thm1_suite(&cases, 30)), strip(thm2_suite(&[(3, 1), (4, 2)], 30)));
    par::set_mode(Mode::Parallel);
    let parl = (strip(thm1_suite(&cases, 30)), strip(thm2_suite(&[(3, 1), (4, 2)], 30)));
    assert_eq!(seq, parl);
    assert!(seq.0.iter().chain(&seq.1).all(|r| r.passed()));
}
