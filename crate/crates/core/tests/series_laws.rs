use overrank::{CycloNum, QSeries};
use proptest::prelude::*;

const LEVEL: u32 = 12;

fn coeff() -> impl Strategy<Value = CycloNum> {
    (-3i64..4, 0i64..12, -2i64..3).prop_map(|(n, k, m)| {
        &CycloNum::from_int(n) + &CycloNum::zeta(LEVEL, k).scale_int(m)
    })
}

fn series() -> impl Strategy<Value = QSeries> {
    (-3i64..3, prop::collection::vec(coeff(), 0..8), 4i64..12)
        .prop_map(|(lo, cs, prec)| QSeries::from_coeffs(lo, cs, prec))
}

/// A series with a nonzero leading coefficient at `q^0`.
fn unit() -> impl Strategy<Value = QSeries> {
    (1i64..4, prop::collection::vec(coeff(), 0..6), 6i64..12).prop_map(|(c0, mut cs, prec)| {
        cs.insert(0, CycloNum::from_int(c0));
        QSeries::from_coeffs(0, cs, prec)
    })
}

fn same(a: &QSeries, b: &QSeries) -> bool {
    a.prec() == b.prec() && a.first_difference(b).is_none()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn addition_commutes(a in series(), b in series()) {
        prop_assert!(same(&a.try_add(&b).unwrap(), &b.try_add(&a).unwrap()));
    }

    #[test]
    fn multiplication_commutes_and_associates(a in series(), b in series(), c in series()) {
        let ab = a.try_mul(&b).unwrap();
        prop_assert!(same(&ab, &b.try_mul(&a).unwrap()));
        let l = ab.try_mul(&c).unwrap();
        let r = a.try_mul(&b.try_mul(&c).unwrap()).unwrap();
        let w = l.prec().min(r.prec());
        prop_assert!(l.truncate(w).first_difference(&r.truncate(w)).is_none());
    }

    #[test]
    fn distributes(a in series(), b in series(), c in series()) {
        let l = a.try_mul(&b.try_add(&c).unwrap()).unwrap();
        let r = a.try_mul(&b).unwrap().try_add(&a.try_mul(&c).unwrap()).unwrap();
        let w = l.prec().min(r.prec());
        prop_assert!(l.truncate(w).first_difference(&r.truncate(w)).is_none());
    }

    #[test]
    fn division_undoes_multiplication(a in series(), u in unit()) {
        let back = a.try_mul(&u).unwrap().try_div(&u).unwrap();
        let w = back.prec().min(a.prec());
        prop_assert!(back.prec() <= a.prec());
        prop_assert!(back.truncate(w).first_difference(&a.truncate(w)).is_none());
    }

    #[test]
    fn inverse_times_self_is_one(u in unit()) {
        let p = u.invert().unwrap().try_mul(&u).unwrap();
        prop_assert!(same(&p, &QSeries::one(u.prec())));
    }

    #[test]
    fn negative_power_is_inverse_power(u in unit(), n in 1i64..4) {
        let a = u.try_pow(-n).unwrap();
        let b = u.try_pow(n).unwrap().invert().unwrap();
        prop_assert!(same(&a, &b));
    }

    #[test]
    fn substitution_then_extraction(a in series(), t in 2i64..4) {
        let s = a.subst_q_power(t).unwrap();
        prop_assert!(same(&s.extract_progression(0, t), &a));
        for r in 1..t {
            prop_assert!(s.extract_progression(r, t).is_zero());
        }
    }

    #[test]
    fn truncation_agrees_with_lower_precision(a in series(), b in series(), cut in 0i64..6) {
        let p = a.try_mul(&b).unwrap();
        let w = p.prec() - cut;
        let q = a.truncate(w).try_mul(&b.truncate(w)).unwrap();
        let m = q.prec().min(w);
        prop_assert!(p.truncate(m).first_difference(&q.truncate(m)).is_none());
    }
}
