//! Parameter-grid checks of the kernel identities, the orthogonality
//! instantiations used to derive the general formulas, and certification of
//! the combinatorial oracle.

use std::time::Instant;

use crate::appell::{
    delta, h_series, m_poles, m_series, orthogonality_sides, psi, psi_poles, T2_series, T_series,
};
use crate::cyclo::RootOfUnity;
use crate::error::{Error, Result};
use crate::oracle::{
    deviation_from_table, enumerate, key_formula, pair_from_table, pbar_series, s_closed, s_enumerated,
    RankTable, Which,
};
use crate::par;
use crate::report::{params, Params, VerificationReport};
use crate::series::{Monomial, QSeries};
use crate::theta::{theta_j, theta_j_sum, ThetaQuotient};

use super::{m2_cases, rank_cases, sort_reports};

/// Orders for the grid checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LemmaOrders {
    pub grid: i64,
    pub long: i64,
    pub h: i64,
}

impl LemmaOrders {
    pub fn uniform(n: i64) -> Self {
        LemmaOrders { grid: n, long: n, h: n }
    }

    pub fn acceptance() -> Self {
        LemmaOrders {
            grid: 50,
            long: 200,
            h: 100,
        }
    }
}

fn z(order: u64, k: i64, e: i64) -> Monomial {
    Monomial::zeta_q(order, k, e)
}

/// `(x, z1, z0, base)` for the switch and flip checks.
pub fn switch_grid() -> Vec<(Monomial, Monomial, Monomial, i64)> {
    let m1 = Monomial::MINUS_ONE;
    vec![
        (z(3, -2, 1), z(3, 1, 0), m1, 2),
        (Monomial::q(1), Monomial::neg_q(1), z(3, 1, 0), 1),
        (Monomial::neg_q(2), z(6, 1, 0), z(3, 1, 0), 1),
        (z(6, 1, -1), Monomial::neg_q(1), z(3, 1, 1), 2),
        (-z(3, 1, 0), z(3, 1, 2), m1, 2),
        (Monomial::q(-2), -z(3, 1, 0), Monomial::neg_q(-1), 1),
        (z(3, 1, 1), z(6, 1, -2), -z(3, 1, 1), 1),
        (m1, z(3, 1, 1), z(6, 1, 2), 2),
        (-z(6, 1, 1), m1, z(3, 2, -1), 2),
        (Monomial::neg_q(-1), -z(3, 1, 1), z(6, 1, -2), 1),
    ]
}

fn report<F>(id: &str, p: Params, order: i64, f: F) -> VerificationReport
where
    F: FnOnce() -> Result<(QSeries, QSeries)>,
{
    VerificationReport::run(id, p, order, f)
}

/// Compare every pair in a grid; the result is the first point that does
/// not pass, or a pass naming how many points were checked. Points hitting a
/// pole are skipped and counted.
fn grid_report<T, F>(id: &str, mut p: Params, order: i64, points: &[T], f: F) -> VerificationReport
where
    T: Sync + std::fmt::Debug,
    F: Fn(&T) -> Result<(QSeries, QSeries)> + Sync + Send,
{
    let start = Instant::now();
    let results = par::map(points, |t| {
        let start = Instant::now();
        match f(t) {
            Ok((l, r)) => Some(VerificationReport::compare(id, Params::new(), &l, &r, order, start)),
            Err(Error::Pole(_)) => None,
            Err(e) => Some(VerificationReport::from_error(id, Params::new(), &e, order, start)),
        }
    });
    let checked = results.iter().flatten().count();
    let skipped = results.len() - checked;
    p.insert("points".into(), checked.to_string());
    if skipped > 0 {
        p.insert("poles_skipped".into(), skipped.to_string());
    }
    let bad = results
        .into_iter()
        .zip(points)
        .find_map(|(r, t)| r.filter(|r| !r.passed() || r.parameters.contains_key("compared_to")).map(|r| (r, t)));
    let mut out = match bad {
        Some((mut r, t)) => {
            r.parameters.extend(p);
            r.parameters.insert("point".into(), format!("{t:?}"));
            if r.passed() {
                r.status = crate::Status::Fail;
            }
            r
        }
        None => VerificationReport::compare(id, p, &QSeries::zero(order), &QSeries::zero(order), order, start),
    };
    out.elapsed_ms = start.elapsed().as_millis() as u64;
    out
}

fn theta_grid() -> Vec<(Monomial, i64)> {
    let unities = [(1u64, 0i64, 1i64), (1, 0, -1), (3, 1, 1), (3, 1, -1), (5, 1, 1)];
    let mut out = Vec::new();
    for base in 1..=3 {
        for &(o, k, s) in &unities {
            for e in -3..=3 {
                let m = z(o, k, e);
                out.push((if s < 0 { -m } else { m }, base));
            }
        }
    }
    out
}

fn h_grid() -> Vec<(Monomial, i64)> {
    let mut out = Vec::new();
    for base in 1..=2 {
        for e in -3..=3 {
            for m in [Monomial::neg_q(e), z(3, 1, e), -z(3, 1, e), z(5, 1, e)] {
                out.push((m, base));
            }
        }
    }
    out
}

/// The seven theta-function dictionary entries as `(z, base, coeff, J-powers)`.
pub fn dictionary() -> Vec<(Monomial, i64, i64, Vec<(i64, i64)>)> {
    vec![
        (Monomial::MINUS_ONE, 1, 2, vec![(2, 2), (1, -1)]),
        (Monomial::q(1), 2, 1, vec![(1, 2), (2, -1)]),
        (Monomial::neg_q(1), 2, 1, vec![(2, 5), (1, -2), (4, -2)]),
        (Monomial::q(1), 3, 1, vec![(1, 1)]),
        (Monomial::neg_q(1), 3, 1, vec![(2, 1), (3, 2), (1, -1), (6, -1)]),
        (Monomial::q(1), 6, 1, vec![(1, 1), (6, 2), (2, -1), (3, -1)]),
        (Monomial::neg_q(1), 6, 1, vec![(2, 2), (3, 1), (12, 1), (1, -1), (4, -1), (6, -1)]),
    ]
}

/// First `-q^t` that makes the right side of the orthogonality relation
/// pole-free.
fn orthogonality_generic(k: i64, n: i64, x: &Monomial, zz: &Monomial, base: i64) -> Result<Monomial> {
    let neg_x = -*x;
    let arg = -Monomial::q(base * (n * (n - 1) / 2 - n * k)) * neg_x.pow(n);
    let bound = 4 * n * n;
    for t in 0..=bound {
        let c = Monomial::neg_q(t);
        if m_poles(&arg, base * n * n, &c).is_ok() && psi_poles(k, n, x, zz, &c, base).is_ok() {
            return Ok(c);
        }
    }
    Err(Error::GenericSearchExhausted {
        formula: format!("orthogonality k = {k}, n = {n}"),
        attempts: (bound + 1) as usize,
    })
}

fn orth_params(k: i64, n: i64, x: &Monomial, zz: &Monomial, zp: &Monomial, base: i64) -> Params {
    params([
        ("k", k.to_string()),
        ("n", n.to_string()),
        ("x", x.to_string()),
        ("z", zz.to_string()),
        ("z'", zp.to_string()),
        ("base", base.to_string()),
    ])
}

/// Orthogonality at `x = q, z = -1, z' = -q` for `n <= 5`. Where the left
/// side has a pole (`omega^t = -1` over `q`) the point is re-run at
/// `x = zeta_3 q` and the substitution is recorded.
fn orthogonality_grid(order: i64) -> Vec<VerificationReport> {
    let mut pts = Vec::new();
    for base in 1..=2 {
        for n in 1..=5 {
            for k in 0..n {
                pts.push((k, n, base));
            }
        }
    }
    par::map(&pts, |&(k, n, base)| {
        let zz = Monomial::MINUS_ONE;
        let zp = Monomial::neg_q(1);
        let mut x = Monomial::q(1);
        let mut r = report("lemma.orthogonality", orth_params(k, n, &x, &zz, &zp, base), order, || {
            orthogonality_sides(k, n, &x, &zz, &zp, base, order)
        });
        if r.status == crate::Status::PoleSkipped {
            let reason = r.parameters["error"].clone();
            x = z(3, 1, 1);
            let mut p = orth_params(k, n, &x, &zz, &zp, base);
            p.insert("substituted_for".into(), format!("x=q: {reason}"));
            r = report("lemma.orthogonality", p, order, || orthogonality_sides(k, n, &x, &zz, &zp, base, order));
        }
        r
    })
}

/// Checks of the kernel identities on parameter grids.
pub fn lemma_suite(o: LemmaOrders) -> Vec<VerificationReport> {
    type Job = Box<dyn Fn() -> Vec<VerificationReport> + Send + Sync>;
    let g = o.grid;
    let l = o.long;
    let hp = o.h;
    let jobs: Vec<Job> = vec![
        Box::new(move || {
            vec![grid_report("lemma.switch", Params::new(), g, &switch_grid(), |(x, z1, z0, b)| {
                let lhs = m_series(x, *b, z1, g)?.try_sub(&m_series(x, *b, z0, g)?)?;
                Ok((lhs, delta(x, z1, z0, *b, g)?))
            })]
        }),
        Box::new(move || {
            let pts: Vec<(Monomial, Monomial, i64)> = switch_grid()
                .into_iter()
                .flat_map(|(x, z1, z0, b)| [(x, z1, b), (x, z0, b)])
                .collect();
            vec![grid_report("lemma.flip", Params::new(), g, &pts, |(x, zz, b)| {
                let lhs = m_series(x, *b, zz, g)?;
                let inv = x.inv();
                let rhs = m_series(&inv, *b, &zz.inv(), g - inv.exp)?.try_mul_monomial(&inv)?;
                Ok((lhs, rhs))
            })]
        }),
        Box::new(move || orthogonality_grid(g)),
        Box::new(move || {
            vec![report("appell_lerch.half", params([("x", "q"), ("base", "2"), ("z", "-1")]), l, || {
                let m = m_series(&Monomial::q(1), 2, &Monomial::MINUS_ONE, l)?;
                Ok((m, QSeries::from_rationals(0, &[crate::Rational::from_parts(1.into(), 2u8.into())], l)))
            })]
        }),
        Box::new(move || {
            (1..=3)
                .map(|b| {
                    let pts: Vec<_> = theta_grid().into_iter().filter(|p| p.1 == b).collect();
                    let p = params([("base", b)]);
                    grid_report("theta.product_equals_sum", p, l, &pts, |(zz, b)| {
                        Ok((theta_j(zz, *b, l), theta_j_sum(zz, *b, l)))
                    })
                })
                .collect()
        }),
        Box::new(move || {
            let pts = theta_grid();
            let mut out = vec![grid_report("theta.reflection", Params::new(), l, &pts, |(x, b)| {
                let y = Monomial::q(*b) * x.inv();
                Ok((theta_j(x, *b, l), theta_j(&y, *b, l)))
            })];
            for n in -3..=3i64 {
                out.push(grid_report("theta.quasi_periodicity", params([("n", n)]), l, &pts, |(x, b)| {
                    let lhs = theta_j(&(Monomial::q(n * b) * *x), *b, l);
                    let factor = Monomial::neg_q(0).pow(n) * Monomial::q(-b * n * (n - 1) / 2) * x.pow(-n);
                    let rhs = theta_j(x, *b, l - factor.exp).try_mul_monomial(&factor)?;
                    Ok((lhs, rhs))
                }));
            }
            out
        }),
        Box::new(move || {
            dictionary()
                .into_iter()
                .map(|(zz, b, c, js)| {
                    let p = params([("z", zz.to_string()), ("base", b.to_string())]);
                    report("theta.dictionary", p, l, || {
                        let rhs = ThetaQuotient::eta_like(c.into(), 0, &js).eval(l)?;
                        Ok((theta_j(&zz, b, l), rhs))
                    })
                })
                .collect()
        }),
        Box::new(move || {
            let pts = h_grid();
            vec![
                grid_report("h.appell_lerch_form", Params::new(), hp, &pts, |(x, b)| {
                    let inv = x.inv();
                    let arg = inv.pow(2) * Monomial::q(*b);
                    let m = m_series(&arg, 2 * b, x, hp - inv.exp)?;
                    Ok((h_series(x, *b, hp)?, m.try_mul_monomial(&-inv)?))
                }),
                grid_report("h.reflection", Params::new(), hp, &pts, |(x, b)| {
                    let y = Monomial::q(*b) * x.inv();
                    Ok((h_series(x, *b, hp)?, h_series(&y, *b, hp)?))
                }),
                grid_report("h.even_part", Params::new(), hp, &pts, |(x, b)| {
                    let lhs = h_series(x, *b, hp)?.try_add(&h_series(&-*x, *b, hp)?)?;
                    let rhs = ThetaQuotient::eta_like(2.into(), 0, &[(2 * b, 4), (*b, -2)])
                        .den(crate::theta::Factor::theta(x.pow(2), 2 * b))
                        .eval(hp)?;
                    Ok((lhs, rhs))
                }),
            ]
        }),
    ];
    let mut out: Vec<VerificationReport> = par::map(&jobs, |j| j()).into_iter().flatten().collect();
    sort_reports(&mut out);
    out
}

/// `M q^{-k^2} (-1)^k m(q^e, q^{2M^2}, z'') + M Psi_k^M(q, -1, z''; q^2)`
/// against `sum_j zeta_M^{-(a-1)j} m(zeta_M^{-2j} q, q^2, -1)`.
fn odd_modulus_display(modulus: i64, a: i64, k: i64, e: i64, prec: i64) -> Result<(QSeries, QSeries, Monomial)> {
    let mm = modulus;
    let x = Monomial::q(1);
    let minus = Monomial::MINUS_ONE;
    let mut zpp = None;
    for t in 0..=4 * mm * mm {
        let c = Monomial::neg_q(t);
        if m_poles(&Monomial::q(e), 2 * mm * mm, &c).is_ok() && psi_poles(k, mm, &x, &minus, &c, 2).is_ok() {
            zpp = Some(c);
            break;
        }
    }
    let zpp = zpp.ok_or(Error::GenericSearchExhausted {
        formula: "odd modulus display".into(),
        attempts: (4 * mm * mm + 1) as usize,
    })?;
    let mut lhs = QSeries::zero(prec);
    for j in 0..mm {
        let w = RootOfUnity::new(mm as u64, j);
        let m = m_series(&Monomial::new(w.pow(-2), 1), 2, &minus, prec)?;
        lhs = lhs.try_add(&m.try_scale(&w.pow(-(a - 1)).to_cyclo()?)?)?;
    }
    let lead = Monomial::neg_q(0).pow(k) * Monomial::q(-k * k);
    let m = m_series(&Monomial::q(e), 2 * mm * mm, &zpp, prec - lead.exp)?.try_mul_monomial(&lead)?;
    let rhs = m.try_add(&psi(k, mm, &x, &minus, &zpp, 2, prec)?)?.scale_int(mm);
    Ok((lhs, rhs, zpp))
}

/// The orthogonality instances used to derive each case of the general
/// formulas, each as a standalone check. The alternative display of the
/// second sum for even `a`, odd `M` is reported as informational.
pub fn proof_instantiations(prec: i64) -> Vec<VerificationReport> {
    let mut pts: Vec<(&'static str, i64, i64, i64, Monomial)> = Vec::new();
    for (m, a) in rank_cases() {
        match (a % 2 == 0, m % 2 == 0) {
            (true, true) => pts.push(("rank_case_i", m, a, a / 2 - 1, Monomial::q(-1))),
            (true, false) => {
                pts.push(("rank_case_ii", m, a, (2 * m - a) / 2, Monomial::q(1)));
                pts.push(("rank_case_ii", m, a, (m + 1 - a) / 2, Monomial::q(1)));
            }
            (false, false) => {
                pts.push(("rank_case_iii", m, a, (m - a) / 2, Monomial::q(1)));
                pts.push(("rank_case_iii", m, a, (2 * m - a + 1) / 2, Monomial::q(1)));
            }
            (false, true) => {}
        }
    }
    for (m, a) in m2_cases() {
        pts.push(("m2", m, a, a, Monomial::q(1)));
        pts.push(("m2", m, a, a - 1, Monomial::q(1)));
    }
    let mut out = par::map(&pts, |(case, m, a, k, x)| {
        let n = if *case == "rank_case_i" { m / 2 } else { *m };
        let zz = Monomial::MINUS_ONE;
        let start = Instant::now();
        let mut p = params([("case", case.to_string()), ("M", m.to_string()), ("a", a.to_string())]);
        let run = |p: &mut Params| -> Result<(QSeries, QSeries)> {
            let zp = orthogonality_generic(*k, n, x, &zz, 2)?;
            p.extend(orth_params(*k, n, x, &zz, &zp, 2));
            orthogonality_sides(*k, n, x, &zz, &zp, 2, prec)
        };
        match run(&mut p) {
            Ok((l, r)) => VerificationReport::compare("derivation.orthogonality", p, &l, &r, prec, start),
            Err(e) => VerificationReport::from_error("derivation.orthogonality", p, &e, prec, start),
        }
    });
    let odd: Vec<(i64, i64, bool)> = rank_cases()
        .into_iter()
        .filter(|(m, a)| a % 2 == 0 && m % 2 == 1)
        .flat_map(|(m, a)| [(m, a, false), (m, a, true)])
        .collect();
    out.extend(par::map(&odd, |&(m, a, alt)| {
        let (k, e) = if alt { ((a + m - 1) / 2, m - a * m) } else { ((m + 1 - a) / 2, m * (a - 1)) };
        let start = Instant::now();
        let mut p = params([("M", m), ("a", a), ("k", k), ("x_exponent", e)]);
        if alt {
            p.insert("role".into(), "informational".into());
            p.insert("note".into(), "alternative display of the second sum".into());
        }
        match odd_modulus_display(m, a, k, e, prec) {
            Ok((l, r, zpp)) => {
                p.insert("z''".into(), zpp.to_string());
                VerificationReport::compare("derivation.second_sum", p, &l, &r, prec, start)
            }
            Err(err) => VerificationReport::from_error("derivation.second_sum", p, &err, prec, start),
        }
    }));
    sort_reports(&mut out);
    out
}

/// Certification of the combinatorial oracle on `n <= n_max`: enumeration
/// against the product, table invariants, closed forms of `S` and `S2` at
/// roots of unity, and both key formulas.
pub fn oracle_suite(n_max: i64) -> Vec<VerificationReport> {
    let prec = n_max + 1;
    let mut out = Vec::new();
    let ns: Vec<u32> = (0..=n_max as u32).collect();
    out.push(report("oracle.enumeration_count", params([("n_max", n_max)]), prec, || {
        let counts = par::map(&ns, |&n| enumerate(n).count() as i64);
        Ok((QSeries::from_ints(0, &counts, prec), pbar_series(prec)?))
    }));
    let mut jobs: Vec<(Which, i64, i64, &'static str)> = Vec::new();
    for which in [Which::Rank, Which::M2] {
        for m in 3..=6 {
            for j in 1..m {
                jobs.push((which, m, j, "closed"));
            }
            for a in 1..=m {
                jobs.push((which, m, a, "key_enumerated"));
                jobs.push((which, m, a, "key_closed"));
            }
        }
    }
    for which in [Which::Rank, Which::M2] {
        let p = params([("which", which.to_string()), ("n_max", n_max.to_string())]);
        out.push(report("oracle.table_invariants", p, prec, || {
            let t = RankTable::cached(which, n_max)?;
            t.validate()?;
            let totals: Vec<i64> = (0..=n_max).map(|n| t.pbar(n) as i64).collect();
            Ok((QSeries::from_ints(0, &totals, prec), pbar_series(prec)?))
        }));
    }
    out.extend(par::map(&jobs, |&(which, m, i, kind)| {
        let s_enum = |t: &RankTable| -> Vec<QSeries> {
            (1..m).map(|j| s_enumerated(t, RootOfUnity::new(m as u64, j))).collect()
        };
        let s_closed_all = || -> Result<Vec<QSeries>> {
            (1..m).map(|j| s_closed(which, &Monomial::new(RootOfUnity::new(m as u64, j), 0), prec)).collect()
        };
        match kind {
            "closed" => report("oracle.closed_form", params([("which", which.to_string()), ("M", m.to_string()), ("j", i.to_string())]), prec, || {
                let t = RankTable::cached(which, n_max)?;
                let w = RootOfUnity::new(m as u64, i);
                Ok((s_enumerated(&t, w), s_closed(which, &Monomial::new(w, 0), prec)?))
            }),
            "key_enumerated" => report("oracle.key_formula_enumerated", params([("which", which.to_string()), ("M", m.to_string()), ("a", i.to_string())]), prec, || {
                let t = RankTable::cached(which, n_max)?;
                Ok((pair_from_table(&t, i, m), key_formula(i, m, &s_enum(&t))?))
            }),
            _ => report("oracle.key_formula_closed", params([("which", which.to_string()), ("M", m.to_string()), ("a", i.to_string())]), prec, || {
                let t = RankTable::cached(which, n_max)?;
                Ok((pair_from_table(&t, i, m), key_formula(i, m, &s_closed_all()?)?))
            }),
        }
    }));
    for which in [Which::Rank, Which::M2] {
        let p = params([("which", which.to_string()), ("a", "0".into()), ("M", "2".into())]);
        out.push(report("oracle.squared_denominator_series", p, prec, || {
            let t = RankTable::cached(which, n_max)?;
            let s = match which {
                Which::Rank => T_series(prec)?,
                Which::M2 => T2_series(prec)?,
            };
            Ok((deviation_from_table(&t, 0, 2), s))
        }));
    }
    sort_reports(&mut out);
    out
}
