//! Right-hand sides of the general deviation formulas, generic-parameter
//! selection, and verification against the oracle.

mod lemmas;
mod section4;

pub use lemmas::{dictionary, lemma_suite, oracle_suite, proof_instantiations, switch_grid, LemmaOrders};
pub use section4::{section4_suite, Section4Orders};

use std::fmt;
use std::time::Instant;

use crate::appell::{delta, delta_quotient, m_poles, m_series, psi, psi_poles};
use crate::cyclo::{CycloNum, Rational, RootOfUnity};
use crate::error::{Error, Result};
use crate::oracle::{deviations, Which, DEFAULT_ORACLE_RANGE};
use crate::par;
use crate::report::{params, Params, VerificationReport};
use crate::series::{Monomial, QSeries};

/// Which free parameter a term depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::First => "z'",
            Slot::Second => "z''",
        })
    }
}

/// `coeff * q^shift * m(x, q^base, z_slot)`.
#[derive(Clone, Debug)]
pub struct MTerm {
    pub coeff: i64,
    pub shift: i64,
    pub x: Monomial,
    pub base: i64,
    pub slot: Slot,
}

/// `coeff * q^shift * Psi_k^n(x, -1, z_slot; q^2)`.
#[derive(Clone, Debug)]
pub struct PsiTerm {
    pub coeff: i64,
    pub shift: i64,
    pub k: i64,
    pub n: i64,
    pub x: Monomial,
    pub slot: Slot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaKind {
    /// `Delta(zeta^{-2j} q, zeta^j, -1; q^2)`
    Rank,
    /// `Delta(zeta^j q, q, -1; q^2)`
    M2,
}

/// One instance of a general formula for `D(a, M) + D(a-1, M)`:
/// a constant, Appell–Lerch terms, `Psi` terms and the weighted sum
/// `sign * (2/M) sum_{j=1}^{M-1} zeta_M^{-aj} (1 - zeta_M^j) Delta_j`.
#[derive(Clone, Debug)]
pub struct Formula {
    pub id: String,
    pub a: i64,
    pub modulus: i64,
    pub constant: i64,
    pub m_terms: Vec<MTerm>,
    pub psi_terms: Vec<PsiTerm>,
    pub delta_sign: i64,
    pub delta_kind: DeltaKind,
}

fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn signed_q(s: i64, e: i64) -> Monomial {
    if s > 0 {
        Monomial::q(e)
    } else {
        Monomial::neg_q(e)
    }
}

/// The rank formula for `2 <= a <= M`. For `a` odd and `M` even the pair is
/// rewritten with `a -> M - a + 1` using `D(a, M) = D(M - a, M)`.
pub fn thm1_formula(a: i64, modulus: i64) -> Result<Formula> {
    let m = modulus;
    if m < 2 || !(2..=m).contains(&a) {
        return Err(Error::Range(format!("rank formula needs 2 <= a <= M, got a = {a}, M = {m}")));
    }
    let (a, case) = match (a % 2 == 0, m % 2 == 0) {
        (true, true) => (a, "i"),
        (false, true) => (m - a + 1, "i"),
        (true, false) => (a, "ii"),
        (false, false) => (a, "iii"),
    };
    let chi = i64::from(a == m);
    let (m_terms, psi_terms, constant) = match case {
        "i" => {
            let t = a / 2;
            (
                vec![MTerm {
                    coeff: 2 * sign(t),
                    shift: -t * t,
                    x: signed_q(sign(m / 2 + 1), m * m / 4 - a * m / 2),
                    base: m * m / 2,
                    slot: Slot::First,
                }],
                vec![PsiTerm {
                    coeff: -2,
                    shift: -1,
                    k: t - 1,
                    n: m / 2,
                    x: Monomial::q(-1),
                    slot: Slot::First,
                }],
                chi,
            )
        }
        "ii" => {
            let k1 = (2 * m - a) / 2;
            let k2 = (m + 1 - a) / 2;
            (
                vec![
                    MTerm {
                        coeff: -2 * sign(k1),
                        shift: -k1 * k1,
                        x: Monomial::q(m * (a - m)),
                        base: 2 * m * m,
                        slot: Slot::First,
                    },
                    MTerm {
                        coeff: 2 * sign(k2),
                        shift: -k2 * k2,
                        x: Monomial::q(m * (a - 1)),
                        base: 2 * m * m,
                        slot: Slot::Second,
                    },
                ],
                vec![
                    PsiTerm { coeff: -2, shift: 0, k: k1, n: m, x: Monomial::q(1), slot: Slot::First },
                    PsiTerm { coeff: 2, shift: 0, k: k2, n: m, x: Monomial::q(1), slot: Slot::Second },
                ],
                0,
            )
        }
        _ => {
            let k1 = (m - a) / 2;
            let k2 = (2 * m - a + 1) / 2;
            (
                vec![
                    MTerm {
                        coeff: -2 * sign(k1),
                        shift: -k1 * k1,
                        x: Monomial::q(m * a),
                        base: 2 * m * m,
                        slot: Slot::First,
                    },
                    MTerm {
                        coeff: 2 * sign(k2),
                        shift: -k2 * k2,
                        x: Monomial::q(m * (a - m - 1)),
                        base: 2 * m * m,
                        slot: Slot::Second,
                    },
                ],
                vec![
                    PsiTerm { coeff: -2, shift: 0, k: k1, n: m, x: Monomial::q(1), slot: Slot::First },
                    PsiTerm { coeff: 2, shift: 0, k: k2, n: m, x: Monomial::q(1), slot: Slot::Second },
                ],
                chi,
            )
        }
    };
    Ok(Formula {
        id: format!("rank_case_{case}"),
        a,
        modulus: m,
        constant,
        m_terms,
        psi_terms,
        delta_sign: -1,
        delta_kind: DeltaKind::Rank,
    })
}

/// The M2-rank formula for `1 <= a <= M - 1`.
pub fn thm2_formula(a: i64, modulus: i64) -> Result<Formula> {
    let m = modulus;
    if m < 2 || !(1..m).contains(&a) {
        return Err(Error::Range(format!("M2 formula needs 1 <= a <= M - 1, got a = {a}, M = {m}")));
    }
    let s = sign(m + 1);
    Ok(Formula {
        id: "m2".into(),
        a,
        modulus: m,
        constant: i64::from(a == 1),
        m_terms: vec![
            MTerm {
                coeff: 2 * sign(a),
                shift: -a * a,
                x: signed_q(s, m * m - 2 * m * a),
                base: 2 * m * m,
                slot: Slot::First,
            },
            MTerm {
                coeff: 2 * sign(a),
                shift: -a * a + 2 * a - 1,
                x: signed_q(s, m * m - 2 * m * (a - 1)),
                base: 2 * m * m,
                slot: Slot::Second,
            },
        ],
        psi_terms: vec![
            PsiTerm { coeff: 2, shift: 0, k: a, n: m, x: Monomial::q(1), slot: Slot::First },
            PsiTerm { coeff: -2, shift: 0, k: a - 1, n: m, x: Monomial::q(1), slot: Slot::Second },
        ],
        delta_sign: 1,
        delta_kind: DeltaKind::M2,
    })
}

impl Formula {
    pub fn uses(&self, slot: Slot) -> bool {
        self.m_terms.iter().any(|t| t.slot == slot) || self.psi_terms.iter().any(|t| t.slot == slot)
    }

    /// Symbolic pole check of every term depending on `slot` at `z`.
    pub fn check_slot(&self, slot: Slot, z: &Monomial) -> Result<()> {
        for t in self.m_terms.iter().filter(|t| t.slot == slot) {
            m_poles(&t.x, t.base, z)?;
        }
        for t in self.psi_terms.iter().filter(|t| t.slot == slot) {
            psi_poles(t.k, t.n, &t.x, &Monomial::MINUS_ONE, z, 2)?;
        }
        Ok(())
    }

    fn delta_arguments(&self, j: i64) -> (Monomial, Monomial) {
        let w = RootOfUnity::new(self.modulus as u64, j);
        match self.delta_kind {
            DeltaKind::Rank => (Monomial::new(w.pow(-2), 1), Monomial::new(w, 0)),
            DeltaKind::M2 => (Monomial::new(w, 1), Monomial::q(1)),
        }
    }

    /// The theta-quotient part `sign * (2/M) sum_j ...`.
    pub fn delta_sum(&self, prec: i64) -> Result<QSeries> {
        let m = self.modulus;
        let js: Vec<i64> = (1..m).collect();
        let terms = par::map(&js, |&j| -> Result<QSeries> {
            let (x, z1) = self.delta_arguments(j);
            let w = RootOfUnity::new(m as u64, j);
            let weight = RootOfUnity::new(m as u64, -self.a * j)
                .to_cyclo()?
                .try_mul(&(&CycloNum::one() - &w.to_cyclo()?))?;
            delta(&x, &z1, &Monomial::MINUS_ONE, 2, prec)?.try_scale(&weight)
        });
        let mut acc = QSeries::zero(prec);
        for t in terms {
            acc = acc.try_add(&t?)?;
        }
        Ok(acc.scale_rational(&Rational::from_parts((2 * self.delta_sign).into(), (m as u64).into())))
    }

    /// Evaluate with `z' = zp` and `z'' = zpp` (ignored when unused).
    pub fn eval(&self, zp: &Monomial, zpp: &Monomial, prec: i64) -> Result<QSeries> {
        let pick = |s: Slot| if s == Slot::First { zp } else { zpp };
        for s in [Slot::First, Slot::Second] {
            if self.uses(s) {
                self.check_slot(s, pick(s))?;
            }
        }
        for j in 1..self.modulus {
            let (x, z1) = self.delta_arguments(j);
            delta_quotient(&x, &z1, &Monomial::MINUS_ONE, 2).check_poles()?;
        }
        let mut acc = QSeries::constant(CycloNum::from_int(self.constant), prec);
        for t in &self.m_terms {
            let m = m_series(&t.x, t.base, pick(t.slot), prec - t.shift)?;
            acc = acc.try_add(&m.try_shift(t.shift)?.scale_int(t.coeff))?;
        }
        for t in &self.psi_terms {
            let p = psi(t.k, t.n, &t.x, &Monomial::MINUS_ONE, pick(t.slot), 2, prec - t.shift)?;
            acc = acc.try_add(&p.try_shift(t.shift)?.scale_int(t.coeff))?;
        }
        acc = acc.try_add(&self.delta_sum(prec)?)?;
        if let Some(e) = acc.first_irrational() {
            return Err(Error::NonRational { exponent: e });
        }
        Ok(acc.truncate(prec))
    }
}

pub const CANDIDATE_BOUND_FACTOR: i64 = 4;

/// A rejected candidate and the reason.
#[derive(Clone, Debug)]
pub struct Rejection {
    pub slot: Slot,
    pub candidate: Monomial,
    pub reason: String,
}

/// Admissible free parameters for one formula.
#[derive(Clone, Debug)]
pub struct GenericChoice {
    pub zp: Monomial,
    pub zpp: Monomial,
    pub attempts: Vec<Rejection>,
}

fn candidate(t: i64) -> Monomial {
    Monomial::neg_q(t)
}

fn candidate_index(m: &Monomial) -> Option<i64> {
    (*m == Monomial::neg_q(m.exp) && m.exp >= 0).then_some(m.exp)
}

fn first_admissible(f: &Formula, slot: Slot, from: i64, bound: i64, attempts: &mut Vec<Rejection>) -> Result<Monomial> {
    if !f.uses(slot) {
        return Ok(Monomial::MINUS_ONE);
    }
    for t in from..=bound {
        let c = candidate(t);
        match f.check_slot(slot, &c) {
            Ok(()) => return Ok(c),
            Err(e) => attempts.push(Rejection {
                slot,
                candidate: c,
                reason: e.to_string(),
            }),
        }
    }
    Err(Error::GenericSearchExhausted {
        formula: f.id.clone(),
        attempts: (bound - from + 1).max(0) as usize,
    })
}

/// First admissible `z', z''` among `-1, -q, -q^2, ..., -q^bound`, searched
/// independently. The default bound is `4 M^2`.
pub fn choose_generic(f: &Formula, bound: Option<i64>) -> Result<GenericChoice> {
    let bound = bound.unwrap_or(CANDIDATE_BOUND_FACTOR * f.modulus * f.modulus);
    let mut attempts = Vec::new();
    let zp = first_admissible(f, Slot::First, 0, bound, &mut attempts)?;
    let zpp = first_admissible(f, Slot::Second, 0, bound, &mut attempts)?;
    Ok(GenericChoice { zp, zpp, attempts })
}

/// The next admissible choice after `prev` in each used slot.
pub fn alternative_generic(f: &Formula, prev: &GenericChoice, bound: Option<i64>) -> Result<GenericChoice> {
    let bound = bound.unwrap_or(CANDIDATE_BOUND_FACTOR * f.modulus * f.modulus);
    let next = |m: &Monomial| candidate_index(m).map_or(0, |t| t + 1);
    let mut attempts = Vec::new();
    let zp = first_admissible(f, Slot::First, next(&prev.zp), bound, &mut attempts)?;
    let zpp = first_admissible(f, Slot::Second, next(&prev.zpp), bound, &mut attempts)?;
    Ok(GenericChoice { zp, zpp, attempts })
}

/// Right-hand side of the rank formula for `D(a, M) + D(a-1, M)`.
pub fn thm1_rhs(a: i64, modulus: i64, zp: &Monomial, zpp: &Monomial, prec: i64) -> Result<QSeries> {
    thm1_formula(a, modulus)?.eval(zp, zpp, prec)
}

/// Right-hand side of the M2-rank formula for `D2(a, M) + D2(a-1, M)`.
pub fn thm2_rhs(a: i64, modulus: i64, zp: &Monomial, zpp: &Monomial, prec: i64) -> Result<QSeries> {
    thm2_formula(a, modulus)?.eval(zp, zpp, prec)
}

pub fn formula(which: Which, a: i64, modulus: i64) -> Result<Formula> {
    match which {
        Which::Rank => thm1_formula(a, modulus),
        Which::M2 => thm2_formula(a, modulus),
    }
}

/// `D(a, M) + D(a-1, M)` from the oracle, with `D(M, M) = D(0, M)`.
pub fn pair_lhs(a: i64, modulus: i64, which: Which, prec: i64) -> Result<QSeries> {
    let d = deviations(modulus, which, prec, DEFAULT_ORACLE_RANGE)?;
    let at = |b: i64| &d[b.rem_euclid(modulus) as usize];
    at(a).try_add(at(a - 1))
}

fn pair_params(which: Which, a: i64, modulus: i64) -> Params {
    params([("which", which.to_string()), ("a", a.to_string()), ("M", modulus.to_string())])
}

fn pair_id(which: Which) -> &'static str {
    match which {
        Which::Rank => "rank_pair",
        Which::M2 => "m2_pair",
    }
}

/// Compare the general formula for `D(a, M) + D(a-1, M)` with the oracle.
pub fn verify_pair(a: i64, modulus: i64, which: Which, prec: i64) -> VerificationReport {
    let start = Instant::now();
    let mut p = pair_params(which, a, modulus);
    let id = pair_id(which);
    let run = |p: &mut Params| -> Result<(QSeries, QSeries)> {
        let f = formula(which, a, modulus)?;
        let g = choose_generic(&f, None)?;
        p.insert("z'".into(), g.zp.to_string());
        if f.uses(Slot::Second) {
            p.insert("z''".into(), g.zpp.to_string());
        }
        let rhs = f.eval(&g.zp, &g.zpp, prec)?;
        let lhs = pair_lhs(a, modulus, which, prec)?;
        Ok((lhs, rhs))
    };
    match run(&mut p) {
        Ok((l, r)) => VerificationReport::compare(id, p, &l, &r, prec, start),
        Err(e) => VerificationReport::from_error(id, p, &e, prec, start),
    }
}

/// The right-hand side at two different admissible choices of `z', z''`.
pub fn verify_generic_independence(a: i64, modulus: i64, which: Which, prec: i64) -> VerificationReport {
    let start = Instant::now();
    let mut p = pair_params(which, a, modulus);
    let id = match which {
        Which::Rank => "rank_generic_independence",
        Which::M2 => "m2_generic_independence",
    };
    let run = |p: &mut Params| -> Result<(QSeries, QSeries)> {
        let f = formula(which, a, modulus)?;
        let g1 = choose_generic(&f, None)?;
        let g2 = alternative_generic(&f, &g1, None)?;
        p.insert("first".into(), format!("z'={}, z''={}", g1.zp, g1.zpp));
        p.insert("second".into(), format!("z'={}, z''={}", g2.zp, g2.zpp));
        Ok((f.eval(&g1.zp, &g1.zpp, prec)?, f.eval(&g2.zp, &g2.zpp, prec)?))
    };
    match run(&mut p) {
        Ok((l, r)) => VerificationReport::compare(id, p, &l, &r, prec, start),
        Err(e) => VerificationReport::from_error(id, p, &e, prec, start),
    }
}

/// Pair `P(b) = D(b, M) + D(b-1, M)` for `1 <= b <= M` from the general
/// formulas, using `P(1) = P(M)` where the formula does not cover `b`.
pub fn pair_rhs(b: i64, modulus: i64, which: Which, prec: i64) -> Result<QSeries> {
    let b = match which {
        Which::Rank if b == 1 => modulus,
        Which::M2 if b == modulus => 1,
        _ => b,
    };
    let f = formula(which, b, modulus)?;
    let g = choose_generic(&f, None)?;
    f.eval(&g.zp, &g.zpp, prec)
}

/// A single `D(a, M)` for odd `M`, solved from the pairs.
///
/// `P((M+1)/2) = 2 D((M-1)/2)` starts the recursion `D(b-1) = P(b) - D(b)`;
/// the other half follows from `D(a) = D(M-a)`.
pub fn single_deviation(a: i64, modulus: i64, which: Which, prec: i64) -> Result<QSeries> {
    let m = modulus;
    if m % 2 == 0 || m < 3 {
        return Err(Error::Range(format!("single deviations are solved for odd M >= 3, got M = {m}")));
    }
    if !(0..=m).contains(&a) {
        return Err(Error::Range(format!("need 0 <= a <= M, got a = {a}")));
    }
    let a = a % m;
    let a = a.min(m - a);
    let half = (m - 1) / 2;
    let pairs: Vec<i64> = (a + 1..=half + 1).collect();
    let values = par::map(&pairs, |&b| pair_rhs(b, m, which, prec));
    let mut values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let top = values.pop().expect("at least one pair");
    let mut d = top.scale_rational(&Rational::from_parts(1.into(), 2u8.into()));
    // d = D(half); walk down to D(a)
    while let Some(p) = values.pop() {
        d = p.try_sub(&d)?;
    }
    Ok(d)
}

pub fn verify_single(a: i64, modulus: i64, which: Which, prec: i64) -> VerificationReport {
    let p = params([("which", which.to_string()), ("a", a.to_string()), ("M", modulus.to_string())]);
    let id = match which {
        Which::Rank => "rank_single",
        Which::M2 => "m2_single",
    };
    VerificationReport::run(id, p, prec, || {
        let rhs = single_deviation(a, modulus, which, prec)?;
        let lhs = deviations(modulus, which, prec, DEFAULT_ORACLE_RANGE)?[(a % modulus) as usize].clone();
        Ok((lhs, rhs))
    })
}

/// `(M, a)` pairs exercising every case of the rank formula.
pub fn rank_cases() -> Vec<(i64, i64)> {
    vec![
        (4, 2),
        (4, 4),
        (6, 2),
        (6, 4),
        (6, 6),
        (3, 2),
        (3, 3),
        (5, 2),
        (5, 3),
        (5, 4),
        (5, 5),
        (7, 2),
        (7, 5),
        (7, 7),
    ]
}

/// All `(M, a)` with `2 <= M <= 6`, `1 <= a <= M - 1`.
pub fn m2_cases() -> Vec<(i64, i64)> {
    (2..=6).flat_map(|m| (1..m).map(move |a| (m, a))).collect()
}

/// Verify the rank formula on the given `(M, a)` list, in parallel.
pub fn thm1_suite(cases: &[(i64, i64)], prec: i64) -> Vec<VerificationReport> {
    let mut out = par::map(cases, |&(m, a)| verify_pair(a, m, Which::Rank, prec));
    sort_reports(&mut out);
    out
}

pub fn thm2_suite(cases: &[(i64, i64)], prec: i64) -> Vec<VerificationReport> {
    let mut out = par::map(cases, |&(m, a)| verify_pair(a, m, Which::M2, prec));
    sort_reports(&mut out);
    out
}

/// Deterministic order: by identity, then by parameters.
pub fn sort_reports(v: &mut [VerificationReport]) {
    v.sort_by(|x, y| {
        (&x.identity_id, param_key(x)).cmp(&(&y.identity_id, param_key(y)))
    });
}

fn param_key(r: &VerificationReport) -> Vec<(String, String)> {
    // pad integers so that "10" sorts after "9"
    r.parameters
        .iter()
        .map(|(k, v)| {
            let v = match v.parse::<i64>() {
                Ok(n) => format!("{n:>12}"),
                Err(_) => v.clone(),
            };
            (k.clone(), v)
        })
        .collect()
}

/// Reports counted toward an overall pass; informational cross-checks of
/// displays that are known to disagree are excluded.
pub fn is_counted(r: &VerificationReport) -> bool {
    r.parameters.get("role").map(String::as_str) != Some("informational")
}

pub fn all_pass(reports: &[VerificationReport]) -> bool {
    reports.iter().filter(|r| is_counted(r)).all(VerificationReport::passed)
}
