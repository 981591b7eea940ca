//! Appell–Lerch sums `m(x, q, z)`, the switch term `Delta`, the
//! orthogonality term `Psi`, `h(x; q)` and the squared-denominator sums
//! behind the deviations modulo 2.
//!
//! Every function takes its nome as `q^base` and monomial arguments, so all
//! pole conditions are decided symbolically before anything is expanded.

use crate::cyclo::{lcm_u64, CycloNum, Rational, RootOfUnity};
use crate::error::{Error, Result};
use crate::report::{params, VerificationReport};
use crate::series::{Monomial, QSeries};
use crate::theta::{pochhammer_inf, theta_j, theta_valuation, j_is_zero, Factor, ThetaQuotient, UnityArray, J};

/// One summand `unity * q^num_exp / (1 - u q^den_exp)`.
struct LerchTerm {
    unity: RootOfUnity,
    num_exp: i64,
    u: RootOfUnity,
    den_exp: i64,
}

impl LerchTerm {
    /// Smallest exponent the expanded term can reach.
    fn min_exp(&self) -> i64 {
        self.num_exp + (-self.den_exp).max(0)
    }

    /// Expand into `acc` below its upper bound. A constant denominator
    /// `1 - u` with `u != 1` cannot be absorbed into unity sums and is
    /// returned separately.
    fn expand(&self, acc: &mut UnityArray, hi: i64) -> Result<Option<(i64, CycloNum)>> {
        let n = self.den_exp;
        if n == 0 {
            if self.u.is_one() {
                return Err(Error::Pole(format!("denominator 1 - q^0 at q^{}", self.num_exp)));
            }
            let c = self.unity.to_cyclo()?.try_div(&(&CycloNum::one() - &self.u.to_cyclo()?))?;
            return Ok(Some((self.num_exp, c)));
        }
        let (step, first, ratio, lead) = if n > 0 {
            (n, 0, self.u, self.unity)
        } else {
            // 1/(1 - u q^n) = -u^-1 q^-n / (1 - u^-1 q^-n)
            (-n, -n, self.u.inv(), -(self.unity * self.u.inv()))
        };
        let mut exp = self.num_exp + first;
        let mut c = lead;
        while exp < hi {
            acc.add(exp, c, 1);
            exp += step;
            c = c * ratio;
        }
        Ok(None)
    }
}

/// Sum the given terms exactly below `hi`.
fn lerch_sum(terms: &[LerchTerm], hi: i64) -> Result<QSeries> {
    let lo = terms.iter().map(LerchTerm::min_exp).min().unwrap_or(hi).min(hi);
    let level = terms
        .iter()
        .fold(2, |l, t| lcm_u64(lcm_u64(l, t.unity.order()), t.u.order()));
    let mut acc = UnityArray::new(level, lo, hi);
    let mut extra = Vec::new();
    for t in terms {
        if let Some(e) = t.expand(&mut acc, hi)? {
            extra.push(e);
        }
    }
    let mut s = acc.into_series();
    for (e, c) in extra {
        if e < hi {
            s = s.try_add(&QSeries::monomial(c, e, hi))?;
        }
    }
    Ok(s)
}

/// Integer range `[lo, hi]` outside of which `g(r) >= thr`, for `g` a
/// minimum of convex quadratics whose vertices lie within `[v_lo, v_hi]`.
fn sublevel_range(g: impl Fn(i64) -> i64, v_lo: i64, v_hi: i64, thr: i64) -> (i64, i64) {
    let mut hi = v_lo;
    while hi <= v_hi || g(hi) < thr {
        hi += 1;
    }
    let mut lo = v_hi;
    while lo >= v_lo || g(lo) < thr {
        lo -= 1;
    }
    (lo + 1, hi - 1)
}

/// Error unless `m(x, q^base, z)` is free of poles.
pub fn m_poles(x: &Monomial, base: i64, z: &Monomial) -> Result<()> {
    if j_is_zero(z, base) {
        return Err(Error::Pole(format!("m({x}, q^{base}, {z}): j({z}; q^{base}) = 0")));
    }
    let xz = *x * *z;
    if j_is_zero(&xz, base) {
        return Err(Error::Pole(format!("m({x}, q^{base}, {z}): x*z = {xz} is a power of q^{base}")));
    }
    Ok(())
}

/// Summation range for `m(x, q^base, z)`: outside it every term starts at
/// or above `thr`, with a margin of two on each side.
pub fn m_r_range(x: &Monomial, base: i64, z: &Monomial, thr: i64) -> (i64, i64) {
    let g = |r: i64| base * r * (r - 1) / 2 + r * z.exp - (-(base * (r - 1) + x.exp + z.exp)).max(0);
    let v = -z.exp.div_euclid(base);
    let (lo, hi) = sublevel_range(g, v - 2, v + 2, thr);
    (lo - 2, hi + 2)
}

/// `m(x, q^base, z)` exact to `O(q^prec)`.
pub fn m_series(x: &Monomial, base: i64, z: &Monomial, prec: i64) -> Result<QSeries> {
    m_poles(x, base, z)?;
    let v_theta = theta_valuation(z, base).expect("checked");
    let (lo, hi) = m_r_range(x, base, z, prec + v_theta);
    m_series_with_range(x, base, z, prec, lo, hi)
}

/// `m(x, q^base, z)` summed over `r_lo <= r <= r_hi` only.
pub fn m_series_with_range(x: &Monomial, base: i64, z: &Monomial, prec: i64, r_lo: i64, r_hi: i64) -> Result<QSeries> {
    assert!(base >= 1, "m base must be positive");
    m_poles(x, base, z)?;
    let v_theta = theta_valuation(z, base).expect("checked");
    let u = x.unity * z.unity;
    let terms: Vec<LerchTerm> = (r_lo..=r_hi)
        .map(|r| LerchTerm {
            unity: (RootOfUnity::MINUS_ONE * z.unity).pow(r),
            num_exp: base * r * (r - 1) / 2 + r * z.exp,
            u,
            den_exp: base * (r - 1) + x.exp + z.exp,
        })
        .collect();
    let s_prec = prec + v_theta;
    let s_lo = terms.iter().map(LerchTerm::min_exp).min().unwrap_or(s_prec);
    if s_lo >= s_prec {
        return Ok(QSeries::zero(prec));
    }
    let s = lerch_sum(&terms, s_prec)?;
    let theta = theta_j(z, base, prec + 2 * v_theta - s_lo);
    let out = s.try_mul(&theta.invert()?)?;
    debug_assert!(out.prec() >= prec);
    Ok(out.truncate(prec))
}

/// `Delta(x, z1, z0; q^base)` as a theta quotient.
pub fn delta_quotient(x: &Monomial, z1: &Monomial, z0: &Monomial, base: i64) -> ThetaQuotient {
    let th = |z: Monomial| Factor::theta(z, base);
    ThetaQuotient::new(CycloNum::one())
        .times_monomial(z0)
        .pow(Factor::J(base), 3)
        .num(th(*z1 * z0.inv()))
        .num(th(*x * *z0 * *z1))
        .den(th(*z0))
        .den(th(*z1))
        .den(th(*x * *z0))
        .den(th(*x * *z1))
}

pub fn delta(x: &Monomial, z1: &Monomial, z0: &Monomial, base: i64, prec: i64) -> Result<QSeries> {
    delta_quotient(x, z1, z0, base).eval(prec)
}

fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// The `n` theta quotients summed in `Psi_k^n(x, z, z'; q^base)`, indexed by `t`.
pub fn psi_terms(k: i64, n: i64, x: &Monomial, z: &Monomial, zp: &Monomial, base: i64) -> Vec<ThetaQuotient> {
    assert!(n >= 1, "Psi needs n >= 1");
    let big = base * n * n;
    let th = |m: Monomial| Factor::theta(m, big);
    let pre = -(x.pow(k) * z.pow(k + 1));
    let neg_z = -*z;
    let neg_x = -*x;
    let xz_n = (*x * *z).pow(n);
    (0..n)
        .map(|t| {
            let lead = pre * Monomial::q(base * (binom2(t + 1) + k * t)) * neg_z.pow(t);
            let shifted = Monomial::q(base * n * t) * xz_n;
            ThetaQuotient::new(CycloNum::one())
                .times_monomial(&lead)
                .pow(Factor::J(big), 3)
                .num(th(-Monomial::q(base * (binom2(n + 1) + n * k + n * t)) * neg_z.pow(n) * zp.inv()))
                .num(th(shifted * *zp))
                .den(Factor::theta(*z, base))
                .den(th(*zp))
                .den(th(-Monomial::q(base * (binom2(n) - n * k)) * neg_x.pow(n) * *zp))
                .den(th(shifted))
        })
        .collect()
}

/// Error naming the first vanishing denominator of `Psi`, with its `t`.
pub fn psi_poles(k: i64, n: i64, x: &Monomial, z: &Monomial, zp: &Monomial, base: i64) -> Result<()> {
    for (t, q) in psi_terms(k, n, x, z, zp, base).iter().enumerate() {
        q.check_poles().map_err(|e| annotate(e, t))?;
    }
    Ok(())
}

fn annotate(e: Error, t: usize) -> Error {
    match e {
        Error::Pole(s) => Error::Pole(format!("{s} (t = {t})")),
        e => e,
    }
}

/// `Psi_k^n(x, z, z'; q^base)`.
pub fn psi(k: i64, n: i64, x: &Monomial, z: &Monomial, zp: &Monomial, base: i64, prec: i64) -> Result<QSeries> {
    psi_poles(k, n, x, z, zp, base)?;
    let mut acc = QSeries::zero(prec);
    for (t, q) in psi_terms(k, n, x, z, zp, base).iter().enumerate() {
        acc = acc.try_add(&q.eval(prec).map_err(|e| annotate(e, t))?)?;
    }
    Ok(acc)
}

/// Both sides of the orthogonality relation
/// `sum_t w^{-kt} m(w^t x, q, z) = n q^{-k(k+1)/2} (-x)^k m(-q^{n(n-1)/2 - nk} (-x)^n, q^{n^2}, z') + n Psi_k^n`
/// over `q^base`, with `w` a primitive `n`-th root of unity.
pub fn orthogonality_sides(
    k: i64,
    n: i64,
    x: &Monomial,
    z: &Monomial,
    zp: &Monomial,
    base: i64,
    prec: i64,
) -> Result<(QSeries, QSeries)> {
    if !(0..n).contains(&k) {
        return Err(Error::Range(format!("need 0 <= k < n, got k = {k}, n = {n}")));
    }
    let omega = RootOfUnity::new(n as u64, 1);
    let mut lhs = QSeries::zero(prec);
    for t in 0..n {
        let w = Monomial::new(omega.pow(t), 0);
        let term = m_series(&(w * *x), base, z, prec)?;
        lhs = lhs.try_add(&term.try_scale(&omega.pow(-k * t).to_cyclo()?)?)?;
    }
    let neg_x = -*x;
    let arg = -Monomial::q(base * (binom2(n) - n * k)) * neg_x.pow(n);
    let lead = Monomial::q(-base * binom2(k + 1)) * neg_x.pow(k);
    let m = m_series(&arg, base * n * n, zp, prec - lead.exp)?;
    let rhs = m
        .try_mul_monomial(&lead)?
        .try_add(&psi(k, n, x, z, zp, base, prec)?)?
        .scale_int(n);
    Ok((lhs, rhs))
}

pub fn orthogonality_check(
    k: i64,
    n: i64,
    x: &Monomial,
    z: &Monomial,
    zp: &Monomial,
    base: i64,
    prec: i64,
) -> VerificationReport {
    let p = params([
        ("k", k.to_string()),
        ("n", n.to_string()),
        ("x", x.to_string()),
        ("z", z.to_string()),
        ("z'", zp.to_string()),
        ("base", base.to_string()),
    ]);
    VerificationReport::run("lemma.orthogonality", p, prec, || orthogonality_sides(k, n, x, z, zp, base, prec))
}

/// `(-q^base; q^base)_inf / (q^base; q^base)_inf`.
pub fn overpartition_product(base: i64, prec: i64) -> Result<QSeries> {
    pochhammer_inf(&Monomial::neg_q(base), base, prec).try_div(&J(base, prec))
}

/// `h(x; q^base)`.
pub fn h_series(x: &Monomial, base: i64, prec: i64) -> Result<QSeries> {
    assert!(base >= 1, "h base must be positive");
    if j_is_zero(x, base) {
        return Err(Error::Pole(format!("h({x}; q^{base}): {x} is a power of q^{base}")));
    }
    let g = |n: i64| base * n * (n + 1) - (-(base * n + x.exp)).max(0);
    let v = -x.exp.div_euclid(base);
    let (lo, hi) = sublevel_range(g, v.min(-1) - 2, v.max(0) + 2, prec);
    let terms: Vec<LerchTerm> = (lo - 2..=hi + 2)
        .map(|n| LerchTerm {
            unity: RootOfUnity::MINUS_ONE.pow(n),
            num_exp: base * n * (n + 1),
            u: x.unity,
            den_exp: base * n + x.exp,
        })
        .collect();
    let s = lerch_sum(&terms, prec)?;
    s.try_mul(&overpartition_product(base, prec)?)
}

/// `4 * sum_n (-1)^n q^{n^2 + c n} / (1 + q^{d n})^2` as integers below `prec`.
fn squared_sum_times4(c: i64, d: i64, prec: i64) -> Vec<i128> {
    let len = prec.max(0) as usize;
    let mut acc = vec![0i128; len];
    if len == 0 {
        return acc;
    }
    acc[0] += 1; // n = 0: 1/(1+1)^2
    let mut n = 1i64;
    while n * n < prec {
        for signed in [n, -n] {
            let sign: i128 = if n % 2 == 0 { 1 } else { -1 };
            let step = d * n;
            // 1/(1+q^s)^2 = sum (k+1)(-1)^k q^{ks}; for s < 0 rewrite as
            // q^{2|s|}/(1+q^{|s|})^2
            let (start, step) = if signed > 0 {
                (n * n + c * n, step)
            } else {
                (n * n - c * n + 2 * step, step)
            };
            let mut e = start;
            let mut k = 0i128;
            while e < prec {
                if e >= 0 {
                    let s = if k % 2 == 0 { 1 } else { -1 };
                    acc[e as usize] += 4 * sign * s * (k + 1);
                }
                k += 1;
                e += step;
            }
        }
        n += 1;
    }
    acc
}

fn squared_series(c: i64, d: i64, prec: i64) -> Result<QSeries> {
    let four = squared_sum_times4(c, d, prec);
    let coeffs: Vec<Rational> = four
        .iter()
        .map(|&v| Rational::from_parts(v.into(), 4u8.into()))
        .collect();
    let s = QSeries::from_rationals(0, &coeffs, prec);
    Ok(s.try_mul(&overpartition_product(1, prec)?)?.scale_int(2))
}

/// `2 (-q)_inf/(q)_inf sum_n (-1)^n q^{n^2+n} / (1+q^n)^2`.
#[allow(non_snake_case)]
pub fn T_series(prec: i64) -> Result<QSeries> {
    squared_series(1, 1, prec)
}

/// `2 (-q)_inf/(q)_inf sum_n (-1)^n q^{n^2+2n} / (1+q^{2n})^2`.
#[allow(non_snake_case)]
pub fn T2_series(prec: i64) -> Result<QSeries> {
    squared_series(2, 2, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::theta_j_sum;

    fn half() -> CycloNum {
        CycloNum::from_rational(&Rational::from_parts(1.into(), 2u8.into()))
    }

    #[test]
    fn m_half() {
        let m = m_series(&Monomial::q(1), 2, &Monomial::MINUS_ONE, 200).unwrap();
        assert_eq!(m, QSeries::constant(half(), 200));
        assert_eq!(m.prec(), 200);
    }

    #[test]
    fn m_poles_detected() {
        assert!(matches!(m_series(&Monomial::q(1), 2, &Monomial::q(2), 10), Err(Error::Pole(_))));
        assert!(matches!(m_series(&Monomial::q(3), 2, &Monomial::q(-1), 10), Err(Error::Pole(_))));
        assert!(m_series(&Monomial::q(3), 2, &Monomial::neg_q(-1), 10).is_ok());
    }

    #[test]
    fn flip_identity() {
        let x = Monomial::zeta_q(3, 1, 1);
        let z = Monomial::neg_q(1);
        let lhs = m_series(&x, 1, &z, 40).unwrap();
        let rhs = m_series(&x.inv(), 1, &z.inv(), 41).unwrap().mul_monomial(&x.inv());
        assert_eq!(lhs, rhs);
    }

    /// Expands each summand with generic series inversion instead of the
    /// geometric rewrite, and divides by the sum form of theta.
    fn m_by_inversion(x: &Monomial, base: i64, z: &Monomial, prec: i64, r: std::ops::RangeInclusive<i64>) -> QSeries {
        let v = theta_valuation(z, base).unwrap();
        let work = prec + 3 * v.abs() + 40;
        let mut s = QSeries::zero(work);
        for r in r {
            let num = (Monomial::MINUS_ONE * *z).pow(r) * Monomial::q(base * r * (r - 1) / 2);
            let den = QSeries::one(work + 200).try_sub(&(Monomial::q(base * (r - 1)) * *x * *z).to_series(work + 200)).unwrap();
            s = s.try_add(&den.invert().unwrap().mul_monomial(&num)).unwrap();
        }
        s.try_div(&theta_j_sum(z, base, work)).unwrap().truncate(prec)
    }

    #[test]
    fn m_negative_exponent_argument() {
        let x = Monomial::q(-3);
        let z = Monomial::q(6);
        let m = m_series(&x, 18, &z, 30).unwrap();
        assert_eq!(m, m_by_inversion(&x, 18, &z, 30, -6..=6));
        assert_eq!(m.prec(), 30);
        let x = Monomial::zeta_q(6, 1, -2);
        let z = Monomial::neg_q(1);
        assert_eq!(m_series(&x, 2, &z, 25).unwrap(), m_by_inversion(&x, 2, &z, 25, -8..=8));
    }

    #[test]
    fn range_doubling_is_stable() {
        for (x, base, z) in [
            (Monomial::q(-3), 18, Monomial::q(6)),
            (Monomial::zeta_q(3, 1, 1), 2, Monomial::MINUS_ONE),
            (Monomial::q(9), 18, Monomial::MINUS_ONE),
        ] {
            let v = theta_valuation(&z, base).unwrap();
            let (lo, hi) = m_r_range(&x, base, &z, 60 + v);
            let a = m_series(&x, base, &z, 60).unwrap();
            let b = m_series_with_range(&x, base, &z, 60, 2 * lo - 1, 2 * hi + 1).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn switch_lemma() {
        let x = Monomial::zeta_q(3, -2, 1);
        let z1 = Monomial::zeta_q(3, 1, 0);
        let z0 = Monomial::MINUS_ONE;
        let lhs = m_series(&x, 2, &z1, 40).unwrap() - m_series(&x, 2, &z0, 40).unwrap();
        assert_eq!(lhs, delta(&x, &z1, &z0, 2, 40).unwrap());
        assert!(delta(&x, &z1, &z1, 2, 40).unwrap().is_zero());
    }

    #[test]
    fn delta_evaluation_vanishes() {
        let z6 = |k| Monomial::zeta_q(6, k, 0);
        let c = &CycloNum::one() - &CycloNum::zeta(6, 3);
        let d = delta(&(z6(-6) * Monomial::q(1)), &z6(3), &Monomial::MINUS_ONE, 2, 30).unwrap();
        assert!(d.scale(&c).is_zero());
    }

    #[test]
    fn psi_vanishing_cases() {
        let m1 = Monomial::MINUS_ONE;
        assert!(psi(0, 3, &Monomial::q(1), &m1, &m1, 2, 40).unwrap().is_zero());
        assert!(psi(2, 3, &Monomial::q(-1), &m1, &m1, 2, 40).unwrap().is_zero());
        assert!(!psi(2, 3, &Monomial::q(1), &m1, &Monomial::q(6), 2, 40).unwrap().is_zero());
    }

    #[test]
    fn psi_pole_names_t() {
        let e = psi(0, 2, &Monomial::q(1), &Monomial::MINUS_ONE, &Monomial::q(4), 1, 10).unwrap_err();
        match e {
            Error::Pole(s) => assert!(s.contains("t = 0"), "{s}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn orthogonality_examples() {
        let m1 = Monomial::MINUS_ONE;
        let r = orthogonality_check(2, 3, &Monomial::q(1), &m1, &Monomial::neg_q(1), 2, 30);
        assert!(r.passed(), "{}", r.summary_line());
        // with z = -q^3 the t = 1 summand m(-q, q, -q^3) has x*z = q^4
        let r = orthogonality_check(1, 2, &Monomial::q(1), &Monomial::neg_q(3), &m1, 1, 30);
        assert_eq!(r.status, crate::Status::PoleSkipped);
        let r = orthogonality_check(1, 2, &Monomial::q(1), &Monomial::zeta_q(3, 1, 3), &m1, 1, 30);
        assert!(r.passed(), "{}", r.summary_line());
        let r = orthogonality_check(0, 1, &Monomial::zeta_q(3, 1, 0), &Monomial::neg_q(1), &m1, 1, 30);
        assert!(r.passed(), "{}", r.summary_line());
    }

    #[test]
    fn h_equals_m_form() {
        for (x, base) in [(Monomial::q(6), 9), (Monomial::zeta_q(3, 1, 1), 1), (Monomial::q(1), 3)] {
            let h = h_series(&x, base, 50).unwrap();
            let arg = x.pow(-2) * Monomial::q(base);
            let m = m_series(&arg, 2 * base, &x, 50 + x.exp).unwrap().mul_monomial(&-x.inv());
            assert_eq!(h, m, "x={x} base={base}");
        }
    }

    #[test]
    fn h_reflection_and_sum() {
        let x = Monomial::zeta_q(3, 1, 1);
        assert_eq!(h_series(&x, 1, 50).unwrap(), h_series(&(x.inv() * Monomial::q(1)), 1, 50).unwrap());
        let x = Monomial::q(3);
        let lhs = h_series(&x, 9, 60).unwrap() + h_series(&-x, 9, 60).unwrap();
        let rhs = ThetaQuotient::rational(Rational::from(2))
            .pow(Factor::J(18), 4)
            .pow(Factor::J(9), -2)
            .den(Factor::theta(x.pow(2), 18))
            .eval(60)
            .unwrap();
        assert_eq!(lhs, rhs);
        assert!(matches!(h_series(&Monomial::q(3), 1, 10), Err(Error::Pole(_))));
    }

    #[test]
    fn t_series_rational() {
        let t = T_series(40).unwrap();
        let t2 = T2_series(40).unwrap();
        assert!(t.rational_coeffs().is_some() && t2.rational_coeffs().is_some());
        // constant term 2 * 1/4
        assert_eq!(t.coeff(0), Some(half()));
        assert_eq!(t2.coeff(0), Some(half()));
    }
}
