//! Infinite products, theta functions and quotients of them.
//!
//! `j(z; q^b) = (z; q^b)_inf (q^b/z; q^b)_inf (q^b; q^b)_inf` is computed from
//! the product form. The bilateral sum form is kept as an independent check.

use std::fmt;

use crate::cyclo::{lcm_u64, CycloNum, Rational, RootOfUnity};
use crate::error::{Error, Result};
use crate::series::{Monomial, QSeries};

/// Dense accumulator of `sum c_{e,k} zeta_L^k q^e` with small integer
/// `c_{e,k}`. Multiplying by a root of unity is a rotation of the inner
/// index, so products of `(1 - c q^t)` factors need no field arithmetic
/// until the final conversion.
#[derive(Clone, Debug)]
pub(crate) struct UnityArray {
    level: usize,
    lo: i64,
    hi: i64,
    data: Vec<i128>,
}

impl UnityArray {
    pub(crate) fn new(level: u64, lo: i64, hi: i64) -> Self {
        let level = level.max(1) as usize;
        let len = (hi - lo).max(0) as usize;
        UnityArray {
            level,
            lo,
            hi,
            data: vec![0; len * level],
        }
    }

    /// Add `count * unity * q^exp`; terms outside the window are ignored.
    pub(crate) fn add(&mut self, exp: i64, unity: RootOfUnity, count: i128) {
        if exp < self.lo || exp >= self.hi {
            return;
        }
        let k = unity.exponent_at(self.level as u64) as usize;
        let idx = (exp - self.lo) as usize * self.level + k;
        self.data[idx] += count;
    }

    fn row(&self, exp: i64) -> &[i128] {
        let i = (exp - self.lo) as usize * self.level;
        &self.data[i..i + self.level]
    }

    /// Multiply by `(1 - zeta_L^s q^t)` for `t >= 0`, in place.
    fn mul_factor_nonneg(&mut self, s: usize, t: i64) {
        let l = self.level;
        let width = (self.hi - self.lo) as usize;
        let t = t as usize;
        if t == 0 {
            for e in 0..width {
                let row: Vec<i128> = self.data[e * l..(e + 1) * l].to_vec();
                for k in 0..l {
                    self.data[e * l + (k + s) % l] -= row[k];
                }
            }
            return;
        }
        for e in (t..width).rev() {
            let (src, dst) = ((e - t) * l, e * l);
            for k in 0..l {
                let v = self.data[src + k];
                if v != 0 {
                    self.data[dst + (k + s) % l] -= v;
                }
            }
        }
    }

    /// Multiply by `(1 - zeta_L^s q^t)` for `t < 0`; the window slides down
    /// by `|t|` since the top `|t|` coefficients are no longer determined.
    fn mul_factor_neg(&mut self, s: usize, t: i64) {
        let l = self.level;
        let width = (self.hi - self.lo) as usize;
        let shift = (-t) as usize;
        let mut out = vec![0i128; width * l];
        // new exponent E = lo + t + i; old(E) sits at index i - shift,
        // old(E + |t|) at index i
        for i in 0..width {
            if i >= shift {
                out[i * l..(i + 1) * l].copy_from_slice(&self.data[(i - shift) * l..(i - shift + 1) * l]);
            }
            for k in 0..l {
                let v = self.data[i * l + k];
                if v != 0 {
                    out[i * l + (k + s) % l] -= v;
                }
            }
        }
        self.data = out;
        self.lo += t;
        self.hi += t;
    }

    pub(crate) fn into_series(self) -> QSeries {
        let coeffs = (self.lo..self.hi)
            .map(|e| CycloNum::from_unity_sums(self.level as u32, self.row(e)))
            .collect();
        QSeries::from_coeffs(self.lo, coeffs, self.hi)
    }
}

/// `true` iff `j(z; q^base)` vanishes identically, i.e. `z` is an integral
/// power of `q^base`.
pub fn j_is_zero(z: &Monomial, base: i64) -> bool {
    z.unity.is_one() && z.exp.rem_euclid(base) == 0
}

fn factor_exponents(x: &Monomial, base: i64) -> impl Iterator<Item = i64> {
    let e = x.exp;
    (0..).map(move |k| e + k * base)
}

/// Valuation of `(x; q^base)_inf`, or `None` if a factor vanishes.
pub fn pochhammer_valuation(x: &Monomial, base: i64) -> Option<i64> {
    if j_is_zero_factor(x, base) {
        return None;
    }
    Some(factor_exponents(x, base).take_while(|&t| t < 0).sum())
}

fn j_is_zero_factor(x: &Monomial, base: i64) -> bool {
    // (x; q^b) has the factor (1 - x q^{kb}) = 0 for some k >= 0
    x.unity.is_one() && x.exp <= 0 && x.exp.rem_euclid(base) == 0
}

/// `(x; q^base)_inf = prod_{k >= 0} (1 - x q^{k base})`, exact to `O(q^prec)`.
pub fn pochhammer_inf(x: &Monomial, base: i64, prec: i64) -> QSeries {
    assert!(base >= 1, "pochhammer base must be positive");
    let Some(v_neg) = pochhammer_valuation(x, base) else {
        return QSeries::zero(prec);
    };
    let level = x.unity.order();
    let s = x.unity.exponent_at(level) as usize;
    // The positive-exponent tail must be known to prec - v_neg so that the
    // negative factors, which each slide the window down, land on prec.
    let hi = prec - v_neg;
    if hi <= 0 {
        return QSeries::zero(prec);
    }
    let mut acc = UnityArray::new(level, 0, hi);
    acc.add(0, RootOfUnity::ONE, 1);
    for t in factor_exponents(x, base).take_while(|&t| t < hi) {
        if t >= 0 {
            acc.mul_factor_nonneg(s, t);
        }
    }
    for t in factor_exponents(x, base).take_while(|&t| t < 0) {
        acc.mul_factor_neg(s, t);
    }
    debug_assert_eq!(acc.hi, prec);
    acc.into_series()
}

/// `J_m = (q^m; q^m)_inf`.
#[allow(non_snake_case)]
pub fn J(m: i64, prec: i64) -> QSeries {
    assert!(m >= 1, "J_m needs m >= 1");
    pochhammer_inf(&Monomial::q(m), m, prec)
}

/// Valuation of `j(z; q^base)`, or `None` when it vanishes identically.
pub fn theta_valuation(z: &Monomial, base: i64) -> Option<i64> {
    if j_is_zero(z, base) {
        return None;
    }
    let a = pochhammer_valuation(z, base)?;
    let b = pochhammer_valuation(&z.inv().times_q(base), base)?;
    Some(a + b)
}

/// `j(z; q^base)` from the triple product.
pub fn theta_j(z: &Monomial, base: i64, prec: i64) -> QSeries {
    assert!(base >= 1, "theta base must be positive");
    if j_is_zero(z, base) {
        return QSeries::zero(prec);
    }
    let w = z.inv().times_q(base);
    let va = pochhammer_valuation(z, base).expect("nonvanishing");
    let vb = pochhammer_valuation(&w, base).expect("nonvanishing");
    let a = pochhammer_inf(z, base, prec - vb);
    let b = pochhammer_inf(&w, base, prec - va);
    let c = J(base, prec - va - vb);
    let out = &(&a * &b) * &c;
    debug_assert!(out.prec() >= prec);
    out.truncate(prec)
}

/// `j(z; q^base)` from the bilateral sum
/// `sum_n (-1)^n q^{base n(n-1)/2} z^n`.
pub fn theta_j_sum(z: &Monomial, base: i64, prec: i64) -> QSeries {
    assert!(base >= 1, "theta base must be positive");
    let f = |n: i64| base * n * (n - 1) / 2 + n * z.exp;
    // f is a convex quadratic with vertex near 1/2 - e/base
    let vertex = (base - 2 * z.exp).div_euclid(2 * base);
    let mut lo_n = vertex;
    while f(lo_n - 1) < prec || f(lo_n - 1) < f(lo_n) {
        lo_n -= 1;
    }
    let mut hi_n = vertex;
    while f(hi_n + 1) < prec || f(hi_n + 1) < f(hi_n) {
        hi_n += 1;
    }
    let lo = (lo_n..=hi_n).map(f).min().unwrap_or(prec).min(prec);
    let level = lcm_u64(z.unity.order(), 2);
    let mut acc = UnityArray::new(level, lo, prec);
    for n in lo_n..=hi_n {
        let unity = (RootOfUnity::MINUS_ONE * z.unity).pow(n);
        acc.add(f(n), unity, 1);
    }
    acc.into_series()
}

/// A factor of a theta quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    /// `j(z; q^base)`
    Theta { z: Monomial, base: i64 },
    /// `J_m`
    J(i64),
    /// `(x; q^base)_inf`
    Pochhammer { x: Monomial, base: i64 },
}

impl Factor {
    pub fn theta(z: Monomial, base: i64) -> Self {
        Factor::Theta { z, base }
    }

    /// Valuation, or `None` if the factor vanishes identically.
    pub fn valuation(&self) -> Option<i64> {
        match self {
            Factor::Theta { z, base } => theta_valuation(z, *base),
            Factor::J(_) => Some(0),
            Factor::Pochhammer { x, base } => pochhammer_valuation(x, *base),
        }
    }

    pub fn eval(&self, prec: i64) -> QSeries {
        match self {
            Factor::Theta { z, base } => theta_j(z, *base, prec),
            Factor::J(m) => J(*m, prec),
            Factor::Pochhammer { x, base } => pochhammer_inf(x, *base, prec),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = |f: &mut fmt::Formatter<'_>, b: i64| {
            if b == 1 {
                write!(f, "q")
            } else {
                write!(f, "q^{b}")
            }
        };
        match self {
            Factor::Theta { z, base: b } => {
                write!(f, "j({z}; ")?;
                base(f, *b)?;
                write!(f, ")")
            }
            Factor::J(m) => write!(f, "J({m})"),
            Factor::Pochhammer { x, base: b } => {
                write!(f, "({x}; ")?;
                base(f, *b)?;
                write!(f, ")_inf")
            }
        }
    }
}

/// `coeff * q^shift * prod factor^power`, evaluated with exact precision
/// bookkeeping: each factor is expanded just far enough for the product to
/// be exact below the requested order.
#[derive(Clone, Debug)]
pub struct ThetaQuotient {
    coeff: CycloNum,
    shift: i64,
    factors: Vec<(Factor, i64)>,
}

impl ThetaQuotient {
    pub fn new(coeff: CycloNum) -> Self {
        ThetaQuotient {
            coeff,
            shift: 0,
            factors: Vec::new(),
        }
    }

    pub fn rational(r: Rational) -> Self {
        Self::new(CycloNum::from_rational(&r))
    }

    /// `coeff * q^shift * prod J_k^e`.
    pub fn eta_like(coeff: Rational, shift: i64, js: &[(i64, i64)]) -> Self {
        let mut q = Self::rational(coeff).shifted(shift);
        for &(k, e) in js {
            q = q.pow(Factor::J(k), e);
        }
        q
    }

    pub fn shifted(mut self, e: i64) -> Self {
        self.shift += e;
        self
    }

    pub fn times_monomial(mut self, m: &Monomial) -> Self {
        self.coeff = &self.coeff * &m.coefficient();
        self.shift += m.exp;
        self
    }

    pub fn scaled(mut self, c: &CycloNum) -> Self {
        self.coeff = &self.coeff * c;
        self
    }

    pub fn num(self, f: Factor) -> Self {
        self.pow(f, 1)
    }

    pub fn den(self, f: Factor) -> Self {
        self.pow(f, -1)
    }

    pub fn pow(mut self, f: Factor, p: i64) -> Self {
        if p != 0 {
            self.factors.push((f, p));
        }
        self
    }

    pub fn factors(&self) -> &[(Factor, i64)] {
        &self.factors
    }

    /// Error naming the first denominator factor that vanishes.
    pub fn check_poles(&self) -> Result<()> {
        for (f, p) in &self.factors {
            if *p < 0 && f.valuation().is_none() {
                return Err(Error::Pole(format!("{f} vanishes in a denominator")));
            }
        }
        Ok(())
    }

    /// True if a numerator factor or the coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
            || self
                .factors
                .iter()
                .any(|(f, p)| *p > 0 && f.valuation().is_none())
    }

    /// Valuation of the quotient (for a nonzero, pole-free quotient).
    pub fn valuation(&self) -> Option<i64> {
        let mut v = self.shift;
        for (f, p) in &self.factors {
            v += p * f.valuation()?;
        }
        Some(v)
    }

    pub fn eval(&self, prec: i64) -> Result<QSeries> {
        self.check_poles()?;
        if self.is_zero() {
            return Ok(QSeries::zero(prec));
        }
        let v = self.valuation().expect("pole-free, nonzero");
        if prec <= v {
            return Ok(QSeries::zero(prec));
        }
        let mut acc: Option<QSeries> = None;
        for (f, p) in &self.factors {
            let vf = f.valuation().expect("checked");
            let s = f.eval(prec - v + vf).try_pow(*p)?;
            acc = Some(match acc {
                None => s,
                Some(a) => a.try_mul(&s)?,
            });
        }
        let body = acc.unwrap_or_else(|| QSeries::one(prec - self.shift));
        let out = body.try_scale(&self.coeff)?.try_shift(self.shift)?;
        debug_assert!(out.prec() >= prec, "{} < {prec}", out.prec());
        Ok(out.truncate(prec))
    }
}

/// `coeff * prod eta(q^k)^{e_k}` with `eta(q) = q^{1/24} J_1`.
#[derive(Clone, Debug)]
pub struct EtaQuotient {
    pub coeff: Rational,
    pub etas: Vec<(i64, i64)>,
}

impl EtaQuotient {
    pub fn new(coeff: Rational, etas: &[(i64, i64)]) -> Self {
        EtaQuotient {
            coeff,
            etas: etas.to_vec(),
        }
    }

    /// `sum k e_k`, i.e. 24 times the order at `q = 0`.
    pub fn order_times_24(&self) -> i64 {
        self.etas.iter().map(|(k, e)| k * e).sum()
    }

    pub fn to_quotient(&self) -> Result<ThetaQuotient> {
        let o = self.order_times_24();
        if o % 24 != 0 {
            return Err(Error::FractionalOrder(o));
        }
        Ok(ThetaQuotient::eta_like(self.coeff.clone(), o / 24, &self.etas))
    }

    pub fn eval(&self, prec: i64) -> Result<QSeries> {
        self.to_quotient()?.eval(prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Euler's pentagonal number theorem, used as an independent oracle.
    fn pentagonal(prec: i64) -> Vec<i64> {
        let mut c = vec![0i64; prec as usize];
        for k in -20i64..=20 {
            let e = k * (3 * k - 1) / 2;
            if (0..prec).contains(&e) {
                c[e as usize] += if k % 2 == 0 { 1 } else { -1 };
            }
        }
        c
    }

    #[test]
    fn euler_product() {
        let j1 = J(1, 6);
        assert_eq!(j1.to_string(), "1 - q - q^2 + q^5 + O(q^6)");
        let j1 = J(1, 120);
        assert_eq!(j1, QSeries::from_ints(0, &pentagonal(120), 120));
    }

    #[test]
    fn j2_even_and_substitution() {
        let j2 = J(2, 40);
        assert!(j2.terms().all(|(e, _)| e % 2 == 0));
        assert_eq!(j2, J(1, 20).subst_q_power(2).unwrap());
    }

    #[test]
    fn pochhammer_vanishing_and_integral() {
        assert!(pochhammer_inf(&Monomial::ONE, 1, 10).is_zero());
        assert!(pochhammer_inf(&Monomial::ONE, 3, 10).is_zero());
        let p = pochhammer_inf(&Monomial::neg_q(1), 1, 30);
        assert!(p.terms().all(|(_, c)| c.as_integer().is_some()));
        // (-q;q)_inf counts partitions into distinct parts
        let distinct = [1, 1, 1, 2, 2, 3, 4, 5, 6, 8, 10];
        assert_eq!(p.truncate(11), QSeries::from_ints(0, &distinct, 11));
    }

    #[test]
    fn pochhammer_negative_start() {
        // (q^-2; q)_inf contains the factor (1 - q^0)
        assert!(pochhammer_inf(&Monomial::q(-2), 1, 10).is_zero());
        // (-q^-3; q^2)_inf = (1 + q^-3)(1 + q^-1)(1 + q)(1 + q^3)...
        let p = pochhammer_inf(&Monomial::neg_q(-3), 2, 8);
        let tail = pochhammer_inf(&Monomial::neg_q(1), 2, 12);
        let head = QSeries::from_ints(-4, &[1, 1, 0, 1, 1], 100);
        assert_eq!(p, &head * &tail);
        assert_eq!(p.prec(), 8);
        assert_eq!(p.min_exp(), -4);
    }

    #[test]
    fn theta_vanishes_on_q_powers() {
        assert!(j_is_zero(&Monomial::q(2), 2));
        assert!(!j_is_zero(&Monomial::neg_q(2), 2));
        assert!(!j_is_zero(&Monomial::zeta_q(3, 1, 3), 3));
        assert!(theta_j(&Monomial::q(1), 1, 20).is_zero());
        assert!(theta_j_sum(&Monomial::q(1), 1, 20).is_zero());
    }

    #[test]
    fn theta_product_matches_sum() {
        for z in [Monomial::neg_q(1), Monomial::MINUS_ONE, Monomial::zeta_q(3, 1, -2), Monomial::q(5)] {
            for base in 1..=3 {
                let p = theta_j(&z, base, 60);
                let s = theta_j_sum(&z, base, 60);
                assert_eq!(p, s, "z={z} base={base}");
                assert_eq!(p.prec(), 60);
            }
        }
        let c = theta_j_sum(&Monomial::MINUS_ONE, 1, 5);
        assert_eq!(c.coeff(0), Some(CycloNum::from_int(2)));
    }

    #[test]
    fn dictionary_entries() {
        let prec = 80;
        let jq = |c: i64, js: &[(i64, i64)]| ThetaQuotient::eta_like(Rational::from(c), 0, js).eval(prec).unwrap();
        assert_eq!(theta_j(&Monomial::MINUS_ONE, 1, prec), jq(2, &[(2, 2), (1, -1)]));
        assert_eq!(theta_j(&Monomial::q(1), 2, prec), jq(1, &[(1, 2), (2, -1)]));
        assert_eq!(theta_j(&Monomial::q(1), 3, prec), jq(1, &[(1, 1)]));
    }

    #[test]
    fn quotient_precision_is_exact() {
        // j(q^-4; q^3) has negative valuation; dividing by it must still
        // deliver exactly the requested order.
        let z = Monomial::q(-4);
        let q = ThetaQuotient::new(CycloNum::one()).den(Factor::theta(z, 3)).num(Factor::J(1));
        let a = q.eval(30).unwrap();
        assert_eq!(a.prec(), 30);
        let b = q.eval(60).unwrap();
        assert_eq!(a, b.truncate(30));
        let direct = &J(1, 200) * &theta_j(&z, 3, 200).invert().unwrap();
        assert_eq!(a, direct);
    }

    #[test]
    fn quotient_poles() {
        let q = ThetaQuotient::new(CycloNum::one()).den(Factor::theta(Monomial::q(4), 2));
        assert!(matches!(q.eval(10), Err(Error::Pole(_))));
        let z = ThetaQuotient::new(CycloNum::one()).num(Factor::theta(Monomial::ONE, 2));
        assert!(z.eval(10).unwrap().is_zero());
    }

    #[test]
    fn eta_order() {
        let e = EtaQuotient::new(Rational::ONE, &[(1, 6), (3, 6), (6, 4)]);
        assert_eq!(e.order_times_24(), 48);
        let s = e.eval(10).unwrap();
        assert_eq!(s.min_exp(), 2);
        assert!(EtaQuotient::new(Rational::ONE, &[(1, 1)]).eval(5).is_err());
    }
}
