//! Truncated Laurent series in `q` with cyclotomic coefficients.
//!
//! A [`QSeries`] stores the dense coefficient window `[min_exp, prec)`;
//! everything below `min_exp` is exactly zero and nothing is claimed at or
//! above `prec`. Binary operations compute the worst-case precision of the
//! result from the operands' windows.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::cyclo::{CycloNum, Rational, RootOfUnity};
use crate::error::{Error, Result};

pub(crate) fn add_exp(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::ExponentOverflow)
}

pub(crate) fn mul_exp(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::ExponentOverflow)
}

/// A symbolic argument `c * q^e` with `c` a root of unity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub unity: RootOfUnity,
    pub exp: i64,
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        unity: RootOfUnity::ONE,
        exp: 0,
    };

    pub const MINUS_ONE: Monomial = Monomial {
        unity: RootOfUnity::MINUS_ONE,
        exp: 0,
    };

    pub fn new(unity: RootOfUnity, exp: i64) -> Self {
        Monomial { unity, exp }
    }

    /// `q^e`
    pub fn q(exp: i64) -> Self {
        Monomial {
            unity: RootOfUnity::ONE,
            exp,
        }
    }

    /// `-q^e`
    pub fn neg_q(exp: i64) -> Self {
        Monomial {
            unity: RootOfUnity::MINUS_ONE,
            exp,
        }
    }

    /// `zeta_order^k * q^e`
    pub fn zeta_q(order: u64, k: i64, exp: i64) -> Self {
        Monomial {
            unity: RootOfUnity::new(order, k),
            exp,
        }
    }

    /// Build from a cyclotomic coefficient, which must be a root of unity.
    pub fn from_cyclo(c: &CycloNum, exp: i64) -> Result<Self> {
        RootOfUnity::from_cyclo(c)
            .map(|unity| Monomial { unity, exp })
            .ok_or_else(|| Error::InvalidMonomial(format!("{c} is not a root of unity")))
    }

    pub fn coefficient(&self) -> CycloNum {
        self.unity.to_cyclo().expect("monomial unit exceeds level cap")
    }

    pub fn try_mul(&self, other: &Monomial) -> Result<Monomial> {
        Ok(Monomial {
            unity: self.unity * other.unity,
            exp: add_exp(self.exp, other.exp)?,
        })
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            unity: self.unity.inv(),
            exp: -self.exp,
        }
    }

    pub fn try_pow(&self, n: i64) -> Result<Monomial> {
        Ok(Monomial {
            unity: self.unity.pow(n),
            exp: mul_exp(self.exp, n)?,
        })
    }

    pub fn pow(&self, n: i64) -> Monomial {
        self.try_pow(n).expect("monomial exponent overflow")
    }

    /// `self * q^e`
    pub fn times_q(&self, e: i64) -> Monomial {
        Monomial {
            unity: self.unity,
            exp: self.exp + e,
        }
    }

    /// The exact series `c q^e` known to precision `prec`.
    pub fn to_series(&self, prec: i64) -> QSeries {
        QSeries::monomial(self.coefficient(), self.exp, prec)
    }
}

impl Mul for Monomial {
    type Output = Monomial;
    fn mul(self, rhs: Monomial) -> Monomial {
        self.try_mul(&rhs).expect("monomial exponent overflow")
    }
}

impl Neg for Monomial {
    type Output = Monomial;
    fn neg(self) -> Monomial {
        Monomial {
            unity: -self.unity,
            exp: self.exp,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (sign, unity) = if self.unity.order().is_multiple_of(2) {
            ("-", -self.unity)
        } else {
            ("", self.unity)
        };
        write!(f, "{sign}")?;
        match (unity.is_one(), self.exp) {
            (true, 0) => write!(f, "1"),
            (true, 1) => write!(f, "q"),
            (true, e) => write!(f, "q^{e}"),
            (false, 0) => write!(f, "{unity}"),
            (false, 1) => write!(f, "{unity}*q"),
            (false, e) => write!(f, "{unity}*q^{e}"),
        }
    }
}

/// Truncated Laurent series `sum_{min_exp <= e < prec} c_e q^e + O(q^prec)`.
#[derive(Clone, Debug)]
pub struct QSeries {
    min_exp: i64,
    prec: i64,
    coeffs: Vec<CycloNum>,
}

impl QSeries {
    /// `0 + O(q^prec)`
    pub fn zero(prec: i64) -> Self {
        QSeries {
            min_exp: prec,
            prec,
            coeffs: Vec::new(),
        }
    }

    pub fn one(prec: i64) -> Self {
        Self::monomial(CycloNum::one(), 0, prec)
    }

    pub fn constant(c: CycloNum, prec: i64) -> Self {
        Self::monomial(c, 0, prec)
    }

    pub fn monomial(c: CycloNum, exp: i64, prec: i64) -> Self {
        if exp >= prec || c.is_zero() {
            return Self::zero(prec);
        }
        let mut coeffs = vec![CycloNum::zero(); (prec - exp) as usize];
        coeffs[0] = c;
        QSeries {
            min_exp: exp,
            prec,
            coeffs,
        }
    }

    /// Series whose coefficient of `q^(min_exp + i)` is `coeffs[i]`, known to
    /// precision `prec`. Entries at or beyond `prec` are dropped; missing
    /// entries below `prec` are zero.
    pub fn from_coeffs(min_exp: i64, mut coeffs: Vec<CycloNum>, prec: i64) -> Self {
        if min_exp >= prec {
            return Self::zero(prec);
        }
        let len = (prec - min_exp) as usize;
        coeffs.resize(len, CycloNum::zero());
        let mut s = QSeries {
            min_exp,
            prec,
            coeffs,
        };
        s.normalize();
        s
    }

    pub fn from_rationals(min_exp: i64, coeffs: &[Rational], prec: i64) -> Self {
        Self::from_coeffs(
            min_exp,
            coeffs.iter().map(CycloNum::from_rational).collect(),
            prec,
        )
    }

    pub fn from_ints(min_exp: i64, coeffs: &[i64], prec: i64) -> Self {
        Self::from_coeffs(
            min_exp,
            coeffs.iter().map(|&c| CycloNum::from_int(c)).collect(),
            prec,
        )
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => *self = Self::zero(self.prec),
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(..k);
                self.min_exp += k as i64;
            }
        }
    }

    /// Lowest exponent with a nonzero coefficient, or `prec` for the zero
    /// series.
    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `q^e`, or `None` when `e >= prec`.
    pub fn coeff(&self, e: i64) -> Option<CycloNum> {
        if e >= self.prec {
            None
        } else if e < self.min_exp {
            Some(CycloNum::zero())
        } else {
            Some(self.coeffs[(e - self.min_exp) as usize].clone())
        }
    }

    pub fn coeff_ref(&self, e: i64) -> Option<&CycloNum> {
        if e < self.min_exp || e >= self.prec {
            None
        } else {
            Some(&self.coeffs[(e - self.min_exp) as usize])
        }
    }

    /// `(exponent, coefficient)` pairs of the nonzero tracked terms.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &CycloNum)> {
        let m = self.min_exp;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (m + i as i64, c))
    }

    /// Lower the precision to `prec` (no-op if already lower).
    pub fn truncate(&self, prec: i64) -> QSeries {
        if prec >= self.prec {
            return self.clone();
        }
        if prec <= self.min_exp {
            return Self::zero(prec);
        }
        let mut s = QSeries {
            min_exp: self.min_exp,
            prec,
            coeffs: self.coeffs[..(prec - self.min_exp) as usize].to_vec(),
        };
        s.normalize();
        s
    }

    /// Every coefficient as a rational, if all of them are.
    pub fn rational_coeffs(&self) -> Option<Vec<Rational>> {
        self.coeffs.iter().map(CycloNum::is_rational).collect()
    }

    /// First exponent whose coefficient is not rational.
    pub fn first_irrational(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| c.is_rational().is_none())
            .map(|i| self.min_exp + i as i64)
    }

    /// First exponent below `min(prec_a, prec_b)` where the two series
    /// differ, with both coefficients.
    pub fn first_difference(&self, other: &QSeries) -> Option<(i64, CycloNum, CycloNum)> {
        let hi = self.prec.min(other.prec);
        let lo = self.min_exp.min(other.min_exp);
        (lo..hi).find_map(|e| {
            let a = self.coeff(e).expect("below prec");
            let b = other.coeff(e).expect("below prec");
            (a != b).then_some((e, a, b))
        })
    }

    pub fn try_add(&self, other: &QSeries) -> Result<QSeries> {
        let prec = self.prec.min(other.prec);
        let lo = self.min_exp.min(other.min_exp);
        if lo >= prec {
            return Ok(Self::zero(prec));
        }
        let mut coeffs = vec![CycloNum::zero(); (prec - lo) as usize];
        for s in [self, other] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let e = s.min_exp + i as i64;
                if e >= prec {
                    break;
                }
                let slot = &mut coeffs[(e - lo) as usize];
                if slot.is_zero() {
                    *slot = c.clone();
                } else {
                    slot.add_assign_checked(c)?;
                }
            }
        }
        Ok(Self::from_coeffs(lo, coeffs, prec))
    }

    pub fn try_sub(&self, other: &QSeries) -> Result<QSeries> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &QSeries) -> Result<QSeries> {
        let prec = add_exp(self.prec, other.min_exp)?.min(add_exp(other.prec, self.min_exp)?);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(prec));
        }
        let min_exp = add_exp(self.min_exp, other.min_exp)?;
        if min_exp >= prec {
            return Ok(Self::zero(prec));
        }
        let len = (prec - min_exp) as usize;
        let (a, b) = (&self.coeffs, &other.coeffs);
        let ints = a.iter().chain(b).all(|c| c.as_integer().is_some());
        let coeffs = if ints {
            let ai: Vec<_> = a.iter().map(|c| c.as_integer().unwrap()).collect();
            let bi: Vec<_> = b.iter().map(|c| c.as_integer().unwrap()).collect();
            let mut out = vec![dashu_int::IBig::ZERO; len];
            for (i, x) in ai.iter().enumerate().take(len) {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in bi.iter().enumerate().take(len - i) {
                    if !y.is_zero() {
                        out[i + j] += *x * *y;
                    }
                }
            }
            out.into_iter().map(CycloNum::from_ibig).collect()
        } else {
            let mut out = vec![CycloNum::zero(); len];
            for (i, x) in a.iter().enumerate().take(len) {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b.iter().enumerate().take(len - i) {
                    if !y.is_zero() {
                        out[i + j].add_assign_checked(&x.try_mul(y)?)?;
                    }
                }
            }
            out
        };
        Ok(Self::from_coeffs(min_exp, coeffs, prec))
    }

    /// Multiply every coefficient by `c`.
    pub fn try_scale(&self, c: &CycloNum) -> Result<QSeries> {
        if c.is_zero() {
            return Ok(Self::zero(self.prec));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|x| x.try_mul(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(QSeries {
            min_exp: self.min_exp,
            prec: self.prec,
            coeffs,
        })
    }

    pub fn scale(&self, c: &CycloNum) -> QSeries {
        self.try_scale(c).expect("series scaling")
    }

    pub fn scale_rational(&self, r: &Rational) -> QSeries {
        self.scale(&CycloNum::from_rational(r))
    }

    pub fn scale_int(&self, n: i64) -> QSeries {
        self.scale(&CycloNum::from_int(n))
    }

    /// Multiply by `q^e`.
    pub fn try_shift(&self, e: i64) -> Result<QSeries> {
        Ok(QSeries {
            min_exp: add_exp(self.min_exp, e)?,
            prec: add_exp(self.prec, e)?,
            coeffs: self.coeffs.clone(),
        })
    }

    pub fn shift(&self, e: i64) -> QSeries {
        self.try_shift(e).expect("q-exponent overflow")
    }

    /// Multiply by the monomial `c q^e`.
    pub fn try_mul_monomial(&self, m: &Monomial) -> Result<QSeries> {
        self.try_scale(&m.unity.to_cyclo()?)?.try_shift(m.exp)
    }

    pub fn mul_monomial(&self, m: &Monomial) -> QSeries {
        self.try_mul_monomial(m).expect("monomial product")
    }

    /// Multiplicative inverse. The result has valuation `-min_exp` and
    /// precision `prec - 2 min_exp`.
    pub fn invert(&self) -> Result<QSeries> {
        if self.is_zero() {
            return Err(Error::NotInvertible(format!(
                "zero series O(q^{})",
                self.prec
            )));
        }
        let v = self.min_exp;
        let prec = add_exp(self.prec, mul_exp(-2, v)?)?;
        let len = (self.prec - v) as usize;
        let a = &self.coeffs;
        let b0 = a[0].try_inv()?;
        let ints = b0.as_integer().is_some() && a.iter().all(|c| c.as_integer().is_some());
        let coeffs = if ints {
            // unit leading coefficient: stay in the integers
            let ai: Vec<_> = a.iter().map(|c| c.as_integer().unwrap().clone()).collect();
            let b0i = b0.as_integer().unwrap().clone();
            let mut b: Vec<dashu_int::IBig> = Vec::with_capacity(len);
            b.push(b0i.clone());
            for n in 1..len {
                let mut acc = dashu_int::IBig::ZERO;
                for k in 1..=n {
                    if !ai[k].is_zero() && !b[n - k].is_zero() {
                        acc += &ai[k] * &b[n - k];
                    }
                }
                b.push(-(acc * &b0i));
            }
            b.into_iter().map(CycloNum::from_ibig).collect()
        } else {
            let mut b: Vec<CycloNum> = Vec::with_capacity(len);
            b.push(b0.clone());
            let neg_b0 = -&b0;
            for n in 1..len {
                let mut acc = CycloNum::zero();
                for k in 1..=n {
                    if !a[k].is_zero() && !b[n - k].is_zero() {
                        acc.add_assign_checked(&a[k].try_mul(&b[n - k])?)?;
                    }
                }
                b.push(acc.try_mul(&neg_b0)?);
            }
            b
        };
        Ok(Self::from_coeffs(-v, coeffs, prec))
    }

    pub fn try_div(&self, other: &QSeries) -> Result<QSeries> {
        self.try_mul(&other.invert()?)
    }

    /// Integer power; negative exponents go through [`QSeries::invert`].
    pub fn try_pow(&self, n: i64) -> Result<QSeries> {
        let mut base = if n < 0 { self.invert()? } else { self.clone() };
        let mut n = n.unsigned_abs();
        let mut acc: Option<QSeries> = None;
        while n > 0 {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.try_mul(&base)?,
                });
            }
            n >>= 1;
            if n > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc.unwrap_or_else(|| {
            // q^0 = 1 known as far as the base is
            QSeries::one(add_exp(self.prec, -self.min_exp).unwrap_or(self.prec))
        }))
    }

    /// Substitute `q -> q^t`.
    pub fn subst_q_power(&self, t: i64) -> Result<QSeries> {
        assert!(t >= 1, "substitution power must be positive");
        if t == 1 {
            return Ok(self.clone());
        }
        let min_exp = mul_exp(self.min_exp, t)?;
        let prec = mul_exp(self.prec, t)?;
        if self.is_zero() {
            return Ok(Self::zero(prec));
        }
        let mut coeffs = vec![CycloNum::zero(); (prec - min_exp) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * t as usize] = c.clone();
        }
        Ok(QSeries {
            min_exp,
            prec,
            coeffs,
        })
    }

    /// `sum_n c_{m n + r} q^n` over the tracked window. The result is
    /// exact below `ceil((prec - r) / m)`.
    pub fn extract_progression(&self, r: i64, m: i64) -> QSeries {
        assert!(m >= 1, "progression modulus must be positive");
        let prec = (self.prec - r).div_euclid(m) + i64::from((self.prec - r).rem_euclid(m) != 0);
        if self.is_zero() {
            return Self::zero(prec);
        }
        let lo = (self.min_exp - r).div_euclid(m) + i64::from((self.min_exp - r).rem_euclid(m) != 0);
        if lo >= prec {
            return Self::zero(prec);
        }
        let coeffs = (lo..prec)
            .map(|n| self.coeff(m * n + r).expect("inside window"))
            .collect();
        Self::from_coeffs(lo, coeffs, prec)
    }
}

impl CycloNum {
    pub(crate) fn add_assign_checked(&mut self, rhs: &CycloNum) -> Result<()> {
        if self.level() == rhs.level() {
            *self += rhs;
        } else {
            *self = self.try_add(rhs)?;
        }
        Ok(())
    }
}

/// Equality on the overlap window `[.., min(prec_a, prec_b))`.
impl PartialEq for QSeries {
    fn eq(&self, other: &QSeries) -> bool {
        self.first_difference(other).is_none()
    }
}

macro_rules! series_binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr for &QSeries {
            type Output = QSeries;
            fn $method(self, rhs: &QSeries) -> QSeries {
                self.$try(rhs).expect(concat!("series ", stringify!($method)))
            }
        }
        impl $tr for QSeries {
            type Output = QSeries;
            fn $method(self, rhs: QSeries) -> QSeries {
                (&self).$method(&rhs)
            }
        }
    };
}

series_binop!(Add, add, try_add);
series_binop!(Sub, sub, try_sub);
series_binop!(Mul, mul, try_mul);

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries {
            min_exp: self.min_exp,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        -&self
    }
}

fn write_q(f: &mut fmt::Formatter<'_>, e: i64) -> fmt::Result {
    match e {
        1 => write!(f, "q"),
        _ => write!(f, "q^{e}"),
    }
}

impl fmt::Display for QSeries {
    /// Terms in increasing exponent: rational coefficients fold their sign
    /// into the separator and drop a unit magnitude (`1 - q - 2*q^2`);
    /// cyclotomic coefficients print in parentheses. Ends with `O(q^prec)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            let (negative, mag) = match c.is_rational() {
                Some(r) if r < Rational::ZERO => (true, CycloNum::from_rational(&-r)),
                _ => (false, c.clone()),
            };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            if e == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write_q(f, e)?;
            } else {
                write!(f, "{mag}*")?;
                write_q(f, e)?;
            }
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O(")?;
        write_q(f, self.prec)?;
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(min: i64, c: &[i64], prec: i64) -> QSeries {
        QSeries::from_ints(min, c, prec)
    }

    #[test]
    fn mul_precision_examples() {
        let a = ints(0, &[1, 1], 2);
        let b = ints(0, &[1, -1], 2);
        let p = &a * &b;
        assert_eq!(p.prec(), 2);
        assert_eq!(p.to_string(), "1 + O(q^2)");
    }

    #[test]
    fn shift_example() {
        let s = QSeries::one(3).shift(-4);
        assert_eq!(s.to_string(), "q^-4 + O(q^-1)");
    }

    #[test]
    fn scale_by_zero() {
        let s = ints(0, &[1, -1, -1], 3);
        assert!(s.scale_int(0).is_zero());
        assert_eq!(s.scale_int(0).prec(), 3);
    }

    #[test]
    fn invert_geometric() {
        let s = ints(0, &[1, -1], 10);
        let inv = s.invert().unwrap();
        assert_eq!(inv, ints(0, &[1; 10], 10));
        assert_eq!(inv.prec(), 10);
        let t = ints(1, &[1], 11);
        let ti = t.invert().unwrap();
        assert_eq!(ti.min_exp(), -1);
        assert_eq!(ti.prec(), 9);
        assert!(QSeries::zero(5).invert().is_err());
    }

    #[test]
    fn subst_examples() {
        let s = ints(0, &[1, 1], 2);
        let t = s.subst_q_power(3).unwrap();
        assert_eq!(t.to_string(), "1 + q^3 + O(q^6)");
        assert_eq!(s.subst_q_power(1).unwrap().to_string(), s.to_string());
        let u = ints(-1, &[1, 0], 1).subst_q_power(2).unwrap();
        assert_eq!(u.to_string(), "q^-2 + O(q^2)");
    }

    #[test]
    fn extract_examples() {
        let s = ints(0, &[1, 2, 3, 4], 4);
        assert_eq!(s.extract_progression(1, 3).to_string(), "2 + O(q)");
        assert_eq!(s.extract_progression(0, 1), s);
        let even = ints(0, &[1, 0, 3, 0, 5, 0], 6);
        assert!(even.extract_progression(1, 2).is_zero());
        // a negative valuation keeps its residue class
        let neg = ints(-4, &[7, 0, 0, 1, 0, 0, 2], 3);
        let e = neg.extract_progression(2, 3);
        assert_eq!(e.min_exp(), -2);
        assert_eq!(e.coeff(-2), Some(CycloNum::from_int(7)));
        assert_eq!(e.coeff(0), Some(CycloNum::from_int(2)));
    }

    #[test]
    fn zero_compares_on_overlap() {
        let a = QSeries::zero(5);
        let b = ints(0, &[0, 0, 0, 0, 0, 0, 1], 7);
        assert_eq!(a, b);
        assert_ne!(QSeries::zero(8), b);
    }

    #[test]
    fn display_cyclotomic() {
        let c = CycloNum::zeta(3, 1);
        let s = QSeries::monomial(c, 2, 4);
        assert_eq!(s.to_string(), "(zeta(3))*q^2 + O(q^4)");
        let h = ints(0, &[0, 0], 2).scale_int(1);
        assert_eq!(h.to_string(), "O(q^2)");
        let r = QSeries::constant(CycloNum::from_rational(&Rational::from_parts((-1).into(), 3u8.into())), 1);
        assert_eq!(r.to_string(), "-1/3 + O(q)");
    }

    #[test]
    fn monomial_display() {
        assert_eq!(Monomial::neg_q(3).to_string(), "-q^3");
        assert_eq!(Monomial::MINUS_ONE.to_string(), "-1");
        assert_eq!(Monomial::zeta_q(3, 2, 1).to_string(), "zeta(3)^2*q");
        assert_eq!(Monomial::zeta_q(6, 1, 0).to_string(), "-zeta(3)^2");
    }
}
