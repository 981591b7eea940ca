//! Exact arithmetic in cyclotomic fields `Q(zeta_L)`.
//!
//! Elements are stored in the power basis `1, z, ..., z^(phi(L)-1)` modulo the
//! `L`-th cyclotomic polynomial with a single positive common denominator.
//! Every value is kept normalized: the denominator is coprime to the
//! numerators, and an element whose non-constant coordinates vanish is
//! demoted to level 1. Levels `L = 2 (mod 4)` are never created because
//! `Q(zeta_2m) = Q(zeta_m)` for odd `m`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use dashu_base::{Gcd, UnsignedAbs};
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rational = RBig;

/// Default upper bound on the cyclotomic level an operation may produce.
pub const DEFAULT_LEVEL_CAP: u32 = 240;

static LEVEL_CAP: AtomicU32 = AtomicU32::new(DEFAULT_LEVEL_CAP);

/// Current level cap.
pub fn level_cap() -> u32 {
    LEVEL_CAP.load(Ordering::Relaxed)
}

/// Change the level cap. Operations whose result would need a larger level
/// fail with [`Error::LevelOverflow`].
pub fn set_level_cap(cap: u32) {
    LEVEL_CAP.store(cap.max(1), Ordering::Relaxed);
}

pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm_u64(a: u64, b: u64) -> u64 {
    a / gcd_u64(a, b) * b
}

fn checked_level(level: u64) -> Result<u32> {
    let cap = level_cap();
    if level > cap as u64 {
        return Err(Error::LevelOverflow { level, cap });
    }
    Ok(level as u32)
}

/// `L` itself, or `L/2` when `L = 2 (mod 4)`.
fn canonical_level(level: u32) -> u32 {
    if level % 4 == 2 {
        level / 2
    } else {
        level
    }
}

struct LevelData {
    phi: usize,
    cyclotomic: Vec<IBig>,
    /// `powers[k]` holds the coordinates of `zeta_L^k`, `0 <= k < L`.
    powers: Vec<Vec<IBig>>,
}

fn cache() -> &'static RwLock<HashMap<u32, Arc<LevelData>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<LevelData>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn level_data(level: u32) -> Arc<LevelData> {
    if let Some(d) = cache().read().expect("cyclotomic cache poisoned").get(&level) {
        return d.clone();
    }
    // Built without holding the lock: the construction recurses into
    // the divisors' data.
    let data = Arc::new(build_level(level));
    cache()
        .write()
        .expect("cyclotomic cache poisoned")
        .entry(level)
        .or_insert(data)
        .clone()
}

fn build_level(level: u32) -> LevelData {
    let cyclotomic = cyclotomic_polynomial(level);
    let phi = cyclotomic.len() - 1;
    let mut powers = Vec::with_capacity(level as usize);
    let mut row = vec![IBig::ZERO; phi];
    row[0] = IBig::ONE;
    for _ in 0..level {
        powers.push(row.clone());
        // multiply by x and reduce with the monic cyclotomic polynomial
        let top = row[phi - 1].clone();
        for i in (1..phi).rev() {
            row[i] = row[i - 1].clone();
        }
        row[0] = IBig::ZERO;
        if !top.is_zero() {
            for i in 0..phi {
                row[i] -= &top * &cyclotomic[i];
            }
        }
    }
    LevelData {
        phi,
        cyclotomic,
        powers,
    }
}

/// Coefficients (constant term first) of the `n`-th cyclotomic polynomial,
/// computed by dividing `x^n - 1` by `Phi_d` for every proper divisor `d`.
pub fn cyclotomic_polynomial(n: u32) -> Vec<IBig> {
    assert!(n >= 1, "cyclotomic polynomial of level 0");
    let mut poly = vec![IBig::ZERO; n as usize + 1];
    poly[0] = IBig::NEG_ONE;
    poly[n as usize] = IBig::ONE;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let divisor = level_data(d).cyclotomic.clone();
            poly = div_exact_monic(&poly, &divisor);
        }
    }
    poly
}

fn div_exact_monic(num: &[IBig], den: &[IBig]) -> Vec<IBig> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut quot = vec![IBig::ZERO; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn].clone();
        if c.is_zero() {
            continue;
        }
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= &c * d;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(IBig::is_zero), "inexact cyclotomic division");
    quot
}

/// Euler's totient.
pub fn totient(n: u32) -> u32 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Coordinates of `zeta_level^k` at the canonical level of `level`.
fn unity_row(level: u32, k: i64) -> (u32, Vec<IBig>) {
    let level = level.max(1);
    if level % 4 == 2 {
        // zeta_{2m}^k = (-1)^k zeta_m^{k(m+1)/2} for odd m
        let m = level / 2;
        let e = (k as i128 * ((m as i128 + 1) / 2)).rem_euclid(m as i128) as usize;
        let mut row = level_data(m).powers[e].clone();
        if k.rem_euclid(2) == 1 {
            row.iter_mut().for_each(|c| *c = -c.clone());
        }
        (m, row)
    } else {
        let e = k.rem_euclid(level as i64) as usize;
        (level, level_data(level).powers[e].clone())
    }
}

/// An element of `Q(zeta_L)`.
#[derive(Clone, Debug)]
pub struct CycloNum {
    level: u32,
    num: Vec<IBig>,
    den: UBig,
}

impl CycloNum {
    pub fn zero() -> Self {
        CycloNum {
            level: 1,
            num: vec![IBig::ZERO],
            den: UBig::ONE,
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        CycloNum {
            level: 1,
            num: vec![IBig::from(n)],
            den: UBig::ONE,
        }
    }

    pub fn from_ibig(n: IBig) -> Self {
        CycloNum {
            level: 1,
            num: vec![n],
            den: UBig::ONE,
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        CycloNum {
            level: 1,
            num: vec![r.numerator().clone()],
            den: r.denominator().clone(),
        }
    }

    /// `zeta_L^k`.
    pub fn zeta(level: u32, k: i64) -> Self {
        assert!(level >= 1, "zeta of level 0");
        let g = gcd_u64(level as u64, k.unsigned_abs()) as u32;
        let (lvl, row) = unity_row(level / g, k / g as i64);
        Self::normalized(lvl, row, UBig::ONE)
    }

    /// `sum_k sums[k] * zeta_level^k`.
    pub fn from_unity_sums(level: u32, sums: &[i128]) -> Self {
        let level = level.max(1);
        let target = canonical_level(level);
        let phi = level_data(target).phi;
        let mut acc = vec![IBig::ZERO; phi];
        for (k, &c) in sums.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (_, row) = unity_row(level, k as i64);
            let c = IBig::from(c);
            for (a, r) in acc.iter_mut().zip(&row) {
                if !r.is_zero() {
                    *a += &c * r;
                }
            }
        }
        Self::normalized(target, acc, UBig::ONE)
    }

    fn normalized(level: u32, mut num: Vec<IBig>, mut den: UBig) -> Self {
        if num.iter().all(IBig::is_zero) {
            return Self::zero();
        }
        if !den.is_one() {
            let mut g = den.clone();
            for c in &num {
                if g.is_one() {
                    break;
                }
                if !c.is_zero() {
                    g = g.gcd(c.unsigned_abs());
                }
            }
            if !g.is_one() {
                let gi = IBig::from(g.clone());
                for c in num.iter_mut() {
                    *c = &*c / &gi;
                }
                den /= g;
            }
        }
        if level > 1 && num[1..].iter().all(IBig::is_zero) {
            num.truncate(1);
            return CycloNum { level: 1, num, den };
        }
        CycloNum { level, num, den }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.level == 1 && self.num[0].is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.level == 1 && self.num[0].is_one() && self.den.is_one()
    }

    /// Coordinates in the power basis of the element's level.
    pub fn coords(&self) -> Vec<Rational> {
        let den = self.den.clone();
        self.num
            .iter()
            .map(|c| Rational::from_parts(c.clone(), den.clone()))
            .collect()
    }

    /// The rational value, if the element lies in `Q`.
    pub fn is_rational(&self) -> Option<Rational> {
        (self.level == 1).then(|| Rational::from_parts(self.num[0].clone(), self.den.clone()))
    }

    /// Integer value if the element is a rational integer.
    pub fn as_integer(&self) -> Option<&IBig> {
        (self.level == 1 && self.den.is_one()).then(|| &self.num[0])
    }

    /// Numerator vector of `self` rewritten at level `target` (a multiple of
    /// the element's level), sharing the element's denominator.
    fn lifted_num(&self, target: u32) -> Vec<IBig> {
        if target == self.level {
            return self.num.clone();
        }
        debug_assert_eq!(target % self.level, 0);
        let data = level_data(target);
        let step = (target / self.level) as usize;
        let mut out = vec![IBig::ZERO; data.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &data.powers[(i * step) % target as usize];
            for (o, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o += c * r;
                }
            }
        }
        out
    }

    fn common_level(&self, other: &Self) -> Result<u32> {
        if self.level == other.level {
            return Ok(self.level);
        }
        checked_level(lcm_u64(self.level as u64, other.level as u64))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let level = self.common_level(other)?;
        let a = self.lifted_num(level);
        let b = other.lifted_num(level);
        if self.den == other.den {
            let num = a.into_iter().zip(b).map(|(x, y)| x + y).collect();
            return Ok(Self::normalized(level, num, self.den.clone()));
        }
        let da = IBig::from(self.den.clone());
        let db = IBig::from(other.den.clone());
        let num = a
            .into_iter()
            .zip(b)
            .map(|(x, y)| x * &db + y * &da)
            .collect();
        Ok(Self::normalized(level, num, &self.den * &other.den))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        if other.level == 1 {
            return Ok(self.scale_parts(&other.num[0], &other.den));
        }
        if self.level == 1 {
            return Ok(other.scale_parts(&self.num[0], &self.den));
        }
        let level = self.common_level(other)?;
        let a = self.lifted_num(level);
        let b = other.lifted_num(level);
        let data = level_data(level);
        let phi = data.phi;
        let mut prod = vec![IBig::ZERO; 2 * phi - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        let mut num: Vec<IBig> = prod[..phi].to_vec();
        for (k, c) in prod.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            let row = &data.powers[k % level as usize];
            for (o, r) in num.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o += c * r;
                }
            }
        }
        Ok(Self::normalized(level, num, &self.den * &other.den))
    }

    fn scale_parts(&self, n: &IBig, d: &UBig) -> Self {
        let num = self.num.iter().map(|c| c * n).collect();
        Self::normalized(self.level, num, &self.den * d)
    }

    /// Multiply by an integer.
    pub fn scale_int(&self, n: i64) -> Self {
        self.scale_parts(&IBig::from(n), &UBig::ONE)
    }

    /// Multiply by a rational.
    pub fn scale(&self, r: &Rational) -> Self {
        self.scale_parts(r.numerator(), r.denominator())
    }

    /// Image under the automorphism `zeta_L -> zeta_L^k`, `gcd(k, L) = 1`.
    pub fn galois(&self, k: u32) -> Self {
        if self.level == 1 {
            return self.clone();
        }
        let data = level_data(self.level);
        let mut out = vec![IBig::ZERO; data.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &data.powers[(i * k as usize) % self.level as usize];
            for (o, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o += c * r;
                }
            }
        }
        Self::normalized(self.level, out, self.den.clone())
    }

    /// Multiplicative inverse, via the product of the non-trivial Galois
    /// conjugates divided by the norm.
    pub fn try_inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.level == 1 {
            let (sign, mag) = self.num[0].clone().into_parts();
            let num = IBig::from_parts(sign, self.den.clone());
            return Ok(Self::normalized(1, vec![num], mag));
        }
        let mut cofactor = Self::one();
        for k in 2..self.level {
            if gcd_u64(k as u64, self.level as u64) == 1 {
                cofactor = cofactor.try_mul(&self.galois(k))?;
            }
        }
        let norm = self.try_mul(&cofactor)?;
        let norm = norm
            .is_rational()
            .expect("norm of a cyclotomic element is rational");
        Ok(cofactor.scale(&(Rational::ONE / norm)))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.try_inv()?)
    }

    /// Integer power; negative exponents invert.
    pub fn try_pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.try_inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `self += a * b`, lifting levels as needed.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self = &*self + &(a * b);
    }
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        if self.level == other.level {
            return self.den == other.den && self.num == other.num;
        }
        if self.level == 1 || other.level == 1 {
            // normalized non-rational elements never sit at level 1
            return false;
        }
        if self.den != other.den {
            return false;
        }
        let level = lcm_u64(self.level as u64, other.level as u64) as u32;
        self.lifted_num(level) == other.lifted_num(level)
    }
}

impl Eq for CycloNum {}

impl Default for CycloNum {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for CycloNum {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<&Rational> for CycloNum {
    fn from(r: &Rational) -> Self {
        Self::from_rational(r)
    }
}

impl From<Rational> for CycloNum {
    fn from(r: Rational) -> Self {
        Self::from_rational(&r)
    }
}

// The operator impls panic on level overflow; use the `try_*` methods where
// levels are not known to be bounded.
impl Add for &CycloNum {
    type Output = CycloNum;
    fn add(self, rhs: &CycloNum) -> CycloNum {
        self.try_add(rhs).expect("cyclotomic addition")
    }
}

impl Sub for &CycloNum {
    type Output = CycloNum;
    fn sub(self, rhs: &CycloNum) -> CycloNum {
        self.try_sub(rhs).expect("cyclotomic subtraction")
    }
}

impl Mul for &CycloNum {
    type Output = CycloNum;
    fn mul(self, rhs: &CycloNum) -> CycloNum {
        self.try_mul(rhs).expect("cyclotomic multiplication")
    }
}

impl Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        CycloNum {
            level: self.level,
            num: self.num.iter().map(|c| -c.clone()).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycloNum {
    type Output = CycloNum;
    fn neg(mut self) -> CycloNum {
        self.num.iter_mut().for_each(|c| *c = -c.clone());
        self
    }
}

impl AddAssign<&CycloNum> for CycloNum {
    fn add_assign(&mut self, rhs: &CycloNum) {
        if rhs.is_zero() {
            return;
        }
        if self.level == rhs.level && self.den == rhs.den && self.den.is_one() {
            for (a, b) in self.num.iter_mut().zip(&rhs.num) {
                *a += b;
            }
            if self.level > 1 && self.num[1..].iter().all(IBig::is_zero) {
                self.num.truncate(1);
                self.level = 1;
            }
            return;
        }
        *self = &*self + rhs;
    }
}

fn fmt_rational(f: &mut fmt::Formatter<'_>, n: &IBig, d: &UBig) -> fmt::Result {
    if d.is_one() {
        write!(f, "{n}")
    } else {
        write!(f, "{n}/{d}")
    }
}

impl fmt::Display for CycloNum {
    /// Rationals print as `a` or `a/b`; other elements as
    /// `(a0 + a1*zeta(L) + a2*zeta(L)^2 ...)` with zero terms dropped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 1 {
            return fmt_rational(f, &self.num[0], &self.den);
        }
        write!(f, "(")?;
        let mut first = true;
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let negative = *c < IBig::ZERO;
            let mag = IBig::from(c.unsigned_abs());
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            let unit_coeff = mag.is_one() && self.den.is_one();
            if i == 0 || !unit_coeff {
                fmt_rational(f, &mag, &self.den)?;
            }
            if i > 0 {
                if !unit_coeff {
                    write!(f, "*")?;
                }
                write!(f, "zeta({})", self.level)?;
                if i > 1 {
                    write!(f, "^{i}")?;
                }
            }
        }
        write!(f, ")")
    }
}

/// `sum_{j=0}^{n-1} zeta_n^{s j}`: `n` when `n | s`, else 0.
pub fn root_of_unity_sum(n: u32, s: i64) -> Rational {
    assert!(n >= 1);
    if s.rem_euclid(n as i64) == 0 {
        Rational::from(n)
    } else {
        Rational::ZERO
    }
}

/// A root of unity `exp(2 pi i num/den)` with `0 <= num < den` in lowest
/// terms. Used for the unit parts of symbolic q-monomials, where powers and
/// products must stay cheap and exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { num: 0, den: 1 };
    pub const MINUS_ONE: RootOfUnity = RootOfUnity { num: 1, den: 2 };

    /// `zeta_order^k`.
    pub fn new(order: u64, k: i64) -> Self {
        assert!(order >= 1, "root of unity of order 0");
        let num = k.rem_euclid(order as i64) as u64;
        let g = gcd_u64(num, order);
        RootOfUnity {
            num: num / g,
            den: order / g,
        }
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// Multiplicative order.
    pub fn order(&self) -> u64 {
        self.den
    }

    /// Exponent `k` such that `self = zeta_level^k`; `level` must be a
    /// multiple of the order.
    pub fn exponent_at(&self, level: u64) -> u64 {
        debug_assert_eq!(level % self.den, 0);
        self.num * (level / self.den)
    }

    pub fn pow(&self, e: i64) -> Self {
        let k = (self.num as i128 * e as i128).rem_euclid(self.den as i128) as i64;
        Self::new(self.den, k)
    }

    pub fn inv(&self) -> Self {
        self.pow(-1)
    }

    pub fn to_cyclo(&self) -> Result<CycloNum> {
        checked_level(canonical_level(self.den.min(u32::MAX as u64) as u32) as u64)?;
        Ok(CycloNum::zeta(self.den as u32, self.num as i64))
    }

    /// Recognize `c` as a root of unity.
    pub fn from_cyclo(c: &CycloNum) -> Option<Self> {
        let level = c.level() as u64;
        // ±zeta_L^k covers every root of unity in Q(zeta_L)
        let order = if level.is_multiple_of(2) { level } else { 2 * level };
        (0..order)
            .map(|k| Self::new(order, k as i64))
            .find(|r| r.to_cyclo().is_ok_and(|z| &z == c))
    }
}

impl Mul for RootOfUnity {
    type Output = RootOfUnity;
    fn mul(self, rhs: RootOfUnity) -> RootOfUnity {
        let den = lcm_u64(self.den, rhs.den);
        let k = self.num * (den / self.den) + rhs.num * (den / rhs.den);
        RootOfUnity::new(den, k as i64)
    }
}

impl Neg for RootOfUnity {
    type Output = RootOfUnity;
    fn neg(self) -> RootOfUnity {
        self * RootOfUnity::MINUS_ONE
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => write!(f, "1"),
            (1, 2) => write!(f, "-1"),
            (1, d) => write!(f, "zeta({d})"),
            (k, d) => write!(f, "zeta({d})^{k}"),
        }
    }
}
