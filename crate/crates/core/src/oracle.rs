//! Overpartitions by brute force: enumeration, the rank and the M2-rank,
//! rank tables, deviations and the closed forms for `S(z; q) = (1+z) R(z; q)`.
//!
//! Enumeration is the ground truth. The closed forms are checked against it
//! wherever both are available and only then used to extend a deviation past
//! the enumerated range.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::appell::{delta, m_poles, m_series, overpartition_product, T2_series, T_series};
use crate::cyclo::{CycloNum, Rational, RootOfUnity};
use crate::error::{Error, Result};
use crate::par;
use crate::series::{Monomial, QSeries};
use crate::theta::UnityArray;

pub const DEFAULT_ORACLE_RANGE: i64 = 24;
pub const CACHE_ENV: &str = "OVERRANK_CACHE_DIR";
const CACHE_VERSION: u32 = 1;

/// Which rank statistic a table or deviation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Rank,
    M2,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Rank => "rank",
            Which::M2 => "m2",
        })
    }
}

/// Parts in non-increasing order; an overlined copy of a value precedes
/// its plain copies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Overpartition {
    pub parts: Vec<(u32, bool)>,
}

impl Overpartition {
    pub fn size(&self) -> u32 {
        self.parts.iter().map(|p| p.0).sum()
    }

    pub fn is_valid(&self) -> bool {
        self.parts.windows(2).all(|w| {
            let ((a, _), (b, ob)) = (w[0], w[1]);
            a > b || (a == b && !ob)
        }) && self.parts.iter().all(|p| p.0 > 0)
    }

    fn largest(&self) -> Option<(u32, bool)> {
        self.parts.first().copied()
    }

    pub fn rank(&self) -> i64 {
        match self.largest() {
            None => 0,
            Some((l, _)) => l as i64 - self.parts.len() as i64,
        }
    }

    /// `ceil(l/2) - #parts + #(odd plain parts) - [largest part odd and plain]`.
    pub fn m2_rank(&self) -> i64 {
        let Some((l, over)) = self.largest() else {
            return 0;
        };
        let odd_plain = self.parts.iter().filter(|(v, o)| v % 2 == 1 && !o).count() as i64;
        let chi = i64::from(l % 2 == 1 && !over);
        (l as i64 + 1) / 2 - self.parts.len() as i64 + odd_plain - chi
    }

    pub fn statistic(&self, which: Which) -> i64 {
        match which {
            Which::Rank => self.rank(),
            Which::M2 => self.m2_rank(),
        }
    }
}

impl fmt::Display for Overpartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (v, o)) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if *o {
                write!(f, "{v}'")?;
            } else {
                write!(f, "{v}")?;
            }
        }
        write!(f, ")")
    }
}

/// Lazy stream of the overpartitions of `n`: partitions in reverse
/// lexicographic order, each followed by its overline patterns.
pub struct Enumerate {
    partition: Option<Vec<u32>>,
    distinct: Vec<u32>,
    mask: u64,
}

pub fn enumerate(n: u32) -> Enumerate {
    let start = if n == 0 { vec![] } else { vec![n] };
    let distinct = start.clone();
    Enumerate {
        partition: Some(start),
        distinct,
        mask: 0,
    }
}

fn next_partition(p: &[u32]) -> Option<Vec<u32>> {
    let ones = p.iter().rev().take_while(|&&v| v == 1).count();
    let i = p.len().checked_sub(ones + 1)?;
    let x = p[i] - 1;
    let mut out = p[..i].to_vec();
    out.push(x);
    let mut rest = ones as u32 + 1;
    while rest > 0 {
        let v = rest.min(x);
        out.push(v);
        rest -= v;
    }
    Some(out)
}

impl Iterator for Enumerate {
    type Item = Overpartition;

    fn next(&mut self) -> Option<Overpartition> {
        let p = self.partition.as_ref()?;
        let mut parts = Vec::with_capacity(p.len());
        let mut prev = 0;
        for &v in p {
            let first = v != prev;
            let over = first && {
                let idx = self.distinct.iter().position(|&d| d == v).expect("distinct value");
                self.mask >> idx & 1 == 1
            };
            parts.push((v, over));
            prev = v;
        }
        self.mask += 1;
        if self.mask >> self.distinct.len() != 0 {
            self.mask = 0;
            self.partition = next_partition(p);
            if let Some(p) = &self.partition {
                self.distinct = p.clone();
                self.distinct.dedup();
            }
        }
        Some(Overpartition { parts })
    }
}

/// `N(m, n)` for `0 <= n <= n_max`, for either statistic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub which: Which,
    pub n_max: i64,
    counts: Vec<BTreeMap<i64, u64>>,
}

fn checked(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b)
        .ok_or_else(|| Error::Range("overpartition count exceeds u64".into()))
}

/// `pbar(n)` for `n <= n_max` from the product `prod (1+q^k)/(1-q^k)`.
pub fn pbar_counts(n_max: i64) -> Result<Vec<u64>> {
    let len = (n_max + 1).max(0) as usize;
    let mut c = vec![0u64; len];
    if len == 0 {
        return Ok(c);
    }
    c[0] = 1;
    for k in 1..len {
        // times 1/(1-q^k)
        for e in k..len {
            c[e] = checked(c[e], c[e - k])?;
        }
        // times (1+q^k)
        for e in (k..len).rev() {
            c[e] = checked(c[e], c[e - k])?;
        }
    }
    Ok(c)
}

impl RankTable {
    /// Build by dynamic programming on the largest part.
    ///
    /// `f[n][s]` counts overpartitions of `n` into parts below the current
    /// value with secondary statistic `s`: the number of parts for the rank,
    /// the number of even or overlined parts for the M2-rank. Both ranks are
    /// `g(l) - s - [M2 only: l odd, plain]` once the largest part `l` is fixed.
    pub fn build(which: Which, n_max: i64) -> Result<RankTable> {
        if n_max < 0 {
            return Err(Error::Range(format!("n_max must be nonnegative, got {n_max}")));
        }
        let len = n_max as usize + 1;
        let mut counts = vec![BTreeMap::new(); len];
        counts[0].insert(0, 1u64);
        let mut f = vec![vec![0u64; len]; len];
        f[0][0] = 1;
        for l in 1..len {
            for c in 1..len {
                let used = c * l;
                if used >= len {
                    break;
                }
                for over in [false, true] {
                    let s_add = match which {
                        Which::Rank => c,
                        Which::M2 if l % 2 == 0 => c,
                        Which::M2 => usize::from(over),
                    };
                    let top = match which {
                        Which::Rank => l as i64,
                        Which::M2 => (l as i64 + 1) / 2 - i64::from(l % 2 == 1 && !over),
                    };
                    for n in used..len {
                        for (s, &v) in f[n - used].iter().enumerate() {
                            if v == 0 {
                                continue;
                            }
                            let stat = top - (s + s_add) as i64;
                            let e = counts[n].entry(stat).or_insert(0);
                            *e = checked(*e, v)?;
                        }
                    }
                }
            }
            // admit l as a non-largest part
            let mut g = f.clone();
            for c in 1..len {
                let used = c * l;
                if used >= len {
                    break;
                }
                for over in [false, true] {
                    let s_add = match which {
                        Which::Rank => c,
                        Which::M2 if l % 2 == 0 => c,
                        Which::M2 => usize::from(over),
                    };
                    for n in used..len {
                        for s in 0..len - s_add {
                            let v = f[n - used][s];
                            if v != 0 {
                                g[n][s + s_add] = checked(g[n][s + s_add], v)?;
                            }
                        }
                    }
                }
            }
            f = g;
        }
        Ok(RankTable { which, n_max, counts })
    }

    /// Build by streaming every overpartition; only for small `n_max`.
    pub fn from_enumeration(which: Which, n_max: i64) -> RankTable {
        let counts = (0..=n_max)
            .map(|n| {
                let mut row = BTreeMap::new();
                for op in enumerate(n as u32) {
                    *row.entry(op.statistic(which)).or_insert(0u64) += 1;
                }
                row
            })
            .collect();
        RankTable { which, n_max, counts }
    }

    pub fn count(&self, m: i64, n: i64) -> u64 {
        self.counts
            .get(n as usize)
            .and_then(|r| r.get(&m))
            .copied()
            .unwrap_or(0)
    }

    pub fn row(&self, n: i64) -> &BTreeMap<i64, u64> {
        &self.counts[n as usize]
    }

    pub fn pbar(&self, n: i64) -> u64 {
        self.counts[n as usize].values().sum()
    }

    /// `N(a, M, n)`: count with statistic congruent to `a` mod `M`.
    pub fn count_mod(&self, a: i64, modulus: i64, n: i64) -> u64 {
        self.counts[n as usize]
            .iter()
            .filter(|(m, _)| (*m - a).rem_euclid(modulus) == 0)
            .map(|(_, c)| c)
            .sum()
    }

    /// Symmetry `N(m, n) = N(-m, n)` and row totals equal to `pbar(n)`.
    pub fn validate(&self) -> Result<()> {
        if self.counts.len() as i64 != self.n_max + 1 {
            return Err(Error::Cache(format!("expected {} rows, found {}", self.n_max + 1, self.counts.len())));
        }
        let pbar = pbar_counts(self.n_max)?;
        for (n, row) in self.counts.iter().enumerate() {
            for (m, c) in row {
                if self.count(-m, n as i64) != *c {
                    return Err(Error::Cache(format!("asymmetric {} count at m = {m}, n = {n}", self.which)));
                }
            }
            let total: u64 = row.values().sum();
            if total != pbar[n] {
                return Err(Error::Cache(format!("row {n} sums to {total}, expected {}", pbar[n])));
            }
        }
        Ok(())
    }

    fn cache_path(dir: &Path, which: Which, n_max: i64) -> PathBuf {
        dir.join(format!("ranktable-v{CACHE_VERSION}-{which}-{n_max}.json"))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let doc = CacheDoc {
            version: CACHE_VERSION,
            table: self.clone(),
        };
        let text = serde_json::to_string(&doc).map_err(|e| Error::Cache(e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
    }

    /// Read a cached table and re-check its invariants.
    pub fn load(path: &Path) -> Result<RankTable> {
        let text = fs::read_to_string(path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
        let doc: CacheDoc = serde_json::from_str(&text).map_err(|e| Error::Cache(e.to_string()))?;
        if doc.version != CACHE_VERSION {
            return Err(Error::Cache(format!("cache version {} != {CACHE_VERSION}", doc.version)));
        }
        doc.table.validate()?;
        Ok(doc.table)
    }

    /// The table for `(which, n_max)`, shared within the process and kept
    /// on disk under `$OVERRANK_CACHE_DIR` when that is set. A cache file
    /// that fails validation is rebuilt.
    pub fn cached(which: Which, n_max: i64) -> Result<Arc<RankTable>> {
        static MEMO: OnceLock<Mutex<HashMap<(Which, i64), Arc<RankTable>>>> = OnceLock::new();
        let memo = MEMO.get_or_init(Default::default);
        if let Some(t) = memo.lock().expect("rank table memo").get(&(which, n_max)) {
            return Ok(t.clone());
        }
        let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
        let path = dir.as_deref().map(|d| Self::cache_path(d, which, n_max));
        let from_disk = path.as_deref().and_then(|p| Self::load(p).ok()).filter(|t| t.which == which && t.n_max == n_max);
        let table = match from_disk {
            Some(t) => t,
            None => {
                let t = Self::build(which, n_max)?;
                if let Some(p) = &path {
                    let _ = fs::create_dir_all(p.parent().expect("file in dir"));
                    t.save(p)?;
                }
                t
            }
        };
        let table = Arc::new(table);
        memo.lock().expect("rank table memo").insert((which, n_max), table.clone());
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheDoc {
    version: u32,
    table: RankTable,
}

/// `(-q)_inf / (q)_inf`.
pub fn pbar_series(prec: i64) -> Result<QSeries> {
    overpartition_product(1, prec)
}

/// `S(z; q) = (1 - z)(1 - 2 m(z^-2 q, q^2, z))`.
pub fn sbar_closed(z: &Monomial, prec: i64) -> Result<QSeries> {
    let x = z.pow(-2) * Monomial::q(1);
    let m = m_series(&x, 2, z, prec - z.exp.min(0))?;
    let inner = QSeries::one(m.prec()).try_sub(&m.scale_int(2))?;
    Ok(one_minus(z, prec, &inner)?.try_mul(&inner)?.truncate(prec))
}

/// `1 - z`, exact far enough to multiply `other` to `O(q^prec)`.
fn one_minus(z: &Monomial, prec: i64, other: &QSeries) -> Result<QSeries> {
    let p = prec - other.min_exp().min(0) + z.exp.max(0) + 1;
    QSeries::one(p).try_sub(&z.to_series(p))
}

/// `S_2(z; q) = -(1 - z) + 2(1 - z) m(zq, q^2, q)`. If `m(zq, q^2, q)` has a
/// pole its third parameter is switched to `-1` first.
pub fn sbar2_closed(z: &Monomial, prec: i64) -> Result<QSeries> {
    let work = prec - z.exp.min(0);
    let x = *z * Monomial::q(1);
    let q1 = Monomial::q(1);
    let m = match m_poles(&x, 2, &q1) {
        Ok(()) => m_series(&x, 2, &q1, work)?,
        Err(_) => m_series(&x, 2, &Monomial::MINUS_ONE, work)?.try_add(&delta(&x, &q1, &Monomial::MINUS_ONE, 2, work)?)?,
    };
    let inner = m.scale_int(2).try_sub(&QSeries::one(m.prec()))?;
    Ok(one_minus(z, prec, &inner)?.try_mul(&inner)?.truncate(prec))
}

pub fn s_closed(which: Which, z: &Monomial, prec: i64) -> Result<QSeries> {
    match which {
        Which::Rank => sbar_closed(z, prec),
        Which::M2 => sbar2_closed(z, prec),
    }
}

/// `sum_{m,n} (N(m,n) + N(m-1,n)) w^m q^n` for `w = zeta_M^j`, from the table.
pub fn s_enumerated(table: &RankTable, w: RootOfUnity) -> QSeries {
    let mut acc = UnityArray::new(w.order(), 0, table.n_max + 1);
    for n in 0..=table.n_max {
        for (&m, &c) in table.row(n) {
            acc.add(n, w.pow(m), c as i128);
            acc.add(n, w.pow(m + 1), c as i128);
        }
    }
    acc.into_series()
}

/// `D(a, M)` and `D(a-1, M)` summed via the key formula
/// `(1/M) sum_{j=1}^{M-1} zeta_M^{-aj} S(zeta_M^j)`, with `S` supplied per `j`.
pub fn key_formula(a: i64, modulus: i64, s: &[QSeries]) -> Result<QSeries> {
    let prec = s.iter().map(QSeries::prec).min().unwrap_or(0);
    let mut acc = QSeries::zero(prec);
    for (j, sj) in (1..modulus).zip(s) {
        let w = RootOfUnity::new(modulus as u64, -a * j).to_cyclo()?;
        acc = acc.try_add(&sj.try_scale(&w)?)?;
    }
    Ok(acc.scale_rational(&Rational::from_parts(1.into(), (modulus as u64).into())))
}

/// `sum_n (N(a,M,n) + N(a-1,M,n) - 2 pbar(n)/M) q^n` straight from the table.
pub fn pair_from_table(table: &RankTable, a: i64, modulus: i64) -> QSeries {
    let prec = table.n_max + 1;
    let coeffs: Vec<Rational> = (0..prec)
        .map(|n| {
            let c = table.count_mod(a, modulus, n) + table.count_mod(a - 1, modulus, n);
            Rational::from(c) - Rational::from_parts((2 * table.pbar(n)).into(), (modulus as u64).into())
        })
        .collect();
    QSeries::from_rationals(0, &coeffs, prec)
}

/// `D(a, M)` from the table alone.
pub fn deviation_from_table(table: &RankTable, a: i64, modulus: i64) -> QSeries {
    let prec = table.n_max + 1;
    let coeffs: Vec<Rational> = (0..prec)
        .map(|n| {
            Rational::from(table.count_mod(a, modulus, n)) - Rational::from_parts(table.pbar(n).into(), (modulus as u64).into())
        })
        .collect();
    QSeries::from_rationals(0, &coeffs, prec)
}

/// All of `D(0, M), ..., D(M-1, M)` to `O(q^prec)`.
///
/// Coefficients below `oracle_range + 1` come from the rank table. When more
/// are requested the closed forms produce the whole series, which must agree
/// with the table on the enumerated range.
pub fn deviations(modulus: i64, which: Which, prec: i64, oracle_range: i64) -> Result<Arc<Vec<QSeries>>> {
    type Key = (i64, Which, i64, i64);
    static MEMO: OnceLock<Mutex<HashMap<Key, Arc<Vec<QSeries>>>>> = OnceLock::new();
    let key = (modulus, which, prec, oracle_range);
    let memo = MEMO.get_or_init(Default::default);
    if let Some(v) = memo.lock().expect("deviation memo").get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(compute_deviations(modulus, which, prec, oracle_range)?);
    memo.lock().expect("deviation memo").insert(key, v.clone());
    Ok(v)
}

fn compute_deviations(modulus: i64, which: Which, prec: i64, oracle_range: i64) -> Result<Vec<QSeries>> {
    if modulus < 2 {
        return Err(Error::Range(format!("modulus must be at least 2, got {modulus}")));
    }
    let table = RankTable::cached(which, oracle_range)?;
    let from_table: Vec<QSeries> = (0..modulus)
        .map(|a| deviation_from_table(&table, a, modulus).truncate(prec))
        .collect();
    if prec <= oracle_range + 1 {
        return Ok(from_table);
    }
    // R(z) = S(z)/(1+z) away from z = -1; R(-1) is 2 D(0, 2)
    let js: Vec<i64> = (1..modulus).filter(|&j| 2 * j != modulus).collect();
    let rs: Vec<Result<QSeries>> = par::map(&js, |&j| {
        let w = RootOfUnity::new(modulus as u64, j);
        let s = s_closed(which, &Monomial::new(w, 0), prec)?;
        let d = (&CycloNum::one() + &w.to_cyclo()?).try_inv()?;
        s.try_scale(&d)
    });
    let rs = rs.into_iter().collect::<Result<Vec<_>>>()?;
    let at_minus_one = if modulus % 2 == 0 {
        Some(match which {
            Which::Rank => T_series(prec)?,
            Which::M2 => T2_series(prec)?,
        })
    } else {
        None
    };
    let inv_m = Rational::from_parts(1.into(), (modulus as u64).into());
    let mut out = Vec::with_capacity(modulus as usize);
    for a in 0..modulus {
        let mut acc = QSeries::zero(prec);
        for (&j, r) in js.iter().zip(&rs) {
            let w = RootOfUnity::new(modulus as u64, -a * j).to_cyclo()?;
            acc = acc.try_add(&r.try_scale(&w)?)?;
        }
        if let Some(t) = &at_minus_one {
            let sign = if a % 2 == 0 { 2 } else { -2 };
            acc = acc.try_add(&t.scale_int(sign))?;
        }
        let d = acc.scale_rational(&inv_m);
        if let Some(e) = d.first_irrational() {
            return Err(Error::NonRational { exponent: e });
        }
        if let Some((e, _, _)) = d.first_difference(&from_table[a as usize]) {
            return Err(Error::OracleMismatch { exponent: e });
        }
        out.push(d);
    }
    Ok(out)
}

/// `D(a, M)` (or its M2 analogue) to `O(q^prec)`, for `0 <= a <= M`.
pub fn deviation(a: i64, modulus: i64, which: Which, prec: i64, oracle_range: i64) -> Result<QSeries> {
    if !(0..=modulus).contains(&a) {
        return Err(Error::Range(format!("need 0 <= a <= M, got a = {a}, M = {modulus}")));
    }
    let all = deviations(modulus, which, prec, oracle_range)?;
    Ok(all[(a % modulus) as usize].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(parts: &[(u32, bool)]) -> Overpartition {
        Overpartition { parts: parts.to_vec() }
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate(0).collect::<Vec<_>>(), vec![op(&[])]);
        let two: Vec<_> = enumerate(2).collect();
        assert_eq!(two.len(), 4);
        for p in [op(&[(2, false)]), op(&[(2, true)]), op(&[(1, false), (1, false)]), op(&[(1, true), (1, false)])] {
            assert!(two.contains(&p), "{p}");
        }
        assert_eq!(enumerate(4).count(), 14);
        assert!(enumerate(9).all(|p| p.is_valid() && p.size() == 9));
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let all: Vec<_> = enumerate(12).collect();
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), set.len());
        assert_eq!(all.len() as u64, pbar_counts(12).unwrap()[12]);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(op(&[(2, false)]).rank(), 1);
        assert_eq!(op(&[(1, false), (1, false)]).rank(), -1);
        assert_eq!(op(&[]).rank(), 0);
        assert_eq!(op(&[(1, true), (1, false)]).rank(), -1);
    }

    #[test]
    fn m2_examples() {
        assert_eq!(op(&[(1, false), (1, false)]).m2_rank(), 0);
        assert_eq!(op(&[(2, true)]).m2_rank(), 0);
        assert!(enumerate(2).all(|p| p.m2_rank() == 0));
    }

    #[test]
    fn pbar_start() {
        assert_eq!(&pbar_counts(4).unwrap(), &[1, 2, 4, 8, 14]);
        let s = pbar_series(30).unwrap();
        let c = pbar_counts(29).unwrap();
        assert_eq!(s, QSeries::from_ints(0, &c.iter().map(|&v| v as i64).collect::<Vec<_>>(), 30));
    }

    #[test]
    fn dp_matches_enumeration() {
        for which in [Which::Rank, Which::M2] {
            let a = RankTable::build(which, 16).unwrap();
            let b = RankTable::from_enumeration(which, 16);
            assert_eq!(a, b, "{which}");
            a.validate().unwrap();
        }
    }

    #[test]
    fn cache_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let t = RankTable::build(Which::M2, 10).unwrap();
        let p = dir.path().join("t.json");
        t.save(&p).unwrap();
        assert_eq!(RankTable::load(&p).unwrap(), t);
        let mut bad = t.clone();
        *bad.counts[5].get_mut(&1).unwrap() += 1;
        bad.save(&p).unwrap();
        assert!(matches!(RankTable::load(&p), Err(Error::Cache(_))));
    }

    #[test]
    fn deviation_examples() {
        let d13 = deviation(1, 3, Which::Rank, 25, 24).unwrap();
        assert_eq!(d13, deviation(2, 3, Which::Rank, 25, 24).unwrap());
        let d03 = deviation(0, 3, Which::Rank, 25, 24).unwrap();
        assert_eq!(d03.coeff(0).unwrap().is_rational(), Some(Rational::from_parts(2.into(), 3u8.into())));
        let total = (0..5)
            .map(|a| deviation(a, 5, Which::Rank, 25, 24).unwrap())
            .fold(QSeries::zero(25), |s, d| s + d);
        assert!(total.is_zero());
    }

    #[test]
    fn closed_forms_extend_the_table() {
        // The closed forms must reproduce the table on n <= 12 and stay
        // rational beyond it.
        for which in [Which::Rank, Which::M2] {
            for m in [3, 4] {
                let d = deviations(m, which, 30, 12).unwrap();
                assert_eq!(d.len() as i64, m);
                assert!(d.iter().all(|s| s.prec() == 30));
                let long = deviations(m, which, 30, 24).unwrap();
                assert_eq!(d, long);
            }
        }
    }

    #[test]
    fn sbar_matches_enumeration() {
        let table = RankTable::cached(Which::Rank, 24).unwrap();
        let table2 = RankTable::cached(Which::M2, 24).unwrap();
        let w = RootOfUnity::new(3, 1);
        let z = Monomial::new(w, 0);
        assert_eq!(sbar_closed(&z, 25).unwrap(), s_enumerated(&table, w));
        assert_eq!(sbar2_closed(&z, 25).unwrap(), s_enumerated(&table2, w));
    }

    #[test]
    fn key_formula_m3() {
        let table = RankTable::cached(Which::Rank, 24).unwrap();
        let s: Vec<QSeries> = (1..3).map(|j| s_enumerated(&table, RootOfUnity::new(3, j))).collect();
        assert_eq!(key_formula(2, 3, &s).unwrap(), pair_from_table(&table, 2, 3));
    }
}
