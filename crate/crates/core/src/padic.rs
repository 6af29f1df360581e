//! Truncated p-adic integers, multi-indices and binomial coefficients.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ExtVal, Q};
use crate::realpow::floor_pow_mul;

/// A prime number, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    pub fn pow(self, e: u32) -> BigInt {
        BigInt::from(self.0).pow(e)
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Prime> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `v_p` of an integer; `+inf` for zero.
pub fn val_p_int(p: Prime, x: &BigInt) -> ExtVal {
    if x.is_zero() {
        return ExtVal::Infinity;
    }
    let pb = p.big();
    let mut v = 0;
    let mut y = x.abs();
    while (&y % &pb).is_zero() {
        y /= &pb;
        v += 1;
    }
    ExtVal::int(v)
}

pub fn val_p_u64(p: u64, mut x: u64) -> u32 {
    assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// `v_p(n!)` by Legendre's formula.
pub fn factorial_val(p: u64, n: u64) -> u64 {
    let mut v = 0;
    let mut q = n / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v
}

/// Number of base-`p` digits of `j` (zero has none).
pub fn num_digits(p: u64, mut j: u64) -> u32 {
    let mut d = 0;
    while j > 0 {
        j /= p;
        d += 1;
    }
    d
}

/// Exact binomial coefficient.
pub fn binom_int(m: u64, j: u64) -> BigInt {
    binom_big(&BigInt::from(m), j)
}

/// `binom(m, j)` for an arbitrary integer `m`, via the falling factorial.
pub fn binom_big(m: &BigInt, j: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..j {
        num *= m - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// `binom(m, j) mod p` by Lucas' theorem for small nonnegative `m`.
pub fn lucas(p: u64, mut m: u64, mut j: u64) -> u32 {
    let mut r: u64 = 1;
    while j > 0 {
        let (mi, ji) = (m % p, j % p);
        if ji > mi {
            return 0;
        }
        r = r * small_binom_mod(p, mi, ji) % p;
        m /= p;
        j /= p;
    }
    r as u32
}

fn small_binom_mod(p: u64, m: u64, j: u64) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..j {
        num = num * ((m - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * mod_inv_u64(den, p) % p
}

pub(crate) fn mod_inv_u64(a: u64, p: u64) -> u64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(p));
    e.x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// A p-adic integer known modulo `p^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: Prime,
    prec: u32,
    residue: BigInt,
}

impl PadicInt {
    pub fn new(p: Prime, value: &BigInt, prec: u32) -> PadicInt {
        let residue = value.mod_floor(&p.pow(prec));
        PadicInt { p, prec, residue }
    }

    pub fn from_i64(p: Prime, value: i64, prec: u32) -> PadicInt {
        PadicInt::new(p, &BigInt::from(value), prec)
    }

    pub fn zero(p: Prime, prec: u32) -> PadicInt {
        PadicInt::from_i64(p, 0, prec)
    }

    pub fn one(p: Prime, prec: u32) -> PadicInt {
        PadicInt::from_i64(p, 1, prec)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    /// Valuation, saturated at the precision for a zero residue.
    pub fn val(&self) -> ExtVal {
        if self.residue.is_zero() {
            return ExtVal::int(self.prec as i64);
        }
        val_p_int(self.p, &self.residue)
    }

    /// Valuation as an integer, `None` when saturated.
    pub fn val_exact(&self) -> Option<u32> {
        if self.residue.is_zero() {
            None
        } else {
            val_p_int(self.p, &self.residue).finite().map(|v| v.to_integer() as u32)
        }
    }

    pub fn is_unit(&self) -> bool {
        self.prec >= 1 && !(&self.residue % self.p.big()).is_zero()
    }

    pub fn mod_p(&self) -> u32 {
        (&self.residue % self.p.big()).to_u32().unwrap()
    }

    /// Residue modulo `p^t`; requires `t ≤ N`.
    pub fn residue_mod_pow(&self, t: u32) -> Result<BigInt> {
        if t > self.prec {
            return Err(Error::InsufficientPrecision(format!(
                "need {t} digits of {self}, have {}",
                self.prec
            )));
        }
        Ok(&self.residue % self.p.pow(t))
    }

    pub fn reduce(&self, prec: u32) -> PadicInt {
        PadicInt::new(self.p, &self.residue, prec.min(self.prec))
    }

    fn check(&self, other: &PadicInt) {
        assert_eq!(self.p, other.p, "mixed primes");
    }

    pub fn add(&self, other: &PadicInt) -> PadicInt {
        self.check(other);
        PadicInt::new(self.p, &(&self.residue + &other.residue), self.prec.min(other.prec))
    }

    pub fn sub(&self, other: &PadicInt) -> PadicInt {
        self.check(other);
        PadicInt::new(self.p, &(&self.residue - &other.residue), self.prec.min(other.prec))
    }

    pub fn mul(&self, other: &PadicInt) -> PadicInt {
        self.check(other);
        PadicInt::new(self.p, &(&self.residue * &other.residue), self.prec.min(other.prec))
    }

    pub fn neg(&self) -> PadicInt {
        PadicInt::new(self.p, &-&self.residue, self.prec)
    }

    pub fn inverse(&self) -> Result<PadicInt> {
        if !self.is_unit() {
            return Err(Error::NotInvertible(format!("{self} is not a unit")));
        }
        let m = self.p.pow(self.prec);
        let e = self.residue.extended_gcd(&m);
        Ok(PadicInt::new(self.p, &e.x, self.prec))
    }

    pub fn pow(&self, e: i64) -> Result<PadicInt> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let m = self.p.pow(self.prec);
        let r = base.residue.modpow(&BigInt::from(e.unsigned_abs()), &m);
        Ok(PadicInt { p: self.p, prec: self.prec, residue: r })
    }

    /// Exact division by `p^v`, losing `v` digits of precision.
    pub fn div_p_pow(&self, v: u32) -> Result<PadicInt> {
        if v > self.prec {
            return Err(Error::InsufficientPrecision(format!(
                "cannot divide {self} by {}^{v}",
                self.p
            )));
        }
        let pv = self.p.pow(v);
        if !(&self.residue % &pv).is_zero() {
            return Err(Error::Domain(format!("{self} is not divisible by {}^{v}", self.p)));
        }
        Ok(PadicInt::new(self.p, &(&self.residue / pv), self.prec - v))
    }

    /// Agreement modulo the smaller precision.
    pub fn same(&self, other: &PadicInt) -> bool {
        let n = self.prec.min(other.prec);
        self.p == other.p && self.reduce(n).residue == other.reduce(n).residue
    }

    /// Base-p digits, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        let pb = self.p.big();
        let mut r = self.residue.clone();
        (0..self.prec)
            .map(|_| {
                let (q, d) = r.div_mod_floor(&pb);
                r = q;
                d.to_u64().unwrap()
            })
            .collect()
    }

    pub fn from_str_with(p: Prime, s: &str) -> Result<PadicInt> {
        let t = s.trim();
        let (val, prec) = t
            .split_once("+O(")
            .or_else(|| t.split_once("+ O("))
            .ok_or_else(|| Error::parse(0, format!("expected `r+O(p^N)`, got `{t}`")))?;
        let val = BigInt::from_str(val.trim()).map_err(|_| Error::parse(0, "bad residue"))?;
        let body = prec.trim().trim_end_matches(')');
        let (pp, n) = body.split_once('^').ok_or_else(|| Error::parse(0, "bad precision"))?;
        let pp: u64 = pp.trim().parse().map_err(|_| Error::parse(0, "bad prime"))?;
        if pp != p.get() {
            return Err(Error::Mismatch(format!("prime {pp} vs {p}")));
        }
        let n: u32 = n.trim().parse().map_err(|_| Error::parse(0, "bad precision"))?;
        Ok(PadicInt::new(p, &val, n))
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+O({}^{})", self.residue, self.p, self.prec)
    }
}

/// `binom(x, n) = x(x−1)…(x−n+1)/n!` with precision `N − v_p(n!)`.
pub fn binom_padic(x: &PadicInt, n: u64) -> Result<PadicInt> {
    let p = x.prime();
    let v = factorial_val(p.get(), n);
    if (x.precision() as u64) <= v {
        return Err(Error::InsufficientPrecision(format!(
            "binom(x, {n}) needs precision > {v}, have {}",
            x.precision()
        )));
    }
    let v = v as u32;
    let m = p.pow(x.precision());
    let mut num = BigInt::one();
    let mut unit = BigInt::one();
    for i in 0..n {
        num = (num * (x.residue() - BigInt::from(i))).mod_floor(&m);
        let mut k = i + 1;
        while k % p.get() == 0 {
            k /= p.get();
        }
        unit = (unit * BigInt::from(k)).mod_floor(&m);
    }
    let num = PadicInt::new(p, &num, x.precision()).div_p_pow(v)?;
    let inv = PadicInt::new(p, &unit, num.precision()).inverse()?;
    Ok(num.mul(&inv))
}

/// `binom(a, j) mod p` via Lucas' theorem; needs the digits of `a` up to the
/// length of `j`.
pub fn binom_mod_p(a: &PadicInt, j: u64) -> Result<u32> {
    let p = a.prime().get();
    let need = num_digits(p, j);
    let low = a.residue_mod_pow(need)?;
    let m = low.to_u64().ok_or_else(|| Error::Unsupported("digit window too wide".into()))?;
    Ok(lucas(p, m, j))
}

/// A multi-index `n ∈ Z_{≥0}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u64>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|n| = Σ n_i`.
    pub fn norm(&self) -> u64 {
        self.0.iter().sum()
    }

    /// `|n|_∞ = max n_i`.
    pub fn max_norm(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// All indices `m` with `0 ≤ m_i ≤ bounds_i`, in lexicographic order.
    pub fn box_iter(bounds: &[u64]) -> impl Iterator<Item = MultiIndex> + '_ {
        let total: u64 = bounds.iter().map(|b| b + 1).product();
        (0..total).map(move |mut k| {
            let mut v = vec![0; bounds.len()];
            for i in (0..bounds.len()).rev() {
                v[i] = k % (bounds[i] + 1);
                k /= bounds[i] + 1;
            }
            MultiIndex(v)
        })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `Σ_i ⌊p^λ n_i⌋`, exact.
pub fn floor_weighted(p: Prime, lambda: &Q, n: &MultiIndex) -> i64 {
    n.0.iter().map(|&ni| floor_pow_mul(p.get(), lambda, ni as i64)).sum()
}

/// `⌊log_p |n|_∞⌋`.
pub fn log_level(p: Prime, n: &MultiIndex) -> Result<u32> {
    let m = n.max_norm();
    if m == 0 {
        return Err(Error::Domain("log_level of the zero index".into()));
    }
    Ok(num_digits(p.get(), m) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn primes() {
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(97).is_ok());
        assert_eq!(Prime::new(4), Err(Error::NotPrime(4)));
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn valuations() {
        assert_eq!(val_p_int(p(2), &BigInt::from(28)), ExtVal::int(2));
        assert_eq!(PadicInt::from_i64(p(3), 9, 5).val(), ExtVal::int(2));
        let z = PadicInt::zero(p(5), 7);
        assert_eq!(z.val(), ExtVal::int(7));
        assert_eq!(z.val_exact(), None);
        assert_eq!(val_p_int(p(3), &BigInt::zero()), ExtVal::Infinity);
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_int(11, 0), BigInt::one());
        assert_eq!(binom_int(8, 2), BigInt::from(28));
        let v: Vec<ExtVal> = [1, 2, 4, 8].iter().map(|&j| val_p_int(p(2), &binom_int(8, j))).collect();
        assert_eq!(v, vec![ExtVal::int(3), ExtVal::int(2), ExtVal::int(1), ExtVal::int(0)]);
        let b = binom_padic(&PadicInt::from_i64(p(3), 5, 6), 2).unwrap();
        assert_eq!(b.residue(), &BigInt::from(10));
        assert_eq!(b.precision(), 6);
        let b = binom_padic(&PadicInt::from_i64(p(3), 5, 6), 3).unwrap();
        assert_eq!(b.precision(), 5);
        assert_eq!(b.residue(), &BigInt::from(10));
        assert_eq!(binom_padic(&PadicInt::from_i64(p(2), 3, 9), 5).unwrap().residue(), &BigInt::zero());
        assert!(binom_padic(&PadicInt::from_i64(p(2), 3, 3), 4).is_err());
        let neg = binom_padic(&PadicInt::from_i64(p(5), -1, 8), 3).unwrap();
        assert!(neg.same(&PadicInt::from_i64(p(5), -1, 8)));
    }

    #[test]
    fn lucas_matches_exact() {
        for pr in [2u64, 3, 5, 7] {
            for m in 0..60u64 {
                for j in 0..=m + 2 {
                    let exact = binom_int(m, j) % BigInt::from(pr);
                    assert_eq!(BigInt::from(lucas(pr, m, j)), exact, "p={pr} m={m} j={j}");
                }
            }
        }
        let a = PadicInt::from_i64(p(2), 3, 2);
        assert!(binom_mod_p(&a, 3).is_ok());
        assert!(binom_mod_p(&a, 4).is_err());
    }

    #[test]
    fn inverse_and_pow() {
        let a = PadicInt::from_i64(p(3), 4, 10);
        let b = a.inverse().unwrap();
        assert!(a.mul(&b).same(&PadicInt::one(p(3), 10)));
        assert!(a.pow(-3).unwrap().mul(&a.pow(3).unwrap()).same(&PadicInt::one(p(3), 10)));
        assert!(PadicInt::from_i64(p(3), 6, 10).inverse().is_err());
    }

    #[test]
    fn text_round_trip() {
        let a = PadicInt::from_i64(p(3), -7, 6);
        let s = a.to_string();
        assert_eq!(s, "722+O(3^6)");
        assert_eq!(PadicInt::from_str_with(p(3), &s).unwrap(), a);
    }

    #[test]
    fn weighted_floors_and_levels() {
        assert_eq!(floor_weighted(p(2), &qi(0), &MultiIndex(vec![3, 4])), 7);
        assert_eq!(floor_weighted(p(2), &qi(1), &MultiIndex(vec![3])), 6);
        assert_eq!(floor_weighted(p(2), &q(1, 2), &MultiIndex(vec![3])), 4);
        assert_eq!(log_level(p(2), &MultiIndex(vec![1])).unwrap(), 0);
        assert_eq!(log_level(p(2), &MultiIndex(vec![7, 3])).unwrap(), 2);
        assert_eq!(log_level(p(3), &MultiIndex(vec![9])).unwrap(), 2);
        assert!(log_level(p(3), &MultiIndex(vec![0, 0])).is_err());
    }

    #[test]
    fn box_iteration() {
        let all: Vec<MultiIndex> = MultiIndex::box_iter(&[1, 2]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], MultiIndex(vec![0, 0]));
        assert_eq!(all[5], MultiIndex(vec![1, 2]));
    }
}
