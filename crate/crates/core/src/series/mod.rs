//! Truncated Laurent series over `F_p` with exponents in `p^{-m}Z`.
//!
//! A [`PerfLaurent`] is an element of `∪_m F_p((X^{1/p^m}))` known modulo
//! `X^B` for a rational cap `B`.

pub(crate) mod dense;
mod gamma;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{Prime, PadicInt};
use crate::rational::{is_power_of, ExtVal, Valuation, Q};

pub use gamma::{binomial_series_1plusx, gamma_orbit};

use dense::{add_mod, inv_mod, sub_mod};

/// An exponent `k/p^m` in lowest terms over `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FracExp {
    pub k: i64,
    pub m: u32,
}

impl FracExp {
    pub fn from_q(p: Prime, e: &Q) -> Result<FracExp> {
        let m = is_power_of(p.get(), *e.denom() as u64)
            .ok_or_else(|| Error::Domain(format!("exponent {e} has a denominator that is not a power of {p}")))?;
        Ok(FracExp { k: *e.numer(), m })
    }

    pub fn value(&self, p: Prime) -> Q {
        Q::new(self.k, (p.get() as i64).pow(self.m))
    }
}

/// Denominator exponent of an exponent already known to be `k/p^m`.
pub(crate) fn den_exp(p: u64, e: &Q) -> u32 {
    is_power_of(p, *e.denom() as u64).expect("exponent denominator is a power of p")
}

pub(crate) fn ppow(p: u64, m: u32) -> i64 {
    (p as i64).pow(m)
}

/// Truncated perfectoid Laurent series over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PerfLaurent {
    p: Prime,
    terms: BTreeMap<Q, u32>,
    cap: Q,
}

impl PerfLaurent {
    pub fn zero(p: Prime, cap: Q) -> Self {
        PerfLaurent { p, terms: BTreeMap::new(), cap }
    }

    pub fn constant(p: Prime, c: i64, cap: Q) -> Self {
        Self::monomial(p, c, Q::zero(), cap)
    }

    pub fn one(p: Prime, cap: Q) -> Self {
        Self::constant(p, 1, cap)
    }

    /// `X`, known modulo `X^cap`.
    pub fn x(p: Prime, cap: Q) -> Self {
        Self::monomial(p, 1, Q::one(), cap)
    }

    pub fn monomial(p: Prime, c: i64, e: Q, cap: Q) -> Self {
        Self::from_terms(p, [(e, c)], cap)
    }

    /// Builds a series from `(exponent, integer coefficient)` pairs; the
    /// coefficients are reduced mod p and exponents at or above the cap dropped.
    ///
    /// Panics if an exponent has a denominator that is not a power of p.
    pub fn from_terms(p: Prime, terms: impl IntoIterator<Item = (Q, i64)>, cap: Q) -> Self {
        let pp = p.get() as i64;
        let mut map: BTreeMap<Q, u32> = BTreeMap::new();
        for (e, c) in terms {
            assert!(is_power_of(p.get(), *e.denom() as u64).is_some(), "bad exponent {e}");
            if e >= cap {
                continue;
            }
            let c = c.rem_euclid(pp) as u32;
            let slot = map.entry(e).or_insert(0);
            *slot = add_mod(*slot, c, p.get() as u32);
        }
        map.retain(|_, c| *c != 0);
        PerfLaurent { p, terms: map, cap }
    }

    pub(crate) fn from_map(p: Prime, terms: BTreeMap<Q, u32>, cap: Q) -> Self {
        let mut f = PerfLaurent { p, terms, cap };
        f.normalize();
        f
    }

    fn normalize(&mut self) {
        let cap = self.cap;
        self.terms.retain(|e, c| *c != 0 && *e < cap);
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn cap(&self) -> Q {
        self.cap
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &u32)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &Q) -> u32 {
        self.terms.get(e).copied().unwrap_or(0)
    }

    /// True when no term is known below the cap.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest denominator exponent among the terms.
    pub fn depth(&self) -> u32 {
        self.terms.keys().map(|e| den_exp(self.p.get(), e)).max().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<(Q, u32)> {
        self.terms.iter().next().map(|(e, c)| (*e, *c))
    }

    /// Lowest exponent, or the cap when the element vanishes at its cap.
    pub fn val(&self) -> ExtVal {
        ExtVal::Finite(self.val_q())
    }

    pub(crate) fn val_q(&self) -> Q {
        self.leading().map(|(e, _)| e).unwrap_or(self.cap)
    }

    pub fn valuation(&self) -> Valuation {
        match self.leading() {
            Some((e, _)) => Valuation::exact(ExtVal::Finite(e)),
            None => Valuation::bound(ExtVal::Finite(self.cap)),
        }
    }

    /// Same element with the cap lowered to `min(cap, b)`.
    pub fn truncate(&self, b: Q) -> Self {
        let mut f = self.clone();
        if b < f.cap {
            f.cap = b;
            f.normalize();
        }
        f
    }

    /// Equality modulo the smaller of the two caps.
    pub fn same(&self, other: &Self) -> bool {
        let b = self.cap.min(other.cap);
        self.p == other.p && self.truncate(b).terms == other.truncate(b).terms
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixed primes");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let p = self.p.get() as u32;
        let cap = self.cap.min(other.cap);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let slot = terms.entry(*e).or_insert(0);
            *slot = add_mod(*slot, *c, p);
        }
        Self::from_map(self.p, terms, cap)
    }

    pub fn neg(&self) -> Self {
        let p = self.p.get() as u32;
        let terms = self.terms.iter().map(|(e, c)| (*e, sub_mod(0, *c, p))).collect();
        Self::from_map(self.p, terms, self.cap)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplication by an integer.
    pub fn scale(&self, c: i64) -> Self {
        let p = self.p.get() as i64;
        let c = c.rem_euclid(p) as u64;
        let terms = self.terms.iter().map(|(e, x)| (*e, ((*x as u64 * c) % p as u64) as u32)).collect();
        Self::from_map(self.p, terms, self.cap)
    }

    /// Multiplication by `X^e`, exact.
    pub fn shift(&self, e: Q) -> Self {
        den_exp(self.p.get(), &e);
        let terms = self.terms.iter().map(|(x, c)| (*x + e, *c)).collect();
        Self::from_map(self.p, terms, self.cap + e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_trunc(other, None)
    }

    /// Product computed only below `limit` (the cap is lowered accordingly).
    pub fn mul_trunc(&self, other: &Self, limit: Option<Q>) -> Self {
        self.check(other);
        let (vf, vg) = (self.val_q(), other.val_q());
        let mut cap = (self.cap + vg).min(other.cap + vf);
        if let Some(l) = limit {
            cap = cap.min(l);
        }
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p, cap);
        }
        let p = self.p.get();
        let d = self.depth().max(other.depth());
        let scale = ppow(p, d);
        let idx = |e: &Q| -> i64 { (*e * scale).to_integer() };
        let start = idx(&vf) + idx(&vg);
        let end = (cap * scale).ceil().to_integer();
        if end <= start {
            return Self::zero(self.p, cap);
        }
        let (small, big) = if self.terms.len() <= other.terms.len() { (self, other) } else { (other, self) };
        let bigv: Vec<(i64, u64)> = big.terms.iter().map(|(e, c)| (idx(e), *c as u64)).collect();
        let mut acc = vec![0u64; (end - start) as usize];
        let mut pending = 0u64;
        let limit_acc = u64::MAX / ((p - 1) * (p - 1)).max(1) - 1;
        for (e1, c1) in &small.terms {
            let i1 = idx(e1);
            let c1 = *c1 as u64;
            for &(i2, c2) in &bigv {
                let k = i1 + i2;
                if k >= end {
                    break;
                }
                acc[(k - start) as usize] += c1 * c2;
            }
            pending += 1;
            if pending >= limit_acc {
                acc.iter_mut().for_each(|a| *a %= p);
                pending = 0;
            }
        }
        let terms = acc
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| {
                let c = (a % p) as u32;
                (c != 0).then(|| (Q::new(start + i as i64, scale), c))
            })
            .collect();
        Self::from_map(self.p, terms, cap)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Multiplicative inverse up to the cap `B − 2·val(f)`.
    pub fn invert(&self) -> Result<Self> {
        let (v, c) = self
            .leading()
            .ok_or_else(|| Error::NotInvertible(format!("no term below cap {}", self.cap)))?;
        let p = self.p.get();
        let pu = p as u32;
        let d = self.depth();
        let scale = ppow(p, d);
        let rel = self.cap - v;
        let len = (rel * scale).ceil().to_integer() as usize;
        let cinv = inv_mod(c, pu);
        let vi = (v * scale).to_integer();
        let mut u = vec![0u32; len.max(1)];
        for (e, x) in &self.terms {
            let i = ((*e * scale).to_integer() - vi) as usize;
            if i < len {
                u[i] = ((*x as u64 * cinv as u64) % p) as u32;
            }
        }
        let inv = dense::inverse_series(pu, &u, len);
        let cap = self.cap - v - v;
        let terms = inv
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| (Q::new(i as i64 - vi, scale), ((x as u64 * cinv as u64) % p) as u32))
            .collect();
        Ok(Self::from_map(self.p, terms, cap))
    }

    /// Integer power; negative exponents go through [`PerfLaurent::invert`].
    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.invert()?.pow(-k);
        }
        self.pow_trunc(k as u64, None)
    }

    pub(crate) fn pow_trunc(&self, k: u64, limit: Option<Q>) -> Result<Self> {
        if k == 0 {
            let cap = limit.unwrap_or(self.cap - self.val_q()).max(Q::one());
            return Ok(Self::one(self.p, cap));
        }
        let p = self.p.get();
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            let digit = k % p;
            for _ in 0..digit {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul_trunc(&base, limit),
                });
            }
            k /= p;
            if k > 0 {
                base = base.frobenius();
            }
        }
        Ok(result.expect("k > 0"))
    }

    /// `f ↦ f^p`: exponents and cap multiplied by p.
    pub fn frobenius(&self) -> Self {
        let p = Q::from_integer(self.p.get() as i64);
        let terms = self.terms.iter().map(|(e, c)| (*e * p, *c)).collect();
        PerfLaurent { p: self.p, terms, cap: self.cap * p }
    }

    /// `f ↦ f^{1/p}`: exponents and cap divided by p.
    pub fn frobenius_inverse(&self) -> Self {
        let p = Q::from_integer(self.p.get() as i64);
        let terms = self.terms.iter().map(|(e, c)| (*e / p, *c)).collect();
        PerfLaurent { p: self.p, terms, cap: self.cap / p }
    }

    /// `φ^r` for any integer `r`.
    pub fn frobenius_pow(&self, r: i64) -> Self {
        let p = Q::from_integer(self.p.get() as i64);
        let f = if r >= 0 { p.pow(r as i32) } else { Q::one() / p.pow((-r) as i32) };
        let terms = self.terms.iter().map(|(e, c)| (*e * f, *c)).collect();
        PerfLaurent { p: self.p, terms, cap: self.cap * f }
    }

    /// The unique `g` with `g^p = f`.
    pub fn pth_root(&self) -> Self {
        self.frobenius_inverse()
    }

    /// `f(g)` for `val(g) > 0`; an exponent `k/p^m` of `f` is read as
    /// `(g^{1/p^m})^k`.
    pub fn substitute(&self, g: &Self) -> Result<Self> {
        self.check(g);
        let vg = g.val_q();
        if vg <= Q::zero() {
            return Err(Error::Domain(format!("substitution needs val(g) > 0, got {vg}")));
        }
        let d = self.depth();
        let r = g.frobenius_pow(-(d as i64));
        let scale = Q::from_integer(ppow(self.p.get(), d));
        let vr = r.val_q();
        let kf = (self.cap * scale).ceil();
        let mut cap = kf * vr;
        for e in self.terms.keys() {
            let k = *e * scale;
            if !k.is_zero() {
                if r.is_zero() && k < Q::zero() {
                    return Err(Error::NotInvertible("substituting a vanishing series".into()));
                }
                cap = cap.min(r.cap + (k - Q::one()) * vr);
            }
        }
        if let Some((e0, _)) = self.leading() {
            if cap <= e0 * scale * vr {
                return Err(Error::CapExhausted(format!(
                    "substitution determines nothing below {cap}"
                )));
            }
        }
        let mut out = Self::zero(self.p, cap);
        let mut pos: Option<(i64, Self)> = None;
        let mut negs: Vec<(i64, u32)> = Vec::new();
        for (e, c) in &self.terms {
            let k = (*e * scale).to_integer();
            if k < 0 {
                negs.push((k, *c));
                continue;
            }
            let pk = match pos.take() {
                None => r.pow_trunc(k as u64, Some(cap))?,
                Some((k0, prev)) => prev.mul_trunc(&r.pow_trunc((k - k0) as u64, Some(cap))?, Some(cap)),
            };
            out = out.add(&pk.scale(*c as i64).truncate(cap));
            pos = Some((k, pk));
        }
        if !negs.is_empty() {
            let rinv = r.invert()?;
            for (k, c) in negs {
                let pk = rinv.pow_trunc((-k) as u64, Some(cap))?;
                out = out.add(&pk.scale(c as i64).truncate(cap));
            }
        }
        Ok(out.truncate(cap))
    }

    /// Keeps exactly the terms with exponent in `p^{-n}Z`.
    pub fn monomial_projection(&self, n: u32) -> Self {
        let p = self.p.get();
        let terms = self.terms.iter().filter(|(e, _)| den_exp(p, e) <= n).map(|(e, c)| (*e, *c)).collect();
        PerfLaurent { p: self.p, terms, cap: self.cap }
    }

    /// `γ_a` acting by `X ↦ (1+X)^a − 1`.
    pub fn gamma_act(&self, a: &PadicInt) -> Result<Self> {
        gamma::gamma_act(a, self)
    }
}

impl fmt::Display for PerfLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::pretty(self))
    }
}

impl PerfLaurent {
    /// Canonical text form `c*X^(e) + … + O(X^(B))`.
    pub fn to_text(&self) -> String {
        text::serialize(self)
    }

    pub fn from_text(p: Prime, s: &str) -> Result<Self> {
        text::parse(p, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn monomial_products() {
        let x = PerfLaurent::x(p(2), qi(10));
        let h = PerfLaurent::monomial(p(2), 1, q(1, 2), qi(10));
        let prod = x.mul(&h);
        assert_eq!(prod.terms().collect::<Vec<_>>(), vec![(&q(3, 2), &1)]);
        assert_eq!(prod.cap(), q(21, 2));
    }

    #[test]
    fn geometric_inverse() {
        for pr in [2u64, 3, 5] {
            let f = PerfLaurent::from_terms(p(pr), [(qi(0), 1), (qi(1), 1)], qi(8));
            let g = f.invert().unwrap();
            for j in 0..8 {
                let expect = if j % 2 == 0 { 1 } else { (pr - 1) as u32 };
                assert_eq!(g.coeff(&qi(j)), expect);
            }
            assert!(f.mul(&g).same(&PerfLaurent::one(p(pr), qi(8))));
        }
    }

    #[test]
    fn laurent_inverse() {
        let f = PerfLaurent::from_terms(p(3), [(q(-1, 3), 2), (qi(1), 1)], qi(5));
        let g = f.invert().unwrap();
        assert_eq!(g.val(), ExtVal::Finite(q(1, 3)));
        assert!(f.mul(&g).same(&PerfLaurent::one(p(3), qi(100))));
    }

    #[test]
    fn additive_inverse() {
        let f = PerfLaurent::from_terms(p(5), [(q(1, 5), 3), (qi(2), 4)], qi(4));
        let z = f.add(&f.neg());
        assert!(z.is_zero());
        assert_eq!(z.val(), ExtVal::Finite(qi(4)));
    }

    #[test]
    fn frobenius_and_roots() {
        let h = PerfLaurent::monomial(p(2), 1, q(1, 2), qi(4));
        assert_eq!(h.frobenius().leading(), Some((qi(1), 1)));
        let x = PerfLaurent::x(p(3), qi(4));
        assert_eq!(x.frobenius_inverse().leading(), Some((q(1, 3), 1)));
        let one_plus = PerfLaurent::from_terms(p(3), [(qi(0), 1), (qi(1), 1)], qi(9));
        let r = one_plus.pth_root();
        assert_eq!(r.terms().count(), 2);
        assert_eq!(r.coeff(&q(1, 3)), 1);
        assert!(r.pow(3).unwrap().same(&one_plus));
    }

    #[test]
    fn substitution() {
        let x2 = PerfLaurent::monomial(p(3), 1, qi(2), qi(10));
        let g = PerfLaurent::from_terms(p(3), [(qi(1), 1), (qi(2), 1)], qi(10));
        let s = x2.substitute(&g).unwrap();
        assert_eq!(s.coeff(&qi(2)), 1);
        assert_eq!(s.coeff(&qi(3)), 2);
        assert_eq!(s.coeff(&qi(4)), 1);
        assert_eq!(s.num_terms(), 3);
        let f = PerfLaurent::from_terms(p(3), [(qi(0), 2), (q(1, 3), 1), (qi(2), 1)], qi(6));
        let xx = PerfLaurent::x(p(3), qi(50));
        assert!(f.substitute(&xx).unwrap().same(&f));
        let one = PerfLaurent::one(p(3), qi(3));
        assert!(one.substitute(&g).unwrap().same(&PerfLaurent::one(p(3), qi(3))));
    }

    #[test]
    fn projection() {
        let f = PerfLaurent::from_terms(p(2), [(qi(1), 1), (q(1, 2), 1)], qi(4));
        let r = f.monomial_projection(0);
        assert_eq!(r.terms().collect::<Vec<_>>(), vec![(&qi(1), &1)]);
        assert_eq!(f.monomial_projection(1), f);
    }
}
