//! Truncated p-typical Witt vectors over [`PerfLaurent`].
//!
//! A [`WittElem`] of length `n` holds Witt coordinates `(x_0, …, x_{n−1})`;
//! over the perfect base this is `Σ p^i [x_i^{1/p^i}]`. Ring laws come from the
//! universal polynomials of [`carry::CarryLaw`], evaluated mod p.

pub mod carry;

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{PadicInt, Prime};
use crate::rational::{ExtVal, Valuation, Q};
use crate::series::PerfLaurent;

pub use carry::{carry_law, CarryLaw, Poly, MAX_LENGTH};

/// Element of `W_n(Ẽ)` with per-digit caps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WittElem {
    p: Prime,
    digits: Vec<PerfLaurent>,
}

impl WittElem {
    pub fn new(digits: Vec<PerfLaurent>) -> Result<Self> {
        let p = digits.first().ok_or_else(|| Error::Domain("empty Witt vector".into()))?.prime();
        if digits.iter().any(|d| d.prime() != p) {
            return Err(Error::Mismatch("digits over different primes".into()));
        }
        carry_law(p, digits.len())?;
        Ok(WittElem { p, digits })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[PerfLaurent] {
        &self.digits
    }

    pub fn digit(&self, i: usize) -> &PerfLaurent {
        &self.digits[i]
    }

    /// Zero, with every digit known modulo `X^cap`.
    pub fn zero(p: Prime, n: usize, cap: Q) -> Self {
        WittElem { p, digits: (0..n).map(|_| PerfLaurent::zero(p, cap)).collect() }
    }

    pub fn one(p: Prime, n: usize, cap: Q) -> Self {
        Self::teichmuller(&PerfLaurent::one(p, cap), n)
    }

    /// `[x] = (x, 0, …, 0)`.
    pub fn teichmuller(x: &PerfLaurent, n: usize) -> Self {
        let p = x.prime();
        let mut digits = vec![x.clone()];
        digits.extend((1..n).map(|_| PerfLaurent::zero(p, x.cap())));
        WittElem { p, digits }
    }

    /// The image of an integer `c`.
    pub fn integer(p: Prime, n: usize, c: i64, cap: Q) -> Result<Self> {
        let one = Self::one(p, n, cap);
        let mut acc = Self::zero(p, n, cap);
        let mut base = one;
        let mut k = c.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.add(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.add(&base)?;
            }
        }
        if c < 0 {
            acc = acc.neg()?;
        }
        Ok(acc)
    }

    /// `T = [1 + X] − 1`.
    pub fn element_t(p: Prime, n: usize, cap: Q) -> Result<Self> {
        let one_plus_x = PerfLaurent::from_terms(p, [(Q::zero(), 1), (Q::one(), 1)], cap);
        Self::teichmuller(&one_plus_x, n).sub(&Self::one(p, n, cap))
    }

    fn law(&self) -> Result<std::sync::Arc<CarryLaw>> {
        carry_law(self.p, self.len())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.len() != other.len() {
            return Err(Error::Mismatch(format!(
                "W{}@p={} vs W{}@p={}",
                self.len(),
                self.p,
                other.len(),
                other.p
            )));
        }
        Ok(())
    }

    fn eval(polys: &[Vec<(carry::Mono, u32)>], vars: &[&PerfLaurent]) -> Result<Vec<PerfLaurent>> {
        let mut cache: HashMap<(usize, u32), PerfLaurent> = HashMap::new();
        polys.iter().map(|poly| eval_poly(poly, vars, &mut cache)).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let law = self.law()?;
        let vars: Vec<&PerfLaurent> = self.digits.iter().chain(other.digits.iter()).collect();
        Ok(WittElem { p: self.p, digits: Self::eval(&law.add_red, &vars)? })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let law = self.law()?;
        let vars: Vec<&PerfLaurent> = self.digits.iter().chain(other.digits.iter()).collect();
        Ok(WittElem { p: self.p, digits: Self::eval(&law.mul_red, &vars)? })
    }

    pub fn neg(&self) -> Result<Self> {
        let law = self.law()?;
        let vars: Vec<&PerfLaurent> = self.digits.iter().chain(self.digits.iter()).collect();
        Ok(WittElem { p: self.p, digits: Self::eval(&law.neg_red, &vars)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg()?)
    }

    /// Multiplication by an integer.
    pub fn scale_int(&self, c: i64) -> Result<Self> {
        let cap = self.base_cap();
        self.mul(&Self::integer(self.p, self.len(), c, cap)?)
    }

    /// The smallest digit cap.
    pub fn base_cap(&self) -> Q {
        self.digits.iter().map(|d| d.cap()).min().unwrap()
    }

    /// Integer power; negative exponents use [`WittElem::inverse`].
    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        let mut result = Self::one(self.p, self.len(), self.base_cap().max(Q::one()));
        let mut base = self.clone();
        let mut e = k as u64;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result.mul(&base)? };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Inverse via `u = [x_0](1 + z)` with `z ∈ pW`, so that
    /// `(1+z)^{-1} = Σ_{j<n} (−z)^j`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.len();
        let x0inv = self.digits[0].invert()?;
        let t = Self::teichmuller(&x0inv, n);
        let v = self.mul(&t)?;
        let one = Self::one(self.p, n, v.base_cap());
        let mz = one.sub(&v)?;
        let mut sum = one.clone();
        let mut pw = one;
        for _ in 1..n {
            pw = pw.mul(&mz)?;
            sum = sum.add(&pw)?;
        }
        sum.mul(&t)
    }

    /// First `k` digits: the reduction `W_n → W_k`.
    pub fn reduce(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.len() {
            return Err(Error::Domain(format!("cannot reduce length {} to {k}", self.len())));
        }
        Ok(WittElem { p: self.p, digits: self.digits[..k].to_vec() })
    }

    /// Reduction mod p.
    pub fn mod_p(&self) -> PerfLaurent {
        self.digits[0].clone()
    }

    pub fn phi(&self) -> Self {
        self.map(|d| d.frobenius())
    }

    pub fn phi_inverse(&self) -> Self {
        self.map(|d| d.frobenius_inverse())
    }

    pub fn phi_pow(&self, r: i64) -> Self {
        self.map(|d| d.frobenius_pow(r))
    }

    fn map(&self, f: impl Fn(&PerfLaurent) -> PerfLaurent) -> Self {
        WittElem { p: self.p, digits: self.digits.iter().map(f).collect() }
    }

    pub fn gamma_act(&self, a: &PadicInt) -> Result<Self> {
        let digits = self.digits.iter().map(|d| d.gamma_act(a)).collect::<Result<Vec<_>>>()?;
        Ok(WittElem { p: self.p, digits })
    }

    /// `min_i (i/r + val(x_i)/p^i)`: the Teichmüller digit `x_i^{1/p^i}` has
    /// valuation `val(x_i)/p^i`. Saturated when the minimum comes from a digit
    /// that vanished at its cap.
    pub fn val_r(&self, r: &Q) -> Valuation {
        assert!(*r > Q::zero(), "val_r needs r > 0");
        let mut best = Valuation::exact(ExtVal::Infinity);
        for (i, d) in self.digits.iter().enumerate() {
            let scale = Q::from_integer((self.p.get() as i64).pow(i as u32));
            let dv = d.valuation();
            let v = dv.value.finite().unwrap() / scale + Q::from_integer(i as i64) / r;
            let cand = Valuation { value: ExtVal::Finite(v), saturated: dv.saturated };
            best = best.min(cand);
        }
        best
    }

    /// Digitwise equality modulo the smaller caps.
    pub fn same(&self, other: &Self) -> bool {
        self.p == other.p
            && self.len() == other.len()
            && self.digits.iter().zip(&other.digits).all(|(a, b)| a.same(b))
    }

    /// Lowers every digit cap to at most `cap`.
    pub fn truncate(&self, cap: Q) -> Self {
        WittElem { p: self.p, digits: self.digits.iter().map(|d| d.truncate(cap)).collect() }
    }

    /// `W<n>@p=<p>[d_0 ; d_1 ; …]` with digits in the series text format.
    pub fn to_text(&self) -> String {
        let ds: Vec<String> = self.digits.iter().map(|d| d.to_text()).collect();
        format!("W{}@p={}[{}]", self.len(), self.p, ds.join(" ; "))
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let t = s.trim();
        let rest = t.strip_prefix('W').ok_or_else(|| Error::parse(0, "expected `W<n>@p=<p>[…]`"))?;
        let (n, rest) = rest.split_once("@p=").ok_or_else(|| Error::parse(1, "missing `@p=`"))?;
        let n: usize = n.parse().map_err(|_| Error::parse(1, format!("bad length `{n}`")))?;
        let (p, body) = rest.split_once('[').ok_or_else(|| Error::parse(0, "missing `[`"))?;
        let p = Prime::new(p.parse().map_err(|_| Error::parse(0, format!("bad prime `{p}`")))?)?;
        let body = body.strip_suffix(']').ok_or_else(|| Error::parse(t.len(), "missing `]`"))?;
        let digits = body.split(';').map(|d| PerfLaurent::from_text(p, d)).collect::<Result<Vec<_>>>()?;
        if digits.len() != n {
            return Err(Error::parse(0, format!("expected {n} digits, found {}", digits.len())));
        }
        Self::new(digits)
    }
}

impl fmt::Display for WittElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn power(
    cache: &mut HashMap<(usize, u32), PerfLaurent>,
    vars: &[&PerfLaurent],
    v: usize,
    e: u32,
) -> Result<PerfLaurent> {
    if let Some(x) = cache.get(&(v, e)) {
        return Ok(x.clone());
    }
    let x = vars[v].pow(e as i64)?;
    cache.insert((v, e), x.clone());
    Ok(x)
}

fn eval_poly(
    poly: &[(carry::Mono, u32)],
    vars: &[&PerfLaurent],
    cache: &mut HashMap<(usize, u32), PerfLaurent>,
) -> Result<PerfLaurent> {
    let p = vars[0].prime();
    let mut acc: Option<PerfLaurent> = None;
    for (mono, c) in poly {
        let mut term: Option<PerfLaurent> = None;
        for (v, &e) in mono.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let x = power(cache, vars, v, e)?;
            term = Some(match term {
                None => x,
                Some(t) => t.mul(&x),
            });
        }
        let term = term.unwrap_or_else(|| PerfLaurent::one(p, vars.iter().map(|d| d.cap()).max().unwrap()));
        let term = term.scale(*c as i64);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.unwrap_or_else(|| {
        // The polynomial is zero mod p: the digit is exactly zero, known to
        // the smallest operand cap.
        let cap = vars
            .iter()
            .map(|d| d.cap())
            .min()
            .unwrap_or_else(Q::one);
        PerfLaurent::zero(p, cap)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn p_times_teichmuller() {
        let x = PerfLaurent::from_terms(p(3), [(q(1, 3), 1), (qi(1), 2)], qi(4));
        let u = WittElem::teichmuller(&x, 3);
        let three = u.scale_int(3).unwrap();
        assert!(three.digit(0).is_zero());
        assert!(three.digit(1).same(&x.pow(3).unwrap()));
        assert!(three.digit(2).is_zero());
    }

    #[test]
    fn t_reduces_to_x() {
        for pr in [2u64, 3, 5] {
            let t = WittElem::element_t(p(pr), 1, qi(6)).unwrap();
            assert_eq!(t.mod_p(), PerfLaurent::x(p(pr), qi(6)));
            let t3 = WittElem::element_t(p(pr), 3, qi(6)).unwrap();
            assert_eq!(t3.mod_p(), PerfLaurent::x(p(pr), qi(6)));
        }
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        let x = PerfLaurent::from_terms(p(2), [(q(1, 2), 1), (qi(1), 1)], qi(5));
        let y = PerfLaurent::from_terms(p(2), [(qi(0), 1), (q(3, 4), 1)], qi(5));
        let lhs = WittElem::teichmuller(&x.mul(&y), 3);
        let rhs = WittElem::teichmuller(&x, 3).mul(&WittElem::teichmuller(&y, 3)).unwrap();
        assert!(lhs.same(&rhs));
    }

    #[test]
    fn inverse_of_one_plus_t() {
        let t = WittElem::element_t(p(3), 3, qi(5)).unwrap();
        let u = t.add(&WittElem::one(p(3), 3, qi(5))).unwrap();
        let inv = u.inverse().unwrap();
        assert!(u.mul(&inv).unwrap().same(&WittElem::one(p(3), 3, qi(50))));
    }

    #[test]
    fn val_r_normalization() {
        let r = q(1, 2);
        let tx = WittElem::teichmuller(&PerfLaurent::x(p(2), qi(6)), 3);
        assert_eq!(tx.val_r(&r).value, ExtVal::Finite(qi(1)));
        let two = WittElem::integer(p(2), 3, 2, qi(6)).unwrap();
        assert_eq!(two.val_r(&r).value, ExtVal::Finite(qi(2)));
        assert!(!two.val_r(&r).saturated);
    }

    #[test]
    fn text_round_trip() {
        let t = WittElem::element_t(p(2), 2, qi(4)).unwrap();
        let s = t.to_text();
        assert!(s.starts_with("W2@p=2["));
        assert_eq!(WittElem::from_text(&s).unwrap(), t);
    }
}
