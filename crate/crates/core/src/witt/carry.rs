//! Witt structure polynomials from the ghost equations.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::Prime;

/// Exponent vector of a monomial.
pub type Mono = Vec<u32>;

/// Integer polynomial in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Mono, BigInt>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        Poly { nvars, terms: BTreeMap::from([(m, BigInt::one())]) }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        Poly { nvars, terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(BigInt::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { nvars: self.nvars, terms }
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        let mut terms: BTreeMap<Mono, BigInt> = self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect();
        terms.retain(|_, c| !c.is_zero());
        Poly { nvars: self.nvars, terms }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut terms: BTreeMap<Mono, BigInt> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Mono = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                *terms.entry(m).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { nvars: self.nvars, terms }
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut result = Poly::constant(self.nvars, BigInt::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact division by an integer; `None` if some coefficient is not divisible.
    pub fn div_exact(&self, k: &BigInt) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            terms.insert(m.clone(), q);
        }
        Some(Poly { nvars: self.nvars, terms })
    }

    /// Substitutes integer values for all variables.
    pub fn eval_int(&self, vals: &[BigInt]) -> BigInt {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter().zip(vals).fold(c.clone(), |acc, (e, v)| acc * v.pow(*e))
            })
            .sum()
    }

    /// Coefficients reduced mod p, zeros dropped.
    pub fn reduce(&self, p: u64) -> Vec<(Mono, u32)> {
        let pb = BigInt::from(p);
        self.terms
            .iter()
            .filter_map(|(m, c)| {
                let r = c.mod_floor(&pb).to_u32().unwrap();
                (r != 0).then(|| (m.clone(), r))
            })
            .collect()
    }
}

/// Ghost component `w_k = Σ_{i ≤ k} p^i x_{off+i}^{p^{k−i}}`.
pub fn ghost(p: u64, k: usize, nvars: usize, off: usize) -> Poly {
    let mut w = Poly::zero(nvars);
    for i in 0..=k {
        let term = Poly::var(nvars, off + i).pow(p.pow((k - i) as u32)).scale(&BigInt::from(p).pow(i as u32));
        w = w.add(&term);
    }
    w
}

/// Universal addition, multiplication and negation polynomials for `W_n`.
///
/// Variables `0..n` are the digits of the first operand, `n..2n` those of the
/// second. Negation uses only the first block.
#[derive(Debug)]
pub struct CarryLaw {
    pub p: Prime,
    pub n: usize,
    pub add: Vec<Poly>,
    pub mul: Vec<Poly>,
    pub neg: Vec<Poly>,
    pub(crate) add_red: Vec<Vec<(Mono, u32)>>,
    pub(crate) mul_red: Vec<Vec<(Mono, u32)>>,
    pub(crate) neg_red: Vec<Vec<(Mono, u32)>>,
}

/// Maximal supported Witt length.
pub const MAX_LENGTH: usize = 4;

fn solve(p: u64, n: usize, rhs: impl Fn(usize) -> Poly) -> Vec<Poly> {
    let nvars = 2 * n;
    let mut out: Vec<Poly> = Vec::with_capacity(n);
    for k in 0..n {
        let mut r = rhs(k);
        for (i, s) in out.iter().enumerate() {
            let t = s.pow(p.pow((k - i) as u32)).scale(&BigInt::from(p).pow(i as u32));
            r = r.sub(&t);
        }
        let pk = BigInt::from(p).pow(k as u32);
        let s = r.div_exact(&pk).expect("ghost equations divide exactly");
        debug_assert_eq!(s.nvars, nvars);
        out.push(s);
    }
    out
}

impl CarryLaw {
    fn build(p: Prime, n: usize) -> CarryLaw {
        let pp = p.get();
        let nv = 2 * n;
        let add = solve(pp, n, |k| ghost(pp, k, nv, 0).add(&ghost(pp, k, nv, n)));
        let mul = solve(pp, n, |k| ghost(pp, k, nv, 0).mul(&ghost(pp, k, nv, n)));
        let neg = solve(pp, n, |k| ghost(pp, k, nv, 0).scale(&BigInt::from(-1)));
        let red = |v: &Vec<Poly>| v.iter().map(|q| q.reduce(pp)).collect();
        CarryLaw {
            p,
            n,
            add_red: red(&add),
            mul_red: red(&mul),
            neg_red: red(&neg),
            add,
            mul,
            neg,
        }
    }
}

type Cache = Mutex<HashMap<(u64, usize), Arc<CarryLaw>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The carry law of length `n`, computed once per `(p, n)` and shared.
pub fn carry_law(p: Prime, n: usize) -> Result<Arc<CarryLaw>> {
    if n == 0 || n > MAX_LENGTH {
        return Err(Error::Unsupported(format!("Witt length {n} outside 1..={MAX_LENGTH}")));
    }
    if n == MAX_LENGTH && p.get() > 3 {
        return Err(Error::Unsupported(format!("Witt length {n} is limited to p ≤ 3")));
    }
    if let Some(law) = cache().lock().unwrap().get(&(p.get(), n)) {
        return Ok(law.clone());
    }
    let law = Arc::new(CarryLaw::build(p, n));
    let mut guard = cache().lock().unwrap();
    Ok(guard.entry((p.get(), n)).or_insert(law).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn length_one() {
        let law = carry_law(p(5), 1).unwrap();
        assert_eq!(law.add[0], Poly::var(2, 0).add(&Poly::var(2, 1)));
        assert_eq!(law.mul[0], Poly::var(2, 0).mul(&Poly::var(2, 1)));
    }

    #[test]
    fn s1_for_p2() {
        let law = carry_law(p(2), 2).unwrap();
        let a0 = Poly::var(4, 0);
        let a1 = Poly::var(4, 1);
        let b0 = Poly::var(4, 2);
        let b1 = Poly::var(4, 3);
        let expect = a1.add(&b1).sub(&a0.mul(&b0));
        assert_eq!(law.add[1], expect);
    }

    /// Symbolic oracle: ghost components of the structure polynomials.
    #[test]
    fn ghost_identities() {
        for pr in [2u64, 3, 5] {
            for n in 1..=3usize {
                let law = carry_law(p(pr), n).unwrap();
                let nv = 2 * n;
                for k in 0..n {
                    let lhs_add = ghost_of(pr, k, &law.add, nv);
                    assert_eq!(lhs_add, ghost(pr, k, nv, 0).add(&ghost(pr, k, nv, n)));
                    let lhs_mul = ghost_of(pr, k, &law.mul, nv);
                    assert_eq!(lhs_mul, ghost(pr, k, nv, 0).mul(&ghost(pr, k, nv, n)));
                    let lhs_neg = ghost_of(pr, k, &law.neg, nv);
                    assert_eq!(lhs_neg, ghost(pr, k, nv, 0).scale(&BigInt::from(-1)));
                }
            }
        }
    }

    fn ghost_of(p: u64, k: usize, s: &[Poly], nv: usize) -> Poly {
        let mut w = Poly::zero(nv);
        for i in 0..=k {
            w = w.add(&s[i].pow(p.pow((k - i) as u32)).scale(&BigInt::from(p).pow(i as u32)));
        }
        w
    }

    #[test]
    fn integer_witt_vectors() {
        // Over Z, the Witt vector with ghost components (2,2,2) of 1+1 for p=2.
        let law = carry_law(p(2), 3).unwrap();
        let one = [BigInt::one(), BigInt::zero(), BigInt::zero()];
        let vals: Vec<BigInt> = one.iter().chain(one.iter()).cloned().collect();
        let s: Vec<BigInt> = law.add.iter().map(|q| q.eval_int(&vals)).collect();
        // 2 = (2, -1, ...) in W(Z) for p = 2: ghost w_1 = 4 - 2 = 2.
        assert_eq!(s[0], BigInt::from(2));
        assert_eq!(s[1], BigInt::from(-1));
    }

    #[test]
    fn length_limits() {
        assert!(carry_law(p(2), 0).is_err());
        assert!(carry_law(p(2), 5).is_err());
        assert!(carry_law(p(5), 4).is_err());
        assert!(carry_law(p(3), 4).is_ok());
    }
}
