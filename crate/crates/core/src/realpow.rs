//! Exact sign decisions for sums `c + Σ c_i p^{x_i}` with rational `x_i`.
//!
//! Terms are grouped by the fractional part of the exponent. The numbers
//! `p^{i/B}` for `0 ≤ i < B` are linearly independent over `Q`, so a sum is
//! zero only when every fractional group cancels; otherwise dyadic interval
//! refinement built on integer `n`-th roots eventually separates it from 0.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Q;

fn big_q(x: &Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn pow_int(p: u64, e: i64) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// Sign of `constant + Σ coef · p^exp`.
pub fn sign_pow_sum(p: u64, constant: &Q, terms: &[(Q, Q)]) -> Ordering {
    let mut c0 = big_q(constant);
    let mut groups: BTreeMap<Q, BigRational> = BTreeMap::new();
    for (coef, exp) in terms {
        if coef.is_zero() {
            continue;
        }
        let fl = exp.floor();
        let frac = exp - fl;
        let scaled = big_q(coef) * pow_int(p, fl.to_integer());
        if frac.is_zero() {
            c0 += scaled;
        } else {
            *groups.entry(frac).or_insert_with(BigRational::zero) += scaled;
        }
    }
    groups.retain(|_, c| !c.is_zero());
    if groups.is_empty() {
        return c0.cmp(&BigRational::zero());
    }
    let mut bits: u64 = 16;
    loop {
        let mut lo = c0.clone();
        let mut hi = c0.clone();
        let scale = BigRational::from_integer(BigInt::one() << bits);
        for (frac, coef) in &groups {
            let a = *frac.numer() as u32;
            let b = *frac.denom() as u32;
            let radicand = BigUint::from(p).pow(a) << (bits as usize * b as usize);
            let r = radicand.nth_root(b);
            let r_lo = BigRational::from_integer(BigInt::from(r.clone())) / &scale;
            let r_hi = BigRational::from_integer(BigInt::from(r + 1u32)) / &scale;
            if coef.is_positive() {
                lo += coef * &r_lo;
                hi += coef * &r_hi;
            } else {
                lo += coef * &r_hi;
                hi += coef * &r_lo;
            }
        }
        if lo.is_positive() {
            return Ordering::Greater;
        }
        if hi.is_negative() {
            return Ordering::Less;
        }
        bits *= 2;
        assert!(bits <= 1 << 20, "interval refinement did not separate a nonzero sum");
    }
}

/// Compares `p^x` with `y`.
pub fn pow_cmp(p: u64, x: &Q, y: &Q) -> Ordering {
    sign_pow_sum(p, &-*y, &[(Q::one(), *x)])
}

/// Compares `p^x` with `p^y + c`.
pub fn pow_cmp_pow(p: u64, x: &Q, y: &Q, c: &Q) -> Ordering {
    sign_pow_sum(p, &-*c, &[(Q::one(), *x), (-Q::one(), *y)])
}

/// `⌊p^x · n⌋`, exact.
pub fn floor_pow_mul(p: u64, x: &Q, n: i64) -> i64 {
    if n == 0 {
        return 0;
    }
    let xf = x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap();
    let est = ((p as f64).powf(xf) * n as f64).floor();
    let mut k = if est.is_finite() { est as i64 } else { 0 };
    let nq = Q::from_integer(n);
    let cmp_at = |k: i64| sign_pow_sum(p, &Q::from_integer(-k), &[(nq, *x)]);
    while cmp_at(k) == Ordering::Less {
        k -= 1;
    }
    while cmp_at(k + 1) != Ordering::Less {
        k += 1;
    }
    k
}

/// Smallest multiple of `1/den` that is `≥ p^x`.
pub fn ceil_pow(p: u64, x: &Q, den: i64) -> Q {
    let f = floor_pow_mul(p, x, den);
    let exact = sign_pow_sum(p, &Q::from_integer(-f), &[(Q::from_integer(den), *x)]) == Ordering::Equal;
    Q::new(if exact { f } else { f + 1 }, den)
}

/// Largest multiple of `1/den` that is `≤ p^x`.
pub fn floor_pow(p: u64, x: &Q, den: i64) -> Q {
    Q::new(floor_pow_mul(p, x, den), den)
}
