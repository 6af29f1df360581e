//! Valued modules: the coefficient spaces of Mahler expansions.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{binom_mod_p, binom_padic, PadicInt, Prime};
use crate::rational::{fmt_q, ExtVal, Valuation, Q};
use crate::series::PerfLaurent;
use crate::witt::{carry_law, WittElem};

/// A module over `Z_p` with a valuation and a finite working precision.
pub trait ValuedModule: Clone + Debug {
    type Elem: Clone + Debug + PartialEq;

    fn prime(&self) -> Prime;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn scale_int(&self, c: &BigInt, a: &Self::Elem) -> Self::Elem;
    fn scale_padic(&self, c: &PadicInt, a: &Self::Elem) -> Result<Self::Elem>;
    fn val(&self, a: &Self::Elem) -> Valuation;
    /// Equality at the shared working precision.
    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// Valuation of `p·1`, used by continuity estimates.
    fn val_of_p(&self) -> ExtVal;
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem>;
    fn descriptor(&self) -> ModuleDesc;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    /// `binom(z, j)` at the precision this module needs.
    fn binom_scalar(&self, z: &PadicInt, j: u64) -> Result<PadicInt> {
        binom_padic(z, j)
    }
}

/// Serializable description of a module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModuleDesc {
    Padic { prime: Prime, precision: u32 },
    Series { prime: Prime, cap: String },
    Witt { prime: Prime, length: usize, cap: String, r: String },
}

/// `Z_p` at absolute precision `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicModule {
    pub p: Prime,
    pub prec: u32,
}

impl PadicModule {
    pub fn new(p: Prime, prec: u32) -> Self {
        PadicModule { p, prec }
    }

    pub fn elem(&self, v: i64) -> PadicInt {
        PadicInt::from_i64(self.p, v, self.prec)
    }
}

impl ValuedModule for PadicModule {
    type Elem = PadicInt;

    fn prime(&self) -> Prime {
        self.p
    }

    fn zero(&self) -> PadicInt {
        PadicInt::zero(self.p, self.prec)
    }

    fn add(&self, a: &PadicInt, b: &PadicInt) -> PadicInt {
        a.add(b)
    }

    fn neg(&self, a: &PadicInt) -> PadicInt {
        a.neg()
    }

    fn scale_int(&self, c: &BigInt, a: &PadicInt) -> PadicInt {
        a.mul(&PadicInt::new(self.p, c, a.precision()))
    }

    fn scale_padic(&self, c: &PadicInt, a: &PadicInt) -> Result<PadicInt> {
        Ok(a.mul(c))
    }

    fn val(&self, a: &PadicInt) -> Valuation {
        if a.is_zero() {
            Valuation::bound(a.val())
        } else {
            Valuation::exact(a.val())
        }
    }

    fn same(&self, a: &PadicInt, b: &PadicInt) -> bool {
        a.same(b)
    }

    fn val_of_p(&self) -> ExtVal {
        ExtVal::int(1)
    }

    fn format(&self, a: &PadicInt) -> String {
        a.to_string()
    }

    fn parse(&self, s: &str) -> Result<PadicInt> {
        PadicInt::from_str_with(self.p, s)
    }

    fn descriptor(&self) -> ModuleDesc {
        ModuleDesc::Padic { prime: self.p, precision: self.prec }
    }
}

/// `Ẽ` truncated at a fixed cap, as an `F_p`-module (so `p` acts as 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesModule {
    pub p: Prime,
    pub cap: Q,
}

impl SeriesModule {
    pub fn new(p: Prime, cap: Q) -> Self {
        SeriesModule { p, cap }
    }
}

impl ValuedModule for SeriesModule {
    type Elem = PerfLaurent;

    fn prime(&self) -> Prime {
        self.p
    }

    fn zero(&self) -> PerfLaurent {
        PerfLaurent::zero(self.p, self.cap)
    }

    fn add(&self, a: &PerfLaurent, b: &PerfLaurent) -> PerfLaurent {
        a.add(b)
    }

    fn neg(&self, a: &PerfLaurent) -> PerfLaurent {
        a.neg()
    }

    fn scale_int(&self, c: &BigInt, a: &PerfLaurent) -> PerfLaurent {
        let r = c.mod_floor(&self.p.big()).to_i64().unwrap();
        a.scale(r)
    }

    fn scale_padic(&self, c: &PadicInt, a: &PerfLaurent) -> Result<PerfLaurent> {
        if c.precision() == 0 {
            return Err(Error::InsufficientPrecision("scalar known modulo 1".into()));
        }
        Ok(a.scale(c.mod_p() as i64))
    }

    fn binom_scalar(&self, z: &PadicInt, j: u64) -> Result<PadicInt> {
        Ok(PadicInt::from_i64(self.p, binom_mod_p(z, j)? as i64, 1))
    }

    fn val(&self, a: &PerfLaurent) -> Valuation {
        a.valuation()
    }

    fn same(&self, a: &PerfLaurent, b: &PerfLaurent) -> bool {
        a.same(b)
    }

    fn val_of_p(&self) -> ExtVal {
        ExtVal::Infinity
    }

    fn format(&self, a: &PerfLaurent) -> String {
        a.to_text()
    }

    fn parse(&self, s: &str) -> Result<PerfLaurent> {
        PerfLaurent::from_text(self.p, s)
    }

    fn descriptor(&self) -> ModuleDesc {
        ModuleDesc::Series { prime: self.p, cap: fmt_q(&self.cap) }
    }
}

/// `W_n(Ẽ)` with every digit known modulo `X^B`, valued by `val_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittModule {
    pub p: Prime,
    pub n: usize,
    pub cap: Q,
    pub r: Q,
}

impl WittModule {
    pub fn new(p: Prime, n: usize, cap: Q, r: Q) -> Result<Self> {
        carry_law(p, n)?;
        if r <= Q::zero() {
            return Err(Error::Domain(format!("val_r needs r > 0, got {r}")));
        }
        Ok(WittModule { p, n, cap, r })
    }

    fn modulus(&self) -> BigInt {
        self.p.pow(self.n as u32)
    }
}

impl ValuedModule for WittModule {
    type Elem = WittElem;

    fn prime(&self) -> Prime {
        self.p
    }

    fn zero(&self) -> WittElem {
        WittElem::zero(self.p, self.n, self.cap)
    }

    fn add(&self, a: &WittElem, b: &WittElem) -> WittElem {
        a.add(b).expect("length checked at construction")
    }

    fn neg(&self, a: &WittElem) -> WittElem {
        a.neg().expect("length checked at construction")
    }

    fn scale_int(&self, c: &BigInt, a: &WittElem) -> WittElem {
        let r = c.mod_floor(&self.modulus()).to_i64().unwrap();
        a.scale_int(r).expect("length checked at construction")
    }

    fn scale_padic(&self, c: &PadicInt, a: &WittElem) -> Result<WittElem> {
        if c.precision() < self.n as u32 {
            return Err(Error::InsufficientPrecision(format!("scalar {c} on W_{}", self.n)));
        }
        Ok(self.scale_int(c.residue(), a))
    }

    fn val(&self, a: &WittElem) -> Valuation {
        a.val_r(&self.r)
    }

    fn same(&self, a: &WittElem, b: &WittElem) -> bool {
        a.same(b)
    }

    fn val_of_p(&self) -> ExtVal {
        if self.n > 1 {
            ExtVal::Finite(Q::one() / self.r)
        } else {
            ExtVal::Infinity
        }
    }

    fn format(&self, a: &WittElem) -> String {
        a.to_text()
    }

    fn parse(&self, s: &str) -> Result<WittElem> {
        let w = WittElem::from_text(s)?;
        if w.prime() != self.p || w.len() != self.n {
            return Err(Error::Mismatch(format!("expected W{}@p={}", self.n, self.p)));
        }
        Ok(w)
    }

    fn descriptor(&self) -> ModuleDesc {
        ModuleDesc::Witt { prime: self.p, length: self.n, cap: fmt_q(&self.cap), r: fmt_q(&self.r) }
    }
}
