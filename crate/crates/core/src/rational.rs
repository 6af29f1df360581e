//! Exact rationals and extended valuations.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Exact rational used for exponents, caps, valuations and λ.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Formats a rational as `num/den`, or `num` when the denominator is 1.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    Q::from_str(t).map_err(|_| Error::parse(0, format!("bad rational `{t}`")))
}

pub fn ceil_q(x: &Q) -> i64 {
    x.ceil().to_integer()
}

pub fn floor_q(x: &Q) -> i64 {
    x.floor().to_integer()
}

/// A valuation: a rational number or `+inf`.
///
/// Variant order gives the total order with `Infinity` maximal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtVal {
    Finite(Q),
    Infinity,
}

impl ExtVal {
    pub fn int(n: i64) -> Self {
        ExtVal::Finite(qi(n))
    }

    pub fn finite(self) -> Option<Q> {
        match self {
            ExtVal::Finite(v) => Some(v),
            ExtVal::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ExtVal::Infinity
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn add_q(self, x: Q) -> Self {
        match self {
            ExtVal::Finite(v) => ExtVal::Finite(v + x),
            ExtVal::Infinity => ExtVal::Infinity,
        }
    }

    pub fn cmp_q(self, x: &Q) -> Ordering {
        match self {
            ExtVal::Finite(v) => v.cmp(x),
            ExtVal::Infinity => Ordering::Greater,
        }
    }
}

impl Add for ExtVal {
    type Output = ExtVal;
    fn add(self, rhs: ExtVal) -> ExtVal {
        match (self, rhs) {
            (ExtVal::Finite(a), ExtVal::Finite(b)) => ExtVal::Finite(a + b),
            _ => ExtVal::Infinity,
        }
    }
}

impl From<Q> for ExtVal {
    fn from(v: Q) -> Self {
        ExtVal::Finite(v)
    }
}

impl fmt::Display for ExtVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtVal::Finite(v) => write!(f, "{v}"),
            ExtVal::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtVal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "inf" || t == "+inf" {
            Ok(ExtVal::Infinity)
        } else {
            parse_q(t).map(ExtVal::Finite)
        }
    }
}

/// A valuation that may only be a lower bound because the element vanished
/// at its working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Valuation {
    pub value: ExtVal,
    pub saturated: bool,
}

impl Valuation {
    pub fn exact(value: ExtVal) -> Self {
        Valuation { value, saturated: false }
    }

    pub fn bound(value: ExtVal) -> Self {
        Valuation { value, saturated: true }
    }

    /// Minimum of two valuations; saturated only if the minimum came from a
    /// saturated side.
    pub fn min(self, other: Self) -> Self {
        match self.value.cmp(&other.value) {
            Ordering::Less => self,
            Ordering::Greater => other,
            Ordering::Equal => Valuation {
                value: self.value,
                saturated: self.saturated && other.saturated,
            },
        }
    }
}

pub(crate) fn is_power_of(p: u64, mut d: u64) -> Option<u32> {
    let mut m = 0;
    while d > 1 {
        if d % p != 0 {
            return None;
        }
        d /= p;
        m += 1;
    }
    if d == 1 {
        Some(m)
    } else {
        None
    }
}
