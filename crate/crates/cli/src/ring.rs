//! Evaluation of expressions in `Ẽ` (series mode) or `W_n(Ẽ)` (Witt mode).

use lavec_core::analytic::GROUP_PRECISION;
use lavec_core::rational::Q;
use lavec_core::{Error, PadicInt, PerfLaurent, Prime, Result, WittElem};
use num_traits::{One, Zero};

use crate::expr::{Expr, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Series,
    Witt(usize),
}

#[derive(Clone, Debug)]
pub enum Value {
    Num(Q),
    Series(PerfLaurent),
    Witt(WittElem),
}

impl Value {
    pub fn pretty(&self) -> String {
        match self {
            Value::Num(q) => q.to_string(),
            Value::Series(f) => f.to_string(),
            Value::Witt(w) => {
                let ds: Vec<String> = w.digits().iter().map(|d| d.to_string()).collect();
                format!("W{}[{}]", w.len(), ds.join(" ; "))
            }
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            Value::Num(q) => q.to_string(),
            Value::Series(f) => f.to_text(),
            Value::Witt(w) => w.to_text(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Series(_) => "series",
            Value::Witt(_) => "witt",
        }
    }
}

pub struct Ring {
    pub p: Prime,
    pub cap: Q,
    pub mode: Mode,
}

fn at(pos: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        Error::Domain(msg) => Error::Domain(format!("at byte {pos}: {msg}")),
        other => other,
    }
}

impl Ring {
    fn series_mode(&self) -> Ring {
        Ring { p: self.p, cap: self.cap, mode: Mode::Series }
    }

    /// A rational constant with denominator prime to `p`, as a ring element.
    fn lift(&self, c: &Q) -> Result<Value> {
        let p = self.p.get() as i64;
        if c.denom() % p == 0 {
            return Err(Error::Domain(format!("{c} is not a p-adic integer")));
        }
        Ok(match self.mode {
            Mode::Series => {
                let d = PadicInt::from_i64(self.p, *c.denom(), 1).inverse()?;
                let n = PadicInt::from_i64(self.p, *c.numer(), 1);
                Value::Series(PerfLaurent::constant(self.p, n.mul(&d).mod_p() as i64, self.cap))
            }
            Mode::Witt(n) => {
                let num = WittElem::integer(self.p, n, *c.numer(), self.cap)?;
                let den = WittElem::integer(self.p, n, *c.denom(), self.cap)?;
                Value::Witt(if c.denom().is_one() { num } else { num.mul(&den.inverse()?)? })
            }
        })
    }

    fn element(&self, v: Value) -> Result<Value> {
        match v {
            Value::Num(c) => self.lift(&c),
            other => Ok(other),
        }
    }

    pub fn eval(&self, e: &Expr) -> Result<Value> {
        match e {
            Expr::Num(q) => Ok(Value::Num(*q)),
            Expr::Var(name, pos) => self.var(name, *pos),
            Expr::Neg(a) => match self.eval(a)? {
                Value::Num(q) => Ok(Value::Num(-q)),
                Value::Series(f) => Ok(Value::Series(f.neg())),
                Value::Witt(w) => Ok(Value::Witt(w.neg()?)),
            },
            Expr::Bin(op, a, b, pos) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.binary(*op, a, b).map_err(|e| at(*pos, e))
            }
            Expr::Pow(a, b, pos) => {
                let base = self.eval(a)?;
                match self.eval(b)? {
                    Value::Num(k) => self.power(base, &k).map_err(|e| at(*pos, e)),
                    other => Err(Error::Parse { pos: *pos, msg: format!("exponent must be a number, got {}", other.kind()) }),
                }
            }
            Expr::Call(name, args, pos) => self.call(name, args, *pos),
            Expr::Teich(inner, pos) => {
                let x = match self.series_mode().eval(inner)? {
                    Value::Num(c) => match self.series_mode().lift(&c)? {
                        Value::Series(f) => f,
                        _ => unreachable!(),
                    },
                    Value::Series(f) => f,
                    Value::Witt(_) => return Err(Error::Parse { pos: *pos, msg: "[·] takes a series".into() }),
                };
                Ok(match self.mode {
                    Mode::Series => Value::Series(x),
                    Mode::Witt(n) => Value::Witt(WittElem::teichmuller(&x, n)),
                })
            }
            Expr::ModP(inner, k, pos) => match self.element(self.eval(inner)?)? {
                Value::Witt(w) if *k == 1 => Ok(Value::Series(w.mod_p())),
                Value::Witt(w) => Ok(Value::Witt(w.reduce(*k as usize).map_err(|e| at(*pos, e))?)),
                Value::Series(f) => Ok(Value::Series(f)),
                Value::Num(_) => unreachable!(),
            },
        }
    }

    fn var(&self, name: &str, pos: usize) -> Result<Value> {
        let x = PerfLaurent::x(self.p, self.cap);
        Ok(match (name, self.mode) {
            ("X", Mode::Series) | ("T", Mode::Series) => Value::Series(x),
            ("X", Mode::Witt(n)) => Value::Witt(WittElem::teichmuller(&x, n)),
            ("T", Mode::Witt(n)) => Value::Witt(WittElem::element_t(self.p, n, self.cap)?),
            ("p", _) => Value::Num(Q::from_integer(self.p.get() as i64)),
            _ => return Err(Error::Parse { pos, msg: format!("unknown name `{name}`") }),
        })
    }

    fn binary(&self, op: Op, a: Value, b: Value) -> Result<Value> {
        if let (Value::Num(x), Value::Num(y)) = (&a, &b) {
            return match op {
                Op::Add => Ok(Value::Num(x + y)),
                Op::Sub => Ok(Value::Num(x - y)),
                Op::Mul => Ok(Value::Num(x * y)),
                Op::Div if y.is_zero() => Err(Error::NotInvertible("division by zero".into())),
                Op::Div => Ok(Value::Num(x / y)),
            };
        }
        let (a, b) = (self.element(a)?, self.element(b)?);
        Ok(match (a, b) {
            (Value::Series(f), Value::Series(g)) => Value::Series(match op {
                Op::Add => f.add(&g),
                Op::Sub => f.sub(&g),
                Op::Mul => f.mul(&g),
                Op::Div => f.mul(&g.invert()?),
            }),
            (Value::Witt(f), Value::Witt(g)) => Value::Witt(match op {
                Op::Add => f.add(&g)?,
                Op::Sub => f.sub(&g)?,
                Op::Mul => f.mul(&g)?,
                Op::Div => f.mul(&g.inverse()?)?,
            }),
            (a, b) => return Err(Error::Mismatch(format!("cannot combine {} with {}", a.kind(), b.kind()))),
        })
    }

    fn power(&self, base: Value, k: &Q) -> Result<Value> {
        if k.is_integer() {
            let k = k.to_integer();
            return Ok(match base {
                Value::Num(c) if k >= 0 => Value::Num(num_traits::pow(c, k as usize)),
                Value::Num(c) if c.is_zero() => return Err(Error::NotInvertible("0 to a negative power".into())),
                Value::Num(c) => Value::Num(num_traits::pow(c.recip(), k.unsigned_abs() as usize)),
                Value::Series(f) => Value::Series(f.pow(k)?),
                Value::Witt(w) => Value::Witt(w.pow(k)?),
            });
        }
        // x^{m/p^j} = φ^{-j}(x^m): in characteristic p every element has a
        // unique p-th root, on Witt vectors only Teichmüller elements do.
        let (m, mut d) = (*k.numer(), *k.denom());
        let mut j = 0;
        while d % self.p.get() as i64 == 0 {
            d /= self.p.get() as i64;
            j += 1;
        }
        if d != 1 {
            return Err(Error::Domain(format!("exponent {k} has a denominator prime to p")));
        }
        match base {
            Value::Series(f) => Ok(Value::Series(f.pow(m)?.frobenius_pow(-j))),
            Value::Witt(w) if w.digits()[1..].iter().all(|d| d.is_zero()) => Ok(Value::Witt(w.pow(m)?.phi_pow(-j))),
            _ => Err(Error::Domain(format!("fractional power {k} of a non-Teichmüller element"))),
        }
    }

    fn call(&self, name: &str, args: &[Expr], pos: usize) -> Result<Value> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse { pos, msg: format!("`{name}` takes {n} argument(s), got {}", args.len()) })
            }
        };
        match name {
            "phi" | "phiinv" => {
                arity(1)?;
                let inv = name == "phiinv";
                Ok(match self.eval(&args[0])? {
                    Value::Num(c) => Value::Num(c),
                    Value::Series(f) => Value::Series(if inv { f.frobenius_inverse() } else { f.frobenius() }),
                    Value::Witt(w) => Value::Witt(if inv { w.phi_inverse() } else { w.phi() }),
                })
            }
            "gamma" => {
                arity(2)?;
                let a = match self.eval(&args[0])? {
                    Value::Num(a) if a.is_integer() => a.to_integer(),
                    _ => return Err(Error::Parse { pos, msg: "gamma(a, ·) needs an integer a".into() }),
                };
                let a = PadicInt::from_i64(self.p, a, GROUP_PRECISION);
                Ok(match self.eval(&args[1])? {
                    Value::Num(c) => Value::Num(c),
                    Value::Series(f) => Value::Series(f.gamma_act(&a).map_err(|e| at(pos, e))?),
                    Value::Witt(w) => Value::Witt(w.gamma_act(&a).map_err(|e| at(pos, e))?),
                })
            }
            _ => Err(Error::Parse { pos, msg: format!("unknown function `{name}`") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use lavec_core::rational::qi;

    fn run(p: u64, mode: Mode, s: &str) -> String {
        let ring = Ring { p: Prime::new(p).unwrap(), cap: qi(8), mode };
        ring.eval(&parse(s).unwrap()).unwrap().pretty()
    }

    #[test]
    fn series_examples() {
        assert_eq!(run(2, Mode::Series, "gamma(3, X) - X"), "X^2 + X^3 + O(X^8)");
        assert_eq!(run(2, Mode::Series, "phi(phiinv(X))"), "X + O(X^8)");
        assert_eq!(run(3, Mode::Series, "X^(1/3) * X^(2/3)"), "X + O(X^(10/3))");
        assert_eq!(run(2, Mode::Series, "(1 + X)^(1/2)"), "1 + X^(1/2) + O(X^4)");
        assert_eq!(run(3, Mode::Series, "(1 + X)^2"), "1 + 2*X + X^2 + O(X^8)");
    }

    #[test]
    fn witt_examples() {
        assert_eq!(run(2, Mode::Witt(3), "T mod p"), "X + O(X^8)");
        assert_eq!(run(2, Mode::Witt(2), "phi(T) + 1 - (T + 1)^2"), "W2[O(X^8) ; O(X^8)]");
        assert_eq!(run(3, Mode::Witt(2), "[1 + X] - 1 - T"), "W2[O(X^8) ; O(X^8)]");
    }

    #[test]
    fn errors() {
        let ring = Ring { p: Prime::new(2).unwrap(), cap: qi(8), mode: Mode::Series };
        assert!(matches!(ring.eval(&parse("Y + 1").unwrap()), Err(Error::Parse { pos: 0, .. })));
        assert!(ring.eval(&parse("X^(1/3)").unwrap()).is_err());
        assert!(ring.eval(&parse("gamma(2, X)").unwrap()).is_err());
    }
}
