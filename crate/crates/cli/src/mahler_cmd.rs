//! `lavec mahler …`: coefficient files over any supported module.

use std::collections::HashMap;

use lavec_core::mahler::{check_cond2, mahler_coeffs, AnyMahler, FnOracle, MahlerFn};
use lavec_core::module::{PadicModule, ValuedModule};
use lavec_core::rational::Q;
use lavec_core::{Error, MultiIndex, PadicInt, Prime, Result};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::expr::{Expr, Op};

const VARS: [&str; 3] = ["x", "y", "z"];

fn dim_of(e: &Expr) -> usize {
    match e {
        Expr::Num(_) => 0,
        Expr::Var(v, _) => VARS.iter().position(|n| n == v).map_or(0, |i| i + 1),
        Expr::Neg(a) | Expr::Teich(a, _) | Expr::ModP(a, _, _) => dim_of(a),
        Expr::Bin(_, a, b, _) | Expr::Pow(a, b, _) => dim_of(a).max(dim_of(b)),
        Expr::Call(_, args, _) => args.iter().map(dim_of).max().unwrap_or(0),
    }
}

fn binom_q(x: &Q, k: u64) -> Q {
    (0..k).fold(Q::from_integer(1), |acc, i| acc * (x - Q::from_integer(i as i64)) / Q::from_integer(i as i64 + 1))
}

/// Exact value of an integer-valued expression in `x, y, z` at a grid point.
fn eval_at(e: &Expr, x: &MultiIndex) -> Result<Q> {
    let err = |pos: usize, msg: String| Error::Parse { pos, msg };
    Ok(match e {
        Expr::Num(q) => *q,
        Expr::Var(v, pos) => match VARS.iter().position(|n| n == v) {
            Some(i) => Q::from_integer(x.0[i] as i64),
            None => return Err(err(*pos, format!("unknown variable `{v}`"))),
        },
        Expr::Neg(a) => -eval_at(a, x)?,
        Expr::Bin(op, a, b, pos) => {
            let (a, b) = (eval_at(a, x)?, eval_at(b, x)?);
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div if b.is_zero() => return Err(err(*pos, "division by zero".into())),
                Op::Div => a / b,
            }
        }
        Expr::Pow(a, b, pos) => {
            let k = eval_at(b, x)?;
            if !k.is_integer() || k < Q::zero() {
                return Err(err(*pos, "exponent must be a non-negative integer".into()));
            }
            num_traits::pow(eval_at(a, x)?, k.to_integer() as usize)
        }
        Expr::Call(name, args, pos) if name == "binom" && args.len() == 2 => {
            let k = eval_at(&args[1], x)?;
            match k.to_integer().to_u64() {
                Some(k) if k <= 4096 => binom_q(&eval_at(&args[0], x)?, k),
                _ => return Err(err(*pos, "binom(·, k) needs a small non-negative integer k".into())),
            }
        }
        Expr::Call(name, _, pos) => return Err(err(*pos, format!("unknown function `{name}`"))),
        Expr::Teich(_, pos) | Expr::ModP(_, _, pos) => {
            return Err(err(*pos, "not allowed in a function of x".into()))
        }
    })
}

/// Mahler coefficients of `x ↦ expr(x)` with values in `Z_p` at `prec`.
pub fn coeffs(p: Prime, prec: u32, e: &Expr, n: u64) -> Result<AnyMahler> {
    let d = dim_of(e).max(1);
    let module = PadicModule::new(p, prec);
    let mut values = HashMap::new();
    for x in MultiIndex::box_iter(&vec![n; d]) {
        let v = eval_at(e, &x)?;
        let num = PadicInt::new(p, &BigInt::from(*v.numer()), prec);
        let den = PadicInt::new(p, &BigInt::from(*v.denom()), prec).inverse()?;
        values.insert(x, num.mul(&den));
    }
    let oracle = FnOracle::new(module.clone(), d, |x: &MultiIndex| values.get(x).cloned().unwrap_or_else(|| module.zero()));
    Ok(AnyMahler::Padic(mahler_coeffs(&oracle, n)?))
}

fn point<M: ValuedModule>(f: &MahlerFn<M>, xs: &[String]) -> Result<Vec<PadicInt>> {
    let p = f.module().prime();
    xs.iter()
        .map(|s| match s.trim().parse::<BigInt>() {
            Ok(v) => Ok(PadicInt::new(p, &v, 256)),
            Err(_) => PadicInt::from_str_with(p, s),
        })
        .collect()
}

pub fn eval(f: &AnyMahler, xs: &[String]) -> Result<String> {
    match f {
        AnyMahler::Padic(g) => g.eval(&point(g, xs)?).map(|v| g.module().format(&v)),
        AnyMahler::Series(g) => g.eval(&point(g, xs)?).map(|v| g.module().format(&v)),
        AnyMahler::Witt(g) => g.eval(&point(g, xs)?).map(|v| g.module().format(&v)),
    }
}

#[derive(Serialize)]
pub struct CheckReport {
    pub lambda: String,
    pub mu: String,
    pub degree: u64,
    pub cond1: bool,
    pub cond2: bool,
    pub val_lambda: Option<String>,
}

fn check_one<M: ValuedModule>(f: &MahlerFn<M>, lambda: &Q, mu: &Q) -> Result<CheckReport> {
    let degree = f.degrees().iter().copied().max().unwrap_or(0);
    let cond2 = check_cond2(&FnOracle::from_mahler(f), lambda, mu, degree)?;
    Ok(CheckReport {
        lambda: lambda.to_string(),
        mu: mu.to_string(),
        degree,
        cond1: f.check_cond1(lambda, mu),
        cond2,
        val_lambda: f.val_lambda(lambda).ok().map(|v| v.value.to_string()),
    })
}

pub fn check(f: &AnyMahler, lambda: &Q, mu: &Q) -> Result<CheckReport> {
    match f {
        AnyMahler::Padic(g) => check_one(g, lambda, mu),
        AnyMahler::Series(g) => check_one(g, lambda, mu),
        AnyMahler::Witt(g) => check_one(g, lambda, mu),
    }
}

pub fn restrict(f: &AnyMahler, l: u32) -> Result<AnyMahler> {
    Ok(match f {
        AnyMahler::Padic(g) => AnyMahler::Padic(g.restrict(l)?),
        AnyMahler::Series(g) => AnyMahler::Series(g.restrict(l)?),
        AnyMahler::Witt(g) => AnyMahler::Witt(g.restrict(l)?),
    })
}

/// One `n: a_n` line per nonzero coefficient.
pub fn text(f: &AnyMahler) -> String {
    let rec = f.to_record();
    let mut out = format!("degrees {:?}, tail {}{}\n", rec.degrees, rec.tail, if rec.heuristic { " (heuristic)" } else { "" });
    for c in &rec.coeffs {
        out.push_str(&format!("{}: {}\n", c.n, c.a));
    }
    out
}
