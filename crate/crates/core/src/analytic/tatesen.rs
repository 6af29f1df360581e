//! Concrete Tate–Sen data for `Ẽ` and `W_n(Ẽ)` with trivial `H`.
//!
//! `R_n` is the monomial projection onto `F_p((X^{1/p^n}))` and `X_n` its
//! kernel: the series all of whose exponents have denominator above `p^n`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{binom_big, val_p_u64, PadicInt, Prime};
use crate::rational::{fmt_q, ExtVal, Valuation, Q};
use crate::series::PerfLaurent;
use crate::witt::WittElem;

/// Loss `val(x) − val(R_n x)` and the equivariance defect
/// `val(R_n(γx) − γ(R_n x))` for one sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ts2Sample {
    pub loss: String,
    pub defect: String,
    pub defect_saturated: bool,
}

pub fn ts2_sample(x: &PerfLaurent, n: u32, a: &PadicInt) -> Result<(Option<Q>, Ts2Sample)> {
    let r = x.monomial_projection(n);
    let loss = match (x.valuation(), r.valuation()) {
        (vx, vr) if !vx.saturated && !vr.saturated => Some(vx.value.finite().unwrap() - vr.value.finite().unwrap()),
        _ => None,
    };
    let lhs = x.gamma_act(a)?.monomial_projection(n);
    let rhs = r.gamma_act(a)?;
    let d = lhs.sub(&rhs).valuation();
    let sample = Ts2Sample {
        loss: loss.map(|l| fmt_q(&l)).unwrap_or_else(|| "none".into()),
        defect: d.value.to_string(),
        defect_saturated: d.saturated,
    };
    Ok((loss, sample))
}

/// Outcome of one `(γ_a − 1)`-inversion on `X_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ts3Solve {
    pub y: PerfLaurent,
    /// `val(x) − val(y)`.
    pub loss: Q,
    pub residual: Valuation,
    pub steps: usize,
}

/// Step and depth budget of [`ts3_invert`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ts3Budget {
    pub max_steps: usize,
    /// Largest denominator exponent allowed in the solution.
    pub max_depth: u32,
}

impl Ts3Budget {
    /// 4096 steps and denominators up to `p^d ≤ 1024`.
    pub fn for_prime(p: Prime) -> Self {
        let mut d = 0;
        while p.get().pow(d + 1) <= 1024 {
            d += 1;
        }
        Ts3Budget { max_steps: 4096, max_depth: d }
    }
}

/// Valuation of the rational `e` at `p`.
fn q_val(p: u64, e: &Q) -> i64 {
    if e.is_zero() {
        return i64::MAX;
    }
    val_p_u64(p, e.numer().unsigned_abs()) as i64 - val_p_u64(p, *e.denom() as u64) as i64
}

/// The exponent `e` whose image under `γ_a − 1` leads with `X^target`.
///
/// With `γ_a(X)/X = 1 + u·X^d + …`, `d = p^m − 1`, the image of `X^e` leads
/// with `X^{e + d·p^{v(e)}}`. The candidate with `v(e) = v(target)` is tried
/// first and `v(target) − 1` always works.
fn pivot_exponent(p: u64, d: i64, target: &Q) -> Q {
    let t = q_val(p, target);
    let pt = |t: i64| if t >= 0 { Q::from_integer((p as i64).pow(t as u32)) } else { Q::new(1, (p as i64).pow((-t) as u32)) };
    let e = target - pt(t) * d;
    if q_val(p, &e) == t {
        e
    } else {
        target - pt(t - 1) * d
    }
}

/// Solves `γ_a(y) − y = x` for `x ∈ X_n` by exponent-ascending elimination.
///
/// Each step cancels the leading term of the residual with one monomial of
/// `y`. Running out of the step or depth budget before the residual vanishes
/// at the cap is reported as [`Error::SolveStalled`] together with the
/// residual valuation reached.
pub fn ts3_invert(x: &PerfLaurent, a: &PadicInt, n: u32, budget: Ts3Budget) -> Result<Ts3Solve> {
    let p = x.prime();
    let pp = p.get();
    let am1 = a.sub(&PadicInt::one(p, a.precision()));
    let m = match am1.val() {
        ExtVal::Finite(v) if !am1.is_zero() => v.to_integer(),
        _ => return Err(Error::Domain("γ_a − 1 is not invertible for a = 1".into())),
    };
    if m == 0 {
        return Err(Error::Domain(format!("{a} is not congruent to 1 mod p")));
    }
    if !x.monomial_projection(n).is_zero() {
        return Err(Error::Domain(format!("input has terms in F_p((X^(1/p^{n})))")));
    }
    let d = (pp as i64).pow(m as u32) - 1;
    let cap = x.cap();
    let mut y = PerfLaurent::zero(p, cap);
    let mut residual = x.clone();
    let mut steps = 0;
    while let Some((target, c)) = residual.leading() {
        if steps >= budget.max_steps {
            return Err(stalled(&residual, steps, "step budget"));
        }
        let e = pivot_exponent(pp, d, &target);
        let mono = PerfLaurent::monomial(p, 1, e, cap);
        if mono.depth() > budget.max_depth {
            return Err(stalled(&residual, steps, "depth budget"));
        }
        let image = mono.gamma_act(a)?.sub(&mono);
        let (lead, lc) = image
            .leading()
            .ok_or_else(|| Error::SolveStalled(format!("pivot X^({}) vanishes at the cap", fmt_q(&e))))?;
        if lead != target {
            return Err(Error::SolveStalled(format!("pivot X^({}) leads with X^({})", fmt_q(&e), fmt_q(&lead))));
        }
        let k = (c as i64 * inv_mod(lc as i64, pp as i64)).mod_floor(&(pp as i64));
        y = y.add(&mono.scale(k));
        residual = residual.sub(&image.scale(k));
        steps += 1;
    }
    let check = y.gamma_act(a)?.sub(&y).sub(x).valuation();
    let loss = x.val().finite().unwrap() - y.val().finite().unwrap();
    Ok(Ts3Solve { y, loss, residual: check, steps })
}

fn stalled(residual: &PerfLaurent, steps: usize, why: &str) -> Error {
    Error::SolveStalled(format!("{why} after {steps} steps, residual valuation {}", residual.val()))
}

fn inv_mod(a: i64, p: i64) -> i64 {
    let e = a.extended_gcd(&p);
    e.x.mod_floor(&p)
}

/// Both sides of `(γ_a − 1)φ^{-n}(T^k) = φ^{-n}(T^k)·φ^{-n}(U^k − 1)` with
/// `U = a + Σ_{m≥1} binom(a, m+1) T^m`, and the gain of `γ_a − 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ts4Report {
    pub a: i64,
    pub n: u32,
    pub k: u32,
    pub length: usize,
    pub sides_equal: bool,
    pub val_z: String,
    pub val_lhs: String,
    pub gain: String,
    pub required_gain: String,
    pub gain_ok: bool,
}

/// Checks the identity and the gain bound in `W_length(Ẽ)` with cap `cap`,
/// valuing by `val_r`.
pub fn ts4_check(p: Prime, a: i64, n: u32, k: u32, length: usize, cap: Q, r: &Q) -> Result<Ts4Report> {
    if (a - 1).rem_euclid(p.get() as i64) != 0 {
        return Err(Error::Domain(format!("a = {a} is not 1 mod {p}")));
    }
    let modulus = p.pow(length as u32);
    let t = WittElem::element_t(p, length, cap)?;
    let z = t.pow(k as i64)?.phi_pow(-(n as i64));
    let ga = PadicInt::from_i64(p, a, 64);
    let lhs = z.gamma_act(&ga)?.sub(&z)?;

    let top = cap.ceil().to_integer().max(0) as u64 + length as u64;
    let small = |c: BigInt| c.mod_floor(&modulus).to_i64().unwrap();
    let mut u = WittElem::integer(p, length, small(BigInt::from(a)), cap)?;
    let mut tm = WittElem::one(p, length, cap);
    for m in 1..=top {
        tm = tm.mul(&t)?;
        let c = small(binom_big(&BigInt::from(a), m + 1));
        if c != 0 {
            u = u.add(&tm.scale_int(c)?)?;
        }
    }
    let uk1 = u.pow(k as i64)?.sub(&WittElem::one(p, length, cap))?;
    let rhs = z.mul(&uk1.phi_pow(-(n as i64)))?;
    let sides_equal = lhs.same(&rhs);

    let vz = z.val_r(r);
    let vl = lhs.val_r(r);
    let val_p = if length > 1 { ExtVal::Finite(Q::from_integer(1) / r) } else { ExtVal::Infinity };
    let val_t = t.phi_pow(-(n as i64)).val_r(r).value;
    let required = val_p.min(val_t);
    let gain = match (vl.value, vz.value) {
        (ExtVal::Finite(l), ExtVal::Finite(zv)) => ExtVal::Finite(l - zv),
        _ => ExtVal::Infinity,
    };
    // A left side vanishing at the cap only bounds the gain from below.
    let gain_ok = gain >= required;
    Ok(Ts4Report {
        a,
        n,
        k,
        length,
        sides_equal,
        val_z: vz.value.to_string(),
        val_lhs: vl.value.to_string(),
        gain: gain.to_string(),
        required_gain: required.to_string(),
        gain_ok,
    })
}
