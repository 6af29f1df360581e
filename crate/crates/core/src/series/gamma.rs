//! The cyclotomic action `X ↦ (1+X)^a − 1` on truncated series.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};

use super::dense::{self, from_z_basis, log_ceil, permute, sub_mod, to_z_basis};
use super::{ppow, PerfLaurent};
use crate::error::{Error, Result};
use crate::padic::{binom_mod_p, PadicInt};
use crate::rational::Q;

/// `(1+X)^a = Σ_{j < cap} (binom(a, j) mod p) X^j`.
pub fn binomial_series_1plusx(a: &PadicInt, cap: Q) -> Result<PerfLaurent> {
    let p = a.prime();
    let top = cap.ceil().to_integer().max(0) as u64;
    let mut terms = Vec::new();
    for j in 0..top {
        let c = binom_mod_p(a, j)?;
        if c != 0 {
            terms.push((Q::from_integer(j as i64), c as i64));
        }
    }
    Ok(PerfLaurent::from_terms(p, terms, cap))
}

/// Dense `Y`-coefficients of `Y^shift·f` for indices in `[0, len)`.
fn dense_shifted(f: &PerfLaurent, scale: i64, shift: i64, len: usize) -> Vec<u32> {
    let mut g = vec![0u32; len];
    for (e, c) in f.terms() {
        let i = (*e * scale).to_integer() + shift;
        debug_assert!(i >= 0);
        if (i as usize) < len {
            g[i as usize] = *c;
        }
    }
    g
}

fn a_mod(a: &PadicInt, t: u32) -> Result<u64> {
    a.residue_mod_pow(t)?
        .to_u64()
        .ok_or_else(|| Error::Unsupported("group algebra too large".into()))
}

struct Plan {
    scale: i64,
    shift: i64,
    len: usize,
    t: u32,
    end: i64,
}

fn plan(f: &PerfLaurent, depth: u32) -> Plan {
    let p = f.prime().get();
    let scale = ppow(p, depth);
    let vmin = (f.val_q() * scale).to_integer();
    let shift = if vmin < 0 { ppow(p, log_ceil(p, (-vmin) as u64)) } else { 0 };
    let end = (f.cap() * scale).ceil().to_integer();
    let len = (end + shift).max(1) as usize;
    let t = log_ceil(p, len as u64);
    Plan { scale, shift, len, t, end }
}

/// `γ_a(Y^shift·f)` modulo `Y^len`, in the `Z`-basis padded to `p^t`.
fn act_z(p: u64, plan: &Plan, g: &[u32], am: u64) -> Vec<u32> {
    let mut h = vec![0u32; p.pow(plan.t) as usize];
    h[..g.len()].copy_from_slice(g);
    to_z_basis(p, plan.t, &mut h);
    permute(&h, am)
}

/// Multiplies by `γ_a(Y^{-shift})` and returns the series.
fn unshift(f: &PerfLaurent, a: &PadicInt, plan: &Plan, mut g: Vec<u32>) -> Result<PerfLaurent> {
    let p = f.prime().get();
    let pu = p as u32;
    g.truncate(plan.len);
    if plan.shift > 0 {
        // γ(Y)^{-P} = Y^{-P}·φ^s(u^{-1}) with u = ((1+Y)^a − 1)/Y and P = p^s.
        let ulen = (plan.len as i64 / plan.shift + 1) as usize;
        let mut u = vec![0u32; ulen];
        for (j, slot) in u.iter_mut().enumerate() {
            *slot = binom_mod_p(a, j as u64 + 1)?;
        }
        let uinv = dense::inverse_series(pu, &u, ulen);
        let mut acc = vec![0u64; plan.len];
        for (j, &w) in uinv.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let off = j * plan.shift as usize;
            if off >= plan.len {
                break;
            }
            for (i, &c) in g[..plan.len - off].iter().enumerate() {
                if c != 0 {
                    acc[i + off] += w as u64 * c as u64;
                }
            }
            if j % 1024 == 1023 {
                acc.iter_mut().for_each(|x| *x %= p);
            }
        }
        g = acc.into_iter().map(|x| (x % p) as u32).collect();
    }
    let mut terms = BTreeMap::new();
    for (i, &c) in g.iter().enumerate() {
        let idx = i as i64 - plan.shift;
        if c != 0 && idx < plan.end {
            terms.insert(Q::new(idx, plan.scale), c);
        }
    }
    Ok(PerfLaurent::from_map(f.prime(), terms, f.cap()))
}

fn check_unit(a: &PadicInt) -> Result<()> {
    if !a.is_unit() {
        return Err(Error::Domain(format!("{a} is not a unit of Z_p")));
    }
    Ok(())
}

pub(crate) fn gamma_act(a: &PadicInt, f: &PerfLaurent) -> Result<PerfLaurent> {
    assert_eq!(a.prime(), f.prime(), "mixed primes");
    check_unit(a)?;
    if f.is_zero() {
        return Ok(f.clone());
    }
    let p = f.prime().get();
    let plan = plan(f, f.depth());
    let am = a_mod(a, plan.t)?;
    let g = dense_shifted(f, plan.scale, plan.shift, plan.len);
    let mut h = act_z(p, &plan, &g, am);
    from_z_basis(p, plan.t, &mut h);
    unshift(f, a, &plan, h)
}

/// `[f, (γ_a − 1)f, …, (γ_a − 1)^count f]`.
///
/// Power series stay in the `Z`-basis between steps; Laurent inputs fall back
/// to repeated [`gamma_act`].
pub fn gamma_orbit(a: &PadicInt, f: &PerfLaurent, count: usize) -> Result<Vec<PerfLaurent>> {
    assert_eq!(a.prime(), f.prime(), "mixed primes");
    check_unit(a)?;
    let mut out = Vec::with_capacity(count + 1);
    out.push(f.clone());
    if count == 0 {
        return Ok(out);
    }
    if f.is_zero() {
        out.extend((0..count).map(|_| f.clone()));
        return Ok(out);
    }
    let p = f.prime().get();
    let pu = p as u32;
    let plan = plan(f, f.depth());
    if plan.shift > 0 {
        let mut cur = f.clone();
        for _ in 0..count {
            cur = gamma_act(a, &cur)?.sub(&cur);
            out.push(cur.clone());
        }
        return Ok(out);
    }
    let am = a_mod(a, plan.t)?;
    let g = dense_shifted(f, plan.scale, 0, plan.len);
    let mut h = g.clone();
    h.resize(p.pow(plan.t) as usize, 0);
    to_z_basis(p, plan.t, &mut h);
    for _ in 0..count {
        let moved = permute(&h, am);
        for (x, m) in h.iter_mut().zip(&moved) {
            *x = sub_mod(*m, *x, pu);
        }
        let mut y = h.clone();
        from_z_basis(p, plan.t, &mut y);
        y.truncate(plan.len);
        let mut terms = BTreeMap::new();
        for (i, &c) in y.iter().enumerate() {
            if c != 0 && (i as i64) < plan.end {
                terms.insert(Q::new(i as i64, plan.scale), c);
            }
        }
        if terms.is_empty() && h.iter().all(|c| c.is_zero()) {
            out.extend((out.len()..=count).map(|_| PerfLaurent::zero(f.prime(), f.cap())));
            break;
        }
        out.push(PerfLaurent::from_map(f.prime(), terms, f.cap()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Prime;
    use crate::rational::{q, qi};

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    /// `γ_a(X^{k/p^m}) = pth_root^m(((1+X)^a − 1)^k)` by naive products.
    fn oracle(a: &PadicInt, f: &PerfLaurent) -> PerfLaurent {
        let pr = f.prime();
        let mut out = PerfLaurent::zero(pr, f.cap());
        for (e, c) in f.terms() {
            let m = super::super::den_exp(pr.get(), e);
            let k = (*e * ppow(pr.get(), m)).to_integer();
            let capg = f.cap() * ppow(pr.get(), m) + qi(k.abs() + 2);
            let g = binomial_series_1plusx(a, capg).unwrap().sub(&PerfLaurent::one(pr, capg));
            let mut pw = PerfLaurent::one(pr, capg);
            let base = if k < 0 { g.invert().unwrap() } else { g };
            for _ in 0..k.abs() {
                pw = pw.mul(&base);
            }
            let mut term = pw;
            for _ in 0..m {
                term = term.pth_root();
            }
            out = out.add(&term.scale(*c as i64).truncate(f.cap()));
        }
        out
    }

    #[test]
    fn binomial_series() {
        let a = PadicInt::from_i64(p(2), 3, 10);
        let s = binomial_series_1plusx(&a, qi(6)).unwrap();
        assert_eq!(s.num_terms(), 4);
        let one = binomial_series_1plusx(&PadicInt::from_i64(p(5), 1, 4), qi(6)).unwrap();
        assert_eq!(one.num_terms(), 2);
        let pp = binomial_series_1plusx(&PadicInt::from_i64(p(3), 3, 4), qi(9)).unwrap();
        assert_eq!(pp.terms().map(|(e, _)| *e).collect::<Vec<_>>(), vec![qi(0), qi(3)]);
    }

    #[test]
    fn action_on_x() {
        let x = PerfLaurent::x(p(2), qi(8));
        let d = x.gamma_act(&PadicInt::from_i64(p(2), 3, 10)).unwrap().sub(&x);
        assert_eq!(d.terms().map(|(e, _)| *e).collect::<Vec<_>>(), vec![qi(2), qi(3)]);
        let x = PerfLaurent::x(p(3), qi(8));
        let d = x.gamma_act(&PadicInt::from_i64(p(3), 4, 10)).unwrap().sub(&x);
        assert_eq!(d.terms().map(|(e, _)| *e).collect::<Vec<_>>(), vec![qi(3), qi(4)]);
    }

    #[test]
    fn matches_monomial_oracle() {
        for (pr, a) in [(2u64, 3i64), (2, 5), (3, 4), (3, 2), (5, 6), (5, 3)] {
            let a = PadicInt::from_i64(p(pr), a, 12);
            let f = PerfLaurent::from_terms(
                p(pr),
                [(q(-1, pr as i64), 1), (qi(0), 2), (q(1, pr as i64 * pr as i64), 1), (qi(2), 1)],
                qi(4),
            );
            let fast = f.gamma_act(&a).unwrap();
            let slow = oracle(&a, &f);
            assert_eq!(fast, slow, "p={pr}");
        }
    }

    #[test]
    fn orbit_fast_path_matches_iteration() {
        let a = PadicInt::from_i64(p(3), 4, 12);
        let f = PerfLaurent::from_terms(p(3), [(q(1, 9), 1), (qi(1), 2)], qi(6));
        let orbit = gamma_orbit(&a, &f, 6).unwrap();
        let mut cur = f.clone();
        for k in 1..=6 {
            cur = cur.gamma_act(&a).unwrap().sub(&cur);
            assert_eq!(orbit[k], cur, "k={k}");
        }
    }

    #[test]
    fn precision_of_a_is_checked() {
        let a = PadicInt::from_i64(p(2), 3, 2);
        let f = PerfLaurent::x(p(2), qi(64));
        assert!(matches!(f.gamma_act(&a), Err(Error::InsufficientPrecision(_))));
    }
}
