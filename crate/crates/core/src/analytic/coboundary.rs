//! Solving `(γ − 1)F = f` for functions `Z_p → M`.
//!
//! `γ` acts on functions by `(γF)(x) = γ(F(x + 1))`, which on Mahler
//! coefficients reads `(γF)_j = γ(F_j + F_{j+1})`. For a single term
//! `m·binom(x, n)` the series
//!
//! `F = Σ_{k≥0} (−1)^k (1 − γ^{-1})^k γ^{-1}(m) binom(x, n + k + 1)`
//!
//! solves the equation exactly; truncating at `k ≤ K` leaves one residual
//! coefficient `±γ(1 − γ^{-1})^{K+1}γ^{-1}(m)` at index `n + K + 1`.

use super::{GammaModule, GroupContext};
use crate::error::{Error, Result};
use crate::mahler::MahlerFn;
use crate::padic::MultiIndex;
use crate::rational::{fmt_q, ExtVal, Valuation, Q};
use crate::realpow::{ceil_pow, pow_cmp};
use std::cmp::Ordering;

/// Slack for the floors in `⌊p^λ n⌋`.
pub const O1: i64 = 1;

#[derive(Clone, Debug)]
pub struct CoboundarySolve<M: GammaModule> {
    pub solution: MahlerFn<M>,
    /// Measured gain `min (val(v_k) − val(v_0))/k`; `None` when every
    /// `v_k` with `k ≥ 1` vanished at the cap.
    pub gain: Option<Q>,
    pub truncation: u32,
    /// `K(s − ⌈p^λ'⌉) + val_λ'(f) − O(1)`, absent for infinite gain.
    pub predicted: Option<Q>,
    /// `val_λ'((γ − 1)F − f)`.
    pub residual: Valuation,
    pub meets_prediction: bool,
}

impl<M: GammaModule> CoboundarySolve<M> {
    pub fn summary(&self) -> String {
        format!(
            "s={} K={} predicted={} residual={}{}",
            self.gain.map(|s| fmt_q(&s)).unwrap_or_else(|| "inf".into()),
            self.truncation,
            self.predicted.map(|s| fmt_q(&s)).unwrap_or_else(|| "-".into()),
            self.residual.value,
            if self.residual.saturated { " (at cap)" } else { "" }
        )
    }
}

/// `(γF)_j − F_j` over the box of `F`, one past its degree.
pub fn apply_gamma_minus_one<M: GammaModule>(f: &MahlerFn<M>, ctx: &GroupContext) -> Result<MahlerFn<M>> {
    let module = f.module();
    let deg = f.degrees()[0];
    let get = |j: u64| f.coeff(&MultiIndex(vec![j])).cloned().unwrap_or_else(|| module.zero());
    let mut out = Vec::with_capacity(deg as usize + 2);
    for j in 0..=deg + 1 {
        let fj = get(j);
        let moved = module.act(ctx.generator(), &module.add(&fj, &get(j + 1)))?;
        out.push(module.sub(&moved, &fj));
    }
    MahlerFn::new(module.clone(), vec![deg + 1], out, ExtVal::Infinity)
}

/// Builds the truncated series solution with `k ≤ truncation` and measures
/// the gain of `1 − γ^{-1}` on the coefficients of `f`.
pub fn coboundary_solve<M: GammaModule>(
    f: &MahlerFn<M>,
    ctx: &GroupContext,
    lambda: &Q,
    truncation: u32,
) -> Result<CoboundarySolve<M>> {
    if f.dim() != 1 {
        return Err(Error::Unsupported(format!("{}-variable functions", f.dim())));
    }
    if !f.tail().is_infinite() {
        return Err(Error::TailUnbounded("coboundary_solve needs a finite expansion".into()));
    }
    let module = f.module();
    let p = module.prime().get();
    let ginv = ctx.inverse_generator()?;
    let deg = f.degrees()[0];
    let big = deg + truncation as u64 + 1;
    let mut sol = vec![module.zero(); big as usize + 1];
    let mut gain: Option<Q> = None;
    for (n, m) in f.coeffs() {
        let n = n.0[0];
        let v0 = module.act(&ginv, m)?;
        let chain = module.orbit(&ginv, &v0, truncation as usize + 1)?;
        let base = module.val(&v0);
        for (k, v) in chain.iter().enumerate() {
            // (1 − γ^{-1})^k = (−1)^k (γ^{-1} − 1)^k, so (−1)^k v_k is chain[k].
            if k <= truncation as usize {
                let idx = (n + k as u64 + 1) as usize;
                sol[idx] = module.add(&sol[idx], v);
            }
            let vk = module.val(v);
            if k >= 1 && !vk.saturated && !base.saturated {
                if let (ExtVal::Finite(a), ExtVal::Finite(b)) = (vk.value, base.value) {
                    let s = (a - b) / Q::from_integer(k as i64);
                    gain = Some(gain.map_or(s, |g: Q| g.min(s)));
                }
            }
        }
    }
    if let Some(s) = gain {
        if pow_cmp(p, lambda, &s) != Ordering::Less {
            return Err(Error::GainTooSmall(format!("p^{} ≥ s = {}", fmt_q(lambda), fmt_q(&s))));
        }
    }
    let solution = MahlerFn::new(module.clone(), vec![big], sol, ExtVal::Infinity)?;
    let image = apply_gamma_minus_one(&solution, ctx)?;
    let padded = MahlerFn::new(
        module.clone(),
        vec![big + 1],
        (0..=big + 1)
            .map(|j| f.coeff(&MultiIndex(vec![j])).cloned().unwrap_or_else(|| module.zero()))
            .collect(),
        ExtVal::Infinity,
    )?;
    let residual = image.sub(&padded)?.val_lambda(lambda)?;
    let vf = f.val_lambda(lambda)?;
    let predicted = match (gain, vf.value) {
        (Some(s), ExtVal::Finite(v)) => {
            Some(Q::from_integer(truncation as i64) * (s - ceil_pow(p, lambda, 1024)) + v - Q::from_integer(O1))
        }
        _ => None,
    };
    let meets_prediction = match predicted {
        Some(pr) => residual.value >= ExtVal::Finite(pr),
        None => residual.saturated || residual.value.is_infinite(),
    };
    if !meets_prediction && residual.saturated {
        return Err(Error::CapExhausted(format!(
            "residual vanished at valuation {} below the predicted {}",
            residual.value,
            predicted.map(|s| fmt_q(&s)).unwrap_or_default()
        )));
    }
    Ok(CoboundarySolve { solution, gain, truncation, predicted, residual, meets_prediction })
}

/// True when `F` solves `(γ − 1)F = f` exactly up to the module precision.
pub fn is_exact_solution<M: GammaModule>(f: &MahlerFn<M>, sol: &MahlerFn<M>, ctx: &GroupContext) -> Result<bool> {
    let module = f.module();
    let image = apply_gamma_minus_one(sol, ctx)?;
    let exact = image.coeffs().all(|(n, a)| {
        let b = f.coeff(&n).cloned().unwrap_or_else(|| module.zero());
        module.same(a, &b)
    });
    Ok(exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::SeriesModule;
    use crate::padic::Prime;
    use crate::rational::{q, qi};
    use crate::series::PerfLaurent;

    fn pr(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn fixed_coefficient() {
        let p = pr(3);
        let s = SeriesModule::new(p, qi(16));
        let ctx = GroupContext::standard(p, 0, 40);
        let m = PerfLaurent::one(p, qi(16));
        let f = MahlerFn::binomial(s.clone(), &MultiIndex(vec![0]), m.clone()).unwrap();
        let r = coboundary_solve(&f, &ctx, &qi(0), 4).unwrap();
        assert_eq!(r.gain, None);
        assert_eq!(r.solution.coeff(&MultiIndex(vec![1])), Some(&m));
        assert!(r.solution.coeffs().filter(|(n, _)| n.0[0] != 1).all(|(_, a)| a.is_zero()));
        assert!(is_exact_solution(&f, &r.solution, &ctx).unwrap());
    }

    #[test]
    fn moving_coefficient() {
        let p = pr(2);
        let s = SeriesModule::new(p, qi(64));
        let ctx = GroupContext::standard(p, 0, 40);
        let x = PerfLaurent::x(p, qi(64));
        let f = MahlerFn::binomial(s, &MultiIndex(vec![0]), x).unwrap();
        let r = coboundary_solve(&f, &ctx, &q(1, 2), 6).unwrap();
        assert!(r.gain.unwrap() > qi(2));
        assert!(r.meets_prediction, "{}", r.summary());
        assert!(matches!(coboundary_solve(&f, &ctx, &qi(3), 6), Err(Error::GainTooSmall(_))));
    }
}
