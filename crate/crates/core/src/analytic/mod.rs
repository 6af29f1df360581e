//! Orbit maps of the cyclotomic group and certificates of local analyticity.

pub mod coboundary;
pub mod experiments;
pub mod report;
pub mod tatesen;

use std::cmp::Ordering;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mahler::MahlerFn;
use crate::module::{ModuleDesc, SeriesModule, ValuedModule, WittModule};
use crate::padic::{num_digits, PadicInt, Prime};
use crate::rational::{fmt_q, ExtVal, Valuation, Q};
use crate::realpow::{ceil_pow, pow_cmp, sign_pow_sum};
use crate::series::gamma_orbit;
use crate::series::PerfLaurent;
use crate::witt::WittElem;

/// Default p-adic precision of group elements.
pub const GROUP_PRECISION: u32 = 64;

/// A procyclic subgroup `G_l ⊂ Z_p^×` with a chosen topological generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupContext {
    p: Prime,
    level: u32,
    generator: PadicInt,
}

impl GroupContext {
    /// `G_l = 1 + p^{l+1} Z_p` generated by `(1+p)^{p^l}`, or for `p = 2`
    /// `G_l = 1 + 2^{l+2} Z_2` generated by `5^{2^l}`.
    pub fn standard(p: Prime, level: u32, prec: u32) -> Self {
        let base = if p.get() == 2 { 5 } else { 1 + p.get() as i64 };
        let mut g = PadicInt::from_i64(p, base, prec);
        for _ in 0..level {
            g = g.pow(p.get() as i64).expect("positive power");
        }
        GroupContext { p, level, generator: g }
    }

    /// A context with an explicit generator, for groups outside the standard
    /// filtration (such as the one generated by 3 in `Z_2^×`) and for the
    /// trivial group `g = 1`.
    pub fn custom(level: u32, generator: PadicInt) -> Result<Self> {
        if !generator.is_unit() {
            return Err(Error::Domain(format!("{generator} is not a unit")));
        }
        Ok(GroupContext { p: generator.prime(), level, generator })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn generator(&self) -> &PadicInt {
        &self.generator
    }

    /// `g^x` for an integer `x`.
    pub fn power(&self, x: i64) -> Result<PadicInt> {
        self.generator.pow(x)
    }

    pub fn inverse_generator(&self) -> Result<PadicInt> {
        self.generator.inverse()
    }
}

/// `n(g) = v_p(g − 1)`, saturated at the precision of `g`.
pub fn n_of(g: &PadicInt) -> ExtVal {
    g.sub(&PadicInt::one(g.prime(), g.precision())).val()
}

/// A valued module with a continuous action of `Z_p^×`.
pub trait GammaModule: ValuedModule {
    fn act(&self, a: &PadicInt, m: &Self::Elem) -> Result<Self::Elem>;

    /// `[m, (γ_a − 1)m, …, (γ_a − 1)^count m]`.
    fn orbit(&self, a: &PadicInt, m: &Self::Elem, count: usize) -> Result<Vec<Self::Elem>> {
        let mut out = Vec::with_capacity(count + 1);
        out.push(m.clone());
        for _ in 0..count {
            let cur = out.last().unwrap();
            let next = self.sub(&self.act(a, cur)?, cur);
            out.push(next);
        }
        Ok(out)
    }
}

impl GammaModule for SeriesModule {
    fn act(&self, a: &PadicInt, m: &PerfLaurent) -> Result<PerfLaurent> {
        m.gamma_act(a)
    }

    fn orbit(&self, a: &PadicInt, m: &PerfLaurent, count: usize) -> Result<Vec<PerfLaurent>> {
        gamma_orbit(a, m, count)
    }
}

impl GammaModule for WittModule {
    fn act(&self, a: &PadicInt, m: &WittElem) -> Result<WittElem> {
        m.gamma_act(a)
    }
}

/// The Mahler expansion `x ↦ g_l^x(m) = Σ (g_l − 1)^n(m) binom(x, n)`,
/// truncated at `n ≤ N`.
#[derive(Clone, Debug)]
pub struct OrbitMahler<M: GammaModule> {
    pub level: u32,
    pub generator: PadicInt,
    pub expansion: MahlerFn<M>,
}

impl<M: GammaModule> OrbitMahler<M> {
    pub fn base(&self) -> &M::Elem {
        self.expansion.coeff(&crate::padic::MultiIndex(vec![0])).unwrap()
    }

    pub fn coeff(&self, n: u64) -> &M::Elem {
        self.expansion.coeff(&crate::padic::MultiIndex(vec![n])).unwrap()
    }

    pub fn len(&self) -> u64 {
        self.expansion.degrees()[0]
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Orbit coefficients `a_n = (g_l − 1)^n(m)` for `n ≤ N`.
///
/// The tail bound is the valuation of `a_N`, flagged heuristic.
pub fn orbit_mahler<M: GammaModule>(module: &M, m: &M::Elem, ctx: &GroupContext, n: u64) -> Result<OrbitMahler<M>> {
    let coeffs = module.orbit(ctx.generator(), m, n as usize)?;
    let tail = module.val(coeffs.last().unwrap()).value;
    let expansion = MahlerFn::new(module.clone(), vec![n], coeffs, tail)?.with_tail(tail, true);
    Ok(OrbitMahler { level: ctx.level(), generator: ctx.generator().clone(), expansion })
}

/// A certificate `val(a_n) ≥ p^λ p^{⌊log_p n⌋} + μ` for `n ≤ checked_up_to`,
/// valid up to the working cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalyticityWitness {
    pub level: u32,
    #[serde(serialize_with = "ser_q")]
    pub lambda: Q,
    #[serde(serialize_with = "ser_q")]
    pub mu: Q,
    pub checked_up_to: u64,
    /// The module, including the cap the certificate is relative to.
    pub module: ModuleDesc,
}

pub(crate) fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(q))
}

/// Best `λ` found at one level, `None` when no grid value certifies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelScan {
    pub level: u32,
    pub best_lambda: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessSearch {
    pub witness: Option<AnalyticityWitness>,
    pub scans: Vec<LevelScan>,
}

/// Whether `val(a_n) − val(a_0) ≥ p^λ (p^{⌊log_p n⌋} − 1)` for `1 ≤ n ≤ N`.
///
/// This is condition 1 with `μ` pinned by the index `n = 0`
/// (`val(a_0) ≥ p^λ + μ`). A coefficient that vanished at the cap cannot
/// refute the bound, so it passes.
fn anchored_at(p: u64, vals: &[Valuation], lambda: &Q) -> bool {
    let (ExtVal::Finite(v0), false) = (vals[0].value, vals[0].saturated) else {
        return true;
    };
    vals.iter().enumerate().skip(1).all(|(n, v)| match v.value {
        _ if v.saturated => true,
        ExtVal::Infinity => true,
        ExtVal::Finite(v) => {
            let k = Q::from_integer(num_digits(p, n as u64) as i64 - 1);
            let terms = [(-Q::one(), lambda + k), (Q::one(), *lambda)];
            sign_pow_sum(p, &(v - v0), &terms) != Ordering::Less
        }
    })
}

/// Largest `λ` on the grid passing the anchored condition, with its `μ`.
pub fn best_lambda<M: GammaModule>(orbit: &OrbitMahler<M>, grid: &[Q]) -> Option<(Q, Q)> {
    let module = orbit.expansion.module();
    let p = module.prime().get();
    let vals: Vec<Valuation> = orbit.expansion.coeffs().map(|(_, a)| module.val(a)).collect();
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    sorted.dedup();
    sorted.into_iter().find(|l| anchored_at(p, &vals, l)).map(|l| {
        let mu = match vals[0].value {
            ExtVal::Finite(v0) if !vals[0].saturated => v0 - ceil_pow(p, &l, 1024),
            _ => Q::zero(),
        };
        (l, mu)
    })
}

/// Scans levels upward; the first level with a certifying `λ` wins, with
/// the largest such `λ`.
pub fn witness_search<M: GammaModule>(
    module: &M,
    m: &M::Elem,
    contexts: &[GroupContext],
    grid: &[Q],
    n: u64,
) -> Result<WitnessSearch> {
    let mut scans = Vec::new();
    for ctx in contexts {
        let orbit = orbit_mahler(module, m, ctx, n)?;
        let best = best_lambda(&orbit, grid);
        scans.push(LevelScan { level: ctx.level(), best_lambda: best.map(|(l, _)| fmt_q(&l)) });
        if let Some((lambda, mu)) = best {
            let witness = AnalyticityWitness {
                level: ctx.level(),
                lambda,
                mu,
                checked_up_to: n,
                module: module.descriptor(),
            };
            return Ok(WitnessSearch { witness: Some(witness), scans });
        }
    }
    Ok(WitnessSearch { witness: None, scans })
}

/// The rational grid `{hi, hi − step, …} ∩ [lo, hi]`.
pub fn lambda_grid(lo: Q, hi: Q, step: Q) -> Vec<Q> {
    assert!(step > Q::zero(), "grid step must be positive");
    let mut out = Vec::new();
    let mut x = hi;
    while x >= lo {
        out.push(x);
        x -= step;
    }
    out
}

/// The three conditions for a `c`-small pair `(G_0, λ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CSmallReport {
    pub c: String,
    pub level: u32,
    pub lambda: String,
    pub val_varpi: String,
    pub val_basis_min: String,
    pub group_small: bool,
    pub lambda_small: bool,
    pub pair_small: bool,
}

/// `val((g−1)ϖ) > c`, `val((g−1)m_i) ≥ c` and `λ > log_p(c+1)`.
///
/// Valuations of elements that vanish at the cap enter as their cap.
pub fn c_small_check<M: GammaModule>(
    module: &M,
    ctx: &GroupContext,
    lambda: &Q,
    c: &Q,
    varpi: &M::Elem,
    basis: &[M::Elem],
) -> Result<CSmallReport> {
    let g = ctx.generator();
    let moved = |x: &M::Elem| -> Result<ExtVal> { Ok(module.val(&module.sub(&module.act(g, x)?, x)).value) };
    let vv = moved(varpi)?;
    let mut vb = ExtVal::Infinity;
    for b in basis {
        vb = vb.min(moved(b)?);
    }
    let cv = ExtVal::Finite(*c);
    let group_small = vv > cv && vb >= cv;
    let lambda_small = pow_cmp(module.prime().get(), lambda, &(c + Q::one())) == Ordering::Greater;
    Ok(CSmallReport {
        c: fmt_q(c),
        level: ctx.level(),
        lambda: fmt_q(lambda),
        val_varpi: vv.to_string(),
        val_basis_min: vb.to_string(),
        group_small,
        lambda_small,
        pair_small: group_small && lambda_small,
    })
}

/// The element `α` of the first Tate–Sen axiom with its constant `c_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ts1Witness {
    pub alpha: PerfLaurent,
    pub c1: Q,
}

/// With `H` trivial, `α = 1` and `c_1 = 0`. `h_order` is the order of the
/// quotient `H_1/H_2`; only the trivial case is supported.
pub fn ts1_witness(p: Prime, cap: Q, h_order: u64) -> Result<Ts1Witness> {
    if h_order != 1 {
        return Err(Error::Unsupported(format!("nontrivial H (order {h_order})")));
    }
    Ok(Ts1Witness { alpha: PerfLaurent::one(p, cap), c1: Q::zero() })
}

/// Measured `val(γ_a(X^{1/p^j}) − X^{1/p^j})` next to `p^{m−j}` with
/// `m = v_p(a − 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharpSmoothReport {
    pub j: u32,
    pub m: String,
    pub measured: String,
    pub expected: String,
    pub saturated: bool,
    pub consistent: bool,
}

pub fn sharp_smooth_check(a: &PadicInt, j: u32, cap: Q) -> Result<SharpSmoothReport> {
    let p = a.prime();
    let pp = p.get() as i64;
    let x = PerfLaurent::monomial(p, 1, Q::new(1, pp.pow(j)), cap);
    let d = x.gamma_act(a)?.sub(&x);
    let v = d.valuation();
    let m = n_of(a);
    let (expected, consistent) = match m {
        ExtVal::Finite(mq) => {
            let shift = mq.to_integer() - j as i64;
            let e = if shift >= 0 { Q::from_integer(pp.pow(shift as u32)) } else { Q::new(1, pp.pow((-shift) as u32)) };
            let ok = if v.saturated { v.value >= ExtVal::Finite(e) } else { v.value == ExtVal::Finite(e) };
            (fmt_q(&e), ok)
        }
        ExtVal::Infinity => ("inf".into(), v.saturated),
    };
    Ok(SharpSmoothReport {
        j,
        m: m.to_string(),
        measured: v.value.to_string(),
        expected,
        saturated: v.saturated,
        consistent,
    })
}
