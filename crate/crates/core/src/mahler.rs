//! Functions `Z_p^d → M` through their Mahler coefficients.
//!
//! A [`MahlerFn`] stores `a_n` for `n` in a box `0 ≤ n_i ≤ N_i` (dense, in
//! lexicographic order) and a lower bound `tail` on `val(a_n)` outside the box.
//! A finite expansion has `tail = ∞`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::module::{ModuleDesc, PadicModule, SeriesModule, ValuedModule, WittModule};
use crate::padic::{binom_int, floor_weighted, num_digits, MultiIndex, PadicInt, Prime};
use crate::rational::{parse_q, ExtVal, Valuation, Q};
use crate::realpow::{ceil_pow, pow_cmp, pow_cmp_pow};

/// Upper limit on grid points touched by one operation.
pub const GRID_BUDGET: u64 = 1 << 22;

pub const MAHLER_SCHEMA: &str = "lavec.mahler/1";

fn grid_size(degrees: &[u64]) -> Result<usize> {
    let mut n: u64 = 1;
    for &d in degrees {
        n = d
            .checked_add(1)
            .and_then(|k| n.checked_mul(k))
            .filter(|&n| n <= GRID_BUDGET)
            .ok_or_else(|| Error::BudgetExceeded(format!("box {degrees:?} exceeds {GRID_BUDGET} points")))?;
    }
    Ok(n as usize)
}

fn strides(degrees: &[u64]) -> Vec<usize> {
    let mut s = vec![1usize; degrees.len()];
    for i in (0..degrees.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * (degrees[i + 1] as usize + 1);
    }
    s
}

fn flat(degrees: &[u64], n: &MultiIndex) -> Option<usize> {
    if n.dim() != degrees.len() || n.0.iter().zip(degrees).any(|(a, b)| a > b) {
        return None;
    }
    Some(strides(degrees).iter().zip(&n.0).map(|(s, &k)| s * k as usize).sum())
}

/// Offsets of the first point of every line parallel to `axis`.
fn line_starts(degrees: &[u64], axis: usize) -> Vec<usize> {
    let mut flat_deg = degrees.to_vec();
    flat_deg[axis] = 0;
    MultiIndex::box_iter(&flat_deg).map(|n| flat(degrees, &n).unwrap()).collect()
}

/// Grid values along `axis` become forward differences at 0.
fn newton_axis<M: ValuedModule>(m: &M, data: &mut [M::Elem], degrees: &[u64], axis: usize) {
    let st = strides(degrees)[axis];
    let n = degrees[axis] as usize;
    for s in line_starts(degrees, axis) {
        for k in 1..=n {
            for j in (k..=n).rev() {
                data[s + j * st] = m.sub(&data[s + j * st], &data[s + (j - 1) * st]);
            }
        }
    }
}

fn newton<M: ValuedModule>(m: &M, data: &mut [M::Elem], degrees: &[u64]) {
    for axis in 0..degrees.len() {
        newton_axis(m, data, degrees, axis);
    }
}

/// Exponent of `p^{⌊log_p k⌋}`; `k = 0` reads as exponent 0.
fn level_exp(p: u64, k: u64) -> i64 {
    if k == 0 {
        0
    } else {
        num_digits(p, k) as i64 - 1
    }
}

/// `v ≥ p^{λ+k} + μ`.
fn meets(p: u64, v: ExtVal, lambda: &Q, k: i64, mu: &Q) -> bool {
    match v {
        ExtVal::Infinity => true,
        ExtVal::Finite(v) => pow_cmp(p, &(lambda + Q::from_integer(k)), &(v - mu)) != Ordering::Greater,
    }
}

/// Uniform-continuity tail estimate from grid values.
///
/// If `val(f(x + p^t e_i) − f(x)) ≥ c_t` on the grid and `v_0 = min val f`,
/// then `Δ^{p^t}` gains `δ_t = min(c_t − v_0, val(p))`, so indices past `N`
/// should carry at least `v_0 + ⌊(N+1)/p^t⌋·δ_t`. Only grid points are seen.
fn continuity_tail<M: ValuedModule>(m: &M, grid: &[M::Elem], degrees: &[u64]) -> ExtVal {
    let p = m.prime().get();
    let v0 = grid.iter().map(|a| m.val(a).value).min().unwrap_or(ExtVal::Infinity);
    let ExtVal::Finite(v0q) = v0 else {
        return ExtVal::Infinity;
    };
    let st = strides(degrees);
    let mut best = v0;
    let mut step: u64 = 1;
    while degrees.iter().all(|&n| n >= step) && !degrees.is_empty() {
        let mut ct = ExtVal::Infinity;
        for (axis, &n) in degrees.iter().enumerate() {
            for x in MultiIndex::box_iter(degrees) {
                if x.0[axis] + step <= n {
                    let i = flat(degrees, &x).unwrap();
                    let j = i + step as usize * st[axis];
                    ct = ct.min(m.val(&m.sub(&grid[j], &grid[i])).value);
                }
            }
        }
        let k = degrees.iter().map(|&n| (n + 1) / step).min().unwrap();
        let delta = match ct {
            ExtVal::Infinity => m.val_of_p(),
            ExtVal::Finite(c) => ExtVal::Finite(c - v0q).min(m.val_of_p()),
        };
        match delta {
            ExtVal::Infinity => return ExtVal::Infinity,
            ExtVal::Finite(d) if d > Q::zero() => {
                best = best.max(ExtVal::Finite(v0q + d * Q::from_integer(k as i64)));
            }
            _ => {}
        }
        step = match step.checked_mul(p) {
            Some(s) => s,
            None => break,
        };
    }
    best
}

/// `f(x) = Σ a_n binom(x, n)` with coefficients in a [`ValuedModule`].
#[derive(Clone, Debug)]
pub struct MahlerFn<M: ValuedModule> {
    module: M,
    degrees: Vec<u64>,
    coeffs: Vec<M::Elem>,
    tail: ExtVal,
    heuristic: bool,
}

impl<M: ValuedModule> MahlerFn<M> {
    /// Coefficients in [`MultiIndex::box_iter`] order over `degrees`.
    pub fn new(module: M, degrees: Vec<u64>, coeffs: Vec<M::Elem>, tail: ExtVal) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        let size = grid_size(&degrees)?;
        if coeffs.len() != size {
            return Err(Error::Mismatch(format!("{} coefficients for a box of {size}", coeffs.len())));
        }
        Ok(MahlerFn { module, degrees, coeffs, tail, heuristic: false })
    }

    pub fn zero(module: M, degrees: Vec<u64>) -> Result<Self> {
        let size = grid_size(&degrees)?;
        let coeffs = vec![module.zero(); size];
        Self::new(module, degrees, coeffs, ExtVal::Infinity)
    }

    /// Finite expansion from `(n, a_n)` pairs; absent indices are zero.
    pub fn from_pairs(
        module: M,
        degrees: Vec<u64>,
        pairs: impl IntoIterator<Item = (MultiIndex, M::Elem)>,
    ) -> Result<Self> {
        let mut f = Self::zero(module, degrees)?;
        for (n, a) in pairs {
            let i = flat(&f.degrees, &n)
                .ok_or_else(|| Error::Domain(format!("index {n} outside box {:?}", f.degrees)))?;
            f.coeffs[i] = a;
        }
        Ok(f)
    }

    /// `a·binom(x, n)`.
    pub fn binomial(module: M, n: &MultiIndex, a: M::Elem) -> Result<Self> {
        Self::from_pairs(module, n.0.clone(), [(n.clone(), a)])
    }

    pub fn module(&self) -> &M {
        &self.module
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn tail(&self) -> ExtVal {
        self.tail
    }

    /// True when the tail bound was estimated from finitely many values.
    pub fn is_heuristic(&self) -> bool {
        self.heuristic
    }

    pub fn with_tail(mut self, tail: ExtVal, heuristic: bool) -> Self {
        self.tail = tail;
        self.heuristic = heuristic;
        self
    }

    /// `a_n`, or `None` outside the stored box.
    pub fn coeff(&self, n: &MultiIndex) -> Option<&M::Elem> {
        flat(&self.degrees, n).map(|i| &self.coeffs[i])
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (MultiIndex, &M::Elem)> {
        MultiIndex::box_iter(&self.degrees).zip(self.coeffs.iter())
    }

    /// Coefficientwise agreement on the union of the boxes, zeros outside.
    pub fn same_coeffs(&self, other: &Self) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let hull: Vec<u64> = self.degrees.iter().zip(&other.degrees).map(|(a, b)| *a.max(b)).collect();
        let zero = self.module.zero();
        let agree = MultiIndex::box_iter(&hull).all(|n| {
            let a = self.coeff(&n).unwrap_or(&zero);
            let b = other.coeff(&n).unwrap_or(&zero);
            self.module.same(a, b)
        });
        agree
    }

    /// `inf_n val(a_n)`, including the tail bound.
    pub fn val_op(&self) -> Valuation {
        self.coeffs
            .iter()
            .map(|a| self.module.val(a))
            .fold(Valuation::bound(self.tail), Valuation::min)
    }

    /// `inf_n (val(a_n) − Σ_i ⌊p^λ n_i⌋)`.
    ///
    /// Needs `tail = ∞`: a finite tail bound gives no control against the
    /// unbounded weights `⌊p^λ n⌋`.
    pub fn val_lambda(&self, lambda: &Q) -> Result<Valuation> {
        if !self.tail.is_infinite() {
            return Err(Error::TailUnbounded(format!(
                "tail bound {} cannot dominate ⌊p^λ n⌋ for λ = {lambda}",
                self.tail
            )));
        }
        let p = self.module.prime();
        let mut best = Valuation::exact(ExtVal::Infinity);
        for (n, a) in self.coeffs() {
            let v = self.module.val(a);
            let w = Q::from_integer(floor_weighted(p, lambda, &n));
            best = best.min(Valuation { value: v.value.add_q(-w), saturated: v.saturated });
        }
        Ok(best)
    }

    /// `val(a_n) ≥ p^λ p^{⌊log_p |n|_∞⌋} + μ` for every stored `n`; the index
    /// `n = 0` is held to `p^λ + μ`.
    pub fn check_cond1(&self, lambda: &Q, mu: &Q) -> bool {
        let p = self.module.prime().get();
        self.coeffs()
            .all(|(n, a)| meets(p, self.module.val(a).value, lambda, level_exp(p, n.max_norm()), mu))
    }

    /// `f(x)` at a grid point, with exact integer binomials.
    pub fn eval_int(&self, x: &MultiIndex) -> M::Elem {
        assert_eq!(x.dim(), self.dim(), "dimension mismatch");
        let rows: Vec<Vec<BigInt>> = x
            .0
            .iter()
            .zip(&self.degrees)
            .map(|(&xi, &n)| (0..=n.min(xi)).map(|k| binom_int(xi, k)).collect())
            .collect();
        let mut acc = self.module.zero();
        for (n, a) in self.coeffs() {
            if n.0.iter().zip(&x.0).any(|(ni, xi)| ni > xi) {
                continue;
            }
            let c: BigInt = n.0.iter().enumerate().map(|(i, &k)| &rows[i][k as usize]).product();
            acc = self.module.add(&acc, &self.module.scale_int(&c, a));
        }
        acc
    }

    /// `Σ a_n binom(x, n)`; the omitted tail has valuation `≥ tail`.
    pub fn eval(&self, x: &[PadicInt]) -> Result<M::Elem> {
        if x.len() != self.dim() {
            return Err(Error::Mismatch(format!("point of dimension {} for d = {}", x.len(), self.dim())));
        }
        let rows = x
            .iter()
            .zip(&self.degrees)
            .map(|(xi, &n)| (0..=n).map(|k| self.module.binom_scalar(xi, k)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut acc = self.module.zero();
        for (n, a) in self.coeffs() {
            let mut c = rows[0][n.0[0] as usize].clone();
            for (i, &k) in n.0.iter().enumerate().skip(1) {
                c = c.mul(&rows[i][k as usize]);
            }
            acc = self.module.add(&acc, &self.module.scale_padic(&c, a)?);
        }
        Ok(acc)
    }

    /// `Δ^n f`: coefficients `a_m ↦ a_{m+n}`.
    pub fn delta_multi(&self, n: &MultiIndex) -> Result<Self> {
        if n.dim() != self.dim() {
            return Err(Error::Mismatch("dimension mismatch".into()));
        }
        let degrees = self
            .degrees
            .iter()
            .zip(&n.0)
            .map(|(d, k)| d.checked_sub(*k))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::BudgetExceeded(format!("Δ^{n} beyond stored degrees {:?}", self.degrees)))?;
        let coeffs = MultiIndex::box_iter(&degrees).map(|m| self.coeff(&m.add(n)).unwrap().clone()).collect();
        Ok(MahlerFn { module: self.module.clone(), degrees, coeffs, tail: self.tail, heuristic: self.heuristic })
    }

    /// `Δ_y^k f` with `Δ_y f(x) = f(x + y) − f(x)`.
    pub fn delta_dir(&self, y: &[PadicInt], k: u32) -> Result<Self> {
        let mut g = self.clone();
        for _ in 0..k {
            g = g.shift(y)?.sub(&g)?;
        }
        Ok(g)
    }

    /// `sh_{1_i} f`, by `a_n ↦ a_n + a_{n+1_i}`.
    pub fn shift_unit(&self, axis: usize) -> Self {
        let mut g = self.clone();
        let st = strides(&self.degrees)[axis];
        let n = self.degrees[axis] as usize;
        for s in line_starts(&self.degrees, axis) {
            for j in 0..n {
                g.coeffs[s + j * st] = self.module.add(&self.coeffs[s + j * st], &self.coeffs[s + (j + 1) * st]);
            }
        }
        g
    }

    /// `x ↦ f(x + z)`, axis by axis: `b_k = Σ_j a_{k+j} binom(z, j)`.
    ///
    /// A unit step uses [`MahlerFn::shift_unit`]. For p-adic coefficients the
    /// shift needs `z` known to `v_p(N!)` digits beyond the module precision.
    pub fn shift(&self, z: &[PadicInt]) -> Result<Self> {
        if z.len() != self.dim() {
            return Err(Error::Mismatch(format!("shift of dimension {} for d = {}", z.len(), self.dim())));
        }
        let mut g = self.clone();
        for (axis, zi) in z.iter().enumerate() {
            if zi.is_zero() {
                continue;
            }
            if zi.residue().is_one() {
                g = g.shift_unit(axis);
                continue;
            }
            let n = self.degrees[axis] as usize;
            let scal = (0..=n as u64).map(|j| self.module.binom_scalar(zi, j)).collect::<Result<Vec<_>>>()?;
            let st = strides(&self.degrees)[axis];
            let src = g.coeffs.clone();
            for s in line_starts(&self.degrees, axis) {
                for k in 0..=n {
                    let mut acc = self.module.zero();
                    for j in 0..=(n - k) {
                        let t = self.module.scale_padic(&scal[j], &src[s + (k + j) * st])?;
                        acc = self.module.add(&acc, &t);
                    }
                    g.coeffs[s + k * st] = acc;
                }
            }
        }
        Ok(g)
    }

    /// `y ↦ f(p^l y)` on `p^l Z_p^d`, with coefficients `Δ_{p^l}^m f(0)`,
    /// computed from the values `f(p^l y)` on the grid.
    pub fn restrict(&self, l: u32) -> Result<Self> {
        if l == 0 {
            return Ok(self.clone());
        }
        let q = self
            .module
            .prime()
            .get()
            .checked_pow(l)
            .ok_or_else(|| Error::BudgetExceeded(format!("p^{l} overflows")))?;
        let mut grid: Vec<M::Elem> = MultiIndex::box_iter(&self.degrees)
            .map(|y| self.eval_int(&MultiIndex(y.0.iter().map(|&v| v * q).collect())))
            .collect();
        newton(&self.module, &mut grid, &self.degrees);
        Ok(MahlerFn {
            module: self.module.clone(),
            degrees: self.degrees.clone(),
            coeffs: grid,
            tail: self.tail,
            heuristic: self.heuristic,
        })
    }

    /// `F` with `Δ_i F = f`: `b_{m+1_i} = a_m`, `b_m = 0` when `m_i = 0`.
    pub fn antidifference(&self, axis: usize) -> Self {
        let mut degrees = self.degrees.clone();
        degrees[axis] += 1;
        let coeffs = MultiIndex::box_iter(&degrees)
            .map(|m| match m.checked_sub(&MultiIndex::unit(self.dim(), axis)) {
                Some(prev) => self.coeff(&prev).unwrap().clone(),
                None => self.module.zero(),
            })
            .collect();
        MahlerFn { module: self.module.clone(), degrees, coeffs, tail: self.tail, heuristic: self.heuristic }
    }

    /// Both operands on the hull of their boxes; only finite expansions
    /// can be padded.
    fn aligned(&self, other: &Self) -> Result<(Vec<u64>, Vec<M::Elem>, Vec<M::Elem>)> {
        if self.dim() != other.dim() {
            return Err(Error::Mismatch("dimension mismatch".into()));
        }
        if self.degrees == other.degrees {
            return Ok((self.degrees.clone(), self.coeffs.clone(), other.coeffs.clone()));
        }
        if !(self.tail.is_infinite() && other.tail.is_infinite()) {
            return Err(Error::Mismatch("cannot pad an expansion with a finite tail bound".into()));
        }
        let hull: Vec<u64> = self.degrees.iter().zip(&other.degrees).map(|(a, b)| *a.max(b)).collect();
        let zero = self.module.zero();
        let pad = |f: &Self| {
            MultiIndex::box_iter(&hull).map(|n| f.coeff(&n).unwrap_or(&zero).clone()).collect::<Vec<_>>()
        };
        Ok((hull.clone(), pad(self), pad(other)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (degrees, a, b) = self.aligned(other)?;
        let coeffs = a.iter().zip(&b).map(|(x, y)| self.module.add(x, y)).collect();
        Ok(MahlerFn {
            module: self.module.clone(),
            degrees,
            coeffs,
            tail: self.tail.min(other.tail),
            heuristic: self.heuristic || other.heuristic,
        })
    }

    pub fn neg(&self) -> Self {
        let mut g = self.clone();
        g.coeffs = self.coeffs.iter().map(|a| self.module.neg(a)).collect();
        g
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        let mut g = self.clone();
        g.coeffs = self.coeffs.iter().map(|a| self.module.scale_int(c, a)).collect();
        g
    }

    pub fn to_record(&self) -> MahlerRecord {
        let zero = self.module.zero();
        MahlerRecord {
            schema: MAHLER_SCHEMA.into(),
            module: self.module.descriptor(),
            degrees: self.degrees.clone(),
            tail: self.tail.to_string(),
            heuristic: self.heuristic,
            coeffs: self
                .coeffs()
                .filter(|(_, a)| **a != zero)
                .map(|(n, a)| CoeffEntry { n, a: self.module.format(a) })
                .collect(),
        }
    }

    pub fn from_record(module: M, rec: &MahlerRecord) -> Result<Self> {
        if rec.schema != MAHLER_SCHEMA {
            return Err(Error::Mismatch(format!("schema `{}`, expected `{MAHLER_SCHEMA}`", rec.schema)));
        }
        if rec.module != module.descriptor() {
            return Err(Error::Mismatch("module descriptor differs".into()));
        }
        let pairs = rec
            .coeffs
            .iter()
            .map(|e| Ok((e.n.clone(), module.parse(&e.a)?)))
            .collect::<Result<Vec<_>>>()?;
        let tail: ExtVal = rec.tail.parse()?;
        Ok(Self::from_pairs(module, rec.degrees.clone(), pairs)?.with_tail(tail, rec.heuristic))
    }
}

/// Serialized form of a [`MahlerFn`]: nonzero coefficients only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MahlerRecord {
    pub schema: String,
    pub module: ModuleDesc,
    pub degrees: Vec<u64>,
    pub tail: String,
    pub heuristic: bool,
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub n: MultiIndex,
    pub a: String,
}

/// A [`MahlerFn`] over a module chosen at run time.
#[derive(Clone, Debug)]
pub enum AnyMahler {
    Padic(MahlerFn<PadicModule>),
    Series(MahlerFn<SeriesModule>),
    Witt(MahlerFn<WittModule>),
}

impl AnyMahler {
    pub fn from_record(rec: &MahlerRecord) -> Result<Self> {
        Ok(match &rec.module {
            ModuleDesc::Padic { prime, precision } => {
                AnyMahler::Padic(MahlerFn::from_record(PadicModule::new(*prime, *precision), rec)?)
            }
            ModuleDesc::Series { prime, cap } => {
                AnyMahler::Series(MahlerFn::from_record(SeriesModule::new(*prime, parse_q(cap)?), rec)?)
            }
            ModuleDesc::Witt { prime, length, cap, r } => {
                let m = WittModule::new(*prime, *length, parse_q(cap)?, parse_q(r)?)?;
                AnyMahler::Witt(MahlerFn::from_record(m, rec)?)
            }
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: MahlerRecord =
            serde_json::from_str(s).map_err(|e| Error::parse(e.column(), e.to_string()))?;
        Self::from_record(&rec)
    }

    pub fn to_record(&self) -> MahlerRecord {
        match self {
            AnyMahler::Padic(f) => f.to_record(),
            AnyMahler::Series(f) => f.to_record(),
            AnyMahler::Witt(f) => f.to_record(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("records serialize")
    }
}

/// A function known through its values on `Z_{≥0}^d`.
pub struct FnOracle<'a, M: ValuedModule> {
    module: M,
    d: usize,
    eval: Box<dyn Fn(&MultiIndex) -> M::Elem + 'a>,
}

impl<'a, M: ValuedModule + 'a> FnOracle<'a, M> {
    pub fn new(module: M, d: usize, eval: impl Fn(&MultiIndex) -> M::Elem + 'a) -> Self {
        FnOracle { module, d, eval: Box::new(eval) }
    }

    /// Values of a stored expansion.
    pub fn from_mahler(f: &'a MahlerFn<M>) -> Self {
        Self::new(f.module.clone(), f.dim(), move |x| f.eval_int(x))
    }

    pub fn module(&self) -> &M {
        &self.module
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eval(&self, x: &MultiIndex) -> M::Elem {
        (self.eval)(x)
    }

    /// Values on the box `0 ≤ x_i ≤ degrees_i`.
    pub fn grid(&self, degrees: &[u64]) -> Result<Vec<M::Elem>> {
        grid_size(degrees)?;
        Ok(MultiIndex::box_iter(degrees).map(|x| self.eval(&x)).collect())
    }

    /// `Δ^n f(x) = Σ_{i ≤ n} (−1)^{|n|−|i|} binom(n, i) f(x + i)`.
    pub fn delta_multi(self, n: MultiIndex) -> Result<FnOracle<'a, M>> {
        if n.dim() != self.d {
            return Err(Error::Mismatch("dimension mismatch".into()));
        }
        grid_size(&n.0)?;
        let module = self.module.clone();
        let d = self.d;
        let terms: Vec<(MultiIndex, BigInt)> = MultiIndex::box_iter(&n.0)
            .map(|i| {
                let mut c: BigInt = i.0.iter().zip(&n.0).map(|(&a, &b)| binom_int(b, a)).product();
                if (n.norm() - i.norm()) % 2 == 1 {
                    c = -c;
                }
                (i, c)
            })
            .collect();
        let m = module.clone();
        Ok(FnOracle::new(module, d, move |x: &MultiIndex| {
            terms.iter().fold(m.zero(), |acc, (i, c)| m.add(&acc, &m.scale_int(c, &(self.eval)(&x.add(i)))))
        }))
    }
}

/// `a_n = Δ^n f(0)` for `|n|_∞ ≤ N`, from the values on `[0, N]^d`.
///
/// The tail bound comes from the continuity modulus seen on the grid and is
/// flagged heuristic.
pub fn mahler_coeffs<M: ValuedModule>(f: &FnOracle<'_, M>, n: u64) -> Result<MahlerFn<M>> {
    let degrees = vec![n; f.dim()];
    let mut grid = f.grid(&degrees)?;
    let tail = continuity_tail(f.module(), &grid, &degrees);
    newton(f.module(), &mut grid, &degrees);
    Ok(MahlerFn::new(f.module().clone(), degrees, grid, tail)?.with_tail(tail, true))
}

/// `val^op(Δ_i^n f) ≥ p^λ p^{⌊log_p n⌋} + μ` for every axis `i` and
/// `0 ≤ n ≤ N`, with `val^op` read off the grid `[0, N]^d`.
pub fn check_cond2<M: ValuedModule>(f: &FnOracle<'_, M>, lambda: &Q, mu: &Q, n: u64) -> Result<bool> {
    let m = f.module();
    let p = m.prime().get();
    let degrees = vec![n; f.dim()];
    let grid = f.grid(&degrees)?;
    let st = strides(&degrees);
    for axis in 0..f.dim() {
        let sa = st[axis];
        let mut data = grid.clone();
        let starts = line_starts(&degrees, axis);
        for k in 0..=n {
            if k > 0 {
                for &s in &starts {
                    for j in 0..=(n - k) as usize {
                        let i = s + j * sa;
                        data[i] = m.sub(&data[i + sa], &data[i]);
                    }
                }
            }
            let vmin = starts
                .iter()
                .flat_map(|&s| (0..=(n - k) as usize).map(move |j| s + j * sa))
                .map(|i| m.val(&data[i]).value)
                .min()
                .unwrap_or(ExtVal::Infinity);
            if !meets(p, vmin, lambda, level_exp(p, k), mu) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Least `l ≥ 0` with `inf_{j≥1} (p^λ j − 1 + v_p(binom(p^l, j))) > c`.
///
/// For `j ≤ p^l` with `v_p(j) = w` the valuation is `l − w`, and the smallest
/// such `j` is `p^w`; larger `j` vanish. So the infimum is a minimum over
/// `0 ≤ w ≤ l` of `p^{λ+w} − 1 + l − w`.
pub fn gain_level(p: Prime, lambda: &Q, c: &Q) -> u32 {
    let pp = p.get();
    (0u32..)
        .find(|&l| {
            (0..=l).all(|w| {
                let rhs = c + Q::from_integer(1 - l as i64 + w as i64);
                pow_cmp(pp, &(lambda + Q::from_integer(w as i64)), &rhs) == Ordering::Greater
            })
        })
        .unwrap()
}

/// Largest `λ'` on the grid `Z/den` for which restriction to `p^l Z_p^d`
/// maps `λ`-analytic functions to `λ'`-analytic ones: the gain of `Δ_{p^l}`
/// must exceed `p^{λ'} + 1`. `None` if nothing above `λ − 64` qualifies.
pub fn restricted_lambda(p: Prime, lambda: &Q, l: u32, den: i64) -> Option<Q> {
    let pp = p.get();
    let ok = |lp: &Q| {
        (0..=l).all(|w| {
            let c = Q::from_integer(2 - l as i64 + w as i64);
            pow_cmp_pow(pp, &(lambda + Q::from_integer(w as i64)), lp, &c) == Ordering::Greater
        })
    };
    let top = ((lambda + Q::from_integer(l as i64)) * den).floor().to_integer();
    let bottom = ((lambda - Q::from_integer(64)) * den).floor().to_integer();
    (bottom..=top).rev().map(|k| Q::new(k, den)).find(ok)
}

/// `μ` for which `val_λ(f) ≥ v` implies condition 1 at `(λ, μ)`.
pub fn witness_from_val_lambda(p: Prime, lambda: &Q, v: &Q) -> Q {
    (v - Q::one()).min(v - ceil_pow(p.get(), lambda, 1024))
}

/// `λ'` for which condition 1 at `(λ, μ)` in dimension `d` implies
/// `val_{λ'}(f) ≥ μ`: `p^{λ'}·d ≤ p^{λ−1}`.
pub fn lambda_from_witness(p: Prime, lambda: &Q, d: usize) -> Q {
    let mut e = 0i64;
    while (p.get() as u128).pow(e as u32) < d as u128 {
        e += 1;
    }
    lambda - Q::from_integer(1 + e)
}
