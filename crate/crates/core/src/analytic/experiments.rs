//! The named experiments. Each is a pure function of its [`RunConfig`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::coboundary::coboundary_solve;
use super::report::{Report, RunConfig};
use super::tatesen::{ts2_sample, ts3_invert, ts4_check, Ts3Budget};
use super::{best_lambda, orbit_mahler, witness_search, GammaModule, GroupContext, GROUP_PRECISION};
use crate::error::{Error, Result};
use crate::mahler::MahlerFn;
use crate::module::{SeriesModule, WittModule};
use crate::padic::{PadicInt, Prime};
use crate::rational::{fmt_q, ExtVal, Q};
use crate::series::PerfLaurent;
use crate::witt::WittElem;

pub const EXPERIMENTS: [&str; 5] = ["decompletion", "witt-la", "counterexample", "tatesen", "coboundary"];

pub fn run(name: &str, cfg: &RunConfig) -> Result<Report> {
    match name {
        "decompletion" => decompletion(cfg),
        "witt-la" => witt_la(cfg),
        "counterexample" => counterexample(cfg),
        "tatesen" => tatesen(cfg),
        "coboundary" => coboundary(cfg),
        _ => Err(Error::Unsupported(format!("unknown experiment `{name}`"))),
    }
}

fn rng_for(cfg: &RunConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(stream);
    r
}

fn contexts(p: Prime, levels: &[u32]) -> Vec<GroupContext> {
    let mut ls = levels.to_vec();
    ls.sort_unstable();
    ls.dedup();
    ls.into_iter().map(|l| GroupContext::standard(p, l, GROUP_PRECISION)).collect()
}

fn ppow(p: Prime, m: u32) -> i64 {
    (p.get() as i64).pow(m)
}

/// A random element of `F_p((X^{1/p^m}))` with exponents in `(0, top]`, at
/// least one of exact denominator `p^m`.
pub fn random_depth_element(rng: &mut impl Rng, p: Prime, m: u32, top: i64, cap: Q) -> PerfLaurent {
    let den = ppow(p, m);
    let pp = p.get() as i64;
    let coeff = |rng: &mut dyn rand::RngCore| rng.gen_range(1..pp);
    let mut k = rng.gen_range(1..=top * den);
    if m > 0 {
        while k % pp == 0 {
            k = rng.gen_range(1..=top * den);
        }
    }
    let mut terms = std::collections::BTreeMap::from([(Q::new(k, den), coeff(rng))]);
    for _ in 0..rng.gen_range(0..3) {
        let e = Q::new(rng.gen_range(1..=top * den), den);
        let c = coeff(rng);
        terms.entry(e).or_insert(c);
    }
    PerfLaurent::from_terms(p, terms, cap)
}

/// `Σ_{j=1}^{J} X^{j + b/p^j}`.
pub fn deep_element(p: Prime, b: i64, terms: u32, cap: Q) -> PerfLaurent {
    PerfLaurent::from_terms(p, (1..=terms).map(|j| (Q::from_integer(j as i64) + Q::new(b, ppow(p, j)), 1)), cap)
}

/// Numbers of terms of the deep elements, and the Mahler degree needed for
/// the last term to reach the orbit coefficients.
fn deep_schedule(p: Prime) -> (Vec<u32>, u64) {
    match p.get() {
        2 => (vec![4, 6, 8], 512),
        3 => (vec![2, 3, 4], 243),
        _ => (vec![1, 2, 3], p.get().pow(4)),
    }
}

fn deep_offsets(p: Prime) -> Vec<i64> {
    let pp = p.get() as i64;
    (1..).filter(|b| b % pp != 0).take(3).collect()
}

fn opt_q(x: Option<Q>) -> String {
    x.map(|l| fmt_q(&l)).unwrap_or_else(|| "none".into())
}

fn best_at<M: GammaModule>(module: &M, m: &M::Elem, ctx: &GroupContext, grid: &[Q], n: u64) -> Result<Option<(Q, Q)>> {
    Ok(best_lambda(&orbit_mahler(module, m, ctx, n)?, grid))
}

/// Witnesses for finite-depth elements, and best-λ curves for truncations of
/// deep elements of the completion.
pub fn decompletion(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.prime()?;
    let cap = cfg.cap()?;
    let grid = cfg.lambdas()?;
    let ctxs = contexts(p, &cfg.levels);
    let module = SeriesModule::new(p, cap);
    let mut rng = rng_for(cfg, 1);
    let mut rep = Report::new(
        "decompletion",
        cfg,
        &["part", "sample", "depth", "terms", "element", "level", "lambda", "mu", "N", "cap"],
    );
    let per_depth = cfg.samples.div_ceil(4).max(1);
    let mut failures = 0;
    for m in 0..=3u32 {
        for s in 0..per_depth {
            let x = random_depth_element(&mut rng, p, m, 3, cap);
            let w = witness_search(&module, &x, &ctxs, &grid, cfg.degree)?.witness;
            let ok = w.as_ref().is_some_and(|w| w.level <= m + 1);
            if !ok {
                failures += 1;
                rep.fail(format!("depth {m} sample {s}: no witness at level ≤ {}", m + 1));
            }
            rep.push(vec![
                "finite".into(),
                s.to_string(),
                m.to_string(),
                x.num_terms().to_string(),
                x.to_text(),
                w.as_ref().map(|w| w.level.to_string()).unwrap_or_else(|| "none".into()),
                opt_q(w.as_ref().map(|w| w.lambda)),
                opt_q(w.as_ref().map(|w| w.mu)),
                cfg.degree.to_string(),
                fmt_q(&cap),
            ]);
        }
    }
    rep.note("finite_samples", 4 * per_depth);
    rep.note("finite_failures", failures);

    let (schedule, n_deep) = deep_schedule(p);
    let level = ctxs[0].clone();
    let mut curves_ok = 0;
    for (idx, b) in deep_offsets(p).into_iter().enumerate() {
        let mut prev: Option<Option<Q>> = None;
        let mut strict = true;
        for &jj in &schedule {
            let x = deep_element(p, b, jj, cap);
            let best = best_at(&module, &x, &level, &grid, n_deep)?;
            let lam = best.map(|(l, _)| l);
            if let Some(pl) = prev {
                strict &= matches!((pl, lam), (Some(a), Some(b)) if b < a);
            }
            prev = Some(lam);
            rep.push(vec![
                "deep".into(),
                idx.to_string(),
                jj.to_string(),
                jj.to_string(),
                format!("sum_(j<={jj}) X^(j+{b}/{p}^j)"),
                level.level().to_string(),
                opt_q(lam),
                opt_q(best.map(|(_, mu)| mu)),
                n_deep.to_string(),
                fmt_q(&cap),
            ]);
        }
        if strict {
            curves_ok += 1;
        } else {
            rep.fail(format!("deep element b={b}: best λ not strictly decreasing"));
        }
    }
    rep.note("deep_curves_strict", curves_ok);
    Ok(rep)
}

fn witt_poly(rng: &mut impl Rng, base: &WittElem, p: Prime) -> Result<WittElem> {
    let n = base.len();
    let cap = base.base_cap();
    let mut acc = WittElem::zero(p, n, cap);
    let mut pw = WittElem::one(p, n, cap);
    for _ in 0..=rng.gen_range(1..=2) {
        let c = rng.gen_range(0..p.get() as i64);
        if c != 0 {
            acc = acc.add(&pw.scale_int(c)?)?;
        }
        pw = pw.mul(base)?;
    }
    if acc.mod_p().is_zero() {
        acc = acc.add(base)?;
    }
    Ok(acc)
}

/// Witnesses in `W_n(Ẽ)` for elements of `φ^{-m}(A)/p^n`.
pub fn witt_la(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.prime()?;
    let cap = cfg.cap()?;
    let grid = cfg.lambdas()?;
    let ctxs = contexts(p, &cfg.levels);
    let r = Q::from_integer(1);
    let maxlen = cfg.witt_length.clamp(1, 3);
    let mut rng = rng_for(cfg, 2);
    let mut rep = Report::new("witt-la", cfg, &["sample", "m", "n", "element", "level", "lambda", "mu", "N", "cap"]);
    let mut failures = 0;
    let mut total = 0;
    let mut record = |rep: &mut Report, name: String, m: u32, x: &WittElem| -> Result<()> {
        let module = WittModule::new(p, x.len(), cap, r)?;
        let w = witness_search(&module, x, &ctxs, &grid, cfg.degree)?.witness;
        total += 1;
        if w.is_none() {
            failures += 1;
            rep.fail(format!("{name}: no witness"));
        }
        rep.push(vec![
            name,
            m.to_string(),
            x.len().to_string(),
            x.to_text(),
            w.as_ref().map(|w| w.level.to_string()).unwrap_or_else(|| "none".into()),
            opt_q(w.as_ref().map(|w| w.lambda)),
            opt_q(w.as_ref().map(|w| w.mu)),
            cfg.degree.to_string(),
            fmt_q(&cap),
        ]);
        Ok(())
    };

    let t2 = WittElem::element_t(p, 2, cap)?;
    record(&mut rep, "T".into(), 0, &t2)?;
    let named = t2.phi_inverse().add(&t2.scale_int(p.get() as i64)?)?;
    record(&mut rep, "phi^-1(T)+p*T".into(), 1, &named)?;
    let x = PerfLaurent::x(p, cap);
    let one_x = PerfLaurent::from_terms(p, [(Q::from_integer(0), 1), (Q::from_integer(1), 1)], cap);
    let teich = WittElem::teichmuller(&x, 2).mul(&WittElem::teichmuller(&one_x, 2))?;
    record(&mut rep, "[X]*[1+X]".into(), 0, &teich)?;

    let per = cfg.samples.div_ceil(4 * maxlen).max(1);
    for m in 0..=3u32 {
        for n in 1..=maxlen {
            let t = WittElem::element_t(p, n, cap)?.phi_pow(-(m as i64));
            for s in 0..per {
                let mut x = WittElem::zero(p, n, cap);
                let mut scale = 1i64;
                for _ in 0..n {
                    x = x.add(&witt_poly(&mut rng, &t, p)?.scale_int(scale)?)?;
                    scale *= p.get() as i64;
                }
                record(&mut rep, format!("random-{m}-{n}-{s}"), m, &x)?;
            }
        }
    }
    rep.note("samples", total);
    rep.note("failures", failures);
    rep.note("r", fmt_q(&r));
    Ok(rep)
}

/// `s_n = Σ_{i<n} p^i φ^{-i}(1 + T)` in `W_n(Ẽ)`, with digits known
/// modulo `X^cap`.
pub fn counterexample_element(p: Prime, n: usize, cap: Q) -> Result<WittElem> {
    // φ^{-i} divides caps by p^i.
    let start = cap * Q::from_integer(ppow(p, n as u32 - 1));
    let one_t = WittElem::element_t(p, n, start)?.add(&WittElem::one(p, n, start))?;
    let mut s = WittElem::zero(p, n, start);
    for i in 0..n {
        s = s.add(&one_t.phi_pow(-(i as i64)).scale_int(ppow(p, i as u32))?)?;
    }
    Ok(s.truncate(cap))
}

/// Best λ at a fixed level for `s_n`, `n = 1, 2, 3`.
pub fn counterexample(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.prime()?;
    // Below p^3 the orbit of s_3 vanishes at the cap before its deepest digit
    // is seen.
    let cap = cfg.cap()?.max(Q::from_integer(ppow(p, 3)));
    let grid = cfg.lambdas()?;
    let ctxs = contexts(p, &cfg.levels);
    let level = ctxs[0].clone();
    let r = Q::from_integer(1);
    let mut rep = Report::new("counterexample", cfg, &["n", "element", "level", "lambda", "mu", "witness_level", "N", "cap"]);
    let mut prev: Option<Q> = None;
    let mut strict = true;
    for n in 1..=3usize {
        let s = counterexample_element(p, n, cap)?;
        let module = WittModule::new(p, n, cap, r)?;
        let best = best_at(&module, &s, &level, &grid, cfg.degree)?;
        let search = witness_search(&module, &s, &ctxs, &grid, cfg.degree)?;
        let lam = best.map(|(l, _)| l);
        match (prev, lam) {
            (_, None) => strict = false,
            (Some(a), Some(b)) if b >= a => strict = false,
            _ => {}
        }
        if search.witness.is_none() {
            rep.fail(format!("s_{n}: no witness mod p^{n}"));
        }
        prev = lam;
        rep.push(vec![
            n.to_string(),
            s.to_text(),
            level.level().to_string(),
            opt_q(lam),
            opt_q(best.map(|(_, mu)| mu)),
            search.witness.as_ref().map(|w| w.level.to_string()).unwrap_or_else(|| "none".into()),
            cfg.degree.to_string(),
            fmt_q(&cap),
        ]);
    }
    if !strict {
        rep.fail("best λ column is not strictly decreasing in n");
    }
    rep.note("strictly_decreasing", strict);
    rep.note("r", fmt_q(&r));
    Ok(rep)
}

fn random_unit_one_mod(rng: &mut impl Rng, p: Prime, m: u32) -> PadicInt {
    let pp = p.get() as i64;
    let mut u = rng.gen_range(1..pp * pp);
    if u % pp == 0 {
        u += 1;
    }
    PadicInt::from_i64(p, 1 + ppow(p, m) * u, GROUP_PRECISION)
}

/// Random element of `X_n`: exponents of exact denominator above `p^n`.
fn random_complement(rng: &mut impl Rng, p: Prime, n: u32, cap: Q) -> PerfLaurent {
    let depth = n + rng.gen_range(1..=2);
    let den = ppow(p, depth);
    let pp = p.get() as i64;
    let top = (cap * Q::from_integer(den)).to_integer() - 1;
    let mut terms = std::collections::BTreeMap::new();
    for _ in 0..rng.gen_range(1..=2) {
        let mut k = rng.gen_range(1..=top.min(2 * den));
        while Q::new(k, den).denom().rem_euclid(ppow(p, n + 1)) != 0 {
            k = rng.gen_range(1..=top.min(2 * den));
        }
        terms.insert(Q::new(k, den), rng.gen_range(1..pp));
    }
    PerfLaurent::from_terms(p, terms, cap)
}

/// Measured Tate–Sen constants for `Ẽ` with trivial `H`.
pub fn tatesen(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.prime()?;
    let cap = cfg.cap()?;
    let mut rng = rng_for(cfg, 4);
    let mut rep = Report::new("tatesen", cfg, &["axiom", "sample", "input", "params", "measured", "ok"]);

    let mut c2 = Q::from_integer(0);
    for s in 0..cfg.samples {
        let n = rng.gen_range(0..=2u32);
        let m = rng.gen_range(0..=3u32);
        let x = random_depth_element(&mut rng, p, m, 3, cap);
        let a = random_unit_one_mod(&mut rng, p, 1 + n);
        let (loss, sample) = ts2_sample(&x, n, &a)?;
        if let Some(l) = loss {
            c2 = c2.max(l);
        }
        rep.push(vec![
            "TS2".into(),
            s.to_string(),
            x.to_text(),
            format!("n={n} a={}", a.residue()),
            format!("loss={} defect={}{}", sample.loss, sample.defect, if sample.defect_saturated { "(cap)" } else { "" }),
            "true".into(),
        ]);
    }
    rep.note("c2", fmt_q(&c2));
    if c2 != Q::from_integer(0) {
        rep.fail(format!("monomial projection lost valuation {c2}"));
    }

    let ts3_cap = Q::from_integer(4);
    let budget = Ts3Budget::for_prime(p);
    let mut solved = 0;
    let mut c3: Option<Q> = None;
    let ts3_runs = 50;
    for s in 0..ts3_runs {
        let n = rng.gen_range(0..=2u32);
        let x = random_complement(&mut rng, p, n, ts3_cap);
        let m = rng.gen_range(1..=n.max(1));
        let a = random_unit_one_mod(&mut rng, p, m);
        let (measured, ok) = match ts3_invert(&x, &a, n, budget) {
            Ok(sol) => {
                let ok = sol.residual.saturated;
                if ok {
                    solved += 1;
                    c3 = Some(c3.map_or(sol.loss, |c: Q| c.max(sol.loss)));
                }
                (format!("loss={} residual={} steps={}", fmt_q(&sol.loss), sol.residual.value, sol.steps), ok)
            }
            Err(e @ Error::SolveStalled(_)) => (e.to_string(), false),
            Err(e) => return Err(e),
        };
        rep.push(vec!["TS3".into(), s.to_string(), x.to_text(), format!("n={n} a={}", a.residue()), measured, ok.to_string()]);
    }
    rep.note("ts3_solved", format!("{solved}/{ts3_runs}"));
    rep.note("c3", opt_q(c3));
    if solved != ts3_runs {
        rep.fail(format!("ts3_invert reached the cap on {solved}/{ts3_runs} inputs"));
    }

    let ts4_runs = 30;
    let mut ts4_ok = 0;
    let ts4_cap = Q::from_integer(6);
    for s in 0..ts4_runs {
        let a = 1 + p.get() as i64 * rng.gen_range(0..(p.get() as i64 * 3));
        let n = rng.gen_range(0..=2u32);
        let k = rng.gen_range(1..=3u32);
        let length = rng.gen_range(1..=2usize);
        let r = Q::from_integer(1);
        let rep4 = ts4_check(p, a, n, k, length, ts4_cap, &r)?;
        let ok = rep4.sides_equal && rep4.gain_ok;
        if ok {
            ts4_ok += 1;
        }
        rep.push(vec![
            "TS4".into(),
            s.to_string(),
            format!("phi^-{n}(T^{k})"),
            format!("a={a} length={length}"),
            format!("gain={} required={} sides_equal={}", rep4.gain, rep4.required_gain, rep4.sides_equal),
            ok.to_string(),
        ]);
    }
    rep.note("ts4_passed", format!("{ts4_ok}/{ts4_runs}"));
    if ts4_ok != ts4_runs {
        rep.fail(format!("ts4 identity or gain failed on {} inputs", ts4_runs - ts4_ok));
    }
    Ok(rep)
}

/// Random `f = Σ_{n≤3} m_n binom(x, n)` with `m_n` moved by `γ`.
fn random_coboundary_input(rng: &mut impl Rng, module: &SeriesModule) -> Result<MahlerFn<SeriesModule>> {
    let p = module.p;
    let deg = rng.gen_range(0..=3u64);
    let coeffs = (0..=deg)
        .map(|_| {
            let m = rng.gen_range(0..=1u32);
            random_depth_element(rng, p, m, 3, module.cap)
        })
        .collect();
    MahlerFn::new(module.clone(), vec![deg], coeffs, ExtVal::Infinity)
}

/// `(γ − 1)F = f` with the truncated series; residuals against the
/// predicted bound, and `GainTooSmall` once `p^λ'` exceeds the gain.
pub fn coboundary(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.prime()?;
    let cap = Q::from_integer(64).max(cfg.cap()?);
    let module = SeriesModule::new(p, cap);
    let ctx = GroupContext::standard(p, *cfg.levels.iter().min().unwrap_or(&0), GROUP_PRECISION);
    let mut rng = rng_for(cfg, 5);
    let truncation = 6;
    let mut rep = Report::new(
        "coboundary",
        cfg,
        &["sample", "degree", "lambda", "s", "K", "predicted", "residual", "outcome"],
    );
    let runs = 20;
    let mut met = 0;
    let mut refused = 0;
    for s in 0..runs {
        let f = random_coboundary_input(&mut rng, &module)?;
        for lambda in [Q::from_integer(-1), Q::from_integer(4)] {
            let (gain, pred, resid, outcome) = match coboundary_solve(&f, &ctx, &lambda, truncation) {
                Ok(sol) => {
                    if sol.meets_prediction {
                        met += 1;
                    } else {
                        rep.fail(format!("sample {s}, λ'={lambda}: {}", sol.summary()));
                    }
                    (
                        opt_q(sol.gain),
                        opt_q(sol.predicted),
                        format!("{}{}", sol.residual.value, if sol.residual.saturated { "(cap)" } else { "" }),
                        if sol.meets_prediction { "met" } else { "missed" }.to_string(),
                    )
                }
                Err(Error::GainTooSmall(msg)) => {
                    refused += 1;
                    ("-".into(), "-".into(), "-".into(), format!("gain too small: {msg}"))
                }
                Err(e) => return Err(e),
            };
            rep.push(vec![
                s.to_string(),
                f.degrees()[0].to_string(),
                fmt_q(&lambda),
                gain,
                truncation.to_string(),
                pred,
                resid,
                outcome,
            ]);
        }
    }
    rep.note("met", met);
    rep.note("gain_too_small", refused);
    rep.note("O(1)", super::coboundary::O1);
    Ok(rep)
}
