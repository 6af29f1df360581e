mod common;

use common::*;
use lavec_core::analytic::tatesen::{ts3_invert, Ts3Budget};
use lavec_core::analytic::{orbit_mahler, witness_search, GammaModule, GroupContext, GROUP_PRECISION};
use lavec_core::mahler::{check_cond2, mahler_coeffs, FnOracle};
use lavec_core::module::{SeriesModule, ValuedModule, WittModule};
use lavec_core::rational::{q, qi};
use lavec_core::{MultiIndex, PadicInt, PerfLaurent, WittElem};
use proptest::prelude::*;
use rand::Rng;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES.to_vec())
}

fn unit_one_mod_p(p: u64, k: i64) -> PadicInt {
    let mut u = k.rem_euclid((p * p) as i64) + 1;
    if u % p as i64 == 0 {
        u += 1;
    }
    PadicInt::from_i64(pr(p), 1 + p as i64 * u, GROUP_PRECISION)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_ring_laws(p in prime(), seed in any::<u64>()) {
        let p = pr(p);
        let mut r = rng(seed);
        let [a, b, c] = [0; 3].map(|_| series(&mut r, p, 2, 3, cap16()));
        prop_assert!(a.add(&b).add(&c).same(&a.add(&b.add(&c))));
        prop_assert!(a.mul(&b).mul(&c).same(&a.mul(&b.mul(&c))));
        prop_assert!(a.mul(&b.add(&c)).same(&a.mul(&b).add(&a.mul(&c))));
        prop_assert!(a.sub(&a).is_zero());
        let u = unit_series(&mut r, p, 2, cap16());
        prop_assert!(u.mul(&u.invert().unwrap()).same(&PerfLaurent::one(p, cap16())));
    }

    #[test]
    fn frobenius_is_a_ring_isomorphism(p in prime(), seed in any::<u64>()) {
        let p = pr(p);
        let mut r = rng(seed);
        let [a, b] = [0; 2].map(|_| series(&mut r, p, 2, 3, cap16()));
        prop_assert!(a.mul(&b).frobenius().same(&a.frobenius().mul(&b.frobenius())));
        prop_assert!(a.add(&b).frobenius_inverse().same(&a.frobenius_inverse().add(&b.frobenius_inverse())));
        prop_assert_eq!(a.frobenius_inverse().frobenius(), a.clone());
        prop_assert!(a.frobenius().same(&a.pow(p.get() as i64).unwrap()));
    }

    #[test]
    fn gamma_is_an_isometric_automorphism(p in prime(), seed in any::<u64>(), k in 0i64..40) {
        let pp = pr(p);
        let mut r = rng(seed);
        let [a, b] = [0; 2].map(|_| series(&mut r, pp, 2, 3, cap16()));
        let g = unit_one_mod_p(p, k);
        let ga = a.gamma_act(&g).unwrap();
        prop_assert_eq!(ga.valuation(), a.valuation());
        prop_assert!(a.mul(&b).gamma_act(&g).unwrap().same(&ga.mul(&b.gamma_act(&g).unwrap())));
        prop_assert!(a.frobenius().gamma_act(&g).unwrap().same(&ga.frobenius()));
        let back = ga.gamma_act(&g.inverse().unwrap()).unwrap();
        prop_assert!(back.same(&a));
    }

    #[test]
    fn witt_phi_gamma_and_reduction_commute(p in prime(), seed in any::<u64>(), k in 0i64..40) {
        let pp = pr(p);
        let mut r = rng(seed);
        let x = witt(&mut r, pp, 3, cap16());
        let y = witt(&mut r, pp, 3, cap16());
        let g = unit_one_mod_p(p, k);
        prop_assert!(x.phi().gamma_act(&g).unwrap().same(&x.gamma_act(&g).unwrap().phi()));
        prop_assert!(x.mul(&y).unwrap().phi().same(&x.phi().mul(&y.phi()).unwrap()));
        let red = |w: &WittElem| w.reduce(2).unwrap();
        prop_assert!(red(&x.mul(&y).unwrap()).same(&red(&x).mul(&red(&y)).unwrap()));
        prop_assert!(red(&x.phi()).same(&red(&x).phi()));
        prop_assert!(red(&x.gamma_act(&g).unwrap()).same(&red(&x).gamma_act(&g).unwrap()));
        prop_assert!(x.add(&y).unwrap().mod_p().same(&x.mod_p().add(&y.mod_p())));
    }

    #[test]
    fn mahler_round_trip(p in prime(), seed in any::<u64>(), d in 1usize..=2, n in 0u64..=8) {
        let pp = pr(p);
        let f = mahler(&mut rng(seed), pp, d, n, qi(64));
        let g = mahler_coeffs(&FnOracle::from_mahler(&f), n).unwrap();
        prop_assert!(g.same_coeffs(&f));
    }

    #[test]
    fn conditions_agree(p in prime(), seed in any::<u64>(), d in 1usize..=2, n in 0u64..=10,
                        lam in -8i64..=8, mu in -6i64..=4) {
        let f = mahler(&mut rng(seed), pr(p), d, n, qi(64));
        let (lam, mu) = (q(lam, 4), qi(mu));
        let c2 = check_cond2(&FnOracle::from_mahler(&f), &lam, &mu, n).unwrap();
        prop_assert_eq!(f.check_cond1(&lam, &mu), c2);
    }

    #[test]
    fn shift_is_an_isometry(p in prime(), seed in any::<u64>(), d in 1usize..=2, n in 0u64..=6,
                            lam in -4i64..=2, z in 0i64..1000) {
        let f = mahler(&mut rng(seed), pr(p), d, n, qi(64));
        let lam = q(lam, 2);
        let zs = vec![PadicInt::from_i64(pr(p), z, 64); d];
        let g = f.shift(&zs).unwrap();
        let (vf, vg) = (f.val_lambda(&lam).unwrap(), g.val_lambda(&lam).unwrap());
        prop_assert_eq!(vf, vg);
        // Shifting back recovers f.
        let back = g.shift(&vec![PadicInt::from_i64(pr(p), -z, 64); d]).unwrap();
        prop_assert!(back.same_coeffs(&f));
    }

    #[test]
    fn orbit_expansion_interpolates_the_orbit(p in prime(), seed in any::<u64>(), level in 0u32..=1) {
        let pp = pr(p);
        let module = SeriesModule::new(pp, cap16());
        let m = series(&mut rng(seed), pp, 2, 3, cap16());
        let ctx = GroupContext::standard(pp, level, GROUP_PRECISION);
        let n = p * p;
        let orbit = orbit_mahler(&module, &m, &ctx, n).unwrap();
        let mut direct = m.clone();
        for x in 0..=n {
            let expanded = (0..=x).fold(PerfLaurent::zero(pp, cap16()), |acc, k| {
                let c = lavec_core::padic::binom_int(x, k);
                acc.add(&module.scale_int(&c, orbit.coeff(k)))
            });
            prop_assert!(expanded.same(&direct), "x = {}", x);
            direct = module.act(ctx.generator(), &direct).unwrap();
        }
    }

    #[test]
    fn witnesses_persist_at_higher_levels(p in prime(), seed in any::<u64>(), l in 0u32..=2) {
        let pp = pr(p);
        let module = SeriesModule::new(pp, cap16());
        let m = series(&mut rng(seed), pp, 3, 3, cap16());
        let grid: Vec<_> = (-64..=32).rev().map(|k| q(k, 8)).collect();
        let at = |lv: u32| {
            let ctx = [GroupContext::standard(pp, lv, GROUP_PRECISION)];
            witness_search(&module, &m, &ctx, &grid, 32).unwrap().witness
        };
        if at(l).is_some() {
            prop_assert!(at(l + 1).is_some());
        }
    }

    #[test]
    fn successful_inversions_reach_the_cap(p in prime(), seed in any::<u64>(), k in 0i64..20) {
        // Inputs built as (γ − 1)y with y of bounded depth.
        let pp = pr(p);
        let mut r = rng(seed);
        let g = unit_one_mod_p(p, k);
        let depth = r.gen_range(1..=2);
        let y = lavec_core::analytic::experiments::random_depth_element(&mut r, pp, depth, 2, qi(4));
        let x = y.gamma_act(&g).unwrap().sub(&y).sub(&y.gamma_act(&g).unwrap().sub(&y).monomial_projection(0));
        if let Ok(sol) = ts3_invert(&x, &g, 0, Ts3Budget::for_prime(pp)) {
            prop_assert!(sol.residual.saturated);
            prop_assert!(sol.y.gamma_act(&g).unwrap().sub(&sol.y).sub(&x).valuation().saturated);
        }
    }

    #[test]
    fn witt_module_valuation_is_ultrametric(p in prime(), seed in any::<u64>()) {
        let pp = pr(p);
        let mut r = rng(seed);
        let module = WittModule::new(pp, 3, cap16(), qi(1)).unwrap();
        let x = witt(&mut r, pp, 3, cap16());
        let y = witt(&mut r, pp, 3, cap16());
        let (vx, vy, vs) = (module.val(&x), module.val(&y), module.val(&module.add(&x, &y)));
        prop_assert!(vs.value >= vx.value.min(vy.value));
    }
}

#[test]
fn index_zero_uses_level_zero_convention() {
    let p = pr(2);
    let m = SeriesModule::new(p, qi(16));
    let c = lavec_core::mahler::MahlerFn::binomial(m, &MultiIndex(vec![0]), PerfLaurent::x(p, qi(16))).unwrap();
    // val(a_0) = 1 ≥ 2^0 + 0, and 1 < 2^0 + 1/2.
    assert!(c.check_cond1(&qi(0), &qi(0)));
    assert!(!c.check_cond1(&qi(0), &q(1, 2)));
}
