#![allow(dead_code)]

use lavec_core::analytic::experiments::random_depth_element;
use lavec_core::mahler::MahlerFn;
use lavec_core::module::SeriesModule;
use lavec_core::rational::{qi, Q};
use lavec_core::{ExtVal, MultiIndex, PerfLaurent, Prime, WittElem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PRIMES: [u64; 3] = [2, 3, 5];

pub fn pr(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random series of depth `≤ m` with exponents in `(0, top]`, or zero.
pub fn series(rng: &mut impl Rng, p: Prime, m: u32, top: i64, cap: Q) -> PerfLaurent {
    if rng.gen_ratio(1, 8) {
        return PerfLaurent::zero(p, cap);
    }
    let depth = rng.gen_range(0..=m);
    random_depth_element(rng, p, depth, top, cap)
}

/// `1 + (random series)`, a unit.
pub fn unit_series(rng: &mut impl Rng, p: Prime, m: u32, cap: Q) -> PerfLaurent {
    series(rng, p, m, 3, cap).add(&PerfLaurent::one(p, cap))
}

pub fn mahler(rng: &mut impl Rng, p: Prime, d: usize, n: u64, cap: Q) -> MahlerFn<SeriesModule> {
    let module = SeriesModule::new(p, cap);
    let degrees = vec![n; d];
    let coeffs = MultiIndex::box_iter(&degrees).map(|_| series(rng, p, 2, 4, cap)).collect();
    MahlerFn::new(module, degrees, coeffs, ExtVal::Infinity).unwrap()
}

pub fn witt(rng: &mut impl Rng, p: Prime, n: usize, cap: Q) -> WittElem {
    WittElem::new((0..n).map(|_| series(rng, p, 1, 3, cap)).collect()).unwrap()
}

pub fn witt_unit(rng: &mut impl Rng, p: Prime, n: usize, cap: Q) -> WittElem {
    let mut digits: Vec<PerfLaurent> = (0..n).map(|_| series(rng, p, 1, 3, cap)).collect();
    digits[0] = unit_series(rng, p, 1, cap);
    WittElem::new(digits).unwrap()
}

pub fn cap16() -> Q {
    qi(16)
}
