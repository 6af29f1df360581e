//! Dense coefficient arrays in `Y = X^{1/p^D}` and the group-algebra model of
//! the cyclotomic action on `F_p[Y]/(Y^{p^t})`.
//!
//! With `Z = 1 + Y` one has `F_p[Y]/(Y^{p^t}) = F_p[Z]/(Z^{p^t} − 1)`, and
//! `γ_a` becomes the permutation `Z^i ↦ Z^{a·i mod p^t}`. The change of basis
//! between `Y^j` and `Z^i` is a tensor power of a `p × p` matrix by Lucas.

use crate::padic::lucas;

pub(crate) fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

pub(crate) fn sub_mod(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    crate::padic::mod_inv_u64(a as u64, p as u64) as u32
}

/// Smallest `t` with `p^t ≥ k`.
pub(crate) fn log_ceil(p: u64, k: u64) -> u32 {
    let mut t = 0;
    let mut pt = 1u64;
    while pt < k {
        pt *= p;
        t += 1;
    }
    t
}

fn apply_tensor(p: u64, t: u32, x: &mut [u32], m: &[Vec<u32>]) {
    let pu = p as usize;
    let mut v = vec![0u32; pu];
    let mut out = vec![0u64; pu];
    let mut stride = 1usize;
    for _ in 0..t {
        let block = stride * pu;
        for base in (0..x.len()).step_by(block) {
            for off in 0..stride {
                for d in 0..pu {
                    v[d] = x[base + off + d * stride];
                }
                if v.iter().all(|&c| c == 0) {
                    continue;
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o = m[i].iter().zip(&v).map(|(a, b)| (*a as u64) * (*b as u64)).sum::<u64>() % p;
                }
                for d in 0..pu {
                    x[base + off + d * stride] = out[d] as u32;
                }
            }
        }
        stride = block;
    }
}

fn forward_matrix(p: u64) -> Vec<Vec<u32>> {
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    if j < i {
                        0
                    } else {
                        let b = lucas(p, j, i) as u64;
                        let b = if (j - i) % 2 == 1 { (p - b) % p } else { b };
                        b as u32
                    }
                })
                .collect()
        })
        .collect()
}

fn backward_matrix(p: u64) -> Vec<Vec<u32>> {
    (0..p).map(|j| (0..p).map(|i| lucas(p, i, j)).collect()).collect()
}

/// Coefficients in the `Y`-basis to coefficients in the `Z`-basis, in place.
pub(crate) fn to_z_basis(p: u64, t: u32, x: &mut [u32]) {
    apply_tensor(p, t, x, &forward_matrix(p));
}

/// Coefficients in the `Z`-basis back to the `Y`-basis, in place.
pub(crate) fn from_z_basis(p: u64, t: u32, x: &mut [u32]) {
    apply_tensor(p, t, x, &backward_matrix(p));
}

/// `Z^i ↦ Z^{a·i mod p^t}` on a `Z`-basis vector of length `p^t`.
pub(crate) fn permute(h: &[u32], a_mod: u64) -> Vec<u32> {
    let l = h.len() as u64;
    let mut out = vec![0u32; h.len()];
    for (i, &c) in h.iter().enumerate() {
        if c != 0 {
            let j = ((a_mod as u128 * i as u128) % l as u128) as usize;
            out[j] = c;
        }
    }
    out
}

/// Truncated inverse of a power series with nonzero constant term.
pub(crate) fn inverse_series(p: u32, u: &[u32], len: usize) -> Vec<u32> {
    let nz: Vec<(usize, u32)> = u.iter().enumerate().skip(1).filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect();
    let c0inv = inv_mod(u[0], p) as u64;
    let mut inv = vec![0u32; len];
    if len == 0 {
        return inv;
    }
    inv[0] = c0inv as u32;
    for n in 1..len {
        let mut acc: u64 = 0;
        for &(k, c) in &nz {
            if k > n {
                break;
            }
            acc += c as u64 * inv[n - k] as u64;
        }
        let acc = (acc % p as u64) as u32;
        inv[n] = ((p as u64 - acc as u64) % p as u64 * c0inv % p as u64) as u32;
    }
    inv
}
