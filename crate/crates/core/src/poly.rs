//! Univariate polynomials over Z, F_p and Z/p^k (coefficients lowest degree first):
//! Berlekamp factorization, Hensel lifting and an irreducibility test over Q.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::primes_up_to;

pub type ZPoly = Vec<BigInt>;
pub type FpPoly = Vec<u64>;

pub fn z_trim(f: &mut ZPoly) {
    while f.len() > 1 && f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
}

pub fn z_degree(f: &[BigInt]) -> Option<usize> {
    f.iter().rposition(|c| !c.is_zero())
}

pub fn z_mul(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return vec![BigInt::zero()];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    z_trim(&mut out);
    out
}

/// Exact division by a monic divisor; `None` if the remainder is nonzero.
pub fn z_div_exact_monic(f: &[BigInt], g: &[BigInt]) -> Option<ZPoly> {
    let dg = z_degree(g)?;
    let df = match z_degree(f) {
        None => return Some(vec![BigInt::zero()]),
        Some(d) => d,
    };
    if df < dg {
        return None;
    }
    let mut r: ZPoly = f[..=df].to_vec();
    let mut q = vec![BigInt::zero(); df - dg + 1];
    for k in (0..=df - dg).rev() {
        let c = r[k + dg].clone();
        if c.is_zero() {
            continue;
        }
        for (i, gi) in g[..=dg].iter().enumerate() {
            r[k + i] -= &c * gi;
        }
        q[k] = c;
    }
    if r.iter().all(|c| c.is_zero()) {
        Some(q)
    } else {
        None
    }
}

pub fn z_derivative(f: &[BigInt]) -> ZPoly {
    if f.len() <= 1 {
        return vec![BigInt::zero()];
    }
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

pub fn z_to_fp(f: &[BigInt], p: u64) -> FpPoly {
    let pb = BigInt::from(p);
    let mut out: FpPoly = f
        .iter()
        .map(|c| c.mod_floor(&pb).to_u64().unwrap_or(0))
        .collect();
    fp_trim(&mut out);
    out
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    crate::arith::pow_mod_u64(a, p - 2, p)
}

pub fn fp_trim(f: &mut FpPoly) {
    while f.last() == Some(&0) {
        f.pop();
    }
}

pub fn fp_degree(f: &[u64]) -> Option<usize> {
    f.iter().rposition(|&c| c != 0)
}

pub fn fp_add(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    let mut out: FpPoly = (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
        .collect();
    fp_trim(&mut out);
    out
}

pub fn fp_sub(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    let mut out: FpPoly = (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
        .collect();
    fp_trim(&mut out);
    out
}

pub fn fp_mul(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulm(x, y, p)) % p;
        }
    }
    fp_trim(&mut out);
    out
}

pub fn fp_scale(a: &[u64], c: u64, p: u64) -> FpPoly {
    let mut out: FpPoly = a.iter().map(|&x| mulm(x, c, p)).collect();
    fp_trim(&mut out);
    out
}

/// Quotient and remainder; panics on a zero divisor.
pub fn fp_divrem(a: &[u64], b: &[u64], p: u64) -> (FpPoly, FpPoly) {
    let db = fp_degree(b).expect("nonzero divisor");
    let inv = inv_mod(b[db], p);
    let mut r: FpPoly = a.to_vec();
    fp_trim(&mut r);
    let da = match fp_degree(&r) {
        None => return (Vec::new(), Vec::new()),
        Some(d) => d,
    };
    if da < db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; da - db + 1];
    for k in (0..=da - db).rev() {
        let c = mulm(r[k + db], inv, p);
        if c == 0 {
            continue;
        }
        for i in 0..=db {
            r[k + i] = (r[k + i] + p - mulm(c, b[i], p)) % p;
        }
        q[k] = c;
    }
    fp_trim(&mut q);
    fp_trim(&mut r);
    (q, r)
}

pub fn fp_monic(a: &[u64], p: u64) -> FpPoly {
    match fp_degree(a) {
        None => Vec::new(),
        Some(d) => fp_scale(a, inv_mod(a[d], p), p),
    }
}

/// Monic gcd.
pub fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    fp_trim(&mut x);
    fp_trim(&mut y);
    while !y.is_empty() {
        let (_, r) = fp_divrem(&x, &y, p);
        x = y;
        y = r;
    }
    fp_monic(&x, p)
}

/// Extended gcd: returns `(g, s, t)` with `s a + t b = g`, `g` monic.
pub fn fp_xgcd(a: &[u64], b: &[u64], p: u64) -> (FpPoly, FpPoly, FpPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    fp_trim(&mut r0);
    fp_trim(&mut r1);
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let s = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        let t = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        r0 = core::mem::replace(&mut r1, r);
        s0 = core::mem::replace(&mut s1, s);
        t0 = core::mem::replace(&mut t1, t);
    }
    let d = fp_degree(&r0).expect("not both zero");
    let inv = inv_mod(r0[d], p);
    (
        fp_scale(&r0, inv, p),
        fp_scale(&s0, inv, p),
        fp_scale(&t0, inv, p),
    )
}

pub fn fp_derivative(a: &[u64], p: u64) -> FpPoly {
    let mut out: FpPoly = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mulm(c, i as u64 % p, p))
        .collect();
    fp_trim(&mut out);
    out
}

pub fn fp_is_squarefree(a: &[u64], p: u64) -> bool {
    let d = fp_derivative(a, p);
    if d.is_empty() {
        return fp_degree(a).unwrap_or(0) == 0;
    }
    fp_degree(&fp_gcd(a, &d, p)) == Some(0)
}

fn fp_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> FpPoly {
    let mut result = vec![1u64];
    let mut b = fp_divrem(base, m, p).1;
    while e > 0 {
        if e & 1 == 1 {
            result = fp_divrem(&fp_mul(&result, &b, p), m, p).1;
        }
        b = fp_divrem(&fp_mul(&b, &b, p), m, p).1;
        e >>= 1;
    }
    result
}

/// Nullspace basis of a square matrix over F_p (row vectors `v` with `v M = 0`).
fn fp_left_kernel(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = m.len();
    // transpose so that we solve M^T v = 0 with column elimination on rows
    let mut a: Vec<Vec<u64>> = (0..n).map(|j| (0..n).map(|i| m[i][j]).collect()).collect();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(pr) = (row..n).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(row, pr);
        let inv = inv_mod(a[row][col], p);
        for c in 0..n {
            a[row][c] = mulm(a[row][c], inv, p);
        }
        for r in 0..n {
            if r != row && a[r][col] != 0 {
                let f = a[r][col];
                for c in 0..n {
                    a[r][c] = (a[r][c] + p - mulm(f, a[row][c], p)) % p;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; n];
        v[free] = 1;
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = (p - a[r][free]) % p;
        }
        basis.push(v);
    }
    basis
}

/// Monic irreducible factors of a squarefree polynomial over F_p (Berlekamp).
pub fn fp_factor_squarefree(f: &[u64], p: u64) -> Vec<FpPoly> {
    let f = fp_monic(f, p);
    let n = match fp_degree(&f) {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    if n == 1 {
        return vec![f];
    }
    let xp = fp_powmod(&[0, 1], p, &f, p);
    let mut q = Vec::with_capacity(n);
    let mut cur = vec![1u64];
    for _ in 0..n {
        let mut row = cur.clone();
        row.resize(n, 0);
        q.push(row);
        cur = fp_divrem(&fp_mul(&cur, &xp, p), &f, p).1;
    }
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = (row[i] + p - 1) % p;
    }
    let kernel = fp_left_kernel(&q, p);
    let r = kernel.len();
    let mut factors = vec![f.clone()];
    if r == 1 {
        return factors;
    }
    'outer: for v in kernel.iter() {
        let mut vp = v.clone();
        fp_trim(&mut vp);
        if fp_degree(&vp).unwrap_or(0) == 0 {
            continue;
        }
        for s in 0..p {
            let shifted = fp_sub(&vp, &[s], p);
            let mut next = Vec::new();
            for u in factors.drain(..) {
                if fp_degree(&u) == Some(1) {
                    next.push(u);
                    continue;
                }
                let g = fp_gcd(&u, &shifted, p);
                let dg = fp_degree(&g).unwrap_or(0);
                if dg > 0 && dg < fp_degree(&u).unwrap_or(0) {
                    let (h, _) = fp_divrem(&u, &g, p);
                    next.push(g);
                    next.push(fp_monic(&h, p));
                } else {
                    next.push(u);
                }
            }
            factors = next;
            if factors.len() == r {
                break 'outer;
            }
        }
    }
    factors.sort();
    factors
}

fn pk_reduce(f: &[BigInt], m: &BigInt) -> ZPoly {
    let mut out: ZPoly = f.iter().map(|c| c.mod_floor(m)).collect();
    z_trim(&mut out);
    out
}

fn fp_to_z(f: &[u64]) -> ZPoly {
    if f.is_empty() {
        return vec![BigInt::zero()];
    }
    f.iter().map(|&c| BigInt::from(c)).collect()
}

/// Lifts `f = g h (mod p)` with `g, h` monic and coprime to monic `G, H` with
/// `f = G H (mod p^k)`.
pub fn hensel_lift_pair(f: &[BigInt], g: &[u64], h: &[u64], p: u64, k: u32) -> (ZPoly, ZPoly) {
    let (_, s, t) = fp_xgcd(g, h, p);
    let pb = BigInt::from(p);
    let mut gz = fp_to_z(g);
    let mut hz = fp_to_z(h);
    let mut pj = pb.clone();
    for _ in 1..k {
        let prod = z_mul(&gz, &hz);
        let n = f.len().max(prod.len());
        let mut e: ZPoly = (0..n)
            .map(|i| {
                f.get(i).cloned().unwrap_or_default() - prod.get(i).cloned().unwrap_or_default()
            })
            .collect();
        for c in e.iter_mut() {
            debug_assert!((&*c % &pj).is_zero());
            *c = (&*c / &pj).mod_floor(&pb);
        }
        let ep = z_to_fp(&e, p);
        let (q, r) = fp_divrem(&fp_mul(&ep, &t, p), g, p);
        let dh = fp_add(&fp_mul(&ep, &s, p), &fp_mul(&q, h, p), p);
        let dg = r;
        for (i, c) in dg.iter().enumerate() {
            if i >= gz.len() {
                gz.resize(i + 1, BigInt::zero());
            }
            gz[i] += &pj * BigInt::from(*c);
        }
        for (i, c) in dh.iter().enumerate() {
            if i >= hz.len() {
                hz.resize(i + 1, BigInt::zero());
            }
            hz[i] += &pj * BigInt::from(*c);
        }
        pj *= &pb;
    }
    (pk_reduce(&gz, &pj), pk_reduce(&hz, &pj))
}

/// Lifts a full factorization of monic squarefree-mod-p `f` to `p^k`.
pub fn hensel_lift_all(f: &[BigInt], factors: &[FpPoly], p: u64, k: u32) -> Vec<ZPoly> {
    if factors.is_empty() {
        return Vec::new();
    }
    if factors.len() == 1 {
        let m = BigInt::from(p).pow(k);
        return vec![pk_reduce(f, &m)];
    }
    let g = &factors[0];
    let h = factors[1..]
        .iter()
        .fold(vec![1u64], |acc, x| fp_mul(&acc, x, p));
    let (gl, hl) = hensel_lift_pair(f, g, &h, p, k);
    let mut out = vec![gl];
    out.extend(hensel_lift_all(&hl, &factors[1..], p, k));
    out
}

fn symmetric(f: &[BigInt], m: &BigInt) -> ZPoly {
    let half = m / 2;
    f.iter()
        .map(|c| {
            let r = c.mod_floor(m);
            if r > half {
                r - m
            } else {
                r
            }
        })
        .collect()
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Irreducibility over Q of a monic integer polynomial (Zassenhaus).
pub fn is_irreducible_over_q(f: &[BigInt]) -> bool {
    let Some(d) = z_degree(f) else {
        return false;
    };
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let f = &f[..=d];
    let Some(p) = primes_up_to(10_000)
        .into_iter()
        .find(|&p| fp_is_squarefree(&z_to_fp(f, p), p))
    else {
        // not squarefree over Q
        return false;
    };
    let fac = fp_factor_squarefree(&z_to_fp(f, p), p);
    let r = fac.len();
    if r == 1 {
        return true;
    }
    let norm1: BigInt = f.iter().map(|c| c.abs()).sum();
    let bound = (BigInt::one() << d) * norm1 * 2 + 1;
    let mut k = 1u32;
    let mut pk = BigInt::from(p);
    while pk <= bound {
        pk *= p;
        k += 1;
    }
    let lifted = hensel_lift_all(f, &fac, p, k);
    for size in 1..=r / 2 {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let prod = idx.iter().fold(vec![BigInt::one()], |acc, &i| {
                pk_reduce(&z_mul(&acc, &lifted[i]), &pk)
            });
            let cand = symmetric(&prod, &pk);
            if z_div_exact_monic(f, &cand).is_some() {
                return false;
            }
            if !next_combination(&mut idx, r) {
                break;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(c: &[i64]) -> ZPoly {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn factor_mod_p() {
        // x^2 + 1 splits mod 5, inert mod 3
        let f = zp(&[1, 0, 1]);
        assert_eq!(fp_factor_squarefree(&z_to_fp(&f, 5), 5), vec![vec![2, 1], vec![3, 1]]);
        assert_eq!(fp_factor_squarefree(&z_to_fp(&f, 3), 3).len(), 1);
        assert!(!fp_is_squarefree(&z_to_fp(&f, 2), 2));
    }

    #[test]
    fn berlekamp_counts_factors() {
        // x^4 - 1 = (x-1)(x+1)(x-2)(x+2) mod 5
        let f = zp(&[-1, 0, 0, 0, 1]);
        let fac = fp_factor_squarefree(&z_to_fp(&f, 5), 5);
        assert_eq!(fac.len(), 4);
        let prod = fac.iter().fold(vec![1u64], |a, b| fp_mul(&a, b, 5));
        assert_eq!(prod, z_to_fp(&f, 5));
    }

    #[test]
    fn hensel_lift_products() {
        let f = zp(&[1, 0, 1]);
        let fac = fp_factor_squarefree(&z_to_fp(&f, 5), 5);
        let lifted = hensel_lift_all(&f, &fac, 5, 6);
        let m = BigInt::from(5).pow(6);
        let prod = pk_reduce(&z_mul(&lifted[0], &lifted[1]), &m);
        assert_eq!(prod, pk_reduce(&f, &m));
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible_over_q(&zp(&[1, 0, 1])));
        assert!(is_irreducible_over_q(&zp(&[-2, 0, 1])));
        assert!(!is_irreducible_over_q(&zp(&[-1, 0, 1])));
        // x^4 + 1 is irreducible but reducible modulo every prime
        assert!(is_irreducible_over_q(&zp(&[1, 0, 0, 0, 1])));
        // (x^2+1)(x^2+2)
        assert!(!is_irreducible_over_q(&zp(&[2, 0, 3, 0, 1])));
        // (x^2 + x + 1)(x^3 - 2)
        let f = z_mul(&zp(&[1, 1, 1]), &zp(&[-2, 0, 0, 1]));
        assert!(!is_irreducible_over_q(&f));
        assert!(is_irreducible_over_q(&zp(&[-2, 0, 0, 0, 0, 0, 0, 0, 1])));
    }
}
