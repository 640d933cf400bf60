//! Independent oracles: Monte Carlo volumes, lattice counts, brute-force projections
//! and searches, written without the core algorithms they check.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

pub fn unit_ball_volume(nu: usize) -> f64 {
    match nu {
        0 => 1.0,
        1 => 2.0,
        n => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Inverse by Gauss-Jordan with partial pivoting.
pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        let d = a[c][c];
        a[c].iter_mut().for_each(|x| *x /= d);
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    let pivot_row = a[c].clone();
                    a[r].iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn sample_unit_ball<R: Rng>(nu: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..nu).map(|_| rng.random_range(-1.0..1.0)).collect();
        if norm_sq(&x) <= 1.0 {
            return x;
        }
    }
}

/// `log(vol{x : |M x| <= 1} / vol(unit ball))` by sampling the bounding box of the ellipsoid.
/// Also returns the fraction of box samples that landed in the ellipsoid.
pub fn mc_log_volume_ratio<R: Rng>(m: &[Vec<f64>], samples: u64, rng: &mut R) -> Option<(f64, f64)> {
    let nu = m.len();
    let inv = invert(m)?;
    let half: Vec<f64> = inv.iter().map(|r| norm_sq(r).sqrt()).collect();
    let mut hits = 0u64;
    let mut x = vec![0.0; nu];
    for _ in 0..samples {
        for (xi, h) in x.iter_mut().zip(&half) {
            *xi = rng.random_range(-*h..*h);
        }
        if norm_sq(&mat_vec(m, &x)) <= 1.0 {
            hits += 1;
        }
    }
    if hits == 0 {
        return None;
    }
    let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let fill = hits as f64 / samples as f64;
    Some(((fill * box_vol / unit_ball_volume(nu)).ln(), fill))
}

/// `log(vol{x : |x|^2 + |alpha A x|^2 <= 1} / vol(unit ball))` with `A` square or wide.
pub fn mc_log_twisted_ratio<R: Rng>(a: &[Vec<f64>], alpha: f64, nu: usize, samples: u64, rng: &mut R) -> Option<f64> {
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = sample_unit_ball(nu, rng);
        let ax = mat_vec(a, &x);
        if norm_sq(&x) + alpha * alpha * norm_sq(&ax) <= 1.0 {
            hits += 1;
        }
    }
    (hits > 0).then(|| (hits as f64 / samples as f64).ln())
}

/// `v_p(q)`, or `None` for zero.
pub fn vp(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut e = 0i64;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        e
    };
    Some(count(q.numer().clone()) - count(q.denom().clone()))
}

fn p_integral(q: &BigRational, p: u64) -> bool {
    vp(q, p).is_none_or(|v| v >= 0)
}

/// Number of `x in (p^-N Z / p^N Z)^nu` with every `rows(x)` entry in `Z_p`, where
/// each `rows` map must send `p^N Z^nu` into `Z_p`.
pub fn lattice_count(
    rows: &[Vec<BigRational>],
    nu: usize,
    p: u64,
    big_n: u32,
) -> u64 {
    let pn = p.pow(big_n);
    let side = pn * pn;
    let scale = BigRational::new(BigInt::one(), BigInt::from(pn));
    let total = side.pow(nu as u32);
    let mut count = 0u64;
    let mut idx = vec![0u64; nu];
    for _ in 0..total {
        let x: Vec<BigRational> = idx
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)) * &scale)
            .collect();
        let ok = rows.iter().all(|r| {
            let s = r.iter().zip(&x).fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
            p_integral(&s, p)
        });
        if ok {
            count += 1;
        }
        for d in idx.iter_mut() {
            *d += 1;
            if *d < side {
                break;
            }
            *d = 0;
        }
    }
    count
}

/// `log_p` of `count / p^(N nu)`, which must be an exact power of `p`.
pub fn exact_log_p_ratio(count: u64, p: u64, big_n: u32, nu: usize) -> Option<i64> {
    let mut c = count;
    let mut e = 0i64;
    while c > 1 && c % p == 0 {
        c /= p;
        e += 1;
    }
    (c == 1).then(|| e - (big_n as i64) * nu as i64)
}

/// Squared norm of `sum_i p_i e^i` in `Sym^l` as the minimal Euclidean norm of a preimage
/// in the tensor power, found by solving the normal equations of the multiplication map.
pub fn sym_norm_by_projection(nu: usize, ell: u32, coeffs: &[(Vec<u32>, f64)]) -> f64 {
    let monomials = monomials(nu, ell);
    let pos: BTreeMap<Vec<u32>, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let words = (nu as u64).pow(ell) as usize;
    // pi: tensor basis word -> monomial column
    let mut pi = vec![vec![0.0f64; words]; monomials.len()];
    for w in 0..words {
        let mut exps = vec![0u32; nu];
        let mut c = w;
        for _ in 0..ell {
            exps[c % nu] += 1;
            c /= nu;
        }
        pi[pos[&exps]][w] = 1.0;
    }
    let gram: Vec<Vec<f64>> = pi
        .iter()
        .map(|r| pi.iter().map(|s| r.iter().zip(s).map(|(a, b)| a * b).sum()).collect())
        .collect();
    let mut s = vec![0.0; monomials.len()];
    for (i, c) in coeffs {
        s[pos[i]] += c;
    }
    let g_inv = invert(&gram).expect("multiplication map is onto");
    let y = mat_vec(&g_inv, &s);
    // the minimal preimage is pi^T y, of squared norm s . y
    let pre: Vec<f64> = (0..words).map(|w| pi.iter().zip(&y).map(|(r, yy)| r[w] * yy).sum()).collect();
    norm_sq(&pre)
}

pub fn monomials(nu: usize, ell: u32) -> Vec<Vec<u32>> {
    if nu == 1 {
        return vec![vec![ell]];
    }
    let mut out = Vec::new();
    for first in (0..=ell).rev() {
        for mut rest in monomials(nu - 1, ell - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Smallest sup-norm of a nonzero integer solution of `a x = 0`, enumerating whole cubes
/// of growing radius while at most `max_vectors` candidates have been examined.
pub fn minimal_solution_norm(a: &[Vec<i64>], nu: usize, max_vectors: u64) -> Option<i64> {
    let mut spent = 0u64;
    for r in 1i64.. {
        let side = (2 * r + 1) as u64;
        let total = side.checked_pow(nu as u32)?;
        spent = spent.checked_add(total)?;
        if spent > max_vectors {
            return None;
        }
        let mut x = vec![-r; nu];
        for _ in 0..total {
            if x.iter().any(|c| c.abs() == r) && a.iter().all(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum::<i64>() == 0) {
                return Some(r);
            }
            for c in x.iter_mut() {
                *c += 1;
                if *c <= r {
                    break;
                }
                *c = -r;
            }
        }
    }
    unreachable!()
}

/// `delta_l(h)` through its prime-power valuations: the largest total `v_q` of at most
/// `h` positive integers summing to at most `l`, by a knapsack over part sizes.
pub fn delta_by_valuations(l: u64, h: u64) -> BigUint {
    let mut out = BigUint::one();
    for q in 2..=l.max(1) {
        if (2..q).any(|d| q % d == 0) {
            continue;
        }
        // best[c][s]: max valuation with c parts of total size s
        let l = l as usize;
        let h = h as usize;
        let mut best = vec![vec![i64::MIN; l + 1]; h + 1];
        best[0][0] = 0;
        for c in 1..=h {
            for s in 1..=l {
                for part in 1..=s {
                    let prev = best[c - 1][s - part];
                    if prev == i64::MIN {
                        continue;
                    }
                    let mut v = 0i64;
                    let mut m = part as u64;
                    while m % q == 0 {
                        m /= q;
                        v += 1;
                    }
                    best[c][s] = best[c][s].max(prev + v);
                }
            }
        }
        let e = best.iter().flatten().copied().max().unwrap_or(0).max(0);
        out *= BigUint::from(q).pow(e as u32);
    }
    out
}

/// Weil height of a rational `p/q` in lowest terms: `log max(|p|, |q|)`.
pub fn rational_height_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let m = q.numer().abs().max(q.denom().abs());
    biguint_ln(&m.to_biguint().expect("nonnegative"))
}

pub fn biguint_ln(m: &BigUint) -> f64 {
    let bits = m.bits();
    if bits < 1000 {
        return m.to_f64().expect("finite").ln();
    }
    let shift = bits - 900;
    (m >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Log-magnitude of the principal bound `(6n)^(203 n^2) max{U, (1 - eps0) log p}` in plain
/// floating point, straight from the displayed statement.
#[allow(clippy::too_many_arguments)]
pub fn principal_log_magnitude(
    n: usize,
    d: u64,
    log_e: f64,
    log_a: &[f64],
    log_b: f64,
    s: usize,
    i_set: &[usize],
    p: Option<u64>,
) -> (u64, f64) {
    let df = d as f64;
    let eps_term = p.map_or(0.0, |p| (p as f64).ln());
    let inner = std::f64::consts::E + df / log_e + eps_term + log_a.iter().sum::<f64>();
    let frak_a = (df / log_e * inner.ln()).floor() as u64 + 1;
    let fa = frak_a as f64;
    let mut log_u = fa.ln() / s as f64 + (log_b + fa * log_e + df * log_e.ln()).ln();
    for &i in i_set {
        log_u += (1.0 + df * log_a[i] / log_e).ln() / s as f64;
    }
    let factor = match p {
        Some(p) => log_u.max((p as f64).ln().ln()),
        None => log_u,
    };
    let nn = n as f64;
    (frak_a, 203.0 * nn * nn * (6.0 * nn).ln() + factor)
}

/// Exponent vectors of positive rationals over their joint prime support and the rank of
/// that integer matrix, by fraction-free elimination.
pub fn multiplicative_rank(alphas: &[BigRational]) -> usize {
    let mut primes: Vec<BigInt> = Vec::new();
    let factor = |mut n: BigInt, sign: i64, row: &mut BTreeMap<BigInt, i64>| {
        let mut d = BigInt::from(2);
        while &d * &d <= n {
            while (&n % &d).is_zero() {
                *row.entry(d.clone()).or_insert(0) += sign;
                n /= &d;
            }
            d += 1;
        }
        if n > BigInt::one() {
            *row.entry(n).or_insert(0) += sign;
        }
    };
    let rows: Vec<BTreeMap<BigInt, i64>> = alphas
        .iter()
        .map(|q| {
            let mut r = BTreeMap::new();
            factor(q.numer().abs(), 1, &mut r);
            factor(q.denom().abs(), -1, &mut r);
            r
        })
        .collect();
    for r in &rows {
        for p in r.keys() {
            if !primes.contains(p) {
                primes.push(p.clone());
            }
        }
    }
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| primes.iter().map(|p| BigInt::from(*r.get(p).unwrap_or(&0))).collect())
        .collect();
    let mut rank = 0;
    let cols = primes.len();
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let g = m[i][c].gcd(&m[rank][c]);
                let a = &m[rank][c] / &g;
                let b = &m[i][c] / &g;
                let pivot = m[rank].clone();
                m[i] = m[i].iter().zip(&pivot).map(|(x, y)| x * &a - y * &b).collect();
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (l, _) = mc_log_volume_ratio(&[vec![2.0]], 100_000, &mut rng).unwrap();
        assert!((l + 2f64.ln()).abs() < 0.01);
    }

    #[test]
    fn twisted_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = mc_log_twisted_ratio(&[vec![1.0]], 1.0, 1, 200_000, &mut rng).unwrap();
        assert!((l + 0.5 * 2f64.ln()).abs() < 0.01);
    }

    #[test]
    fn two_adic_line() {
        let c = lattice_count(&[vec![q(2, 1)]], 1, 2, 2);
        assert_eq!(exact_log_p_ratio(c, 2, 2, 1), Some(1));
    }

    #[test]
    fn e1e2_weight() {
        let s = sym_norm_by_projection(2, 2, &[(vec![1, 1], 1.0)]);
        assert!((s - 0.5).abs() < 1e-15);
        let s = sym_norm_by_projection(2, 2, &[(vec![2, 0], 1.0)]);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn siegel_examples() {
        assert_eq!(minimal_solution_norm(&[vec![1, -1]], 2, 1000), Some(1));
        assert_eq!(minimal_solution_norm(&[vec![2, 3]], 2, 1000), Some(3));
    }

    #[test]
    fn delta_small() {
        assert_eq!(delta_by_valuations(4, 1), BigUint::from(12u32));
        assert_eq!(delta_by_valuations(4, 2), BigUint::from(12u32));
        assert_eq!(delta_by_valuations(5, 2), BigUint::from(60u32));
    }

    #[test]
    fn ranks() {
        assert_eq!(multiplicative_rank(&[q(2, 1), q(3, 1)]), 2);
        assert_eq!(multiplicative_rank(&[q(2, 1), q(4, 1)]), 1);
        assert_eq!(multiplicative_rank(&[q(6, 1), q(2, 3), q(9, 1)]), 2);
    }

    #[test]
    fn principal_example() {
        let (a, l) = principal_log_magnitude(1, 1, 1.0, &[0.0], 1.0, 1, &[0], None);
        assert_eq!(a, 2);
        assert!(l > 0.0);
    }
}
