//! Integer arithmetic: primality, factorization and p-adic valuations of integers.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin with the first twenty prime bases (deterministic below 3.3e24).
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'outer: for a in primes_up_to(71) {
        let a = BigUint::from(a);
        if (&a % n).is_zero() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut d = one.clone();
        while d == one {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1u32;
    }
}

fn factor_into(n: BigUint, out: &mut BTreeMap<BigUint, u32>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_rho(&n);
    let q = &n / &d;
    factor_into(d, out);
    factor_into(q, out);
}

/// Prime factorization of a positive integer, primes ascending.
pub fn factor(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = BTreeMap::new();
    if n.is_zero() {
        return Vec::new();
    }
    let mut m = n.clone();
    for p in primes_up_to(1000) {
        let pb = BigUint::from(p);
        let mut e = 0;
        while (&m % &pb).is_zero() {
            m /= &pb;
            e += 1;
        }
        if e > 0 {
            out.insert(pb, e);
        }
        if m.is_one() {
            break;
        }
    }
    factor_into(m, &mut out);
    out.into_iter().collect()
}

/// Exponents of the primes in `|q|` for a nonzero rational.
pub fn factor_rational(q: &BigRational) -> BTreeMap<BigUint, i64> {
    let mut out = BTreeMap::new();
    for (p, e) in factor(q.numer().magnitude()) {
        *out.entry(p).or_insert(0) += e as i64;
    }
    for (p, e) in factor(q.denom().magnitude()) {
        *out.entry(p).or_insert(0) -= e as i64;
    }
    out.retain(|_, e| *e != 0);
    out
}

/// `v_p(n)` for nonzero `n`; `None` for zero.
pub fn valuation(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

/// `v_p(q)` of a nonzero rational.
pub fn valuation_rational(q: &BigRational, p: u64) -> Option<i64> {
    let a = valuation(q.numer(), p)?;
    let b = valuation(q.denom(), p)?;
    Some(a as i64 - b as i64)
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn lcm(a: &BigUint, b: &BigUint) -> BigUint {
    a.lcm(b)
}

/// Positive prime divisors of a nonzero integer.
pub fn prime_divisors(n: &BigInt) -> Vec<BigUint> {
    factor(n.magnitude()).into_iter().map(|(p, _)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(561));
    }

    #[test]
    fn factor_composites() {
        let n = BigUint::from(1_000_000_007u64) * BigUint::from(998_244_353u64) * 12u32;
        let f = factor(&n);
        assert_eq!(f.len(), 4);
        assert_eq!(f[0], (BigUint::from(2u32), 2));
        assert_eq!(f[1], (BigUint::from(3u32), 1));
    }

    #[test]
    fn rational_factors() {
        let q = BigRational::new(BigInt::from(-12), BigInt::from(45));
        let f = factor_rational(&q);
        assert_eq!(f[&BigUint::from(2u32)], 2);
        assert_eq!(f[&BigUint::from(5u32)], -1);
        assert_eq!(f[&BigUint::from(3u32)], -1);
        assert_eq!(valuation_rational(&q, 3), Some(-1));
    }

    #[test]
    fn combinatorics() {
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(binomial(6, 2), BigUint::from(15u32));
        assert_eq!(binomial(2, 3), BigUint::zero());
    }

    proptest! {
        #[test]
        fn factorization_multiplies_back(n in 1u64..10_000_000_000u64) {
            let f = factor(&BigUint::from(n));
            let prod = f.iter().fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
            prop_assert_eq!(prod, BigUint::from(n));
            for (p, _) in f {
                prop_assert!(is_probable_prime(&p));
            }
        }
    }
}
