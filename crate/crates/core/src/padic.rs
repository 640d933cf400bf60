//! Elements of `Q_p` at finite absolute precision, with the exponential and
//! logarithm series on their convergence domains.

use alloc::format;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::valuation_rational;
use crate::error::{Error, Result};

/// `p^val * unit + O(p^prec)`, with `unit` coprime to `p` and reduced modulo
/// `p^(prec - val)`. Zero at this precision has `unit = 0` and `val = prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicNumber {
    p: u64,
    val: i64,
    unit: BigUint,
    prec: i64,
}

fn pow_p(p: u64, e: i64) -> BigInt {
    BigInt::from(p).pow(e.max(0) as u32)
}

impl PadicNumber {
    pub fn zero(p: u64, prec: i64) -> PadicNumber {
        PadicNumber {
            p,
            val: prec,
            unit: BigUint::zero(),
            prec,
        }
    }

    pub fn from_rational(q: &BigRational, p: u64, prec: i64) -> PadicNumber {
        if q.is_zero() {
            return PadicNumber::zero(p, prec);
        }
        let v = valuation_rational(q, p).expect("nonzero");
        if v >= prec {
            return PadicNumber::zero(p, prec);
        }
        let pb = BigInt::from(p);
        // strip the p-part
        let mut num = q.numer().clone();
        let mut den = q.denom().clone();
        while (&num % &pb).is_zero() {
            num /= &pb;
        }
        while (&den % &pb).is_zero() {
            den /= &pb;
        }
        let m = pow_p(p, prec - v);
        let inv = mod_inverse(&den.mod_floor(&m), &m).expect("coprime to p");
        let unit = (num * inv).mod_floor(&m);
        PadicNumber {
            p,
            val: v,
            unit: unit.to_biguint().expect("nonnegative"),
            prec,
        }
    }

    pub fn from_int(n: i64, p: u64, prec: i64) -> PadicNumber {
        PadicNumber::from_rational(&BigRational::from_integer(BigInt::from(n)), p, prec)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Absolute precision: the value is known modulo `p^prec`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// Valuation, `None` when zero at this precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    /// Rational representative `p^val * unit`.
    pub fn to_rational(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let u = BigInt::from(self.unit.clone());
        if self.val >= 0 {
            BigRational::from_integer(u * pow_p(self.p, self.val))
        } else {
            BigRational::new(u, pow_p(self.p, -self.val))
        }
    }

    pub fn with_precision(&self, prec: i64) -> PadicNumber {
        PadicNumber::from_rational(&self.to_rational(), self.p, prec.min(self.prec))
    }

    fn check_prime(&self, o: &PadicNumber) {
        assert_eq!(self.p, o.p, "p-adic numbers over different primes");
    }

    pub fn add(&self, o: &PadicNumber) -> PadicNumber {
        self.check_prime(o);
        let prec = self.prec.min(o.prec);
        PadicNumber::from_rational(&(self.to_rational() + o.to_rational()), self.p, prec)
    }

    pub fn neg(&self) -> PadicNumber {
        PadicNumber::from_rational(&-self.to_rational(), self.p, self.prec)
    }

    pub fn sub(&self, o: &PadicNumber) -> PadicNumber {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &PadicNumber) -> PadicNumber {
        self.check_prime(o);
        let prec = (self.val + o.prec).min(o.val + self.prec);
        PadicNumber::from_rational(&(self.to_rational() * o.to_rational()), self.p, prec)
    }

    pub fn div(&self, o: &PadicNumber) -> Option<PadicNumber> {
        self.check_prime(o);
        let ov = o.valuation()?;
        let orel = o.prec - ov;
        let srel = self.prec - self.val;
        let prec = self.val.min(self.prec) - ov + orel.min(srel);
        Some(PadicNumber::from_rational(
            &(self.to_rational() / o.to_rational()),
            self.p,
            prec,
        ))
    }

    /// Equality modulo `p^min(prec)`.
    pub fn eq_at_precision(&self, o: &PadicNumber) -> bool {
        self.sub(o).is_zero()
    }

    /// `|x|_p` as a pair `(p, -val)`, `None` for zero.
    pub fn abs_exponent(&self) -> Option<i64> {
        self.valuation().map(|v| -v)
    }

    /// `exp(z)` for `v(z) > 1/(p-1)`.
    pub fn exp(&self) -> Result<PadicNumber> {
        let p = self.p as i64;
        let n = self.prec;
        let Some(v) = self.valuation() else {
            return Ok(PadicNumber::from_int(1, self.p, n));
        };
        if v * (p - 1) <= 1 {
            return Err(Error::OutsideConvergenceDomain(format!(
                "exp needs v(z) > 1/(p-1); v(z) = {v}, p = {p}"
            )));
        }
        let z = self.to_rational();
        let mut sum = BigRational::one();
        let mut term = BigRational::one();
        let mut i: i64 = 1;
        // terms with index i satisfy v >= i (v - 1/(p-1)); stop once that reaches n
        while i * (v * (p - 1) - 1) < n * (p - 1) {
            term = term * &z / BigRational::from_integer(BigInt::from(i));
            sum += &term;
            i += 1;
        }
        Ok(PadicNumber::from_rational(&sum, self.p, n))
    }

    /// `log(u)` for `|u - 1| < p^(-1/(p-1))`.
    pub fn log(&self) -> Result<PadicNumber> {
        let p = self.p as i64;
        let n = self.prec;
        let one = PadicNumber::from_int(1, self.p, n);
        let t = self.sub(&one);
        let Some(w) = t.valuation() else {
            return Ok(PadicNumber::zero(self.p, n));
        };
        if w * (p - 1) <= 1 {
            return Err(Error::OutsideConvergenceDomain(format!(
                "log needs v(u-1) > 1/(p-1); v(u-1) = {w}, p = {p}"
            )));
        }
        let tr = t.to_rational();
        let mut sum = BigRational::zero();
        let mut power = BigRational::one();
        let mut i: i64 = 1;
        loop {
            // i w - floor(log_p i) is nondecreasing in i and bounds the term valuations
            if i * w - ilog(i, p) >= n {
                break;
            }
            power *= &tr;
            let term = &power / BigRational::from_integer(BigInt::from(i));
            if i % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            i += 1;
        }
        Ok(PadicNumber::from_rational(&sum, self.p, n))
    }

    /// Whether `|self| < r_p = p^(-1/(p-1))`.
    pub fn in_exp_domain(&self) -> bool {
        match self.valuation() {
            None => true,
            Some(v) => v * (self.p as i64 - 1) > 1,
        }
    }

    /// Whether `|self| < r_p^2`.
    pub fn in_squared_domain(&self) -> bool {
        match self.valuation() {
            None => true,
            Some(v) => v * (self.p as i64 - 1) > 2,
        }
    }
}

fn ilog(i: i64, p: i64) -> i64 {
    let mut k = 0;
    let mut x = i;
    while x >= p {
        x /= p;
        k += 1;
    }
    k
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.prec);
        }
        if self.val == 0 {
            write!(f, "{} + O({}^{})", self.unit, self.p, self.prec)
        } else {
            write!(
                f,
                "{}^{} * {} + O({}^{})",
                self.p, self.val, self.unit, self.p, self.prec
            )
        }
    }
}

/// `log r_p` as a rational multiple of `log p`: `-1/(p-1)`.
pub fn log_radius_coefficient(p: u64) -> BigRational {
    BigRational::new(-BigInt::one(), BigInt::from(p - 1))
}

/// Digits of the unit part in base `p` (lowest first), for display and tests.
pub fn digits(x: &PadicNumber) -> alloc::vec::Vec<u64> {
    let mut out = alloc::vec::Vec::new();
    let mut u = x.unit.clone();
    let pb = BigUint::from(x.p);
    while !u.is_zero() {
        out.push((&u % &pb).to_u64().unwrap_or(0));
        u /= &pb;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exp_of_five() {
        // 1 + 5 + 25/2 + (terms divisible by 125) = 1 + 5 + 75 mod 125
        let z = PadicNumber::from_int(5, 5, 3);
        let e = z.exp().unwrap();
        assert_eq!(e, PadicNumber::from_int(81, 5, 3));
    }

    #[test]
    fn domain_boundary_at_two() {
        assert!(PadicNumber::from_int(2, 2, 30).exp().is_err());
        assert!(PadicNumber::from_int(4, 2, 30).exp().is_ok());
        assert!(PadicNumber::from_int(3, 2, 30).log().is_err());
        assert!(PadicNumber::from_int(5, 2, 30).log().is_ok());
        assert!(PadicNumber::from_int(3, 3, 30).exp().is_ok());
    }

    #[test]
    fn trivial_values() {
        let z = PadicNumber::zero(7, 30);
        assert_eq!(z.exp().unwrap(), PadicNumber::from_int(1, 7, 30));
        assert!(PadicNumber::from_int(1, 7, 30).log().unwrap().is_zero());
    }

    #[test]
    fn log_six_has_valuation_one() {
        let l = PadicNumber::from_int(6, 5, 30).log().unwrap();
        assert_eq!(l.valuation(), Some(1));
    }

    #[test]
    fn arithmetic_precision() {
        let a = PadicNumber::from_rational(&BigRational::new(1.into(), 3.into()), 5, 10);
        let b = PadicNumber::from_int(3, 5, 10);
        assert_eq!(a.mul(&b), PadicNumber::from_int(1, 5, 10));
        let c = PadicNumber::from_int(50, 5, 10);
        assert_eq!(c.valuation(), Some(2));
        assert_eq!(c.div(&PadicNumber::from_int(25, 5, 10)).unwrap().valuation(), Some(0));
    }

    proptest! {
        #[test]
        fn log_exp_inverse(k in 1i64..1_000_000, pi in 0usize..4) {
            let p = [2u64, 3, 5, 7][pi];
            let base = if p == 2 { 4 } else { p as i64 };
            let z = PadicNumber::from_int(base * k, p, 30);
            let back = z.exp().unwrap().log().unwrap();
            prop_assert!(back.eq_at_precision(&z));
            let u = PadicNumber::from_int(1 + base * k, p, 30);
            let again = u.log().unwrap().exp().unwrap();
            prop_assert!(again.eq_at_precision(&u));
        }

        #[test]
        fn exp_is_additive(a in 1i64..10_000, b in 1i64..10_000) {
            let z1 = PadicNumber::from_int(3 * a, 3, 20);
            let z2 = PadicNumber::from_int(3 * b, 3, 20);
            let lhs = z1.add(&z2).exp().unwrap();
            let rhs = z1.exp().unwrap().mul(&z2.exp().unwrap());
            prop_assert!(lhs.eq_at_precision(&rhs));
        }
    }
}
