//! Reals of the form `sum c_p log p + r` with exact rational `c_p` and a ball `r`.
//!
//! Logarithms of distinct primes are linearly independent over the rationals, so
//! a value with zero remainder is zero exactly when all coefficients vanish.

use alloc::collections::BTreeMap;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::factor_rational;
use crate::ball::Ball;

const MAX_REFINE_BITS: u32 = 8192;

#[derive(Clone, Debug)]
pub struct LogReal {
    exact: BTreeMap<BigUint, BigRational>,
    rem: Ball,
}

impl LogReal {
    pub fn zero(prec: u32) -> LogReal {
        LogReal {
            exact: BTreeMap::new(),
            rem: Ball::zero(prec),
        }
    }

    pub fn from_ball(b: Ball) -> LogReal {
        LogReal {
            exact: BTreeMap::new(),
            rem: b,
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> LogReal {
        LogReal::from_ball(Ball::from_rational(q, prec))
    }

    /// `log |q|` for a nonzero rational.
    pub fn log_rational(q: &BigRational, prec: u32) -> LogReal {
        let mut exact = BTreeMap::new();
        for (p, e) in factor_rational(q) {
            exact.insert(p, BigRational::from_integer(BigInt::from(e)));
        }
        LogReal {
            exact,
            rem: Ball::zero(prec),
        }
    }

    pub fn log_int(n: u64, prec: u32) -> LogReal {
        LogReal::log_rational(&BigRational::from_integer(BigInt::from(n)), prec)
    }

    /// `c * log p`.
    pub fn log_prime_multiple(p: &BigUint, c: BigRational, prec: u32) -> LogReal {
        let mut exact = BTreeMap::new();
        if !c.is_zero() {
            exact.insert(p.clone(), c);
        }
        LogReal {
            exact,
            rem: Ball::zero(prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.rem.prec()
    }

    pub fn remainder(&self) -> &Ball {
        &self.rem
    }

    pub fn coefficients(&self) -> &BTreeMap<BigUint, BigRational> {
        &self.exact
    }

    pub fn coefficient(&self, p: &BigUint) -> BigRational {
        self.exact.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    /// True when the value carries no rounding error.
    pub fn is_exact(&self) -> bool {
        self.rem.is_exact() && self.rem.mid().is_zero()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact.is_empty() && self.rem.is_exact() && self.rem.mid().is_zero()
    }

    pub fn add(&self, o: &LogReal) -> LogReal {
        let mut exact = self.exact.clone();
        for (p, c) in &o.exact {
            let e = exact.entry(p.clone()).or_insert_with(BigRational::zero);
            *e += c;
        }
        exact.retain(|_, c| !c.is_zero());
        LogReal {
            exact,
            rem: self.rem.add_ball(&o.rem),
        }
    }

    pub fn neg(&self) -> LogReal {
        LogReal {
            exact: self.exact.iter().map(|(p, c)| (p.clone(), -c)).collect(),
            rem: self.rem.neg_ball(),
        }
    }

    pub fn sub(&self, o: &LogReal) -> LogReal {
        self.add(&o.neg())
    }

    pub fn add_ball(&self, b: &Ball) -> LogReal {
        LogReal {
            exact: self.exact.clone(),
            rem: self.rem.add_ball(b),
        }
    }

    pub fn scale(&self, q: &BigRational) -> LogReal {
        if q.is_zero() {
            return LogReal::zero(self.prec());
        }
        let prec = self.prec();
        LogReal {
            exact: self.exact.iter().map(|(p, c)| (p.clone(), c * q)).collect(),
            rem: self.rem.mul_ball(&Ball::from_rational(q, prec)),
        }
    }

    pub fn scale_int(&self, k: i64) -> LogReal {
        self.scale(&BigRational::from_integer(BigInt::from(k)))
    }

    /// Multiplication by an inexact factor; the exact part is folded into the ball.
    pub fn scale_ball(&self, b: &Ball) -> LogReal {
        LogReal::from_ball(self.to_ball(self.prec().max(b.prec())).mul_ball(b))
    }

    pub fn to_ball(&self, prec: u32) -> Ball {
        let mut acc = self.rem.with_prec(prec.max(self.rem.prec()));
        let w = acc.prec();
        for (p, c) in &self.exact {
            let lp = Ball::exact(crate::ball::Dyadic::from_int(BigInt::from(p.clone())), w + 8)
                .ln()
                .expect("positive prime");
            acc = acc.add_ball(&lp.mul_ball(&Ball::from_rational(c, w + 8)));
        }
        acc.with_prec(w)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ball(self.prec()).to_f64()
    }

    /// Certified sign: `Some(Equal)` only for an exact zero.
    pub fn try_sign(&self) -> Option<Ordering> {
        if self.is_exact_zero() {
            return Some(Ordering::Equal);
        }
        let mut prec = self.prec().max(64);
        loop {
            let b = self.to_ball(prec);
            if b.is_positive() {
                return Some(Ordering::Greater);
            }
            if b.is_negative() {
                return Some(Ordering::Less);
            }
            // only the exact part can be refined further
            let rem_is_zero = self.rem.is_exact() && self.rem.mid().is_zero();
            if !rem_is_zero || prec >= MAX_REFINE_BITS {
                return None;
            }
            prec *= 2;
        }
    }

    pub fn try_cmp(&self, o: &LogReal) -> Option<Ordering> {
        self.sub(o).try_sign()
    }

    /// Certified `self >= o`.
    pub fn certified_ge(&self, o: &LogReal) -> bool {
        matches!(self.try_cmp(o), Some(Ordering::Greater) | Some(Ordering::Equal))
    }

    /// Certified `self <= o`.
    pub fn certified_le(&self, o: &LogReal) -> bool {
        o.certified_ge(self)
    }

    /// Whether the two values may coincide (their difference is not certified nonzero).
    pub fn may_equal(&self, o: &LogReal) -> bool {
        !matches!(self.try_cmp(o), Some(Ordering::Greater) | Some(Ordering::Less))
    }

    pub fn max(&self, o: &LogReal) -> LogReal {
        match self.try_cmp(o) {
            Some(Ordering::Less) => o.clone(),
            Some(_) => self.clone(),
            None => {
                let p = self.prec().max(o.prec());
                LogReal::from_ball(self.to_ball(p).max(&o.to_ball(p)))
            }
        }
    }

    pub fn half(&self) -> LogReal {
        self.scale(&BigRational::new(BigInt::one(), BigInt::from(2)))
    }

    pub fn with_prec(&self, prec: u32) -> LogReal {
        LogReal {
            exact: self.exact.clone(),
            rem: self.rem.with_prec(prec),
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ball(self.prec()))
    }
}

/// Rational sign helper used by callers that need `|q|`.
pub fn abs_rational(q: &BigRational) -> BigRational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn exact_identities() {
        let a = LogReal::log_rational(&q(3, 2), 128).add(&LogReal::log_int(2, 128));
        let b = LogReal::log_int(3, 128);
        assert_eq!(a.try_cmp(&b), Some(Ordering::Equal));
        assert!(a.sub(&b).is_exact_zero());
    }

    #[test]
    fn values() {
        let l = LogReal::log_rational(&q(9, 4), 128);
        let expect = 2.0 * (1.5f64).ln();
        assert!((l.to_f64() - expect).abs() < 1e-15);
    }

    #[test]
    fn separation_by_refinement() {
        // log 2^10 vs log 3^6 + tiny: 1024 vs 729 separates immediately
        let a = LogReal::log_int(1024, 64);
        let b = LogReal::log_int(729, 64);
        assert_eq!(a.try_cmp(&b), Some(Ordering::Greater));
        // close values: 3^12 = 531441 vs 2^19 = 524288
        let c = LogReal::log_int(531441, 64);
        let d = LogReal::log_int(524288, 64);
        assert_eq!(c.try_cmp(&d), Some(Ordering::Greater));
    }

    #[test]
    fn inexact_remainder_blocks_equality() {
        let a = LogReal::from_ball(Ball::ln2(128));
        let b = LogReal::log_int(2, 128);
        assert_eq!(a.try_cmp(&b), None);
        assert!(a.may_equal(&b));
    }
}
