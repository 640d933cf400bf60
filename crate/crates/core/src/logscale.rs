//! Signed reals stored as a sign and a logarithmic magnitude.
//!
//! The magnitude `log |x|` is a [`LogReal`], so products and rational powers
//! of integers stay exact and nothing overflows however large `|x|` gets.

use alloc::format;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::ball::{Ball, Dyadic, Mag};
use crate::logreal::LogReal;

#[derive(Clone, Debug)]
pub struct LogScaleReal {
    sign: i8,
    log_mag: LogReal,
}

impl LogScaleReal {
    pub fn zero(prec: u32) -> LogScaleReal {
        LogScaleReal {
            sign: 0,
            log_mag: LogReal::zero(prec),
        }
    }

    pub fn one(prec: u32) -> LogScaleReal {
        LogScaleReal::from_log(1, LogReal::zero(prec))
    }

    /// `sign * exp(log_mag)`; a zero sign gives zero.
    pub fn from_log(sign: i8, log_mag: LogReal) -> LogScaleReal {
        if sign == 0 {
            return LogScaleReal::zero(log_mag.prec());
        }
        LogScaleReal {
            sign: sign.signum(),
            log_mag,
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> LogScaleReal {
        if q.is_zero() {
            return LogScaleReal::zero(prec);
        }
        let sign = if q.is_negative() { -1 } else { 1 };
        LogScaleReal::from_log(sign, LogReal::log_rational(q, prec))
    }

    pub fn from_int(v: i64, prec: u32) -> LogScaleReal {
        LogScaleReal::from_rational(&BigRational::from_integer(BigInt::from(v)), prec)
    }

    pub fn from_dyadic(d: &Dyadic, prec: u32) -> LogScaleReal {
        let m = d.mantissa();
        if m.bits() <= 32 {
            return LogScaleReal::from_rational(&d.to_rational(), prec);
        }
        // large mantissas are not factored
        let sign = if m.is_negative() { -1 } else { 1 };
        let lm = Ball::from_int(m.abs(), prec + 16).ln().expect("nonzero mantissa").with_prec(prec);
        let two = LogReal::log_prime_multiple(
            &BigUint::from(2u32),
            BigRational::from_integer(BigInt::from(d.exponent())),
            prec,
        );
        LogScaleReal::from_log(sign, two.add(&LogReal::from_ball(lm)))
    }

    /// `None` unless the ball is exactly zero or certified nonzero.
    pub fn from_ball(b: &Ball) -> Option<LogScaleReal> {
        if b.is_exact() {
            return Some(LogScaleReal::from_dyadic(b.mid(), b.prec()));
        }
        let sign = if b.is_positive() {
            1
        } else if b.is_negative() {
            -1
        } else {
            return None;
        };
        let l = b.abs().ln()?;
        Some(LogScaleReal::from_log(sign, LogReal::from_ball(l)))
    }

    /// The real number carried by a [`LogReal`], e.g. `log b` itself.
    pub fn from_value(v: &LogReal) -> Option<LogScaleReal> {
        if v.is_exact_zero() {
            return Some(LogScaleReal::zero(v.prec()));
        }
        if v.coefficients().is_empty() {
            return LogScaleReal::from_ball(v.remainder());
        }
        let sign = match v.try_sign()? {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => return Some(LogScaleReal::zero(v.prec())),
        };
        let b = v.to_ball(v.prec() + 32).abs();
        let l = b.ln()?;
        Some(LogScaleReal::from_log(sign, LogReal::from_ball(l.with_prec(v.prec()))))
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// `log |x|`; meaningless for zero.
    pub fn log_magnitude(&self) -> &LogReal {
        &self.log_mag
    }

    pub fn prec(&self) -> u32 {
        self.log_mag.prec()
    }

    pub fn neg(&self) -> LogScaleReal {
        LogScaleReal {
            sign: -self.sign,
            log_mag: self.log_mag.clone(),
        }
    }

    pub fn abs(&self) -> LogScaleReal {
        LogScaleReal {
            sign: self.sign.abs(),
            log_mag: self.log_mag.clone(),
        }
    }

    pub fn mul(&self, o: &LogScaleReal) -> LogScaleReal {
        if self.is_zero() || o.is_zero() {
            return LogScaleReal::zero(self.prec());
        }
        LogScaleReal::from_log(self.sign * o.sign, self.log_mag.add(&o.log_mag))
    }

    /// `None` on division by zero.
    pub fn div(&self, o: &LogScaleReal) -> Option<LogScaleReal> {
        if o.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LogScaleReal::zero(self.prec()));
        }
        Some(LogScaleReal::from_log(
            self.sign * o.sign,
            self.log_mag.sub(&o.log_mag),
        ))
    }

    /// `x^q` for `x > 0`, or `0^q = 0` for `q > 0`.
    pub fn pow_rational(&self, q: &BigRational) -> Option<LogScaleReal> {
        match self.sign {
            0 if q.is_positive() => Some(self.clone()),
            1 => Some(LogScaleReal::from_log(1, self.log_mag.scale(q))),
            _ => None,
        }
    }

    /// Sum; `None` when cancellation leaves the sign uncertified.
    pub fn add(&self, o: &LogScaleReal) -> Option<LogScaleReal> {
        if self.is_zero() {
            return Some(o.clone());
        }
        if o.is_zero() {
            return Some(self.clone());
        }
        let prec = self.prec().max(o.prec());
        let cut = Ball::ln2(prec).mul_int(-(prec as i64 + 10));
        if self.sign == o.sign {
            let (big, small) = match self.log_mag.try_cmp(&o.log_mag) {
                Some(Ordering::Less) => (o, self),
                _ => (self, o),
            };
            let d = small.log_mag.sub(&big.log_mag).to_ball(prec);
            let corr = if d.upper() < cut.lower() {
                Ball::new(Dyadic::zero(), Mag::pow2(-(prec as i64) - 10), prec)
            } else {
                Ball::one(prec).add_ball(&d.exp()).ln()?
            };
            return Some(LogScaleReal::from_log(
                self.sign,
                big.log_mag.add_ball(&corr),
            ));
        }
        let (big, small) = match self.log_mag.try_cmp(&o.log_mag)? {
            Ordering::Equal => return Some(LogScaleReal::zero(prec)),
            Ordering::Greater => (self, o),
            Ordering::Less => (o, self),
        };
        let d = small.log_mag.sub(&big.log_mag).to_ball(prec);
        let corr = if d.upper() < cut.lower() {
            Ball::new(Dyadic::zero(), Mag::pow2(-(prec as i64) - 9), prec)
        } else {
            Ball::one(prec).sub_ball(&d.exp()).ln()?
        };
        Some(LogScaleReal::from_log(big.sign, big.log_mag.add_ball(&corr)))
    }

    pub fn sub(&self, o: &LogScaleReal) -> Option<LogScaleReal> {
        self.add(&o.neg())
    }

    pub fn try_cmp(&self, o: &LogScaleReal) -> Option<Ordering> {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => {}
            c => return Some(c),
        }
        match self.sign {
            0 => Some(Ordering::Equal),
            1 => self.log_mag.try_cmp(&o.log_mag),
            _ => o.log_mag.try_cmp(&self.log_mag),
        }
    }

    /// Larger of the two; `None` when the order is not certified.
    pub fn max(&self, o: &LogScaleReal) -> Option<LogScaleReal> {
        match self.try_cmp(o)? {
            Ordering::Less => Some(o.clone()),
            _ => Some(self.clone()),
        }
    }

    /// Enclosure of the value itself. Dyadic exponents are unbounded, so this
    /// never overflows, but the cost grows with `log |x|`.
    pub fn to_ball(&self, prec: u32) -> Ball {
        if self.is_zero() {
            return Ball::zero(prec);
        }
        let v = self.log_mag.to_ball(prec + 16).exp().with_prec(prec);
        if self.sign < 0 {
            v.neg_ball()
        } else {
            v
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.sign as f64 * libm::exp(self.log_mag.to_f64())
    }

    /// `(mantissa, exponent)` with `|x| = mantissa * 10^exponent`, `1 <= mantissa < 10`.
    pub fn decimal_parts(&self) -> (f64, BigInt) {
        if self.is_zero() {
            return (0.0, BigInt::zero());
        }
        let prec = self.prec().max(64);
        let ln10 = Ball::from_int(10, prec + 32).ln().expect("positive");
        let l10 = self
            .log_mag
            .to_ball(prec + 32)
            .div_ball(&ln10)
            .expect("nonzero");
        let e = l10.mid().floor();
        let frac = l10.sub_ball(&Ball::from_rational(&BigRational::from_integer(e.clone()), prec + 32));
        let m = libm::pow(10.0, frac.to_f64());
        if m >= 10.0 {
            (m / 10.0, e + 1)
        } else {
            (m, e)
        }
    }

    /// Scientific notation such as `-1.23e+159`.
    pub fn to_scientific(&self, digits: usize) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let (m, e) = self.decimal_parts();
        let s = if self.sign < 0 { "-" } else { "" };
        let sign_e = if e.is_negative() { "-" } else { "+" };
        format!("{s}{m:.digits$}e{sign_e}{}", e.abs())
    }
}

impl fmt::Display for LogScaleReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scientific(6))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn wide_dyadic() {
        let m = (BigInt::from(1u32) << 127u32) + BigInt::from(12345u32);
        let d = Dyadic::new(-m, -130);
        let x = LogScaleReal::from_dyadic(&d, 128);
        assert_eq!(x.sign(), -1);
        assert!(close(x.log_magnitude().to_f64(), -3f64 * 2f64.ln()));
    }

    #[test]
    fn exact_products() {
        let six = LogScaleReal::from_int(6, 128);
        let p = six.pow_rational(&q(203, 1)).unwrap();
        let expect = LogReal::log_int(6, 128).scale_int(203);
        assert_eq!(p.log_magnitude().try_cmp(&expect), Some(Ordering::Equal));
        let r = p.div(&LogScaleReal::from_int(36, 128)).unwrap();
        assert_eq!(
            r.log_magnitude().try_cmp(&LogReal::log_int(6, 128).scale_int(201)),
            Some(Ordering::Equal)
        );
        assert_eq!(p.decimal_parts().1, BigInt::from(157));
    }

    #[test]
    fn sums_and_differences() {
        let a = LogScaleReal::from_int(3, 128);
        let b = LogScaleReal::from_int(5, 128);
        assert!(close(a.add(&b).unwrap().to_f64(), 8.0));
        assert!(close(a.sub(&b).unwrap().to_f64(), -2.0));
        assert!(a.sub(&a).unwrap().is_zero());
        let tiny = LogScaleReal::from_log(1, LogReal::from_rational(&q(-1000, 1), 128));
        let s = b.add(&tiny).unwrap();
        assert!(close(s.to_f64(), 5.0));
        let huge = LogScaleReal::from_int(6, 128).pow_rational(&q(1827, 1)).unwrap();
        let m = huge.neg().sub(&LogScaleReal::from_int(-7, 128)).unwrap();
        assert_eq!(m.sign(), -1);
    }

    #[test]
    fn comparison_and_ball_roundtrip() {
        let a = LogScaleReal::from_rational(&q(-3, 2), 128);
        let b = LogScaleReal::from_rational(&q(1, 1000), 128);
        assert_eq!(a.try_cmp(&b), Some(Ordering::Less));
        assert_eq!(b.try_cmp(&LogScaleReal::zero(128)), Some(Ordering::Greater));
        assert!(close(a.to_ball(128).to_f64(), -1.5));
        let c = LogScaleReal::from_ball(&Ball::pi(128)).unwrap();
        assert!(close(c.to_f64(), core::f64::consts::PI));
        assert_eq!(a.to_scientific(2), "-1.50e+0");
    }

    #[test]
    fn values_of_logs() {
        let v = LogScaleReal::from_value(&LogReal::log_int(2, 128)).unwrap();
        assert!(close(v.to_f64(), core::f64::consts::LN_2));
        let w = LogScaleReal::from_value(&LogReal::log_rational(&q(1, 2), 128)).unwrap();
        assert_eq!(w.sign(), -1);
    }
}
