//! Midpoint–radius real and complex balls over dyadic numbers.
//!
//! Every operation returns a ball guaranteed to contain the exact result for
//! every point of the input balls. Midpoints are rounded to the working
//! precision carried by the ball; the rounding error is folded into the radius.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const MAG_BITS: u32 = 30;

/// Upper bound on a nonnegative real, stored as `man * 2^exp` with a 30-bit mantissa.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mag {
    man: u64,
    exp: i64,
}

impl Mag {
    pub const ZERO: Mag = Mag { man: 0, exp: 0 };

    fn normalize_up(man: u128, exp: i64) -> Mag {
        if man == 0 {
            return Mag::ZERO;
        }
        let bits = 128 - man.leading_zeros();
        if bits > MAG_BITS {
            let shift = bits - MAG_BITS;
            let mut m = man >> shift;
            if man & ((1u128 << shift) - 1) != 0 {
                m += 1;
            }
            let mut e = exp + shift as i64;
            if m == 1u128 << MAG_BITS {
                m >>= 1;
                e += 1;
            }
            Mag { man: m as u64, exp: e }
        } else {
            let shift = MAG_BITS - bits;
            Mag {
                man: (man << shift) as u64,
                exp: exp - shift as i64,
            }
        }
    }

    fn normalize_down(man: u128, exp: i64) -> Mag {
        if man == 0 {
            return Mag::ZERO;
        }
        let bits = 128 - man.leading_zeros();
        if bits > MAG_BITS {
            let shift = bits - MAG_BITS;
            Mag {
                man: (man >> shift) as u64,
                exp: exp + shift as i64,
            }
        } else {
            let shift = MAG_BITS - bits;
            Mag {
                man: (man << shift) as u64,
                exp: exp - shift as i64,
            }
        }
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Mag {
        Mag::normalize_up(1, e)
    }

    pub fn is_zero(&self) -> bool {
        self.man == 0
    }

    /// Smallest `Mag` that is at least `|d|`.
    pub fn from_dyadic_up(d: &Dyadic) -> Mag {
        if d.man.is_zero() {
            return Mag::ZERO;
        }
        let m = d.man.magnitude();
        let bits = m.bits();
        if bits > 100 {
            let shift = bits - 100;
            let top = (m >> shift).to_u128().unwrap_or(u128::MAX);
            // the dropped low bits can only make the bound one ulp larger
            Mag::normalize_up(top + 1, d.exp + shift as i64)
        } else {
            Mag::normalize_up(m.to_u128().unwrap_or(u128::MAX), d.exp)
        }
    }

    /// Largest `Mag` that is at most `|d|`.
    pub fn from_dyadic_down(d: &Dyadic) -> Mag {
        if d.man.is_zero() {
            return Mag::ZERO;
        }
        let m = d.man.magnitude();
        let bits = m.bits();
        if bits > 100 {
            let shift = bits - 100;
            let top = (m >> shift).to_u128().unwrap_or(0);
            Mag::normalize_down(top, d.exp + shift as i64)
        } else {
            Mag::normalize_down(m.to_u128().unwrap_or(0), d.exp)
        }
    }

    pub fn to_dyadic(&self) -> Dyadic {
        Dyadic::new(BigInt::from(self.man), self.exp)
    }

    pub fn add(&self, other: &Mag) -> Mag {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (hi, lo) = if self.exp >= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let diff = hi.exp - lo.exp;
        if diff > 60 {
            return Mag::normalize_up(hi.man as u128 + 1, hi.exp);
        }
        Mag::normalize_up(((hi.man as u128) << diff) + lo.man as u128, lo.exp)
    }

    pub fn mul(&self, other: &Mag) -> Mag {
        if self.is_zero() || other.is_zero() {
            return Mag::ZERO;
        }
        Mag::normalize_up(self.man as u128 * other.man as u128, self.exp + other.exp)
    }

    /// Upper bound on `self / other`, where `other` is a lower bound of the divisor.
    pub fn div(&self, other: &Mag) -> Option<Mag> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Mag::ZERO);
        }
        let num = (self.man as u128) << 64;
        let q = num / other.man as u128 + 1;
        Some(Mag::normalize_up(q, self.exp - other.exp - 64))
    }

    pub fn mul_2exp(&self, e: i64) -> Mag {
        if self.is_zero() {
            *self
        } else {
            Mag {
                man: self.man,
                exp: self.exp + e,
            }
        }
    }

    /// Approximate value (not directed).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        libm::ldexp(self.man as f64, self.exp.clamp(-4000, 4000) as i32)
    }

    /// `floor(log2(self))` for a nonzero magnitude.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + (MAG_BITS as i64 - 1))
        }
    }
}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.to_dyadic().cmp(&other.to_dyadic()))
    }
}

/// Exact dyadic number `man * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Dyadic {
        if man.is_zero() {
            return Dyadic::zero();
        }
        let tz = man.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            Dyadic {
                man: man >> tz,
                exp: exp + tz as i64,
            }
        } else {
            Dyadic { man, exp }
        }
    }

    pub fn zero() -> Dyadic {
        Dyadic {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Dyadic {
        Dyadic::new(v.into(), 0)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(v: f64) -> Option<Dyadic> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = bits >> 63;
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let man = if sign == 1 {
            -BigInt::from(m)
        } else {
            BigInt::from(m)
        };
        Some(Dyadic::new(man, e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.man.sign()
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            man: self.man.abs(),
            exp: self.exp,
        }
    }

    pub fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// `floor(log2|self|)`.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.man.bits() as i64 - 1 + self.exp)
        }
    }

    pub fn mul_2exp(&self, e: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            man: self.man.clone(),
            exp: self.exp + e,
        }
    }

    fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = a.exp.min(b.exp);
        let am = &a.man << (a.exp - e) as u64;
        let bm = &b.man << (b.exp - e) as u64;
        (am, bm, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = Dyadic::align(self, other);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            man: -&self.man,
            exp: self.exp,
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.man * &other.man, self.exp + other.exp)
    }

    /// Rounds toward zero to at most `prec` significant bits; returns the error bound.
    pub fn round(&self, prec: u32) -> (Dyadic, Mag) {
        let bits = self.man.bits();
        if bits <= prec as u64 {
            return (self.clone(), Mag::ZERO);
        }
        let shift = bits - prec as u64;
        let mag = self.man.magnitude() >> shift;
        let man = if self.man.is_negative() {
            -BigInt::from(mag)
        } else {
            BigInt::from(mag)
        };
        (
            Dyadic::new(man, self.exp + shift as i64),
            Mag::pow2(self.exp + shift as i64),
        )
    }

    /// Quotient rounded to `prec` bits plus an error bound.
    pub fn div(&self, other: &Dyadic, prec: u32) -> Option<(Dyadic, Mag)> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some((Dyadic::zero(), Mag::ZERO));
        }
        let s = prec as i64 + other.bits() as i64 - self.bits() as i64 + 2;
        let s = s.max(0);
        let num = &self.man << s as u64;
        let q = &num / &other.man;
        let e = self.exp - other.exp - s;
        let exact = (&q * &other.man) == num;
        let err = if exact { Mag::ZERO } else { Mag::pow2(e) };
        let (r, err2) = Dyadic::new(q, e).round(prec);
        Some((r, err.add(&err2)))
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as u64)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> (Dyadic, Mag) {
        let n = Dyadic::from_int(q.numer().clone());
        let d = Dyadic::from_int(q.denom().clone());
        n.div(&d, prec).unwrap_or((Dyadic::zero(), Mag::ZERO))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits();
        let (m, e) = if bits > 60 {
            let sh = bits - 60;
            ((&self.man >> sh).to_f64().unwrap_or(0.0), self.exp + sh as i64)
        } else {
            (self.man.to_f64().unwrap_or(0.0), self.exp)
        };
        libm::ldexp(m, e.clamp(-5000, 5000) as i32)
    }

    /// Floor as an integer.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.man << self.exp as u64
        } else {
            self.man.div_floor(&(BigInt::one() << (-self.exp) as u64))
        }
    }

    /// Ceiling as an integer.
    pub fn ceil(&self) -> BigInt {
        -(self.neg().floor())
    }

    fn isqrt_rounded(&self, prec: u32, up: bool) -> Dyadic {
        // self >= 0
        if self.is_zero() {
            return Dyadic::zero();
        }
        let mut e = self.exp;
        let mut m = self.man.magnitude().clone();
        let want = 2 * (prec as i64 + 2);
        let have = m.bits() as i64;
        let mut shift = (want - have).max(0);
        if (e - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        m <<= shift as u64;
        e -= shift;
        let s = m.sqrt();
        let exact = &s * &s == m;
        let s = if up && !exact { s + BigUint::one() } else { s };
        Dyadic::new(BigInt::from(s), e / 2)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Dyadic::align(self, other);
        a.cmp(&b)
    }
}

/// Real ball `[mid - rad, mid + rad]` carrying its working precision in bits.
#[derive(Clone, Debug)]
pub struct Ball {
    mid: Dyadic,
    rad: Mag,
    prec: u32,
}

impl Ball {
    pub fn new(mid: Dyadic, rad: Mag, prec: u32) -> Ball {
        let (m, err) = mid.round(prec);
        Ball {
            mid: m,
            rad: rad.add(&err),
            prec,
        }
    }

    pub fn exact(mid: Dyadic, prec: u32) -> Ball {
        Ball::new(mid, Mag::ZERO, prec)
    }

    pub fn zero(prec: u32) -> Ball {
        Ball::exact(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Ball {
        Ball::from_int(1, prec)
    }

    pub fn from_int<T: Into<BigInt>>(v: T, prec: u32) -> Ball {
        Ball::exact(Dyadic::from_int(v), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Ball {
        let (d, err) = Dyadic::from_rational(q, prec);
        Ball {
            mid: d,
            rad: err,
            prec,
        }
    }

    pub fn from_f64(v: f64, prec: u32) -> Option<Ball> {
        Dyadic::from_f64(v).map(|d| Ball::exact(d, prec))
    }

    /// Ball containing the closed interval `[lo, hi]`.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Ball {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mid = lo.add(hi).mul_2exp(-1);
        let rad = Mag::from_dyadic_up(&hi.sub(lo).mul_2exp(-1));
        Ball::new(mid, rad, prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> Mag {
        self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Ball {
        Ball::new(self.mid.clone(), self.rad, prec)
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad.to_dyadic())
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad.to_dyadic())
    }

    pub fn is_positive(&self) -> bool {
        self.lower().sign() == Sign::Plus
    }

    pub fn is_negative(&self) -> bool {
        self.upper().sign() == Sign::Minus
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lower().sign() != Sign::Minus
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Whether the exact value `x` may lie in the ball.
    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        !(self.upper() < other.lower() || other.upper() < self.lower())
    }

    /// Certified comparison; `None` when the balls overlap.
    pub fn try_cmp(&self, other: &Ball) -> Option<Ordering> {
        if self.upper() < other.lower() {
            Some(Ordering::Less)
        } else if other.upper() < self.lower() {
            Some(Ordering::Greater)
        } else if self.is_exact() && other.is_exact() && self.mid == other.mid {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Upper bound of `|x|` over the ball.
    pub fn abs_upper(&self) -> Mag {
        Mag::from_dyadic_up(&self.mid).add(&self.rad)
    }

    /// Lower bound of `|x|` over the ball (zero if it contains zero).
    pub fn abs_lower(&self) -> Mag {
        if self.contains_zero() {
            return Mag::ZERO;
        }
        let d = self.mid.abs().sub(&self.rad.to_dyadic());
        Mag::from_dyadic_down(&d)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn radius_f64(&self) -> f64 {
        self.rad.to_f64()
    }

    fn prec2(&self, other: &Ball) -> u32 {
        self.prec.max(other.prec)
    }

    pub fn add_ball(&self, other: &Ball) -> Ball {
        Ball::new(
            self.mid.add(&other.mid),
            self.rad.add(&other.rad),
            self.prec2(other),
        )
    }

    pub fn sub_ball(&self, other: &Ball) -> Ball {
        Ball::new(
            self.mid.sub(&other.mid),
            self.rad.add(&other.rad),
            self.prec2(other),
        )
    }

    pub fn neg_ball(&self) -> Ball {
        Ball {
            mid: self.mid.neg(),
            rad: self.rad,
            prec: self.prec,
        }
    }

    pub fn mul_ball(&self, other: &Ball) -> Ball {
        let am = Mag::from_dyadic_up(&self.mid);
        let bm = Mag::from_dyadic_up(&other.mid);
        let rad = am
            .mul(&other.rad)
            .add(&bm.mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        Ball::new(self.mid.mul(&other.mid), rad, self.prec2(other))
    }

    pub fn sqr(&self) -> Ball {
        let mut b = self.mul_ball(self);
        // the square is nonnegative; clip the lower end at zero
        if b.lower().sign() == Sign::Minus {
            b = Ball::from_endpoints(&Dyadic::zero(), &b.upper(), b.prec);
        }
        b
    }

    pub fn div_ball(&self, other: &Ball) -> Option<Ball> {
        if other.contains_zero() {
            return None;
        }
        let prec = self.prec2(other);
        let (q, err) = self.mid.div(&other.mid, prec)?;
        let ym = Mag::from_dyadic_down(&other.mid);
        let ylow = other.abs_lower();
        let num = Mag::from_dyadic_up(&self.mid)
            .mul(&other.rad)
            .add(&ym.add(&other.rad).mul(&self.rad));
        let den = ym.mul(&ylow);
        let rad = num.div(&den)?;
        Some(Ball::new(q, rad.add(&err), prec))
    }

    pub fn mul_int(&self, k: i64) -> Ball {
        self.mul_ball(&Ball::from_int(k, self.prec))
    }

    pub fn div_int(&self, k: i64) -> Ball {
        self.div_ball(&Ball::from_int(k, self.prec))
            .expect("nonzero integer divisor")
    }

    pub fn mul_2exp(&self, e: i64) -> Ball {
        Ball {
            mid: self.mid.mul_2exp(e),
            rad: self.rad.mul_2exp(e),
            prec: self.prec,
        }
    }

    pub fn pow(&self, n: u32) -> Ball {
        let mut result = Ball::one(self.prec);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_ball(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.sqr();
            }
        }
        result
    }

    pub fn abs(&self) -> Ball {
        if self.is_nonnegative() {
            self.clone()
        } else if self.is_negative() {
            self.neg_ball()
        } else {
            Ball::from_endpoints(
                &Dyadic::zero(),
                &self.abs_upper().to_dyadic(),
                self.prec,
            )
        }
    }

    /// Union hull.
    pub fn hull(&self, other: &Ball) -> Ball {
        let lo = core::cmp::min(self.lower(), other.lower());
        let hi = core::cmp::max(self.upper(), other.upper());
        Ball::from_endpoints(&lo, &hi, self.prec2(other))
    }

    pub fn max(&self, other: &Ball) -> Ball {
        let lo = core::cmp::max(self.lower(), other.lower());
        let hi = core::cmp::max(self.upper(), other.upper());
        Ball::from_endpoints(&lo, &hi, self.prec2(other))
    }

    pub fn min(&self, other: &Ball) -> Ball {
        let lo = core::cmp::min(self.lower(), other.lower());
        let hi = core::cmp::min(self.upper(), other.upper());
        Ball::from_endpoints(&lo, &hi, self.prec2(other))
    }

    pub fn sqrt(&self) -> Option<Ball> {
        if self.is_negative() {
            return None;
        }
        let lo = core::cmp::max(self.lower(), Dyadic::zero());
        let hi = self.upper();
        let p = self.prec + 4;
        Some(Ball::from_endpoints(
            &lo.isqrt_rounded(p, false),
            &hi.isqrt_rounded(p, true),
            self.prec,
        ))
    }

    pub fn exp(&self) -> Ball {
        let w = self.prec + 16;
        let lo = exp_point(&self.lower(), w);
        if self.is_exact() {
            return lo.with_prec(self.prec);
        }
        let hi = exp_point(&self.upper(), w);
        Ball::from_endpoints(&lo.lower(), &hi.upper(), self.prec)
    }

    /// Natural logarithm; `None` unless the ball is certified positive.
    pub fn ln(&self) -> Option<Ball> {
        if !self.is_positive() {
            return None;
        }
        let w = self.prec + 16;
        let lo = ln_point(&self.lower(), w);
        if self.is_exact() {
            return Some(lo.with_prec(self.prec));
        }
        let hi = ln_point(&self.upper(), w);
        Some(Ball::from_endpoints(&lo.lower(), &hi.upper(), self.prec))
    }

    pub fn atan(&self) -> Ball {
        let w = self.prec + 16;
        let lo = atan_point(&self.lower(), w);
        if self.is_exact() {
            return lo.with_prec(self.prec);
        }
        let hi = atan_point(&self.upper(), w);
        Ball::from_endpoints(&lo.lower(), &hi.upper(), self.prec)
    }

    /// `log(max(1, x))`.
    pub fn log_max1(&self) -> Option<Ball> {
        let one = Ball::one(self.prec);
        if self.upper() <= one.mid {
            return Some(Ball::zero(self.prec));
        }
        if self.lower() >= one.mid {
            return self.ln();
        }
        let hi = self.upper();
        let l = Ball::exact(hi, self.prec).ln()?;
        Some(Ball::from_endpoints(&Dyadic::zero(), &l.upper(), self.prec))
    }

    pub fn pi(prec: u32) -> Ball {
        let w = prec + 16;
        let a = atan_small(&Ball::from_rational(&BigRational::new(1.into(), 5.into()), w));
        let b = atan_small(&Ball::from_rational(&BigRational::new(1.into(), 239.into()), w));
        a.mul_int(16).sub_ball(&b.mul_int(4)).with_prec(prec)
    }

    pub fn ln2(prec: u32) -> Ball {
        // 18 atanh(1/26) - 2 atanh(1/4801) + 8 atanh(1/8749)
        let wb = prec + 24;
        let mut sum = BigInt::zero();
        let mut err = 0u64;
        for (c, m) in [(18i64, 26u32), (-2, 4801), (8, 8749)] {
            let y = (BigInt::one() << wb as u64) / m;
            let (v, e) = atanh_fixed(&y, 1, wb);
            sum += v * c;
            err += e * c.unsigned_abs();
        }
        fixed_to_ball(sum, err, wb, prec)
    }

    /// Euler's number.
    pub fn e(prec: u32) -> Ball {
        Ball::one(prec).exp()
    }

    /// Decimal rendering of the midpoint with about `digits` significant digits.
    pub fn mid_decimal(&self, digits: usize) -> String {
        dyadic_to_decimal(&self.mid, digits)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = match self.rad.log2_floor() {
            None => 40,
            Some(e) => {
                let scale = self.mid.log2_floor().unwrap_or(e);
                (((scale - e) as f64 * 0.30103) as usize + 2).clamp(3, 60)
            }
        };
        write!(f, "{}", dyadic_to_decimal(&self.mid, digits))?;
        if !self.rad.is_zero() {
            write!(f, " +/- {:.2e}", self.rad.to_f64())?;
        }
        Ok(())
    }
}

fn dyadic_to_decimal(d: &Dyadic, digits: usize) -> String {
    use alloc::format;
    if d.is_zero() {
        return String::from("0");
    }
    if d.exp >= 0 && d.bits() as i64 + d.exp < 200 {
        return format!("{}", &d.man << d.exp as u64);
    }
    // value = man * 2^exp; scale by 10^k so that the integer part carries the digits
    let log10 = (d.log2_floor().unwrap_or(0) as f64) * 0.301_029_995_663_981_2;
    let k = digits as i64 - 1 - libm::floor(log10) as i64;
    let ten = BigInt::from(10u32);
    let mut num = d.man.abs();
    let mut den = BigInt::one();
    if d.exp >= 0 {
        num <<= d.exp as u64;
    } else {
        den <<= (-d.exp) as u64;
    }
    if k >= 0 {
        num *= num_traits::pow(ten.clone(), k as usize);
    } else {
        den *= num_traits::pow(ten.clone(), (-k) as usize);
    }
    let q = (&num * 2u32 + &den) / (&den * 2u32);
    let s = q.to_str_radix(10);
    let neg = d.man.is_negative();
    let body = if k <= 0 {
        let mut s = s;
        for _ in 0..(-k) {
            s.push('0');
        }
        s
    } else {
        let k = k as usize;
        if s.len() > k {
            let (a, b) = s.split_at(s.len() - k);
            format!("{}.{}", a, b)
        } else {
            let mut z = String::from("0.");
            for _ in 0..(k - s.len()) {
                z.push('0');
            }
            z.push_str(&s);
            z
        }
    };
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

/// `value * 2^-wb` with an error of at most `err_ulps` units in the last place.
fn fixed_to_ball(value: BigInt, err_ulps: u64, wb: u32, prec: u32) -> Ball {
    let rad = Mag::from_dyadic_up(&Dyadic::new(BigInt::from(err_ulps), -(wb as i64)));
    Ball::new(Dyadic::new(value, -(wb as i64)), rad, prec)
}

/// `a * b / 2^wb` rounded toward zero.
fn mul_shift(a: &BigInt, b: &BigInt, wb: u32) -> BigInt {
    let m = a * b;
    let q = BigInt::from(m.magnitude() >> wb as u64);
    if m.sign() == Sign::Minus {
        -q
    } else {
        q
    }
}

/// Floor of `x * 2^wb`.
fn to_fixed(x: &Dyadic, wb: u32) -> (BigInt, u64) {
    let sh = x.exponent() + wb as i64;
    if sh >= 0 {
        (x.mantissa() << sh as u64, 0)
    } else {
        (x.mantissa().div_floor(&(BigInt::one() << (-sh) as u64)), 1)
    }
}

fn exp_point(x: &Dyadic, w: u32) -> Ball {
    if x.is_zero() {
        return Ball::one(w);
    }
    // x / 2^s has magnitude below 2^-8
    let lg = x.log2_floor().unwrap_or(0);
    let s = (lg + 9).max(0) as u32;
    let wp = w + s + 8;
    let wb = wp + 16;
    let (r, r_err) = to_fixed(&x.mul_2exp(-(s as i64)), wb);
    let one = BigInt::one() << wb as u64;
    let mut sum = one.clone();
    let mut term = one;
    let mut k: i64 = 1;
    // each step truncates once and inherits at most 1/256 of the previous error
    while !term.is_zero() {
        term = mul_shift(&term, &r, wb) / k;
        sum += &term;
        k += 1;
    }
    let err = 2 * k as u64 + 4 + 2 * r_err;
    let mut b = fixed_to_ball(sum, err, wb, wp);
    for _ in 0..s {
        b = b.sqr();
    }
    b.with_prec(w)
}

/// `atanh(y)` in fixed point for `|y| <= 1/3`, given `y` to within `y_err` ulps.
fn atanh_fixed(y: &BigInt, y_err: u64, wb: u32) -> (BigInt, u64) {
    let y2 = mul_shift(y, y, wb);
    let mut power = y.clone();
    let mut sum = y.clone();
    let mut j: i64 = 1;
    while !power.is_zero() {
        power = mul_shift(&power, &y2, wb);
        sum += &power / (2 * j + 1);
        j += 1;
    }
    // truncation errors stay below 4 ulps per term; atanh' <= 9/8 on the domain
    (sum, 5 * j as u64 + 8 + 2 * y_err)
}

fn atanh_small(y: &Ball) -> Ball {
    let w = y.prec;
    let wb = w + 24;
    let (yf, e) = to_fixed(&y.mid, wb);
    let (sum, err) = atanh_fixed(&yf, e, wb);
    let b = fixed_to_ball(sum, err, wb, w);
    Ball::new(b.mid.clone(), b.rad.add(&y.rad.mul_2exp(1)), w)
}

fn atan_small(t: &Ball) -> Ball {
    let w = t.prec;
    let t2 = t.sqr();
    let mut power = t.clone();
    let mut sum = t.clone();
    let mut j: i64 = 1;
    loop {
        power = power.mul_ball(&t2);
        let term = power.div_int(2 * j + 1);
        if j % 2 == 1 {
            sum = sum.sub_ball(&term);
        } else {
            sum = sum.add_ball(&term);
        }
        match power.abs_upper().log2_floor() {
            Some(e) if e >= -(w as i64) - 4 => {}
            _ => break,
        }
        j += 1;
    }
    let tail = power.abs_upper();
    Ball::new(sum.mid.clone(), sum.rad.add(&tail), w)
}

fn ln_point(x: &Dyadic, w: u32) -> Ball {
    // x > 0: x = f * 2^k with f in [1/sqrt2, sqrt2)
    let wp = w + 8;
    let mut k = x.log2_floor().unwrap_or(0);
    let mut f = x.mul_2exp(-k);
    // f in [1, 2); move to [1/sqrt2, sqrt2)
    if f.mul(&f) > Dyadic::from_int(2) {
        k += 1;
        f = f.mul_2exp(-1);
    }
    let fb = Ball::exact(f.clone(), wp);
    let one = Ball::one(wp);
    let y = fb
        .sub_ball(&one)
        .div_ball(&fb.add_ball(&one))
        .expect("positive denominator");
    let lf = atanh_small(&y).mul_2exp(1);
    let l2 = Ball::ln2(wp);
    lf.add_ball(&l2.mul_int(k)).with_prec(w)
}

fn atan_point(t: &Dyadic, w: u32) -> Ball {
    if t.is_zero() {
        return Ball::zero(w);
    }
    let wp = w + 12;
    let one = Dyadic::from_int(1);
    if t.abs() > one {
        let inv = Ball::one(wp)
            .div_ball(&Ball::exact(t.clone(), wp))
            .expect("nonzero");
        let half_pi = Ball::pi(wp).mul_2exp(-1);
        let a = atan_reduced(&inv);
        let r = if t.sign() == Sign::Minus {
            half_pi.neg_ball().sub_ball(&a)
        } else {
            half_pi.sub_ball(&a)
        };
        return r.with_prec(w);
    }
    atan_reduced(&Ball::exact(t.clone(), wp)).with_prec(w)
}

fn atan_reduced(t: &Ball) -> Ball {
    // atan(t) = 2 atan(t / (1 + sqrt(1 + t^2))), applied three times
    let mut u = t.clone();
    let one = Ball::one(t.prec);
    for _ in 0..3 {
        let s = one.add_ball(&u.sqr()).sqrt().expect("positive");
        u = u.div_ball(&one.add_ball(&s)).expect("positive");
    }
    atan_small(&u).mul_2exp(3)
}

impl Add for Ball {
    type Output = Ball;
    fn add(self, rhs: Ball) -> Ball {
        self.add_ball(&rhs)
    }
}

impl<'a> Add<&'a Ball> for &'a Ball {
    type Output = Ball;
    fn add(self, rhs: &Ball) -> Ball {
        self.add_ball(rhs)
    }
}

impl Sub for Ball {
    type Output = Ball;
    fn sub(self, rhs: Ball) -> Ball {
        self.sub_ball(&rhs)
    }
}

impl<'a> Sub<&'a Ball> for &'a Ball {
    type Output = Ball;
    fn sub(self, rhs: &Ball) -> Ball {
        self.sub_ball(rhs)
    }
}

impl Mul for Ball {
    type Output = Ball;
    fn mul(self, rhs: Ball) -> Ball {
        self.mul_ball(&rhs)
    }
}

impl<'a> Mul<&'a Ball> for &'a Ball {
    type Output = Ball;
    fn mul(self, rhs: &Ball) -> Ball {
        self.mul_ball(rhs)
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        self.neg_ball()
    }
}

/// Complex ball as a pair of real balls.
#[derive(Clone, Debug)]
pub struct ComplexBall {
    pub re: Ball,
    pub im: Ball,
}

impl ComplexBall {
    pub fn new(re: Ball, im: Ball) -> ComplexBall {
        ComplexBall { re, im }
    }

    pub fn real(re: Ball) -> ComplexBall {
        let p = re.prec;
        ComplexBall {
            re,
            im: Ball::zero(p),
        }
    }

    pub fn zero(prec: u32) -> ComplexBall {
        ComplexBall::real(Ball::zero(prec))
    }

    pub fn one(prec: u32) -> ComplexBall {
        ComplexBall::real(Ball::one(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec.max(self.im.prec)
    }

    pub fn with_prec(&self, prec: u32) -> ComplexBall {
        ComplexBall::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> ComplexBall {
        ComplexBall::real(Ball::from_rational(q, prec))
    }

    pub fn add(&self, o: &ComplexBall) -> ComplexBall {
        ComplexBall::new(self.re.add_ball(&o.re), self.im.add_ball(&o.im))
    }

    pub fn sub(&self, o: &ComplexBall) -> ComplexBall {
        ComplexBall::new(self.re.sub_ball(&o.re), self.im.sub_ball(&o.im))
    }

    pub fn neg(&self) -> ComplexBall {
        ComplexBall::new(self.re.neg_ball(), self.im.neg_ball())
    }

    pub fn conj(&self) -> ComplexBall {
        ComplexBall::new(self.re.clone(), self.im.neg_ball())
    }

    pub fn mul(&self, o: &ComplexBall) -> ComplexBall {
        let re = self.re.mul_ball(&o.re).sub_ball(&self.im.mul_ball(&o.im));
        let im = self.re.mul_ball(&o.im).add_ball(&self.im.mul_ball(&o.re));
        ComplexBall::new(re, im)
    }

    pub fn scale(&self, s: &Ball) -> ComplexBall {
        ComplexBall::new(self.re.mul_ball(s), self.im.mul_ball(s))
    }

    /// `|z|^2`.
    pub fn abs_sq(&self) -> Ball {
        self.re.sqr().add_ball(&self.im.sqr())
    }

    pub fn abs(&self) -> Ball {
        self.abs_sq().sqrt().expect("nonnegative")
    }

    pub fn div(&self, o: &ComplexBall) -> Option<ComplexBall> {
        let d = o.abs_sq();
        if !d.is_positive() {
            return None;
        }
        let n = self.mul(&o.conj());
        Some(ComplexBall::new(n.re.div_ball(&d)?, n.im.div_ball(&d)?))
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_exact() && self.im.mid.is_zero()
    }

    /// Principal argument in `(-pi, pi]`; `None` when the ball touches the branch cut
    /// or contains zero.
    pub fn arg(&self) -> Option<Ball> {
        let (x, y) = (&self.re, &self.im);
        let w = self.prec();
        if x.is_positive() {
            return Some(y.div_ball(x)?.atan());
        }
        if x.is_negative() {
            let pi = Ball::pi(w);
            if y.is_exact() && y.mid.is_zero() {
                return Some(pi);
            }
            let a = y.div_ball(x)?.atan();
            if y.is_nonnegative() {
                return Some(a.add_ball(&pi));
            }
            if y.is_negative() {
                return Some(a.sub_ball(&pi));
            }
            return None;
        }
        let half_pi = Ball::pi(w).mul_2exp(-1);
        if y.is_positive() {
            return Some(half_pi.sub_ball(&x.div_ball(y)?.atan()));
        }
        if y.is_negative() {
            return Some(half_pi.neg_ball().sub_ball(&x.div_ball(y)?.atan()));
        }
        None
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Option<ComplexBall> {
        let re = self.abs_sq().ln()?.mul_2exp(-1);
        let im = if self.is_real() && self.re.is_positive() {
            Ball::zero(self.prec())
        } else {
            self.arg()?
        };
        Some(ComplexBall::new(re, im))
    }

    /// Upper bound on the radius in both coordinates.
    pub fn rad(&self) -> Mag {
        if self.re.rad >= self.im.rad {
            self.re.rad
        } else {
            self.im.rad
        }
    }
}

impl fmt::Display for ComplexBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({}) + ({})i", self.re, self.im)
        }
    }
}

/// Evaluates a polynomial with rational coefficients (lowest degree first) at a complex ball.
pub fn eval_rational_poly(coeffs: &[BigRational], z: &ComplexBall) -> ComplexBall {
    let prec = z.prec();
    let mut acc = ComplexBall::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(&ComplexBall::from_rational(c, prec));
    }
    acc
}

/// Horner evaluation of a complex-ball polynomial.
pub fn eval_ball_poly(coeffs: &[ComplexBall], z: &ComplexBall) -> ComplexBall {
    let prec = z.prec();
    let mut acc = ComplexBall::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}

/// Sum of balls.
pub fn sum_balls<'a, I: IntoIterator<Item = &'a Ball>>(items: I, prec: u32) -> Ball {
    items
        .into_iter()
        .fold(Ball::zero(prec), |acc, b| acc.add_ball(b))
}

#[allow(dead_code)]
pub(crate) fn to_vec_f64(balls: &[Ball]) -> Vec<f64> {
    balls.iter().map(Ball::to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(b: &Ball, v: f64, tol: f64) -> bool {
        (b.to_f64() - v).abs() <= tol
    }

    #[test]
    fn constants() {
        let p = Ball::pi(200);
        assert!(close(&p, core::f64::consts::PI, 1e-15));
        assert!(p.radius_f64() < 1e-55);
        let l = Ball::ln2(200);
        assert!(close(&l, core::f64::consts::LN_2, 1e-15));
        let e = Ball::e(128);
        assert!(close(&e, core::f64::consts::E, 1e-15));
    }

    #[test]
    fn pi_digits() {
        let p = Ball::pi(128);
        let s = p.mid_decimal(30);
        assert!(s.starts_with("3.1415926535897932384626433832"), "{s}");
    }

    #[test]
    fn exp_ln_roundtrip() {
        for v in [0.001, 0.5, 1.0, 2.0, 10.0, 123.456, -3.5] {
            let x = Ball::from_f64(v, 128).unwrap();
            let y = x.exp().ln().unwrap();
            assert!(y.contains(x.mid()), "{v}");
            assert!(y.radius_f64() < 1e-30);
        }
    }

    #[test]
    fn ln_known() {
        let x = Ball::from_int(10, 128).ln().unwrap();
        assert!(close(&x, core::f64::consts::LN_10, 1e-15));
    }

    #[test]
    fn sqrt_and_div() {
        let two = Ball::from_int(2, 128);
        let s = two.sqrt().unwrap();
        let back = s.sqr();
        assert!(back.contains(&Dyadic::from_int(2)));
        let third = Ball::one(128).div_ball(&Ball::from_int(3, 128)).unwrap();
        assert!(close(&third.mul_int(3), 1.0, 1e-30));
        assert!(Ball::one(64).div_ball(&Ball::zero(64)).is_none());
    }

    #[test]
    fn atan_values() {
        let one = Ball::one(128);
        let a = one.atan();
        let q = Ball::pi(128).mul_2exp(-2);
        assert!(a.overlaps(&q));
        let big = Ball::from_int(1000, 128).atan();
        assert!(close(&big, libm::atan(1000.0), 1e-15));
        let neg = Ball::from_f64(-0.3, 128).unwrap().atan();
        assert!(close(&neg, libm::atan(-0.3), 1e-15));
    }

    #[test]
    fn complex_log_branches() {
        let z = ComplexBall::real(Ball::from_int(-2, 128));
        let l = z.ln().unwrap();
        assert!(l.im.overlaps(&Ball::pi(128)));
        let i = ComplexBall::new(Ball::zero(128), Ball::one(128));
        let li = i.ln().unwrap();
        assert!(li.im.overlaps(&Ball::pi(128).mul_2exp(-1)));
        let w = ComplexBall::new(Ball::from_int(-1, 128), Ball::from_int(-1, 128));
        let lw = w.arg().unwrap();
        assert!(close(&lw, -3.0 * core::f64::consts::FRAC_PI_4, 1e-15));
    }

    #[test]
    fn mag_arith_is_upper_bound() {
        let a = Mag::from_dyadic_up(&Dyadic::from_f64(0.1).unwrap());
        let b = Mag::from_dyadic_up(&Dyadic::from_f64(0.2).unwrap());
        assert!(a.add(&b).to_f64() >= 0.3 - 1e-17);
        assert!(a.mul(&b).to_f64() >= 0.02 - 1e-18);
        assert!(a.div(&b).unwrap().to_f64() >= 0.5);
    }

    #[test]
    fn decimal_rendering() {
        let x = Ball::from_rational(&BigRational::new(1.into(), 8.into()), 64);
        assert_eq!(x.mid_decimal(5), "0.12500");
        assert_eq!(Ball::from_int(42, 64).mid_decimal(5), "42");
        let y = Ball::from_rational(&BigRational::new((-1).into(), 3.into()), 64);
        assert!(y.mid_decimal(6).starts_with("-0.33333"));
    }
}
