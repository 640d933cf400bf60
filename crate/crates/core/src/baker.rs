//! Explicit lower bounds for linear forms in logarithms, the auxiliary
//! parameters of the proof, and two closed-form counting quantities.
//!
//! Everything is evaluated in log space: magnitudes such as `(6n)^(203 n^2)`
//! are carried as exact multiples of `log(6n)` plus a ball remainder.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::arith::{binomial, factorial, is_prime_u64, lcm};
use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::logreal::LogReal;
use crate::logscale::LogScaleReal;

const MAX_FLOOR_PREC: u32 = 4096;
const DESK_L: u64 = 30;
const DESK_H: u64 = 6;
const X_SLACK: f64 = 1e-20;

#[derive(Clone, Debug)]
pub struct BoundInstance {
    pub n: usize,
    pub t: usize,
    pub d: u64,
    pub archimedean: bool,
    /// Prime below the place; required when the place is finite.
    pub p: Option<u64>,
    pub log_e: LogReal,
    pub log_a: Vec<LogReal>,
    pub log_b: LogReal,
    pub s: usize,
    /// Zero-based indices of a maximal free subfamily of the `u_j`.
    pub i_set: Vec<usize>,
    pub beta10_nonzero: bool,
}

impl BoundInstance {
    /// Archimedean instance with `e` for the frak-e parameter, `s = t` and `I` everything.
    pub fn archimedean(n: usize, t: usize, d: u64, log_a: Vec<LogReal>, log_b: LogReal) -> Self {
        let prec = log_b.prec();
        BoundInstance {
            n,
            t,
            d,
            archimedean: true,
            p: None,
            log_e: LogReal::from_rational(&BigRational::one(), prec),
            log_a,
            log_b,
            s: t,
            i_set: (0..n).collect(),
            beta10_nonzero: false,
        }
    }

    /// Ultrametric instance above `p`, otherwise as [`BoundInstance::archimedean`].
    pub fn ultrametric(
        n: usize,
        t: usize,
        d: u64,
        p: u64,
        log_e: LogReal,
        log_a: Vec<LogReal>,
        log_b: LogReal,
    ) -> Self {
        BoundInstance {
            n,
            t,
            d,
            archimedean: false,
            p: Some(p),
            log_e,
            log_a,
            log_b,
            s: t,
            i_set: (0..n).collect(),
            beta10_nonzero: false,
        }
    }

    pub fn eps0(&self) -> u8 {
        u8::from(self.archimedean)
    }

    pub fn i_size(&self) -> usize {
        self.i_set.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.t == 0 || self.t > self.n {
            return Err(Error::Invalid("need 1 <= t <= n".into()));
        }
        if self.d == 0 {
            return Err(Error::Invalid("degree must be positive".into()));
        }
        if self.log_a.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: self.log_a.len(),
            });
        }
        let mut seen = vec![false; self.n];
        for &i in &self.i_set {
            if i >= self.n || seen[i] {
                return Err(Error::Invalid("I must be a set of indices below n".into()));
            }
            seen[i] = true;
        }
        if self.s == 0 || self.s > self.t || self.s > self.i_set.len() {
            return Err(Error::Invalid("need 1 <= s <= min(t, card I)".into()));
        }
        for la in &self.log_a {
            if la.try_sign() == Some(Ordering::Less) {
                return Err(Error::Invalid("log a_j must be nonnegative".into()));
            }
        }
        if self.log_b.try_sign() != Some(Ordering::Greater) {
            return Err(Error::Invalid("log b must be certified positive".into()));
        }
        check_frak_e(&self.log_e, self.archimedean)?;
        if !self.archimedean {
            match self.p {
                Some(p) if is_prime_u64(p) => {}
                _ => return Err(Error::Invalid("finite place needs a prime p".into())),
            }
        }
        Ok(())
    }

    fn sum_log_a(&self) -> LogReal {
        self.log_a
            .iter()
            .fold(LogReal::zero(self.log_b.prec()), |acc, x| acc.add(x))
    }

    fn prime_log(&self, prec: u32) -> Option<LogReal> {
        if self.archimedean {
            None
        } else {
            self.p.map(|p| LogReal::log_int(p, prec))
        }
    }
}

fn check_frak_e(log_e: &LogReal, archimedean: bool) -> Result<()> {
    let prec = log_e.prec();
    if archimedean {
        if !log_e.certified_ge(&LogReal::from_rational(&BigRational::one(), prec)) {
            return Err(Error::InvalidFrakE(
                "an archimedean place needs frak-e >= e".to_string(),
            ));
        }
    } else if log_e.try_sign() != Some(Ordering::Greater) {
        return Err(Error::InvalidFrakE(
            "an ultrametric place needs frak-e > 1".to_string(),
        ));
    }
    Ok(())
}

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn log_factorial(n: u64, prec: u32) -> LogReal {
    LogReal::log_rational(&BigRational::from_integer(BigInt::from(factorial(n))), prec)
}

/// `log v` for a certified positive value `v`.
fn ln_value(v: &LogReal) -> Result<LogReal> {
    match LogScaleReal::from_value(v) {
        Some(x) if x.sign() > 0 => Ok(x.log_magnitude().clone()),
        _ => Err(Error::Invalid("logarithm of a value not certified positive".into())),
    }
}

/// `log(1 + D log a / log e)`.
fn ln_one_plus_ratio(d: u64, log_a: &LogReal, log_e: &LogReal, prec: u32) -> Result<LogReal> {
    let w = prec + 32;
    let r = log_a
        .to_ball(w)
        .mul_int(d as i64)
        .div_ball(&log_e.to_ball(w))
        .ok_or_else(|| Error::InvalidFrakE("log frak-e not separated from 0".into()))?;
    let l = Ball::one(w)
        .add_ball(&r)
        .ln()
        .ok_or_else(|| Error::Invalid("log a_j below the admissible range".into()))?;
    Ok(LogReal::from_ball(l.with_prec(prec)))
}

fn certified_floor(f: impl Fn(u32) -> Option<Ball>, prec: u32) -> Result<BigInt> {
    let mut w = prec.max(64);
    loop {
        if let Some(b) = f(w) {
            let lo = b.lower().floor();
            if lo == b.upper().floor() {
                return Ok(lo);
            }
        }
        if w >= MAX_FLOOR_PREC {
            return Err(Error::PrecisionExhausted(
                "integer part of the frak-a expression".into(),
            ));
        }
        w *= 2;
    }
}

/// The integer `floor((D / log e) log(e + D / log e + (1 - eps0) log p + sum log a)) + 1`.
pub fn compute_frak_a(
    d: u64,
    log_e: &LogReal,
    archimedean: bool,
    p: Option<u64>,
    sum_log_a: &LogReal,
    prec: u32,
) -> Result<u64> {
    check_frak_e(log_e, archimedean)?;
    if sum_log_a.try_sign() == Some(Ordering::Less) {
        return Err(Error::Invalid("sum of log a_j must be nonnegative".into()));
    }
    let lp = if archimedean {
        None
    } else {
        let p = p.ok_or_else(|| Error::Invalid("finite place needs a prime p".into()))?;
        Some(LogReal::log_int(p, prec))
    };
    let fl = certified_floor(
        |w| {
            let le = log_e.to_ball(w);
            let ratio = Ball::from_int(d, w).div_ball(&le)?;
            let mut inner = Ball::e(w).add_ball(&ratio).add_ball(&sum_log_a.to_ball(w));
            if let Some(lp) = &lp {
                inner = inner.add_ball(&lp.to_ball(w));
            }
            Some(ratio.mul_ball(&inner.ln()?))
        },
        prec,
    )?;
    (fl + 1u32)
        .to_u64()
        .filter(|&a| a >= 1)
        .ok_or_else(|| Error::Invalid("frak-a out of range".into()))
}

/// Parameters of the auxiliary construction, all positive reals in log scale.
#[derive(Clone, Debug)]
pub struct ParamSet {
    pub c0: BigUint,
    pub log_c0: LogReal,
    pub y: u8,
    pub frak_a: u64,
    pub s0: LogScaleReal,
    pub s: LogScaleReal,
    pub u_minus1: LogScaleReal,
    pub u0: LogScaleReal,
    /// `U_0 = log p` was selected over `U_{-1}`.
    pub u0_prime_branch: bool,
    pub t_tilde0: LogScaleReal,
    pub t_tilde: LogScaleReal,
    /// `D~_0, ..., D~_n`.
    pub d_tilde: Vec<LogScaleReal>,
    /// `x({0})`.
    pub x0: LogScaleReal,
}

fn positive(log: LogReal) -> LogScaleReal {
    LogScaleReal::from_log(1, log)
}

fn log_of(v: &LogScaleReal) -> &LogReal {
    v.log_magnitude()
}

/// Parameters at a working precision that also resolves terms of relative size `1/S`.
pub fn compute_params(inst: &BoundInstance, prec: u32) -> Result<ParamSet> {
    inst.validate()?;
    let log2_s = 3.0 * 22.0 * inst.n as f64 * libm::log2(6.0 * inst.n as f64);
    let w = prec + libm::ceil(log2_s) as u32 + 64;
    let mut wide = inst.clone();
    wide.log_e = inst.log_e.with_prec(w);
    wide.log_b = inst.log_b.with_prec(w);
    wide.log_a = inst.log_a.iter().map(|x| x.with_prec(w)).collect();
    params_at(&wide, w)
}

fn params_at(inst: &BoundInstance, prec: u32) -> Result<ParamSet> {
    let n = inst.n as i64;
    let t = inst.t as i64;
    let d = inst.d;
    let frak_a = compute_frak_a(
        d,
        &inst.log_e,
        inst.archimedean,
        inst.p,
        &inst.sum_log_a(),
        prec,
    )?;
    let y: u8 = if inst.t == 1 && inst.beta10_nonzero { 0 } else { 1 };
    let six_n = 6 * inst.n as u64;
    let c0 = BigUint::from(six_n).pow(22 * inst.n as u32);
    let log_c0 = LogReal::log_int(six_n, prec).scale_int(22 * n);
    let log_frak_a = LogReal::log_int(frak_a, prec);
    let log_s0 = log_c0.add(&log_frak_a);
    let log_s = log_c0.scale_int(3).add(&log_frak_a);
    let ln_log_e = ln_value(&inst.log_e)?;

    let bden = denominator0(inst, &log_s, &ln_log_e, y)?;
    let mut sum_prod = LogReal::zero(prec);
    for la in &inst.log_a {
        sum_prod = sum_prod.add(&ln_one_plus_ratio(d, la, &inst.log_e, prec)?);
    }
    let inner = log_factorial(inst.t as u64, prec)
        .add(&log_s)
        .sub(&log_factorial((inst.n + inst.t) as u64, prec))
        .add(&sum_prod);
    let log_u_m1 = log_c0
        .scale(&rat(3 * n - 1, t))
        .add(&inner.scale(&rat(1, t)))
        .add(&bden);

    let (log_u0, prime_branch) = match inst.prime_log(prec) {
        None => (log_u_m1.clone(), false),
        Some(lp) => {
            let llp = ln_value(&lp)?;
            let pb = llp.try_cmp(&log_u_m1) == Some(Ordering::Greater);
            (log_u_m1.max(&llp), pb)
        }
    };

    let log_t0 = log_c0.add(&log_u0).sub(&log_s).sub(&ln_log_e);
    let log_t = log_t0.add(&log_c0.scale_int(2));
    let mut d_tilde = vec![positive(log_u0.sub(&bden))];
    for la in &inst.log_a {
        let den = inst.log_e.add(&la.scale_int(d as i64));
        d_tilde.push(positive(log_u0.sub(&log_s).sub(&ln_value(&den)?)));
    }
    let mut xt = log_t
        .scale_int(n)
        .add(&log_s)
        .add(&log_factorial(inst.t as u64, prec))
        .sub(&log_c0)
        .sub(&log_factorial((inst.n + inst.t) as u64, prec))
        .sub(&log_of(&d_tilde[0]).scale_int(t));
    for dt in &d_tilde[1..] {
        xt = xt.sub(log_of(dt));
    }
    let log_x0 = xt.scale(&rat(1, t));

    Ok(ParamSet {
        c0,
        log_c0,
        y,
        frak_a,
        s0: positive(log_s0),
        s: positive(log_s),
        u_minus1: positive(log_u_m1),
        u0: positive(log_u0),
        u0_prime_branch: prime_branch,
        t_tilde0: positive(log_t0),
        t_tilde: positive(log_t),
        d_tilde,
        x0: positive(log_x0),
    })
}

/// `log(log b + D log S + S^y log e)`.
fn denominator0(inst: &BoundInstance, log_s: &LogReal, ln_log_e: &LogReal, y: u8) -> Result<LogReal> {
    let a = LogScaleReal::from_value(&inst.log_b);
    let b = LogScaleReal::from_value(&log_s.scale_int(inst.d as i64));
    let c = positive(log_s.scale_int(y as i64).add(ln_log_e));
    let sum = a
        .zip(b)
        .and_then(|(a, b)| a.add(&b))
        .and_then(|ab| ab.add(&c))
        .filter(|v| v.sign() > 0)
        .ok_or_else(|| Error::Invalid("denominator of D~_0 not certified positive".into()))?;
    Ok(sum.log_magnitude().clone())
}

/// The four properties of the parameters plus `x({0}) <= 1`, each certified in log space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamProperties {
    pub i: bool,
    pub ii: bool,
    pub iii: bool,
    pub iv: bool,
    pub x_le_one: bool,
}

impl ParamProperties {
    pub fn all(&self) -> bool {
        self.i && self.ii && self.iii && self.iv && self.x_le_one
    }
}

pub fn check_param_properties(ps: &ParamSet, inst: &BoundInstance) -> ParamProperties {
    let prec = ps.log_c0.prec();
    let zero = LogReal::zero(prec);
    let log_s = log_of(&ps.s);
    let ld0 = log_of(&ps.d_tilde[0]);

    let mut m = zero.max(&ld0.sub(&log_s.scale_int(1 - ps.y as i64)));
    for dt in &ps.d_tilde[1..] {
        m = m.max(log_of(dt));
    }
    let i = ps.log_c0.add(&m).certified_le(log_of(&ps.t_tilde0));

    // x({0}) = 1 holds identically, so only rounding may push the enclosure above 0
    let x_le_one = log_of(&ps.x0).to_ball(prec).upper().to_f64() <= X_SLACK;
    let d0_nonzero = log_of(&ps.x0).add(ld0).certified_ge(&zero);
    let max_dj = ps.d_tilde[1..]
        .iter()
        .map(|v| log_of(v).clone())
        .reduce(|a, b| a.max(&b))
        .unwrap_or_else(|| zero.clone());
    let ii = d0_nonzero && ps.log_c0.certified_le(&max_dj);

    let la = LogReal::log_int(ps.frak_a, prec).scale_int(inst.d as i64);
    let iii = la.certified_le(&inst.log_e.scale_int(2 * ps.frak_a as i64));

    let log4d0 = LogReal::log_int(4, prec).add(ld0);
    let iv = match log4d0.try_sign() {
        Some(Ordering::Less) | Some(Ordering::Equal) => true,
        None => false,
        Some(Ordering::Greater) => {
            let lhs = ln_value(&log4d0).map(|l| log_of(&ps.t_tilde).add(&l));
            let rhs = ln_value(&ps.log_c0.scale_int(10 * inst.n as i64)).map(|l| {
                l.add(log_of(&ps.u0))
                    .sub(&LogReal::log_int(inst.d, prec))
            });
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => l.certified_le(&r),
                _ => false,
            }
        }
    };
    ParamProperties {
        i,
        ii,
        iii,
        iv,
        x_le_one,
    }
}

/// `log U_{-1}` obtained by solving `x({0}) = 1` for `U_0` with plain ball
/// arithmetic on the definitions of the auxiliary parameters.
pub fn u_minus1_from_x_condition(inst: &BoundInstance, prec: u32) -> Result<Ball> {
    inst.validate()?;
    let w = prec + 64;
    let frak_a = compute_frak_a(inst.d, &inst.log_e, inst.archimedean, inst.p, &inst.sum_log_a(), prec)?;
    let n = inst.n as u32;
    let t = inst.t as u32;
    let c0 = Ball::from_int(BigInt::from(6 * inst.n as u64).pow(22 * n), w);
    let s = c0.pow(3).mul_ball(&Ball::from_int(frak_a, w));
    let le = inst.log_e.to_ball(w);
    let lb = inst.log_b.to_ball(w);
    let df = Ball::from_int(inst.d, w);
    let sy = if inst.t == 1 && inst.beta10_nonzero {
        Ball::one(w)
    } else {
        s.clone()
    };
    let bad = || Error::PrecisionExhausted("re-derivation of U_-1".into());
    // U_0 = 1
    let t_tilde = c0.pow(3).div_ball(&s.mul_ball(&le)).ok_or_else(bad)?;
    let den0 = lb
        .add_ball(&df.mul_ball(&s.ln().ok_or_else(bad)?))
        .add_ball(&sy.mul_ball(&le));
    let d0 = Ball::one(w).div_ball(&den0).ok_or_else(bad)?;
    let mut prod_di = Ball::one(w);
    for la in &inst.log_a {
        let den = s.mul_ball(&le).add_ball(&df.mul_ball(&s).mul_ball(&la.to_ball(w)));
        prod_di = prod_di.mul_ball(&Ball::one(w).div_ball(&den).ok_or_else(bad)?);
    }
    let num = t_tilde
        .pow(n)
        .mul_ball(&s)
        .mul_ball(&Ball::from_int(BigInt::from(factorial(t as u64)), w));
    let den = c0
        .mul_ball(&Ball::from_int(BigInt::from(factorial((n + t) as u64)), w))
        .mul_ball(&d0.pow(t))
        .mul_ball(&prod_di);
    let xt = num.div_ball(&den).ok_or_else(bad)?;
    Ok(xt.ln().ok_or_else(bad)?.div_int(t as i64).with_prec(prec))
}

/// `H(G; D') = (n+t)!/t! D0'^t D1' ... Dn'` and `nu = binom(D0+t, t)(D1+1)...(Dn+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSamuel {
    pub h: BigUint,
    pub nu: BigUint,
    /// `H <= (n+t)! nu`.
    pub bound_holds: bool,
}

pub fn hilbert_samuel_full(n: usize, t: usize, degrees: &[u64]) -> Result<HilbertSamuel> {
    if degrees.len() != n + 1 {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            got: degrees.len(),
        });
    }
    if t == 0 || t > n {
        return Err(Error::Invalid("need 1 <= t <= n".into()));
    }
    let prime = |x: u64| BigUint::from(x.max(1));
    let mut h = factorial((n + t) as u64) / factorial(t as u64);
    h *= prime(degrees[0]).pow(t as u32);
    for &di in &degrees[1..] {
        h *= prime(di);
    }
    let nu = dimension_e(n, t, degrees)?;
    let bound_holds = h <= factorial((n + t) as u64) * &nu;
    Ok(HilbertSamuel { h, nu, bound_holds })
}

pub fn dimension_e(n: usize, t: usize, degrees: &[u64]) -> Result<BigUint> {
    if degrees.len() != n + 1 {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            got: degrees.len(),
        });
    }
    let mut nu = binomial(degrees[0] + t as u64, t as u64);
    for &di in &degrees[1..] {
        nu *= BigUint::from(di + 1);
    }
    Ok(nu)
}

/// lcm of all products `i_1 ... i_h'` with `1 <= h' <= h`, `i_j >= 1`, `sum i_j <= l`.
pub fn delta_lcm(l: u64, h: u64) -> Result<BigUint> {
    if l == 0 || h == 0 {
        return Err(Error::Invalid("l and h must be positive".into()));
    }
    if l > DESK_L || h > DESK_H {
        return Err(Error::DeskScaleExceeded(alloc::format!(
            "l = {l}, h = {h} (limits {DESK_L}, {DESK_H})"
        )));
    }
    let mut acc = BigUint::one();
    delta_rec(l, h, l, &BigUint::one(), &mut acc);
    Ok(acc)
}

fn delta_rec(left: u64, parts: u64, max_part: u64, prod: &BigUint, acc: &mut BigUint) {
    if parts == 0 {
        return;
    }
    for i in 1..=max_part.min(left) {
        let p = prod * BigUint::from(i);
        if !(&*acc % &p).is_zero() {
            *acc = lcm(acc, &p);
        }
        delta_rec(left - i, parts - 1, i, &p, acc);
    }
}

/// `log delta <= l log(4h)`, checked exactly as `delta <= (4h)^l`.
pub fn delta_bound_holds(l: u64, h: u64, delta: &BigUint) -> bool {
    *delta <= BigUint::from(4 * h).pow(l as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Intro,
    Principal,
    Reduit,
}

impl BoundKind {
    pub fn parse(s: &str) -> Option<BoundKind> {
        match s {
            "intro" => Some(BoundKind::Intro),
            "principal" => Some(BoundKind::Principal),
            "reduit" => Some(BoundKind::Reduit),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::Intro => "intro",
            BoundKind::Principal => "principal",
            BoundKind::Reduit => "reduit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundBranch {
    /// The height factor `U` or `V` won the maximum.
    Main,
    /// The prime term `(1 - eps0) log p` won the maximum.
    PrimeTerm,
}

/// Lower bound `-(6n)^(c n^2) max{U, (1 - eps0) log p}` for `log max |Lambda_i|`.
#[derive(Clone, Debug)]
pub struct TheoremBound {
    pub kind: BoundKind,
    pub value: LogScaleReal,
    /// `c n^2 log(6n)`.
    pub exponent_log: LogReal,
    /// `log max{U, (1 - eps0) log p}`.
    pub factor_log: LogReal,
    pub branch: BoundBranch,
    pub frak_a: u64,
    /// The `t = 1`, `beta_{1,0} != 0` replacement was applied.
    pub refined: bool,
}

pub fn theorem_bound(kind: BoundKind, inst: &BoundInstance, prec: u32) -> Result<TheoremBound> {
    inst.validate()?;
    let n = inst.n as i64;
    let d = inst.d;
    let six_n = 6 * inst.n as u64;
    let (c, frak_a, factor, refined) = match kind {
        BoundKind::Intro => {
            if !inst.archimedean {
                return Err(Error::KindMismatch(
                    "the intro bound is stated for archimedean places only".into(),
                ));
            }
            let la = &inst.log_a[0];
            if inst.log_a.iter().any(|x| x.try_cmp(la) != Some(Ordering::Equal)) {
                return Err(Error::KindMismatch(
                    "the intro bound needs the same log a for every j".into(),
                ));
            }
            let t = inst.t as i64;
            let fa = compute_frak_a(d, &inst.log_e, true, None, la, prec)?;
            let mid = inst.log_b.add(&inst.log_e.scale_int(fa as i64));
            let f = LogReal::log_int(fa, prec)
                .scale(&rat(1, t))
                .add(&ln_value(&mid)?)
                .add(&ln_one_plus_ratio(d, la, &inst.log_e, prec)?.scale(&rat(n, t)));
            (200, fa, f, false)
        }
        BoundKind::Principal => {
            let s = inst.s as i64;
            let fa = compute_frak_a(d, &inst.log_e, inst.archimedean, inst.p, &inst.sum_log_a(), prec)?;
            let mid = inst
                .log_b
                .add(&inst.log_e.scale_int(fa as i64))
                .add(&ln_value(&inst.log_e)?.scale_int(d as i64));
            let mut f = LogReal::log_int(fa, prec)
                .scale(&rat(1, s))
                .add(&ln_value(&mid)?);
            for &i in &inst.i_set {
                f = f.add(&ln_one_plus_ratio(d, &inst.log_a[i], &inst.log_e, prec)?.scale(&rat(1, s)));
            }
            (203, fa, f, false)
        }
        BoundKind::Reduit => {
            let t = inst.t as i64;
            let fa = compute_frak_a(d, &inst.log_e, inst.archimedean, inst.p, &inst.sum_log_a(), prec)?;
            let refined = inst.t == 1 && inst.beta10_nonzero;
            let mid = if refined {
                inst.log_b
                    .add(&inst.log_e)
                    .add(&LogReal::log_int(fa, prec).scale_int(d as i64))
            } else {
                inst.log_b.add(&inst.log_e.scale_int(fa as i64))
            };
            let mut f = LogReal::log_int(fa, prec)
                .scale(&rat(1, t))
                .add(&ln_value(&mid)?);
            for la in &inst.log_a {
                f = f.add(&ln_one_plus_ratio(d, la, &inst.log_e, prec)?.scale(&rat(1, t)));
            }
            (200, fa, f, refined)
        }
    };
    let (factor_log, branch) = match inst.prime_log(prec) {
        Some(lp) if kind != BoundKind::Intro => {
            let llp = ln_value(&lp)?;
            if llp.try_cmp(&factor) == Some(Ordering::Greater) {
                (llp, BoundBranch::PrimeTerm)
            } else {
                (factor.max(&llp), BoundBranch::Main)
            }
        }
        _ => (factor, BoundBranch::Main),
    };
    let exponent_log = LogReal::log_int(six_n, prec).scale_int(c * n * n);
    Ok(TheoremBound {
        kind,
        value: LogScaleReal::from_log(-1, exponent_log.add(&factor_log)),
        exponent_log,
        factor_log,
        branch,
        frak_a,
        refined,
    })
}

/// Whether the bound magnitude is nondecreasing when one input grows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityReport {
    pub log_b: bool,
    pub log_a: Vec<bool>,
    pub degree: bool,
}

impl MonotonicityReport {
    pub fn all(&self) -> bool {
        self.log_b && self.degree && self.log_a.iter().all(|&x| x)
    }
}

pub fn bound_monotonicity_suite(
    kind: BoundKind,
    inst: &BoundInstance,
    prec: u32,
) -> Result<MonotonicityReport> {
    let base = theorem_bound(kind, inst, prec)?;
    let one = LogReal::from_rational(&BigRational::one(), prec);
    let grows = |other: &BoundInstance| -> Result<bool> {
        let b = theorem_bound(kind, other, prec)?;
        Ok(b
            .value
            .log_magnitude()
            .certified_ge(base.value.log_magnitude()))
    };
    let mut bumped = inst.clone();
    bumped.log_b = inst.log_b.add(&one);
    let log_b = grows(&bumped)?;
    let mut log_a = Vec::with_capacity(inst.n);
    for j in 0..inst.n {
        let mut bumped = inst.clone();
        if kind == BoundKind::Intro {
            bumped.log_a = inst.log_a.iter().map(|x| x.add(&one)).collect();
        } else {
            bumped.log_a[j] = inst.log_a[j].add(&one);
        }
        log_a.push(grows(&bumped)?);
    }
    let mut bumped = inst.clone();
    bumped.d = inst.d + 1;
    let degree = grows(&bumped)?;
    Ok(MonotonicityReport {
        log_b,
        log_a,
        degree,
    })
}

/// `lcm` of a slice, used by oracles comparing against [`delta_lcm`].
pub fn lcm_all(values: &[u64]) -> BigUint {
    values
        .iter()
        .fold(BigUint::one(), |acc, &v| acc.lcm(&BigUint::from(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn lr(q: i64) -> LogReal {
        LogReal::from_rational(&BigRational::from_integer(q.into()), P)
    }

    fn simple() -> BoundInstance {
        let mut b = BoundInstance::archimedean(1, 1, 1, vec![lr(1)], lr(1));
        b.beta10_nonzero = true;
        b
    }

    #[test]
    fn frak_a_examples() {
        let one = lr(1);
        assert_eq!(compute_frak_a(1, &one, true, None, &lr(1), P).unwrap(), 2);
        assert_eq!(compute_frak_a(1, &one, true, None, &lr(0), P).unwrap(), 2);
        assert!(matches!(
            compute_frak_a(1, &LogReal::log_int(2, P), true, None, &lr(0), P),
            Err(Error::InvalidFrakE(_))
        ));
        let mut last = 0;
        for d in 1..12 {
            let a = compute_frak_a(d, &one, true, None, &lr(5), P).unwrap();
            assert!(a >= last);
            last = a;
        }
    }

    #[test]
    fn principal_example() {
        let b = theorem_bound(BoundKind::Principal, &simple(), P).unwrap();
        assert_eq!(b.frak_a, 2);
        assert_eq!(b.value.sign(), -1);
        let expect = LogReal::log_int(6, P).scale_int(203).add(&LogReal::log_int(12, P));
        let diff = b.value.log_magnitude().sub(&expect).to_ball(P);
        assert!(diff.abs().upper().to_f64() < 1e-30);
        assert_eq!(b.branch, BoundBranch::Main);
    }

    #[test]
    fn reduit_refinement() {
        let b = theorem_bound(BoundKind::Reduit, &simple(), P).unwrap();
        assert!(b.refined);
        let v = 2.0 * (2.0 + 2f64.ln()) * 2.0;
        assert!((b.factor_log.to_f64() - v.ln()).abs() < 1e-12);
        let mut plain = simple();
        plain.beta10_nonzero = false;
        let c = theorem_bound(BoundKind::Reduit, &plain, P).unwrap();
        assert!((c.factor_log.to_f64() - 12f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn intro_requires_uniform_archimedean() {
        let mut i = BoundInstance::archimedean(2, 1, 1, vec![lr(1), lr(2)], lr(1));
        assert!(matches!(theorem_bound(BoundKind::Intro, &i, P), Err(Error::KindMismatch(_))));
        i.log_a = vec![lr(1), lr(1)];
        assert!(theorem_bound(BoundKind::Intro, &i, P).is_ok());
        let u = BoundInstance::ultrametric(1, 1, 1, 5, lr(1), vec![lr(1)], lr(1));
        assert!(matches!(theorem_bound(BoundKind::Intro, &u, P), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn prime_branch() {
        let p = 1_000_000_007;
        let u = BoundInstance::ultrametric(1, 1, 1, p, lr(4), vec![lr(0)], lr(1));
        let b = theorem_bound(BoundKind::Principal, &u, P).unwrap();
        assert_eq!(b.frak_a, 1);
        assert_eq!(b.branch, BoundBranch::PrimeTerm);
        let lp = ln_value(&LogReal::log_int(p, P)).unwrap();
        assert!((b.factor_log.to_f64() - lp.to_f64()).abs() < 1e-15);
        let mut v = u.clone();
        v.log_e = lr(40);
        let b2 = theorem_bound(BoundKind::Principal, &v, P).unwrap();
        assert_eq!(b2.branch, BoundBranch::Main);
    }

    #[test]
    fn params_simple_instance() {
        let inst = simple();
        let ps = compute_params(&inst, P).unwrap();
        assert_eq!(ps.y, 0);
        assert_eq!(ps.frak_a, 2);
        assert_eq!(ps.c0, BigUint::from(6u32).pow(22u32));
        let props = check_param_properties(&ps, &inst);
        assert!(props.all(), "{props:?}");
        let alt = u_minus1_from_x_condition(&inst, P).unwrap();
        let diff = ps.u_minus1.log_magnitude().to_ball(P).sub_ball(&alt);
        assert!(diff.abs().upper().to_f64() < 1e-12);
        assert!(ps.x0.log_magnitude().to_ball(P).abs().upper().to_f64() < 1e-12);
        let mut two = BoundInstance::archimedean(2, 2, 1, vec![lr(1), lr(1)], lr(1));
        two.beta10_nonzero = true;
        assert_eq!(compute_params(&two, P).unwrap().y, 1);
    }

    #[test]
    fn hilbert_samuel_examples() {
        let a = hilbert_samuel_full(1, 1, &[1, 1]).unwrap();
        assert_eq!((a.h.clone(), a.nu.clone()), (BigUint::from(2u32), BigUint::from(4u32)));
        assert!(a.bound_holds);
        let b = hilbert_samuel_full(2, 1, &[2, 1, 1]).unwrap();
        assert_eq!((b.h, b.nu), (BigUint::from(12u32), BigUint::from(12u32)));
        let c = hilbert_samuel_full(1, 1, &[0, 0]).unwrap();
        assert_eq!(c.h, BigUint::from(2u32));
        assert_eq!(c.nu, BigUint::from(1u32));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_lcm(4, 1).unwrap(), BigUint::from(12u32));
        assert_eq!(delta_lcm(4, 2).unwrap(), BigUint::from(12u32));
        for h in 1..=6 {
            assert_eq!(delta_lcm(1, h).unwrap(), BigUint::one());
        }
        assert_eq!(delta_lcm(10, 1).unwrap(), lcm_all(&(1..=10).collect::<Vec<_>>()));
        assert!(matches!(delta_lcm(31, 1), Err(Error::DeskScaleExceeded(_))));
        assert!(delta_bound_holds(30, 6, &delta_lcm(30, 6).unwrap()));
    }

    #[test]
    fn monotone_in_inputs() {
        let r = bound_monotonicity_suite(BoundKind::Principal, &simple(), P).unwrap();
        assert!(r.all(), "{r:?}");
    }
}
