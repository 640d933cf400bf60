//! Rigorous evaluation of linear forms in logarithms and end-to-end checks
//! against the explicit lower bounds.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::factor_rational;
use crate::baker::{theorem_bound, BoundInstance, BoundKind, TheoremBound};
use crate::ball::{Ball, ComplexBall};
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField};
use crate::heights::weil_height;
use crate::linalg::{self, Rationals, Scalars};
use crate::logreal::LogReal;
use crate::logscale::LogScaleReal;
use crate::padic::{log_radius_coefficient, PadicNumber};
use crate::places::Place;
use crate::precision::PrecisionContext;

const MAX_ARCH_BITS: u32 = 8192;
const PADIC_REFINEMENTS: u32 = 4;

/// How each `u_j` with `exp(u_j) = alpha_j` is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum USpec {
    /// `u_j = Log alpha_j + 2 pi i m_j` with the principal logarithm at `v0`.
    Arch { branches: Vec<i64> },
    /// `u_j = log_p alpha_j` by the p-adic series.
    Padic,
}

#[derive(Clone, Debug)]
pub struct LinFormInstance {
    pub field: NumberField,
    pub alpha: Vec<FieldElement>,
    pub u: USpec,
    /// `t` rows `(beta_{i,0}, ..., beta_{i,n})`.
    pub beta: Vec<Vec<FieldElement>>,
    pub v0: Place,
    pub declared_s: Option<usize>,
    /// Zero-based indices of a maximal free subfamily.
    pub declared_i: Option<Vec<usize>>,
}

impl LinFormInstance {
    pub fn new(
        field: NumberField,
        alpha: Vec<FieldElement>,
        u: USpec,
        beta: Vec<Vec<FieldElement>>,
        v0: Place,
        ctx: &PrecisionContext,
    ) -> Result<LinFormInstance> {
        let inst = LinFormInstance {
            field,
            alpha,
            u,
            beta,
            v0,
            declared_s: None,
            declared_i: None,
        };
        inst.validate(ctx)?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn t(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self, ctx: &PrecisionContext) -> Result<()> {
        let n = self.n();
        let t = self.t();
        if n == 0 || t == 0 || t > n {
            return Err(Error::Invalid("need 1 <= t <= n".into()));
        }
        for row in &self.beta {
            if row.len() != n + 1 {
                return Err(Error::LengthMismatch {
                    expected: n + 1,
                    got: row.len(),
                });
            }
        }
        if self.alpha.iter().any(|a| a.is_zero()) {
            return Err(Error::Invalid("alpha_j must be nonzero".into()));
        }
        if n == 1 && self.alpha[0].as_rational().is_some_and(|q| q.is_one()) {
            return Err(Error::Invalid(
                "alpha_1 = 1 with n = 1 is the excluded trivial case".into(),
            ));
        }
        match &self.u {
            USpec::Arch { branches } => {
                if !self.v0.is_archimedean() {
                    return Err(Error::Invalid("branch integers need an archimedean v0".into()));
                }
                if branches.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: branches.len(),
                    });
                }
                let us = self.arch_logs(ctx.arch_bits)?;
                let root = self.v0.root_at(&self.field, ctx.arch_bits)?;
                for (a, u) in self.alpha.iter().zip(&us) {
                    let m = self.field.embed(a, &root).abs();
                    if !u.re.exp().overlaps(&m) {
                        return Err(Error::Invalid("exp(u_j) does not enclose alpha_j".into()));
                    }
                }
            }
            USpec::Padic => {
                if self.v0.is_archimedean() {
                    return Err(Error::Invalid("p-adic logarithms need a finite v0".into()));
                }
                let n_dig = ctx.padic_digits;
                for a in &self.alpha {
                    let x = self.v0.embed_padic(&self.field, a, n_dig)?;
                    let l = x.log()?;
                    if !l.exp()?.eq_at_precision(&x) {
                        return Err(Error::Invalid("exp(log alpha_j) differs from alpha_j".into()));
                    }
                }
            }
        }
        Ok(())
    }

    fn arch_logs(&self, prec: u32) -> Result<Vec<ComplexBall>> {
        let USpec::Arch { branches } = &self.u else {
            return Err(Error::Invalid("not an archimedean instance".into()));
        };
        let root = self.v0.root_at(&self.field, prec)?;
        let two_pi = Ball::pi(prec).mul_2exp(1);
        let mut out = Vec::with_capacity(self.n());
        for (a, &m) in self.alpha.iter().zip(branches) {
            let z = self.field.embed(a, &root);
            let l = principal_log(&z)
                .ok_or_else(|| Error::PrecisionExhausted("principal logarithm".into()))?;
            out.push(ComplexBall::new(l.re.clone(), l.im.add_ball(&two_pi.mul_int(m))));
        }
        Ok(out)
    }

    fn padic_logs(&self, digits: u32) -> Result<Vec<PadicNumber>> {
        self.alpha
            .iter()
            .map(|a| self.v0.embed_padic(&self.field, a, digits)?.log())
            .collect()
    }
}

/// Principal logarithm, taking `i pi` exactly on the negative real axis.
fn principal_log(z: &ComplexBall) -> Option<ComplexBall> {
    if z.is_real() && z.re.is_negative() {
        let m = z.re.neg_ball().ln()?;
        return Some(ComplexBall::new(m, Ball::pi(z.prec())));
    }
    z.ln()
}

/// `|Lambda_i|_{v0}`.
#[derive(Clone, Debug)]
pub enum LambdaValue {
    Arch(Ball),
    /// `p^(-valuation)`, or zero modulo `p^precision` when `valuation` is `None`.
    Padic {
        p: u64,
        valuation: Option<i64>,
        precision: i64,
    },
}

impl LambdaValue {
    pub fn is_certified_nonzero(&self) -> bool {
        match self {
            LambdaValue::Arch(b) => b.is_positive(),
            LambdaValue::Padic { valuation, .. } => valuation.is_some(),
        }
    }

    /// `log |Lambda|_{v0}` when certified nonzero; exact in the p-adic case.
    pub fn log_abs(&self, prec: u32) -> Option<LogReal> {
        match self {
            LambdaValue::Arch(b) => b.ln().map(LogReal::from_ball),
            LambdaValue::Padic { p, valuation, .. } => valuation.map(|v| {
                LogReal::log_prime_multiple(
                    &BigUint::from(*p),
                    BigRational::from_integer(BigInt::from(-v)),
                    prec,
                )
            }),
        }
    }
}

/// Enclosures of `|Lambda_1|, ..., |Lambda_t|`, refining the precision until one
/// of them is separated from zero.
pub fn eval_linear_forms(inst: &LinFormInstance, ctx: &PrecisionContext) -> Result<Vec<LambdaValue>> {
    match &inst.u {
        USpec::Arch { .. } => {
            let mut prec = ctx.arch_bits;
            loop {
                let vals = eval_arch(inst, prec)?;
                if vals.iter().any(|v| v.is_certified_nonzero()) || prec >= MAX_ARCH_BITS {
                    return Ok(vals);
                }
                prec *= 2;
            }
        }
        USpec::Padic => {
            let mut digits = ctx.padic_digits;
            let mut round = 0;
            loop {
                let vals = eval_padic(inst, digits)?;
                if vals.iter().any(|v| v.is_certified_nonzero()) || round >= PADIC_REFINEMENTS {
                    return Ok(vals);
                }
                digits *= 2;
                round += 1;
            }
        }
    }
}

fn eval_arch(inst: &LinFormInstance, prec: u32) -> Result<Vec<LambdaValue>> {
    let us = inst.arch_logs(prec)?;
    let root = inst.v0.root_at(&inst.field, prec)?;
    let mut out = Vec::with_capacity(inst.t());
    for row in &inst.beta {
        let mut acc = inst.field.embed(&row[0], &root);
        for (b, u) in row[1..].iter().zip(&us) {
            acc = acc.add(&inst.field.embed(b, &root).mul(u));
        }
        out.push(LambdaValue::Arch(acc.abs()));
    }
    Ok(out)
}

fn eval_padic(inst: &LinFormInstance, digits: u32) -> Result<Vec<LambdaValue>> {
    let us = inst.padic_logs(digits)?;
    let p = inst.v0.prime().expect("finite place");
    let mut out = Vec::with_capacity(inst.t());
    for row in &inst.beta {
        let mut acc = inst.v0.embed_padic(&inst.field, &row[0], digits)?;
        for (b, u) in row[1..].iter().zip(&us) {
            acc = acc.add(&inst.v0.embed_padic(&inst.field, b, digits)?.mul(u));
        }
        out.push(LambdaValue::Padic {
            p,
            valuation: acc.valuation(),
            precision: acc.precision(),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypothesisStatus {
    Certified,
    Assumed,
}

#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub status: HypothesisStatus,
    pub s: usize,
    pub i_set: Vec<usize>,
    /// Rank of the multiplicative exponent matrix when certified.
    pub rank: Option<usize>,
}

/// Decides Q-linear (in)dependence of the `u_j` exactly when every `alpha_j`
/// is rational and the logarithms are real principal ones or p-adic.
pub fn certify_hypotheses(inst: &LinFormInstance) -> Result<HypothesisReport> {
    let n = inst.n();
    let rationals: Option<Vec<BigRational>> = inst.alpha.iter().map(|a| a.as_rational()).collect();
    let applicable = match (&inst.u, &rationals) {
        (_, None) => false,
        (USpec::Arch { branches }, Some(qs)) => {
            branches.iter().all(|&m| m == 0) && qs.iter().all(|q| q.is_positive())
        }
        (USpec::Padic, Some(_)) => true,
    };
    if !applicable {
        let i_set = inst.declared_i.clone().unwrap_or_else(|| (0..n).collect());
        let s = inst.declared_s.unwrap_or_else(|| inst.t().min(i_set.len()));
        return Ok(HypothesisReport {
            status: HypothesisStatus::Assumed,
            s,
            i_set,
            rank: None,
        });
    }
    let qs = rationals.expect("checked");
    let factored: Vec<_> = qs.iter().map(|q| factor_rational(&q.abs())).collect();
    let primes: BTreeSet<BigUint> = factored.iter().flat_map(|f| f.keys().cloned()).collect();
    let primes: Vec<BigUint> = primes.into_iter().collect();
    let rows: Vec<Vec<BigRational>> = factored
        .iter()
        .map(|f| {
            primes
                .iter()
                .map(|p| BigRational::from_integer(BigInt::from(*f.get(p).unwrap_or(&0))))
                .collect()
        })
        .collect();
    let mut i_set = Vec::new();
    let mut chosen: Vec<Vec<BigRational>> = Vec::new();
    for (j, r) in rows.iter().enumerate() {
        if r.iter().all(|c| c.is_zero()) {
            continue;
        }
        let mut trial = chosen.clone();
        trial.push(r.clone());
        if linalg::rank(&Rationals, &trial) > chosen.len() {
            chosen = trial;
            i_set.push(j);
        }
    }
    let rank = i_set.len();
    // T_u is spanned by the columns of the exponent matrix; s is the rank of the
    // linear parts restricted to it.
    let k = &inst.field;
    let s = if primes.is_empty() {
        0
    } else {
        let prod: Vec<Vec<FieldElement>> = inst
            .beta
            .iter()
            .map(|row| {
                (0..primes.len())
                    .map(|c| {
                        let mut acc = k.zero();
                        for (j, b) in row[1..].iter().enumerate() {
                            let e = k.from_rational(rows[j][c].clone());
                            acc = k.add(&acc, &k.mul(b, &e));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        linalg::rank(k, &prod)
    };
    Ok(HypothesisReport {
        status: HypothesisStatus::Certified,
        s,
        i_set,
        rank: Some(rank),
    })
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub lambda_abs: Vec<LambdaValue>,
    /// Enclosure of `log max_i |Lambda_i|_{v0}`.
    pub max_log_lambda: LogReal,
    pub bound: TheoremBound,
    /// Certified lower bound for `log max |Lambda_i| - bound`.
    pub margin: LogScaleReal,
    pub pass: bool,
    pub hypothesis: HypothesisReport,
    pub bound_instance: BoundInstance,
    /// `|u_i| < r^2` for every `i` in `I` (finite places only).
    pub squared_domain: Option<bool>,
}

/// The bound parameters derived from heights: `log a_j`, `log b` and `log e`.
pub fn derive_bound_instance(
    inst: &LinFormInstance,
    hyp: &HypothesisReport,
    ctx: &PrecisionContext,
) -> Result<(BoundInstance, Option<bool>)> {
    let k = &inst.field;
    let prec = ctx.arch_bits;
    let d = k.degree() as u64;
    let n = inst.n();
    let t = inst.t();
    if hyp.s == 0 || hyp.i_set.is_empty() {
        return Err(Error::HypothesisViolated(
            "the linear forms vanish on the span of u".into(),
        ));
    }
    let one = LogReal::from_rational(&BigRational::one(), prec);
    let mut log_b = one.clone();
    for row in &inst.beta {
        for b in row {
            log_b = log_b.max(&weil_height(k, b, ctx)?.value);
        }
    }
    let log_b = log_b.scale_int(d as i64);
    let mut log_a = Vec::with_capacity(n);
    let (archimedean, p, log_e, squared) = match &inst.u {
        USpec::Arch { .. } => {
            let us = inst.arch_logs(prec)?;
            let e = Ball::e(prec);
            for (a, u) in inst.alpha.iter().zip(&us) {
                let h = weil_height(k, a, ctx)?.value;
                let other = LogReal::from_ball(e.mul_ball(&u.abs()).div_int(d as i64));
                log_a.push(h.max(&other));
            }
            (true, None, one.clone(), None)
        }
        USpec::Padic => {
            let p = inst.v0.prime().expect("finite place");
            let us = inst.padic_logs(ctx.padic_digits)?;
            for a in &inst.alpha {
                log_a.push(weil_height(k, a, ctx)?.value);
            }
            let mut ok = true;
            let mut min_v: Option<i64> = None;
            for &i in &hyp.i_set {
                let u = &us[i];
                ok &= u.in_squared_domain();
                if let Some(v) = u.valuation() {
                    min_v = Some(min_v.map_or(v, |m| m.min(v)));
                }
            }
            let v = min_v.ok_or_else(|| {
                Error::PrecisionExhausted("p-adic logarithms vanish at this precision".into())
            })?;
            if !ok {
                return Err(Error::HypothesisViolated(format!(
                    "some u_i with i in I has |u_i| >= r^2 at p = {p}"
                )));
            }
            // e = r^2 / min |u_i| = p^(v - 2/(p-1))
            let coeff = BigRational::from_integer(BigInt::from(v))
                + log_radius_coefficient(p) * BigRational::from_integer(BigInt::from(2));
            let log_e = LogReal::log_prime_multiple(&BigUint::from(p), coeff, prec);
            (false, Some(p), log_e, Some(ok))
        }
    };
    let beta10_nonzero = t == 1 && !inst.beta[0][0].is_zero();
    Ok((
        BoundInstance {
            n,
            t,
            d,
            archimedean,
            p,
            log_e,
            log_a,
            log_b,
            s: hyp.s.min(t),
            i_set: hyp.i_set.clone(),
            beta10_nonzero,
        },
        squared,
    ))
}

pub fn verify_instance(
    inst: &LinFormInstance,
    kind: BoundKind,
    ctx: &PrecisionContext,
) -> Result<VerificationReport> {
    let prec = ctx.arch_bits;
    let hyp = certify_hypotheses(inst)?;
    let (mut bi, squared) = derive_bound_instance(inst, &hyp, ctx)?;
    if kind == BoundKind::Intro {
        let m = bi
            .log_a
            .iter()
            .skip(1)
            .fold(bi.log_a[0].clone(), |acc, x| acc.max(x));
        bi.log_a = vec![m; bi.n];
    }
    let bound = theorem_bound(kind, &bi, prec)?;
    let vals = eval_linear_forms(inst, ctx)?;
    let logs: Vec<LogReal> = vals.iter().filter_map(|v| v.log_abs(prec)).collect();
    if logs.is_empty() {
        return Err(Error::DegenerateInstance);
    }
    let max_log = logs[1..].iter().fold(logs[0].clone(), |acc, x| acc.max(x));
    let lower = LogScaleReal::from_dyadic(&max_log.to_ball(prec).lower(), prec);
    let margin = lower
        .sub(&bound.value)
        .ok_or_else(|| Error::PrecisionExhausted("margin sign".into()))?;
    let pass = margin.sign() > 0;
    Ok(VerificationReport {
        lambda_abs: vals,
        max_log_lambda: max_log,
        bound,
        margin,
        pass,
        hypothesis: hyp,
        bound_instance: bi,
        squared_domain: squared,
    })
}

/// Height-side inputs recomputed without the heights module, for rational data:
/// `h(p/q) = log max(|p|, |q|)`.
pub fn direct_rational_heights(inst: &LinFormInstance, prec: u32) -> Option<(Vec<Ball>, Ball)> {
    let h = |q: &BigRational| -> Ball {
        let m = q.numer().abs().max(q.denom().abs());
        Ball::from_int(m, prec).ln().expect("positive")
    };
    let alphas: Option<Vec<BigRational>> = inst.alpha.iter().map(|a| a.as_rational()).collect();
    let mut hb = Ball::one(prec);
    for row in &inst.beta {
        for b in row {
            let q = b.as_rational()?;
            if !q.is_zero() {
                hb = hb.max(&h(&q));
            }
        }
    }
    Some((alphas?.iter().map(h).collect(), hb))
}

/// Compares two `log |Lambda|` enclosures for nesting across precisions.
pub fn nested(coarse: &LambdaValue, fine: &LambdaValue) -> bool {
    match (coarse, fine) {
        (LambdaValue::Arch(a), LambdaValue::Arch(b)) => a.contains_ball(b),
        (
            LambdaValue::Padic { valuation: a, precision: pa, .. },
            LambdaValue::Padic { valuation: b, precision: pb, .. },
        ) => match (a, b) {
            (Some(x), Some(y)) => x == y,
            (None, Some(y)) => *y >= *pa,
            (None, None) => true,
            (Some(_), None) => pb < pa,
        },
        _ => false,
    }
}

impl PartialOrd for HypothesisStatus {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((*self as u8).cmp(&(*other as u8)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::{archimedean_places, places_above};

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn q(a: i64, b: i64) -> FieldElement {
        NumberField::rationals().from_rational(BigRational::new(a.into(), b.into()))
    }

    fn arch_q(alpha: Vec<i64>, beta: Vec<Vec<FieldElement>>) -> LinFormInstance {
        let k = NumberField::rationals();
        let v0 = archimedean_places(&k, &ctx()).unwrap().remove(0);
        let n = alpha.len();
        LinFormInstance::new(
            k,
            alpha.into_iter().map(|a| q(a, 1)).collect(),
            USpec::Arch { branches: vec![0; n] },
            beta,
            v0,
            &ctx(),
        )
        .unwrap()
    }

    fn padic_q(p: u64, alpha: Vec<i64>, beta: Vec<Vec<FieldElement>>) -> LinFormInstance {
        let k = NumberField::rationals();
        let v0 = places_above(&k, p).unwrap().remove(0);
        LinFormInstance::new(
            k,
            alpha.into_iter().map(|a| q(a, 1)).collect(),
            USpec::Padic,
            beta,
            v0,
            &ctx(),
        )
        .unwrap()
    }

    #[test]
    fn log_two() {
        let inst = arch_q(vec![2], vec![vec![q(0, 1), q(1, 1)]]);
        let v = eval_linear_forms(&inst, &ctx()).unwrap();
        let LambdaValue::Arch(b) = &v[0] else { panic!() };
        assert!((b.to_f64() - core::f64::consts::LN_2).abs() < 1e-15);
        let inst = arch_q(vec![2], vec![vec![q(1, 1), q(0, 1)]]);
        let LambdaValue::Arch(b) = &eval_linear_forms(&inst, &ctx()).unwrap()[0] else { panic!() };
        assert!(b.contains(&crate::ball::Dyadic::from_int(1)));
    }

    #[test]
    fn near_cancellation() {
        let inst = arch_q(vec![2], vec![vec![q(-69, 100), q(1, 1)]]);
        let r = verify_instance(&inst, BoundKind::Principal, &ctx()).unwrap();
        let LambdaValue::Arch(b) = &r.lambda_abs[0] else { panic!() };
        assert!((b.to_f64() - (core::f64::consts::LN_2 - 0.69)).abs() < 1e-15);
        assert!(r.pass);
        assert!(r.bound_instance.beta10_nonzero);
    }

    #[test]
    fn padic_six_at_five() {
        let inst = padic_q(5, vec![6], vec![vec![q(0, 1), q(1, 1)]]);
        let v = eval_linear_forms(&inst, &ctx()).unwrap();
        let LambdaValue::Padic { valuation, .. } = &v[0] else { panic!() };
        assert_eq!(*valuation, Some(1));
        let r = verify_instance(&inst, BoundKind::Principal, &ctx()).unwrap();
        assert!(r.pass);
        assert_eq!(r.squared_domain, Some(true));
    }

    #[test]
    fn hypotheses() {
        let two_three = arch_q(vec![2, 3], vec![vec![q(0, 1), q(1, 1), q(1, 1)]]);
        let h = certify_hypotheses(&two_three).unwrap();
        assert_eq!(h.status, HypothesisStatus::Certified);
        assert_eq!(h.i_set, vec![0, 1]);
        let two_four = arch_q(vec![2, 4], vec![vec![q(0, 1), q(1, 1), q(1, 1)]]);
        let h = certify_hypotheses(&two_four).unwrap();
        assert_eq!(h.i_set, vec![0]);
        assert_eq!(h.s, 1);
        let k = NumberField::parse("x^2+1").unwrap();
        let v0 = archimedean_places(&k, &ctx()).unwrap().remove(0);
        let a = k.from_ints(&[1, 1]).unwrap();
        let inst = LinFormInstance::new(
            k.clone(),
            vec![a],
            USpec::Arch { branches: vec![0] },
            vec![vec![k.zero(), k.one()]],
            v0,
            &ctx(),
        )
        .unwrap();
        assert_eq!(certify_hypotheses(&inst).unwrap().status, HypothesisStatus::Assumed);
    }

    #[test]
    fn verify_log_two() {
        let inst = arch_q(vec![2], vec![vec![q(0, 1), q(1, 1)]]);
        let r = verify_instance(&inst, BoundKind::Principal, &ctx()).unwrap();
        assert!(r.pass);
        assert_eq!(r.hypothesis.status, HypothesisStatus::Certified);
        assert!((r.max_log_lambda.to_f64() - core::f64::consts::LN_2.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_domains() {
        let k = NumberField::rationals();
        let v0 = places_above(&k, 5).unwrap().remove(0);
        let r = LinFormInstance::new(
            k,
            vec![q(2, 1)],
            USpec::Padic,
            vec![vec![q(0, 1), q(1, 1)]],
            v0,
            &ctx(),
        );
        assert!(matches!(r, Err(Error::OutsideConvergenceDomain(_))));
    }
}
