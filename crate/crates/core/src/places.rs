//! Places of a number field normalized so that `|p|_v = 1/p`, evaluation of
//! absolute values, and the product formula.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{factor, primes_up_to, valuation};
use crate::ball::{eval_rational_poly, Ball, ComplexBall, Mag};
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField};
use crate::logreal::LogReal;
use crate::padic::PadicNumber;
use crate::poly::{
    fp_degree, fp_divrem, fp_factor_squarefree, fp_is_squarefree, hensel_lift_pair, z_derivative,
    z_to_fp, FpPoly, ZPoly,
};
use crate::precision::PrecisionContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlaceKind {
    Real,
    Complex,
    Finite,
}

#[derive(Clone, Debug)]
pub struct Place {
    kind: PlaceKind,
    label: String,
    n_v: usize,
    p: u64,
    root: Option<ComplexBall>,
    factor: FpPoly,
    cofactor: FpPoly,
}

impl PartialEq for Place {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

impl Eq for Place {}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// `|x|_v`: an enclosure at archimedean places, an exact power of `p` at finite ones.
#[derive(Clone, Debug)]
pub enum AbsValue {
    Zero,
    Arch(Ball),
    /// `p^exponent`
    Finite { p: u64, exponent: i64 },
}

impl AbsValue {
    pub fn to_ball(&self, prec: u32) -> Ball {
        match self {
            AbsValue::Zero => Ball::zero(prec),
            AbsValue::Arch(b) => b.clone(),
            AbsValue::Finite { p, exponent } => {
                let pb = BigInt::from(*p).pow(exponent.unsigned_abs() as u32);
                let q = if *exponent >= 0 {
                    BigRational::from_integer(pb)
                } else {
                    BigRational::new(BigInt::one(), pb)
                };
                Ball::from_rational(&q, prec)
            }
        }
    }
}

impl Place {
    pub fn kind(&self) -> PlaceKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Local degree `n_v = [k_v : Q_v]`.
    pub fn local_degree(&self) -> usize {
        self.n_v
    }

    pub fn is_archimedean(&self) -> bool {
        self.kind != PlaceKind::Finite
    }

    /// Residue prime of a finite place.
    pub fn prime(&self) -> Option<u64> {
        (self.kind == PlaceKind::Finite).then_some(self.p)
    }

    /// Irreducible factor of the defining polynomial modulo `p` (finite places).
    pub fn residue_factor(&self) -> &[u64] {
        &self.factor
    }

    /// Certified enclosure of the root defining an archimedean place.
    pub fn root(&self) -> Option<&ComplexBall> {
        self.root.as_ref()
    }

    /// Root enclosure refined to `prec` bits.
    pub fn root_at(&self, k: &NumberField, prec: u32) -> Result<ComplexBall> {
        let root = self
            .root
            .as_ref()
            .ok_or_else(|| Error::Invalid("finite place has no complex root".into()))?;
        if root.prec() >= prec {
            return Ok(root.clone());
        }
        if k.degree() == 1 {
            return Ok(root.with_prec(prec));
        }
        let start = Complex64::new(root.re.to_f64(), root.im.to_f64());
        let real = self.kind == PlaceKind::Real;
        let refined = refine_root(k.poly(), root, real, prec)
            .or_else(|| {
                let z = ComplexBall::new(
                    Ball::from_f64(start.re, prec)?,
                    Ball::from_f64(start.im, prec)?,
                );
                refine_root(k.poly(), &z, real, prec)
            })
            .ok_or_else(|| Error::PrecisionExhausted("root refinement failed".into()))?;
        Ok(refined)
    }

    /// Lift of the residue factor to a monic factor of the defining polynomial mod `p^n`.
    pub fn lifted_factor(&self, k: &NumberField, n: u32) -> ZPoly {
        let f = k.poly();
        if fp_degree(&self.cofactor) == Some(0) {
            let m = BigInt::from(self.p).pow(n);
            return f.iter().map(|c| c.mod_floor(&m)).collect();
        }
        hensel_lift_pair(f, &self.factor, &self.cofactor, self.p, n.max(1)).0
    }

    /// `v(x)` normalized so that `v(p) = 1`; `None` for `x = 0`.
    pub fn valuation(&self, k: &NumberField, x: &FieldElement) -> Result<Option<i64>> {
        if self.kind != PlaceKind::Finite {
            return Err(Error::Invalid("valuation at an archimedean place".into()));
        }
        if x.is_zero() {
            return Ok(None);
        }
        let (y, d) = k.integral_decomposition(x);
        let vd = valuation(&d, self.p).unwrap_or(0) as i64;
        let yel = k
            .element(y.iter().map(|c| BigRational::from_integer(c.clone())).collect())
            .expect("same degree");
        let norm = k.norm(&yel).to_integer();
        let vn = valuation(&norm, self.p).unwrap_or(0);
        let f = fp_degree(&self.factor).unwrap_or(1).max(1) as u64;
        let n = (vn / f + 2) as u32;
        let g = self.lifted_factor(k, n);
        let m = BigInt::from(self.p).pow(n);
        let r = rem_monic_mod(&y, &g, &m);
        let vy = r
            .iter()
            .filter_map(|c| valuation(c, self.p))
            .min()
            .map(|v| v as i64)
            .ok_or_else(|| Error::PrecisionExhausted("valuation not resolved".into()))?;
        Ok(Some(vy - vd))
    }

    /// Residue degree `f` of a finite place (equal to `n_v`, the place being unramified).
    pub fn residue_degree(&self) -> usize {
        if self.kind == PlaceKind::Finite {
            self.n_v
        } else {
            0
        }
    }

    /// Image of the generator in `Z_p` for a place of residue degree 1.
    pub fn padic_root(&self, k: &NumberField, n: u32) -> Result<PadicNumber> {
        if self.kind != PlaceKind::Finite || self.n_v != 1 {
            return Err(Error::Unsupported(
                "p-adic embedding needs a finite place of residue degree 1".into(),
            ));
        }
        let g = self.lifted_factor(k, n);
        let r = -&g[0];
        Ok(PadicNumber::from_rational(
            &BigRational::from_integer(r),
            self.p,
            n as i64,
        ))
    }

    /// Image of `x` in `Q_p` (residue degree 1 places) at absolute precision `n`.
    pub fn embed_padic(&self, k: &NumberField, x: &FieldElement, n: u32) -> Result<PadicNumber> {
        if let Some(q) = x.as_rational() {
            return Ok(PadicNumber::from_rational(&q, self.p, n as i64));
        }
        let (y, d) = k.integral_decomposition(x);
        let vd = valuation(&d, self.p).unwrap_or(0) as u32;
        let work = n + vd;
        let r = self.padic_root(k, work)?;
        let mut acc = PadicNumber::zero(self.p, work as i64);
        for c in y.iter().rev() {
            acc = acc
                .mul(&r)
                .add(&PadicNumber::from_rational(&BigRational::from_integer(c.clone()), self.p, work as i64));
        }
        let dd = PadicNumber::from_rational(&BigRational::from_integer(d), self.p, work as i64);
        Ok(acc.div(&dd).expect("nonzero denominator").with_precision(n as i64))
    }
}

fn rem_monic_mod(y: &[BigInt], g: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let dg = g.len() - 1;
    let mut r: Vec<BigInt> = y.iter().map(|c| c.mod_floor(m)).collect();
    while r.len() > dg {
        let top = r.pop().expect("nonempty");
        if top.is_zero() {
            continue;
        }
        let k = r.len() - dg;
        for i in 0..dg {
            r[k + i] = (&r[k + i] - &top * &g[i]).mod_floor(m);
        }
    }
    r
}

fn aberth(f: &[f64]) -> Vec<Complex64> {
    let n = f.len() - 1;
    let bound = 1.0 + f[..n].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in f.iter().rev() {
            dp = dp * z + p;
            p = p * z + Complex64::new(*c, 0.0);
        }
        (p, dp)
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(0.5 * bound, t)
        })
        .collect();
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let w = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let delta = w / (Complex64::new(1.0, 0.0) - w * s);
            if delta.is_finite() {
                z[k] -= delta;
                worst = worst.max(delta.norm() / (1.0 + z[k].norm()));
            }
        }
        if worst < 1e-15 {
            break;
        }
    }
    z
}

fn poly_rationals(f: &[BigInt]) -> Vec<BigRational> {
    f.iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

/// Newton refinement followed by a disk-inclusion certificate. The result is
/// guaranteed to contain the unique root lying in `hint` (whose enclosure is trusted).
fn refine_root(f: &[BigInt], hint: &ComplexBall, real: bool, prec: u32) -> Option<ComplexBall> {
    let w = prec + 32;
    let fq = poly_rationals(f);
    let dfq = poly_rationals(&z_derivative(f));
    let mut z = ComplexBall::new(
        Ball::exact(hint.re.mid().clone(), w),
        if real {
            Ball::zero(w)
        } else {
            Ball::exact(hint.im.mid().clone(), w)
        },
    );
    let iters = 4 + (32 - (w / 20).leading_zeros());
    for _ in 0..iters {
        let fz = eval_rational_poly(&fq, &z);
        let dz = eval_rational_poly(&dfq, &z);
        let step = fz.div(&dz)?;
        let next = z.sub(&step);
        z = ComplexBall::new(
            Ball::exact(next.re.mid().clone(), w),
            if real {
                Ball::zero(w)
            } else {
                Ball::exact(next.im.mid().clone(), w)
            },
        );
    }
    let r = inclusion_radius(&fq, &dfq, &z)?;
    let enc = ComplexBall::new(
        Ball::new(z.re.mid().clone(), r, prec),
        if real {
            Ball::zero(prec)
        } else {
            Ball::new(z.im.mid().clone(), r, prec)
        },
    );
    if hint.re.contains_ball(&enc.re) && hint.im.contains_ball(&enc.im) {
        Some(enc)
    } else {
        None
    }
}

fn inclusion_radius(fq: &[BigRational], dfq: &[BigRational], z: &ComplexBall) -> Option<Mag> {
    let n = fq.len() - 1;
    let fz = eval_rational_poly(fq, z).abs();
    let dz = eval_rational_poly(dfq, z).abs();
    let r = fz.mul_int(n as i64).div_ball(&dz)?;
    Some(r.abs_upper())
}

/// Certified enclosures of all roots: reals ascending, then one root with positive
/// imaginary part per conjugate pair.
pub fn certified_roots(f: &[BigInt], prec: u32) -> Result<(Vec<ComplexBall>, Vec<ComplexBall>)> {
    let n = f.len() - 1;
    if n == 1 {
        let r = Ball::from_rational(&BigRational::new(-f[0].clone(), f[1].clone()), prec);
        return Ok((vec![ComplexBall::real(r)], Vec::new()));
    }
    let ff: Vec<f64> = f.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let approx = aberth(&ff);
    let fq = poly_rationals(f);
    let dfq = poly_rationals(&z_derivative(f));
    for attempt in 0..4 {
        let w = prec + 32 + 64 * attempt;
        let mut centers: Vec<(ComplexBall, bool)> = Vec::new();
        let mut upper = Vec::new();
        let mut lower = 0;
        for z in &approx {
            let tol = 1e-9 * (1.0 + z.norm());
            if z.im.abs() <= tol {
                centers.push((
                    ComplexBall::real(Ball::from_f64(z.re, w).ok_or(Error::PrecisionExhausted("root".into()))?),
                    true,
                ));
            } else if z.im > 0.0 {
                upper.push(*z);
            } else {
                lower += 1;
            }
        }
        if upper.len() != lower {
            continue;
        }
        for z in &upper {
            centers.push((
                ComplexBall::new(
                    Ball::from_f64(z.re, w).ok_or(Error::PrecisionExhausted("root".into()))?,
                    Ball::from_f64(z.im, w).ok_or(Error::PrecisionExhausted("root".into()))?,
                ),
                false,
            ));
        }
        // Newton at the working precision
        let iters = 4 + (32 - (w / 20).leading_zeros());
        let mut refined = Vec::new();
        let mut ok = true;
        for (z0, real) in &centers {
            let mut z = z0.clone();
            for _ in 0..iters {
                let fz = eval_rational_poly(&fq, &z);
                let dz = eval_rational_poly(&dfq, &z);
                let Some(step) = fz.div(&dz) else {
                    ok = false;
                    break;
                };
                let next = z.sub(&step);
                z = ComplexBall::new(
                    Ball::exact(next.re.mid().clone(), w),
                    if *real {
                        Ball::zero(w)
                    } else {
                        Ball::exact(next.im.mid().clone(), w)
                    },
                );
            }
            let Some(r) = inclusion_radius(&fq, &dfq, &z) else {
                ok = false;
                break;
            };
            refined.push((z, r, *real));
        }
        if !ok {
            continue;
        }
        // full list of disks including conjugates
        let mut disks: Vec<(ComplexBall, Mag)> = Vec::new();
        for (z, r, real) in &refined {
            disks.push((z.clone(), *r));
            if !real {
                disks.push((z.conj(), *r));
            }
        }
        if disks.len() != n {
            continue;
        }
        let mut disjoint = true;
        'pairs: for i in 0..n {
            for j in i + 1..n {
                let d = disks[i].0.sub(&disks[j].0).abs();
                let rs = Ball::exact(disks[i].1.add(&disks[j].1).to_dyadic(), w);
                if !d.sub_ball(&rs).is_positive() {
                    disjoint = false;
                    break 'pairs;
                }
            }
        }
        if !disjoint {
            continue;
        }
        let mut reals = Vec::new();
        let mut complexes = Vec::new();
        for (z, r, real) in refined {
            if real {
                reals.push(ComplexBall::real(Ball::new(z.re.mid().clone(), r, prec)));
            } else {
                complexes.push(ComplexBall::new(
                    Ball::new(z.re.mid().clone(), r, prec),
                    Ball::new(z.im.mid().clone(), r, prec),
                ));
            }
        }
        let key = |b: &ComplexBall| (b.re.to_f64(), b.im.to_f64());
        reals.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal));
        complexes.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal));
        return Ok((reals, complexes));
    }
    Err(Error::PrecisionExhausted(
        "could not isolate the complex roots".into(),
    ))
}

pub fn archimedean_places(k: &NumberField, ctx: &PrecisionContext) -> Result<Vec<Place>> {
    let (reals, complexes) = certified_roots(k.poly(), ctx.arch_bits)?;
    let mut out = Vec::new();
    for (i, r) in reals.into_iter().chain(complexes).enumerate() {
        let real = r.is_real();
        out.push(Place {
            kind: if real {
                PlaceKind::Real
            } else {
                PlaceKind::Complex
            },
            label: format!("inf{i}"),
            n_v: if real { 1 } else { 2 },
            p: 0,
            root: Some(r),
            factor: Vec::new(),
            cofactor: Vec::new(),
        });
    }
    Ok(out)
}

pub fn places_above(k: &NumberField, p: u64) -> Result<Vec<Place>> {
    if p < 2 || !crate::arith::is_prime_u64(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    let fp = z_to_fp(k.poly(), p);
    if !fp_is_squarefree(&fp, p) {
        return Err(Error::RamifiedOrNonMonogenic(p));
    }
    let factors = fp_factor_squarefree(&fp, p);
    let single = factors.len() == 1;
    let mut out = Vec::new();
    for (i, g) in factors.iter().enumerate() {
        let (h, _) = fp_divrem(&fp, g, p);
        out.push(Place {
            kind: PlaceKind::Finite,
            label: if single {
                format!("p{p}")
            } else {
                format!("p{p}.{i}")
            },
            n_v: fp_degree(g).unwrap_or(1),
            p,
            root: None,
            factor: g.clone(),
            cofactor: h,
        });
    }
    Ok(out)
}

/// All archimedean places and all finite places above primes `<= prime_bound`.
pub fn enumerate_places(
    k: &NumberField,
    prime_bound: u64,
    ctx: &PrecisionContext,
) -> Result<Vec<Place>> {
    let mut out = archimedean_places(k, ctx)?;
    for p in primes_up_to(prime_bound) {
        out.extend(places_above(k, p)?);
    }
    Ok(out)
}

/// Like [`enumerate_places`], collecting unsupported primes instead of failing.
pub fn enumerate_places_lenient(
    k: &NumberField,
    prime_bound: u64,
    ctx: &PrecisionContext,
) -> Result<(Vec<Place>, Vec<u64>)> {
    let mut out = archimedean_places(k, ctx)?;
    let mut bad = Vec::new();
    for p in primes_up_to(prime_bound) {
        match places_above(k, p) {
            Ok(v) => out.extend(v),
            Err(Error::RamifiedOrNonMonogenic(q)) => bad.push(q),
            Err(e) => return Err(e),
        }
    }
    Ok((out, bad))
}

/// Resolves labels such as `inf`, `inf1`, `p5`, `p5.1` or `5`.
pub fn find_place(k: &NumberField, label: &str, ctx: &PrecisionContext) -> Result<Place> {
    let t = label.trim();
    let not_found = || Error::Parse(format!("unknown place '{t}'"));
    if let Some(rest) = t.strip_prefix("inf") {
        let idx: usize = if rest.is_empty() {
            0
        } else {
            rest.parse().map_err(|_| not_found())?
        };
        return archimedean_places(k, ctx)?
            .into_iter()
            .nth(idx)
            .ok_or_else(not_found);
    }
    let body = t.strip_prefix('p').unwrap_or(t);
    let (pp, idx) = match body.split_once('.') {
        Some((a, b)) => (a, Some(b.parse::<usize>().map_err(|_| not_found())?)),
        None => (body, None),
    };
    let p: u64 = pp.parse().map_err(|_| not_found())?;
    let places = places_above(k, p)?;
    match idx {
        Some(i) => places.into_iter().nth(i).ok_or_else(not_found),
        None if places.len() == 1 => Ok(places.into_iter().next().expect("one place")),
        None => Err(Error::Parse(format!(
            "prime {p} has {} places; use p{p}.i",
            places.len()
        ))),
    }
}

pub fn abs_value(
    k: &NumberField,
    x: &FieldElement,
    v: &Place,
    ctx: &PrecisionContext,
) -> Result<AbsValue> {
    if x.is_zero() {
        return Ok(AbsValue::Zero);
    }
    match v.kind {
        PlaceKind::Finite => {
            let val = v.valuation(k, x)?.expect("nonzero");
            Ok(AbsValue::Finite {
                p: v.p,
                exponent: -val,
            })
        }
        _ => {
            let root = v.root_at(k, ctx.arch_bits)?;
            Ok(AbsValue::Arch(k.embed(x, &root).abs()))
        }
    }
}

/// `log |x|_v` for `x != 0`, exact whenever `|x|_v^2` is rational.
pub fn log_abs(k: &NumberField, x: &FieldElement, v: &Place, ctx: &PrecisionContext) -> Result<LogReal> {
    if x.is_zero() {
        return Err(Error::Invalid("log of zero".into()));
    }
    let prec = ctx.arch_bits;
    match v.kind {
        PlaceKind::Finite => {
            let val = v.valuation(k, x)?.expect("nonzero");
            Ok(LogReal::log_prime_multiple(
                &BigUint::from(v.p),
                BigRational::from_integer(BigInt::from(-val)),
                prec,
            ))
        }
        kind => {
            if let Some(q) = x.as_rational() {
                return Ok(LogReal::log_rational(&q, prec));
            }
            if kind == PlaceKind::Complex && k.degree() == 2 {
                return Ok(LogReal::log_rational(&k.norm(x), prec).half());
            }
            let root = v.root_at(k, prec + 16)?;
            let sq = k.embed(x, &root).abs_sq();
            let l = sq
                .ln()
                .ok_or_else(|| Error::PrecisionExhausted("|x|_v not separated from 0".into()))?;
            Ok(LogReal::from_ball(l.mul_2exp(-1).with_prec(prec)))
        }
    }
}

/// Rational primes at which `x` may have nonzero valuation.
pub fn support_primes(k: &NumberField, x: &FieldElement) -> Result<Vec<u64>> {
    if x.is_zero() {
        return Ok(Vec::new());
    }
    let (y, d) = k.integral_decomposition(x);
    let yel = k
        .element(y.iter().map(|c| BigRational::from_integer(c.clone())).collect())
        .expect("same degree");
    let norm = k.norm(&yel).to_integer();
    let mut primes: Vec<u64> = Vec::new();
    for n in [norm, d] {
        for (p, _) in factor(n.magnitude()) {
            let p = p
                .to_u64()
                .ok_or_else(|| Error::Unsupported("support prime exceeds 64 bits".into()))?;
            if !primes.contains(&p) {
                primes.push(p);
            }
        }
    }
    primes.sort_unstable();
    Ok(primes)
}

/// Finite places where `|x|_v != 1`.
pub fn support_places(k: &NumberField, x: &FieldElement) -> Result<Vec<(Place, i64)>> {
    let mut out = Vec::new();
    for p in support_primes(k, x)? {
        for v in places_above(k, p)? {
            let val = v.valuation(k, x)?.expect("nonzero");
            if val != 0 {
                out.push((v, val));
            }
        }
    }
    Ok(out)
}

/// `sum_v n_v log |x|_v` over all places where the term is nonzero.
pub fn product_formula_sum(k: &NumberField, x: &FieldElement, ctx: &PrecisionContext) -> Result<LogReal> {
    if x.is_zero() {
        return Err(Error::Invalid("product formula needs x != 0".into()));
    }
    let mut acc = LogReal::zero(ctx.arch_bits);
    for v in archimedean_places(k, ctx)? {
        acc = acc.add(&log_abs(k, x, &v, ctx)?.scale_int(v.n_v as i64));
    }
    for (v, val) in support_places(k, x)? {
        acc = acc.add(&LogReal::log_prime_multiple(
            &BigUint::from(v.p),
            BigRational::from_integer(BigInt::from(-val * v.n_v as i64)),
            ctx.arch_bits,
        ));
    }
    Ok(acc)
}

/// Upper bound on `|sum_v n_v log |x|_v|`.
pub fn product_formula_residual(k: &NumberField, x: &FieldElement, ctx: &PrecisionContext) -> Result<f64> {
    let s = product_formula_sum(k, x, ctx)?;
    if s.is_exact_zero() {
        return Ok(0.0);
    }
    Ok(s.to_ball(ctx.arch_bits).abs_upper().to_f64())
}

/// `log r_v = -log(p)/(p-1)` at a finite place.
pub fn log_convergence_radius(v: &Place, prec: u32) -> Option<LogReal> {
    let p = v.prime()?;
    Some(LogReal::log_prime_multiple(
        &BigUint::from(p),
        crate::padic::log_radius_coefficient(p),
        prec,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(100, 20).unwrap()
    }

    #[test]
    fn places_of_q() {
        let q = NumberField::rationals();
        let pl = enumerate_places(&q, 5, &ctx()).unwrap();
        assert_eq!(pl.len(), 4);
        assert_eq!(pl[0].kind(), PlaceKind::Real);
        assert!(pl[1..].iter().all(|v| v.local_degree() == 1));
    }

    #[test]
    fn places_of_gaussian_field() {
        let k = NumberField::parse("x^2+1").unwrap();
        let arch = archimedean_places(&k, &ctx()).unwrap();
        assert_eq!(arch.len(), 1);
        assert_eq!(arch[0].local_degree(), 2);
        assert_eq!(places_above(&k, 3).unwrap()[0].local_degree(), 2);
        assert_eq!(places_above(&k, 5).unwrap().len(), 2);
        assert_eq!(places_above(&k, 2), Err(Error::RamifiedOrNonMonogenic(2)));
        assert!(enumerate_places(&k, 5, &ctx()).is_err());
        let (pl, bad) = enumerate_places_lenient(&k, 5, &ctx()).unwrap();
        assert_eq!(bad, vec![2]);
        assert_eq!(pl.len(), 4);
    }

    #[test]
    fn real_quadratic_roots() {
        let k = NumberField::parse("x^2-2").unwrap();
        let arch = archimedean_places(&k, &ctx()).unwrap();
        assert_eq!(arch.len(), 2);
        assert!(arch.iter().all(|v| v.kind() == PlaceKind::Real));
        let r = arch[1].root().unwrap();
        assert!((r.re.to_f64() - core::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(r.re.radius_f64() < 1e-25);
        let hi = arch[1].root_at(&k, 300).unwrap();
        assert!(hi.re.radius_f64() < 1e-80);
    }

    #[test]
    fn cubic_roots_mixed() {
        let k = NumberField::parse("x^3-2").unwrap();
        let arch = archimedean_places(&k, &ctx()).unwrap();
        assert_eq!(arch.len(), 2);
        assert_eq!(arch[0].kind(), PlaceKind::Real);
        assert_eq!(arch[1].kind(), PlaceKind::Complex);
        let s: usize = arch.iter().map(|v| v.local_degree()).sum();
        assert_eq!(s, 3);
    }

    #[test]
    fn absolute_values() {
        let q = NumberField::rationals();
        let two = q.from_int(2);
        let v2 = find_place(&q, "p2", &ctx()).unwrap();
        match abs_value(&q, &two, &v2, &ctx()).unwrap() {
            AbsValue::Finite { p, exponent } => assert_eq!((p, exponent), (2, -1)),
            _ => panic!(),
        }
        let k = NumberField::parse("x^2+1").unwrap();
        let a = k.from_ints(&[2, 1]).unwrap();
        let v5 = places_above(&k, 5).unwrap();
        let e: Vec<i64> = v5.iter().map(|v| v.valuation(&k, &a).unwrap().unwrap()).collect();
        let mut sorted = e.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1]);
    }

    #[test]
    fn product_formula_examples() {
        let q = NumberField::rationals();
        let x = q.parse_element("3/2").unwrap();
        assert!(product_formula_sum(&q, &x, &ctx()).unwrap().is_exact_zero());
        let k = NumberField::parse("x^2+1").unwrap();
        let a = k.from_ints(&[2, 1]).unwrap();
        assert_eq!(product_formula_residual(&k, &a, &ctx()).unwrap(), 0.0);
        let c = NumberField::parse("x^3-2").unwrap();
        let b = c.from_ints(&[1, 1, 1]).unwrap();
        assert!(product_formula_residual(&c, &b, &ctx()).unwrap() < 1e-20);
    }

    #[test]
    fn padic_embedding() {
        let k = NumberField::parse("x^2+1").unwrap();
        let v = &places_above(&k, 5).unwrap()[0];
        let i = v.padic_root(&k, 10).unwrap();
        let sq = i.mul(&i);
        assert!(sq.eq_at_precision(&PadicNumber::from_int(-1, 5, 10)));
    }
}
