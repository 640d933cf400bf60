//! Twisted norms, singular spectra, slope differences, the Siegel-lemma bounds and
//! exhaustive witness searches.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ball::{Ball, ComplexBall};
use crate::bundle::{log_volume, reduce_rows, AdelicBundle, NormSpec};
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField};
use crate::heights::vector_height;
use crate::linalg::{self, ball_gram, hermitian_count_above, BallMatrix, Matrix, Rationals, Scalars};
use crate::logreal::LogReal;
use crate::places::{log_abs, Place, PlaceKind};
use crate::precision::PrecisionContext;

/// Base bundle together with the twist `x -> alpha A x` at `v0`.
#[derive(Clone, Debug)]
pub struct TwistedBundle {
    base: AdelicBundle,
    v0: Place,
    alpha: FieldElement,
    a: Matrix<FieldElement>,
}

#[derive(Clone, Debug)]
pub enum SingularSpectrum {
    /// Certified enclosures of the nonzero singular values, descending.
    Arch { sigma: Vec<Ball> },
    /// Exponents `n_i` of the elementary divisors `p^{n_i}`, descending in absolute value.
    Finite { p: u64, exponents: Vec<i64> },
}

impl SingularSpectrum {
    pub fn rank(&self) -> usize {
        match self {
            SingularSpectrum::Arch { sigma } => sigma.len(),
            SingularSpectrum::Finite { exponents, .. } => exponents.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SiegelWitness {
    pub x: Vec<BigInt>,
    /// Quantity constrained by the lemma (sup norm or height).
    pub value: Ball,
    pub bound: Ball,
    /// `max_i |sum_j a_ij x_j|` for approximate searches.
    pub residual: Option<Ball>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiegelKind {
    Classical,
    BombieriVaaler,
    Absolute,
    ApproxAbsolute,
}

impl TwistedBundle {
    pub fn new(
        base: AdelicBundle,
        v0: Place,
        alpha: FieldElement,
        a: Matrix<FieldElement>,
    ) -> Result<TwistedBundle> {
        for row in &a {
            if row.len() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    got: row.len(),
                });
            }
        }
        Ok(TwistedBundle { base, v0, alpha, a })
    }

    pub fn base(&self) -> &AdelicBundle {
        &self.base
    }

    pub fn place(&self) -> &Place {
        &self.v0
    }

    fn k(&self) -> &NumberField {
        self.base.field()
    }

    /// `A M^{-1}`, the twist expressed in an orthonormal frame of the base norm at `v0`.
    pub fn effective_matrix(&self) -> Result<Matrix<FieldElement>> {
        let k = self.k();
        match self.base.spec_at(&self.v0) {
            None => Ok(self.a.clone()),
            Some(s) => {
                let m = s.square_matrix(k).ok_or_else(|| {
                    Error::Unsupported("twist over a non-square base frame".into())
                })?;
                let inv = linalg::inverse(k, &m).ok_or(Error::SingularNormSpec)?;
                Ok(linalg::matmul(k, &self.a, &inv))
            }
        }
    }

    /// The twisted bundle as an adelic bundle.
    pub fn bundle(&self) -> Result<AdelicBundle> {
        let k = self.k().clone();
        let nu = self.base.dim();
        let mu = self.a.len();
        let alpha_a: Matrix<FieldElement> = self
            .a
            .iter()
            .map(|r| r.iter().map(|e| k.mul(&self.alpha, e)).collect())
            .collect();
        let spec = match (self.v0.kind(), self.base.spec_at(&self.v0)) {
            (PlaceKind::Finite, s) => {
                let m = match s {
                    Some(NormSpec::Finite { matrix }) => matrix.clone(),
                    _ => linalg::identity(&k, nu),
                };
                let mut stacked = m;
                stacked.extend(alpha_a);
                let red = reduce_rows(&k, &self.v0, stacked, nu)?;
                NormSpec::Finite {
                    matrix: red.into_iter().take(nu).collect(),
                }
            }
            (_, s) => {
                let (frame, kernel, lift) = match s {
                    Some(NormSpec::Arch {
                        frame,
                        kernel,
                        lift,
                    }) => (frame.clone(), kernel.clone(), lift.clone()),
                    _ => (linalg::identity(&k, nu), Vec::new(), linalg::identity(&k, nu)),
                };
                let (m, n0) = linalg::dims(&frame);
                let mut big = vec![vec![k.zero(); n0 + mu]; m + mu];
                for i in 0..m {
                    for j in 0..n0 {
                        big[i][j] = frame[i][j].clone();
                    }
                }
                for i in 0..mu {
                    big[m + i][n0 + i] = k.one();
                }
                let kern = kernel
                    .iter()
                    .map(|c| {
                        let mut v = c.clone();
                        v.extend(vec![k.zero(); mu]);
                        v
                    })
                    .collect();
                let mut l = lift;
                l.extend(alpha_a);
                NormSpec::Arch {
                    frame: big,
                    kernel: kern,
                    lift: l,
                }
            }
        };
        self.base.clone().with_spec(self.v0.clone(), spec)
    }

    /// Twisted norm of `x` at `v0`.
    pub fn twisted_norm(&self, x: &[FieldElement], ctx: &PrecisionContext) -> Result<Ball> {
        let l = self.bundle()?.log_norm_at(x, &self.v0, ctx)?;
        Ok(l.to_ball(ctx.arch_bits).exp())
    }

    pub fn singular_spectrum(&self, ctx: &PrecisionContext) -> Result<SingularSpectrum> {
        singular_spectrum(self.k(), &self.effective_matrix()?, &self.v0, ctx)
    }

    fn factor(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.v0.local_degree()),
            BigInt::from(self.base.dim() * self.k().degree()),
        )
    }

    /// `mu(E_alpha) - mu(E) = -(n_v0/(nu D)) sum_i log |(1, alpha sigma_i)|_2`.
    pub fn slope_difference(&self, ctx: &PrecisionContext) -> Result<LogReal> {
        let k = self.k();
        let nu = self.base.dim();
        if nu == 0 {
            return Err(Error::ZeroBundle);
        }
        if self.alpha.is_zero() {
            return Ok(LogReal::zero(ctx.arch_bits));
        }
        let c = self.effective_matrix()?;
        let sum = match self.v0.kind() {
            PlaceKind::Finite => {
                let p = self.v0.prime().expect("finite");
                let va = self.v0.valuation(k, &self.alpha)?.expect("nonzero");
                let ns = elementary_divisors(k, &self.v0, &c)?;
                let total: i64 = ns.iter().map(|n| (-(va + n)).max(0)).sum();
                LogReal::log_prime_multiple(
                    &BigUint::from(p),
                    BigRational::from_integer(BigInt::from(total)),
                    ctx.arch_bits,
                )
            }
            _ => {
                // log |(1, alpha sigma_i)| summed = (1/2) log det(I + |alpha|^2 C*C)
                let cols: Vec<Vec<FieldElement>> = (0..nu)
                    .map(|j| {
                        let mut col: Vec<FieldElement> =
                            (0..nu).map(|i| if i == j { k.one() } else { k.zero() }).collect();
                        col.extend(c.iter().map(|row| k.mul(&self.alpha, &row[j])));
                        col
                    })
                    .collect();
                log_volume(k, &self.v0, &cols, ctx)?
            }
        };
        Ok(sum.scale(&self.factor()).neg())
    }

    /// The same quantity evaluated from the singular spectrum.
    pub fn slope_difference_spectral(&self, ctx: &PrecisionContext) -> Result<LogReal> {
        let k = self.k();
        if self.alpha.is_zero() {
            return Ok(LogReal::zero(ctx.arch_bits));
        }
        let sum = match self.singular_spectrum(ctx)? {
            SingularSpectrum::Finite { p, exponents } => {
                let va = self.v0.valuation(k, &self.alpha)?.expect("nonzero");
                let total: i64 = exponents.iter().map(|n| (-(va + n)).max(0)).sum();
                LogReal::log_prime_multiple(
                    &BigUint::from(p),
                    BigRational::from_integer(BigInt::from(total)),
                    ctx.arch_bits,
                )
            }
            SingularSpectrum::Arch { sigma } => {
                let w = ctx.arch_bits + 16;
                let root = self.v0.root_at(k, w)?;
                let a2 = k.embed(&self.alpha, &root).abs_sq();
                let mut acc = Ball::zero(w);
                for s in sigma {
                    let t = Ball::one(w).add_ball(&a2.mul_ball(&s.sqr()));
                    acc = acc.add_ball(&t.ln().expect("positive").mul_2exp(-1));
                }
                LogReal::from_ball(acc.with_prec(ctx.arch_bits))
            }
        };
        Ok(sum.scale(&self.factor()).neg())
    }

    /// `log |(1, alpha)|_{2,v0}`.
    pub fn log_alpha_norm(&self, ctx: &PrecisionContext) -> Result<LogReal> {
        let k = self.k();
        let prec = ctx.arch_bits;
        if self.alpha.is_zero() {
            return Ok(LogReal::zero(prec));
        }
        let la = log_abs(k, &self.alpha, &self.v0, ctx)?;
        match self.v0.kind() {
            PlaceKind::Finite => Ok(la.max(&LogReal::zero(prec))),
            _ => {
                if let Some(q) = self.alpha.as_rational() {
                    let s = BigRational::one() + &q * &q;
                    return Ok(LogReal::log_rational(&s, prec).half());
                }
                let root = self.v0.root_at(k, prec + 16)?;
                let s = Ball::one(prec + 16).add_ball(&k.embed(&self.alpha, &root).abs_sq());
                Ok(LogReal::from_ball(s.ln().expect("positive").mul_2exp(-1).with_prec(prec)))
            }
        }
    }

    /// Certified upper bound on the operator norm of the effective matrix at `v0`.
    pub fn operator_norm_upper(&self, ctx: &PrecisionContext) -> Result<Ball> {
        let prec = ctx.arch_bits;
        match self.singular_spectrum(ctx)? {
            SingularSpectrum::Arch { sigma } => Ok(sigma
                .first()
                .map(|s| Ball::exact(s.upper(), prec))
                .unwrap_or_else(|| Ball::zero(prec))),
            SingularSpectrum::Finite { p, exponents } => Ok(exponents
                .first()
                .map(|n| pow_p(p, -n, prec))
                .unwrap_or_else(|| Ball::zero(prec))),
        }
    }

    /// `-(n_v0 rho/(nu D)) (log |(1,alpha)| + log max(1, opnorm))`.
    pub fn slope_difference_lower_bound(&self, opnorm: &Ball, ctx: &PrecisionContext) -> Result<LogReal> {
        let rho = self.singular_spectrum(ctx)?.rank() as i64;
        let lo = log_max1_upper(opnorm, ctx.arch_bits);
        Ok(self
            .log_alpha_norm(ctx)?
            .add(&lo)
            .scale(&self.factor())
            .scale_int(rho)
            .neg())
    }
}

fn pow_p(p: u64, e: i64, prec: u32) -> Ball {
    let b = BigInt::from(p).pow(e.unsigned_abs() as u32);
    let q = if e >= 0 {
        BigRational::from_integer(b)
    } else {
        BigRational::new(BigInt::one(), b)
    };
    Ball::from_rational(&q, prec)
}

/// `log max(1, x)` rounded up, as an exact log when `x` is an exact integer or `1/n`.
fn log_max1_upper(x: &Ball, prec: u32) -> LogReal {
    if x.is_exact() {
        let q = x.mid().to_rational();
        if q <= BigRational::one() {
            return LogReal::zero(prec);
        }
        return LogReal::log_rational(&q, prec);
    }
    let up = Ball::exact(x.upper(), prec);
    LogReal::from_ball(up.log_max1().unwrap_or_else(|| Ball::zero(prec)))
}

/// Exponents of the elementary divisors of `c` over `O_v`, ascending (so the
/// corresponding absolute values descend).
pub fn elementary_divisors(k: &NumberField, v: &Place, c: &Matrix<FieldElement>) -> Result<Vec<i64>> {
    let mut a = c.clone();
    let (rows, cols) = linalg::dims(&a);
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, i64)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, e) in row.iter().enumerate().skip(t) {
                if let Some(val) = v.valuation(k, e)? {
                    if best.is_none_or(|(_, _, b)| val < b) {
                        best = Some((i, j, val));
                    }
                }
            }
        }
        let Some((pi, pj, val)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let piv = a[t][t].clone();
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let f = k.div(&a[i][t], &piv).expect("pivot");
            let pr = a[t].clone();
            for (x, y) in a[i].iter_mut().zip(&pr) {
                *x = k.sub(x, &k.mul(&f, y));
            }
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let f = k.div(&a[t][j], &piv).expect("pivot");
            for row in a.iter_mut() {
                let s = k.mul(&f, &row[t]);
                row[j] = k.sub(&row[j], &s);
            }
        }
        out.push(val);
    }
    Ok(out)
}

/// Singular values of `c` at `v0`: certified enclosures at archimedean places,
/// elementary divisors at finite ones.
pub fn singular_spectrum(
    k: &NumberField,
    c: &Matrix<FieldElement>,
    v0: &Place,
    ctx: &PrecisionContext,
) -> Result<SingularSpectrum> {
    if !v0.is_archimedean() {
        return Ok(SingularSpectrum::Finite {
            p: v0.prime().expect("finite"),
            exponents: elementary_divisors(k, v0, c)?,
        });
    }
    let rho = if c.is_empty() { 0 } else { linalg::rank(k, c) };
    let w = ctx.arch_bits + 32;
    let root = v0.root_at(k, w)?;
    let m: BallMatrix = c
        .iter()
        .map(|r| r.iter().map(|e| k.embed(e, &root)).collect())
        .collect();
    if rho == 0 {
        return Ok(SingularSpectrum::Arch { sigma: Vec::new() });
    }
    let h = ball_gram(&m, w);
    let sigma = hermitian_eigenvalues(&h, rho, ctx.arch_bits)?
        .into_iter()
        .map(|l| l.sqrt().expect("positive"))
        .collect();
    Ok(SingularSpectrum::Arch { sigma })
}

/// The `count` largest eigenvalues of a positive semidefinite Hermitian matrix whose
/// rank is known to be at least `count`, by inertia bisection.
pub fn hermitian_eigenvalues(h: &BallMatrix, count: usize, prec: u32) -> Result<Vec<Ball>> {
    let w = h.first().map_or(prec, |r| r.first().map_or(prec, |e| e.prec()));
    // Frobenius norm bounds every eigenvalue
    let mut fro = Ball::zero(w);
    for e in h.iter().flatten() {
        fro = fro.add_ball(&e.abs_sq());
    }
    let top = Ball::exact(fro.sqrt().expect("nonnegative").upper(), w).add_ball(&Ball::one(w));
    let count_above = |lam: &Ball| -> Option<usize> {
        let mut l = lam.clone();
        for t in 0..24 {
            if let Some(c) = hermitian_count_above(h, &l) {
                return Some(c);
            }
            // nudge off an uncertified pivot
            let eps = Ball::one(w).mul_2exp(-(w as i64) / 2 - t);
            l = l.add_ball(&eps);
        }
        None
    };
    let mut out = Vec::new();
    for i in 1..=count {
        let mut lo = Ball::zero(w).lower();
        let mut hi = top.upper();
        let mut lo_ok = false;
        for _ in 0..(prec + 8) {
            let mid = lo.add(&hi).mul_2exp(-1);
            let c = count_above(&Ball::exact(mid.clone(), w))
                .ok_or_else(|| Error::RankUncertified)?;
            if c >= i {
                lo = mid;
                lo_ok = true;
            } else {
                hi = mid;
            }
        }
        if !lo_ok {
            return Err(Error::RankUncertified);
        }
        out.push(Ball::from_endpoints(&lo, &hi, prec));
    }
    Ok(out)
}

/// `1 + (nu A)^{mu/(nu - mu)}`, and its integer floor used as a search radius.
pub fn classical_bound(mu: usize, nu: usize, a_max: &BigInt, prec: u32) -> Result<(Ball, BigInt)> {
    if mu >= nu {
        return Err(Error::HypothesisViolated(alloc::format!(
            "classical Siegel lemma needs mu < nu (mu = {mu}, nu = {nu})"
        )));
    }
    let base = BigInt::from(nu) * a_max.abs();
    let k = (nu - mu) as u32;
    let num = base.pow(mu as u32);
    let floor = BigInt::one() + num.nth_root(k);
    let real = if base.is_zero() {
        Ball::one(prec)
    } else {
        let e = Ball::from_rational(&BigRational::new(BigInt::from(mu), BigInt::from(nu - mu)), prec + 16);
        let l = Ball::from_int(base, prec + 16).ln().expect("positive");
        Ball::one(prec + 16).add_ball(&l.mul_ball(&e).exp()).with_prec(prec)
    };
    Ok((real, floor))
}

/// `log rd_k` for the built-in fields (Q and Q(i)).
pub fn builtin_log_root_discriminant(k: &NumberField, prec: u32) -> Option<LogReal> {
    if k.degree() == 1 {
        return Some(LogReal::zero(prec));
    }
    let poly: Vec<i64> = k.poly().iter().map(|c| c.to_i64().unwrap_or(0)).collect();
    (poly == [1, 0, 1]).then(|| LogReal::log_int(2, prec))
}

/// Bombieri–Vaaler: `-mu + (1/2)(log nu + log rd_k)`.
pub fn bombieri_vaaler_bound(
    b: &AdelicBundle,
    log_rd: Option<LogReal>,
    ctx: &PrecisionContext,
) -> Result<LogReal> {
    let prec = ctx.arch_bits;
    let rd = match log_rd {
        Some(r) => r,
        None => builtin_log_root_discriminant(b.field(), prec).ok_or_else(|| {
            Error::Invalid("root discriminant must be supplied for this field".into())
        })?,
    };
    Ok(b
        .slope(ctx)?
        .neg()
        .add(&LogReal::log_int(b.dim() as u64, prec).add(&rd).half()))
}

/// Absolute Siegel lemma: `-mu + (1/2) log nu`.
pub fn absolute_bound(b: &AdelicBundle, ctx: &PrecisionContext) -> Result<LogReal> {
    Ok(b
        .slope(ctx)?
        .neg()
        .add(&LogReal::log_int(b.dim() as u64, ctx.arch_bits).half()))
}

/// Approximate absolute lemma:
/// `(n_v0 rho/(nu D)) (log|(1,alpha)| + log max(1, ||a||)) + (1/2) log nu - mu`.
pub fn approx_absolute_bound(tb: &TwistedBundle, opnorm: &Ball, ctx: &PrecisionContext) -> Result<LogReal> {
    Ok(tb
        .slope_difference_lower_bound(opnorm, ctx)?
        .neg()
        .add(&absolute_bound(tb.base(), ctx)?))
}

fn sign_normalize(x: &mut [BigInt]) {
    if let Some(f) = x.iter().find(|c| !c.is_zero()) {
        if f.is_negative() {
            x.iter_mut().for_each(|c| *c = -&*c);
        }
    }
}

fn l1(x: &[BigInt]) -> BigInt {
    x.iter().map(|c| c.abs()).sum()
}

/// Tie-break among vectors of equal sup norm: smaller l1 norm first, then the
/// lexicographically larger sign-normalized vector.
fn better(a: &[BigInt], b: &[BigInt]) -> bool {
    match l1(a).cmp(&l1(b)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a > b,
    }
}

/// Calls `f` on every sign-normalized integer vector of sup norm exactly `s`.
fn for_shell(n: usize, s: i64, f: &mut dyn FnMut(&[BigInt])) {
    let mut x = vec![-s; n];
    loop {
        let sup = x.iter().map(|c| c.abs()).max().unwrap_or(0);
        let first = x.iter().find(|c| **c != 0).copied().unwrap_or(0);
        if sup == s && first > 0 {
            let v: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
            f(&v);
        }
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if x[i] < s {
                x[i] += 1;
                break;
            }
            x[i] = -s;
            i += 1;
        }
    }
}

/// Smallest nonzero integer solution of `a x = 0` by exhaustive search over sup-norm
/// shells, at most `budget` candidate vectors.
pub fn classical_siegel_search(a: &Matrix<BigInt>, nu: usize, budget: u64) -> Result<SiegelWitness> {
    let mu = a.len();
    if a.iter().any(|r| r.len() != nu) {
        return Err(Error::DimensionMismatch {
            expected: nu,
            got: a.iter().map(|r| r.len()).find(|&l| l != nu).unwrap_or(0),
        });
    }
    let a_max = a.iter().flatten().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero);
    let (bound, radius) = classical_bound(mu, nu, &a_max, 128)?;
    // parametrize the rational kernel by the free coordinates of the echelon form
    let aq: Matrix<BigRational> = a
        .iter()
        .map(|r| r.iter().map(|c| BigRational::from_integer(c.clone())).collect())
        .collect();
    let (red, pivots) = if mu == 0 { (Vec::new(), Vec::new()) } else { linalg::rref(&Rationals, &aq) };
    let free: Vec<usize> = (0..nu).filter(|j| !pivots.contains(j)).collect();
    let radius = radius.to_i64().ok_or_else(|| Error::SearchBudgetExceeded { best: None })?;
    let mut spent: u64 = 0;
    for s in 1..=radius {
        let mut best: Option<Vec<BigInt>> = None;
        let nf = free.len();
        let mut y = vec![-s; nf];
        'outer: loop {
            spent += 1;
            if spent > budget {
                return Err(Error::SearchBudgetExceeded { best });
            }
            let mut x = vec![BigInt::zero(); nu];
            for (t, &j) in free.iter().enumerate() {
                x[j] = BigInt::from(y[t]);
            }
            let mut ok = true;
            for (r, &pc) in pivots.iter().enumerate() {
                let val: BigRational = free
                    .iter()
                    .map(|&j| &red[r][j] * BigRational::from_integer(x[j].clone()))
                    .sum::<BigRational>();
                let v = -val;
                if !v.is_integer() || v.to_integer().abs() > BigInt::from(s) {
                    ok = false;
                    break;
                }
                x[pc] = v.to_integer();
            }
            if ok {
                let sup = x.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero);
                if sup == BigInt::from(s) {
                    sign_normalize(&mut x);
                    if best.as_ref().is_none_or(|b| better(&x, b)) {
                        best = Some(x);
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == nf {
                    break 'outer;
                }
                if y[i] < s {
                    y[i] += 1;
                    break;
                }
                y[i] = -s;
                i += 1;
            }
        }
        if let Some(x) = best {
            return Ok(SiegelWitness {
                x,
                value: Ball::from_int(s, 128),
                bound,
                residual: None,
            });
        }
    }
    Err(Error::SearchBudgetExceeded { best: None })
}

/// `max_i sum_j |a_ij|`.
pub fn row_sum_bound(a: &[Vec<ComplexBall>], prec: u32) -> Ball {
    a.iter()
        .map(|r| r.iter().fold(Ball::zero(prec), |acc, e| acc.add_ball(&e.abs())))
        .fold(Ball::zero(prec), |acc, s| acc.max(&s))
}

/// Upper bound `min(mu, nu)` on the rank of a ball matrix.
fn rank_upper(a: &[Vec<ComplexBall>]) -> usize {
    let mu = a.len();
    let nu = a.first().map_or(0, |r| r.len());
    mu.min(nu)
}

/// Checks `(2 mu H A/eps + 1)^{2 rho} < (H+1)^nu`.
pub fn approx_hypothesis(a: &[Vec<ComplexBall>], h: u64, eps: &Ball, prec: u32) -> Result<bool> {
    let mu = a.len();
    let nu = a.first().map_or(0, |r| r.len());
    let rho = rank_upper(a) as i64;
    let w = prec + 16;
    let amax = row_sum_bound(a, w);
    let lhs_base = Ball::from_int(2 * mu as i64 * h as i64, w)
        .mul_ball(&amax)
        .div_ball(eps)
        .ok_or_else(|| Error::Invalid("epsilon must be positive".into()))?
        .add_ball(&Ball::one(w));
    let lhs = lhs_base.ln().expect("positive").mul_int(2 * rho);
    let rhs = Ball::from_int(h as i64 + 1, w).ln().expect("positive").mul_int(nu as i64);
    Ok(rhs.sub_ball(&lhs).is_positive())
}

/// Nonzero `x` with `|x|_inf <= H` and `max_i |sum_j a_ij x_j| <= eps`, after checking
/// the pigeonhole hypothesis.
pub fn approx_siegel_search(
    a: &[Vec<ComplexBall>],
    h: u64,
    eps: &Ball,
    budget: u64,
) -> Result<SiegelWitness> {
    if !approx_hypothesis(a, h, eps, eps.prec())? {
        return Err(Error::HypothesisViolated(
            "(2 mu H A/eps + 1)^(2 rho) < (H+1)^nu does not hold".into(),
        ));
    }
    approx_siegel_search_unchecked(a, h, eps, budget)
}

/// Exhaustive search without the hypothesis check.
pub fn approx_siegel_search_unchecked(
    a: &[Vec<ComplexBall>],
    h: u64,
    eps: &Ball,
    budget: u64,
) -> Result<SiegelWitness> {
    let nu = a.first().map_or(0, |r| r.len());
    if a.iter().any(|r| r.len() != nu) || nu == 0 {
        return Err(Error::DimensionMismatch {
            expected: nu,
            got: 0,
        });
    }
    let prec = eps.prec();
    let mut spent = 0u64;
    for s in 1..=h as i64 {
        let mut best: Option<(Vec<BigInt>, Ball)> = None;
        let mut over = false;
        for_shell(nu, s, &mut |x| {
            spent += 1;
            if spent > budget {
                over = true;
                return;
            }
            let mut res = Ball::zero(prec);
            for row in a {
                let mut acc = ComplexBall::zero(prec);
                for (e, c) in row.iter().zip(x) {
                    acc = acc.add(&e.scale(&Ball::from_int(c.clone(), prec)));
                }
                res = res.max(&acc.abs());
            }
            if res.upper() <= eps.lower() && best.as_ref().is_none_or(|(b, _)| better(x, b)) {
                best = Some((x.to_vec(), res));
            }
        });
        if let Some((x, r)) = best {
            return Ok(SiegelWitness {
                x,
                value: Ball::from_int(s, prec),
                bound: Ball::from_int(h, prec),
                residual: Some(r),
            });
        }
        if over {
            return Err(Error::SearchBudgetExceeded { best: None });
        }
    }
    Err(Error::SearchBudgetExceeded { best: None })
}

/// Integer vector with `h_E(x) <= -mu(E) + (1/2) log nu`, searched over primitive
/// vectors of sup norm at most `radius`.
pub fn absolute_siegel_witness(b: &AdelicBundle, radius: u64, ctx: &PrecisionContext) -> Result<SiegelWitness> {
    let k = b.field();
    if !k.is_rational_field() {
        return Err(Error::Unsupported("witness search runs over Q only".into()));
    }
    let nu = b.dim();
    if nu == 0 {
        return Err(Error::ZeroBundle);
    }
    let bound = absolute_bound(b, ctx)?;
    let prec = ctx.arch_bits;
    let mut best: Option<(Vec<BigInt>, LogReal)> = None;
    let mut err: Option<Error> = None;
    for s in 1..=radius as i64 {
        let mut found: Option<(Vec<BigInt>, LogReal)> = None;
        for_shell(nu, s, &mut |x| {
            if err.is_some() {
                return;
            }
            let g = x.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
            if !g.is_one() {
                return;
            }
            let xe: Vec<FieldElement> = x
                .iter()
                .map(|c| k.from_rational(BigRational::from_integer(c.clone())))
                .collect();
            let h = match vector_height(&xe, b, ctx) {
                Ok(r) => r.value,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            if best.as_ref().is_none_or(|(_, bh)| matches!(h.try_cmp(bh), Some(Ordering::Less))) {
                best = Some((x.to_vec(), h.clone()));
            }
            if h.certified_le(&bound)
                && found.as_ref().is_none_or(|(fx, _)| better(x, fx))
            {
                found = Some((x.to_vec(), h));
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some((x, h)) = found {
            return Ok(SiegelWitness {
                x,
                value: h.to_ball(prec),
                bound: bound.to_ball(prec),
                residual: None,
            });
        }
    }
    Err(Error::SearchBudgetExceeded {
        best: best.map(|(x, _)| x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::find_place;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn ints(rows: &[&[i64]]) -> Matrix<BigInt> {
        rows.iter().map(|r| r.iter().map(|&c| BigInt::from(c)).collect()).collect()
    }

    fn kmat(k: &NumberField, rows: &[&[i64]]) -> Matrix<FieldElement> {
        rows.iter().map(|r| r.iter().map(|&c| k.from_int(c)).collect()).collect()
    }

    fn log(n: u64) -> LogReal {
        LogReal::log_int(n, 128)
    }

    fn eq(a: &LogReal, b: &LogReal) -> bool {
        a.try_cmp(b) == Some(Ordering::Equal)
    }

    fn xs(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn classical_examples() {
        let w = classical_siegel_search(&ints(&[&[1, -1]]), 2, 1_000_000).unwrap();
        assert_eq!(w.x, xs(&[1, 1]));
        let w = classical_siegel_search(&ints(&[&[2, 3]]), 2, 1_000_000).unwrap();
        assert_eq!(w.x, xs(&[3, -2]));
        assert!((w.bound.to_f64() - 7.0).abs() < 1e-12);
        let w = classical_siegel_search(&ints(&[&[0, 0, 0]]), 3, 1_000_000).unwrap();
        assert_eq!(w.x, xs(&[1, 0, 0]));
        let (b, _) = classical_bound(1, 2, &BigInt::one(), 128).unwrap();
        assert!((b.to_f64() - 3.0).abs() < 1e-12);
        assert!(matches!(
            classical_siegel_search(&ints(&[&[1, 0], &[0, 1]]), 2, 10),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn spectra() {
        let q = NumberField::rationals();
        let inf = find_place(&q, "inf", &ctx()).unwrap();
        let p2 = find_place(&q, "p2", &ctx()).unwrap();
        match singular_spectrum(&q, &kmat(&q, &[&[1, 0], &[0, 1]]), &inf, &ctx()).unwrap() {
            SingularSpectrum::Arch { sigma } => {
                assert_eq!(sigma.len(), 2);
                assert!(sigma.iter().all(|s| s.contains(&crate::ball::Dyadic::from_int(1))));
            }
            _ => panic!(),
        }
        match singular_spectrum(&q, &kmat(&q, &[&[3, 0], &[0, 0]]), &inf, &ctx()).unwrap() {
            SingularSpectrum::Arch { sigma } => {
                assert_eq!(sigma.len(), 1);
                assert!((sigma[0].to_f64() - 3.0).abs() < 1e-30);
            }
            _ => panic!(),
        }
        match singular_spectrum(&q, &kmat(&q, &[&[2, 0], &[0, 4]]), &p2, &ctx()).unwrap() {
            SingularSpectrum::Finite { exponents, .. } => assert_eq!(exponents, vec![1, 2]),
            _ => panic!(),
        }
    }

    #[test]
    fn slope_difference_examples() {
        let q = NumberField::rationals();
        let inf = find_place(&q, "inf", &ctx()).unwrap();
        let p2 = find_place(&q, "p2", &ctx()).unwrap();
        let base = AdelicBundle::standard(q.clone(), 1);
        let tb = TwistedBundle::new(base.clone(), inf.clone(), q.from_int(1), kmat(&q, &[&[1]])).unwrap();
        let d = tb.slope_difference(&ctx()).unwrap();
        assert!(eq(&d, &log(2).half().neg()));
        let direct = tb.bundle().unwrap().slope(&ctx()).unwrap();
        assert!(eq(&direct, &d));
        let tb0 = TwistedBundle::new(base.clone(), inf, q.from_int(0), kmat(&q, &[&[1]])).unwrap();
        assert!(tb0.slope_difference(&ctx()).unwrap().is_exact_zero());
        let quarter = q.parse_element("1/4").unwrap();
        let tb2 = TwistedBundle::new(base, p2, quarter, kmat(&q, &[&[2]])).unwrap();
        let d2 = tb2.slope_difference(&ctx()).unwrap();
        assert!(eq(&d2, &log(2).neg()));
        assert!(eq(&tb2.bundle().unwrap().slope(&ctx()).unwrap(), &d2));
        let lb = tb.slope_difference_lower_bound(&Ball::one(128), &ctx()).unwrap();
        assert!(d.certified_ge(&lb));
    }

    #[test]
    fn spectral_and_determinant_forms_agree() {
        let q = NumberField::rationals();
        let inf = find_place(&q, "inf", &ctx()).unwrap();
        let m = kmat(&q, &[&[2, 1], &[0, 3]]);
        let base = AdelicBundle::standard(q.clone(), 2).with_matrix(inf.clone(), m).unwrap();
        let a = kmat(&q, &[&[1, 2], &[3, -1], &[0, 5]]);
        let tb = TwistedBundle::new(base, inf, q.parse_element("2/3").unwrap(), a).unwrap();
        let d1 = tb.slope_difference(&ctx()).unwrap().to_f64();
        let d2 = tb.slope_difference_spectral(&ctx()).unwrap().to_f64();
        let d3 = tb
            .bundle()
            .unwrap()
            .slope(&ctx())
            .unwrap()
            .sub(&tb.base().slope(&ctx()).unwrap())
            .to_f64();
        assert!((d1 - d2).abs() < 1e-25 && (d1 - d3).abs() < 1e-25);
        assert!(d1 < 0.0);
    }

    #[test]
    fn twisted_norm_examples() {
        let q = NumberField::rationals();
        let inf = find_place(&q, "inf", &ctx()).unwrap();
        let p2 = find_place(&q, "p2", &ctx()).unwrap();
        let base = AdelicBundle::standard(q.clone(), 1);
        let x = vec![q.from_int(1)];
        let tb = TwistedBundle::new(base.clone(), inf, q.from_int(1), kmat(&q, &[&[1]])).unwrap();
        assert!((tb.twisted_norm(&x, &ctx()).unwrap().to_f64() - core::f64::consts::SQRT_2).abs() < 1e-15);
        let half = q.parse_element("1/2").unwrap();
        let tb = TwistedBundle::new(base, p2, half, kmat(&q, &[&[1]])).unwrap();
        // |1/2|_2 = 2 > 1
        assert!((tb.twisted_norm(&x, &ctx()).unwrap().to_f64() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bounds_plug_in() {
        let q = NumberField::rationals();
        let inf = find_place(&q, "inf", &ctx()).unwrap();
        let b = AdelicBundle::standard(q.clone(), 4);
        assert!(eq(&absolute_bound(&b, &ctx()).unwrap(), &log(2)));
        let b1 = AdelicBundle::standard(q.clone(), 1);
        let tb = TwistedBundle::new(b1, inf, q.from_int(1), kmat(&q, &[&[1]])).unwrap();
        let v = approx_absolute_bound(&tb, &Ball::one(128), &ctx()).unwrap();
        assert!(eq(&v, &log(2).half()));
        let k = NumberField::parse("x^2+1").unwrap();
        let bv = bombieri_vaaler_bound(&AdelicBundle::standard(k, 2), None, &ctx()).unwrap();
        assert!(eq(&bv, &log(2)));
    }

    #[test]
    fn approximate_search() {
        let w = 128;
        let sqrt2 = Ball::from_int(2, w).sqrt().unwrap();
        let a = vec![vec![ComplexBall::real(Ball::one(w)), ComplexBall::real(sqrt2)]];
        let eps = Ball::from_rational(&BigRational::new(3.into(), 5.into()), w);
        assert!(matches!(
            approx_siegel_search(&a, 3, &eps, 1_000_000),
            Err(Error::HypothesisViolated(_))
        ));
        let wit = approx_siegel_search_unchecked(&a, 3, &eps, 1_000_000).unwrap();
        assert_eq!(wit.x, xs(&[1, -1]));
        let big = Ball::from_int(10, w);
        let wit = approx_siegel_search(&[vec![ComplexBall::real(Ball::one(w)); 3]], 1, &big, 1000);
        assert!(wit.is_ok() || matches!(wit, Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn absolute_witnesses() {
        let q = NumberField::rationals();
        let inf = find_place(&q, "inf", &ctx()).unwrap();
        let std = AdelicBundle::standard(q.clone(), 2);
        let w = absolute_siegel_witness(&std, 3, &ctx()).unwrap();
        assert_eq!(w.x, xs(&[1, 0]));
        let b = std
            .with_diagonal(inf, &[BigRational::from_integer(2.into()), BigRational::new(1.into(), 2.into())])
            .unwrap();
        let w = absolute_siegel_witness(&b, 3, &ctx()).unwrap();
        assert_eq!(w.x, xs(&[0, 1]));
        assert!((w.value.to_f64() + core::f64::consts::LN_2).abs() < 1e-20);
    }
}
