//! Adelic hermitian vector bundles over a number field: norms given by
//! change-of-frame matrices, Arakelov degrees, slopes and the basic algebra of
//! subbundles, quotients, duals and direct sums.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::factorial;
use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField};
use crate::linalg::{self, ball_det, ball_gram, BallMatrix, Matrix, Scalars};
use crate::logreal::LogReal;
use crate::places::{archimedean_places, log_abs, places_above, support_primes, Place, PlaceKind};
use crate::precision::PrecisionContext;

/// Norm at one place.
///
/// Archimedean: `||x|| = dist(M L x, span(M K))` for a frame `M` (`m x n0`, injective
/// after embedding), kernel columns `K` and a lift `L` (`n0 x dim`).
/// Finite: `||x|| = |M x|_inf` with `M` square and invertible.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    Arch {
        frame: Matrix<FieldElement>,
        kernel: Vec<Vec<FieldElement>>,
        lift: Matrix<FieldElement>,
    },
    Finite {
        matrix: Matrix<FieldElement>,
    },
}

impl NormSpec {
    /// Square frame `M`, so that `||x|| = |M x|` in the completion.
    pub fn matrix(place: &Place, k: &NumberField, m: Matrix<FieldElement>) -> NormSpec {
        if place.is_archimedean() {
            let n = m.first().map_or(0, |r| r.len());
            NormSpec::Arch {
                frame: m,
                kernel: Vec::new(),
                lift: linalg::identity(k, n),
            }
        } else {
            NormSpec::Finite { matrix: m }
        }
    }

    /// The effective square matrix `M L` when the norm is `x -> |M L x|` with `M L` square.
    pub fn square_matrix(&self, k: &NumberField) -> Option<Matrix<FieldElement>> {
        match self {
            NormSpec::Finite { matrix } => Some(matrix.clone()),
            NormSpec::Arch {
                frame,
                kernel,
                lift,
            } => {
                let ml = linalg::matmul(k, frame, lift);
                let (r, c) = linalg::dims(&ml);
                (kernel.is_empty() && r == c).then_some(ml)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdelicBundle {
    field: NumberField,
    dim: usize,
    deviations: Vec<(Place, NormSpec)>,
}

#[derive(Clone, Debug)]
pub struct MaxSlope {
    pub value: LogReal,
    pub exact: bool,
    /// Basis (as columns) of a subspace realizing `value`.
    pub subspace: Vec<Vec<FieldElement>>,
}

/// Norm of a (multi)homogeneous polynomial at one place.
#[derive(Clone, Debug)]
pub struct PowerNorm {
    pub norm: Ball,
    /// `sum_i |p_i|_v`.
    pub length: Ball,
    /// `||s|| * prod_j nu_j^(l_j/2)`, archimedean places only.
    pub length_bound: Option<Ball>,
}

impl AdelicBundle {
    /// `(K^dim, |.|_2)` at every place.
    pub fn standard(field: NumberField, dim: usize) -> AdelicBundle {
        AdelicBundle {
            field,
            dim,
            deviations: Vec::new(),
        }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn deviations(&self) -> &[(Place, NormSpec)] {
        &self.deviations
    }

    pub fn spec_at(&self, v: &Place) -> Option<&NormSpec> {
        self.deviations.iter().find(|(w, _)| w == v).map(|(_, s)| s)
    }

    /// Replaces the norm at `place` by `x -> |M x|`.
    pub fn with_matrix(mut self, place: Place, m: Matrix<FieldElement>) -> Result<AdelicBundle> {
        let (r, c) = linalg::dims(&m);
        if r != self.dim || c != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: if r != self.dim { r } else { c },
            });
        }
        if self.dim > 0 && self.field.is_zero(&linalg::det(&self.field, &m)) {
            return Err(Error::SingularNormSpec);
        }
        let spec = NormSpec::matrix(&place, &self.field, m);
        self.set_spec(place, spec);
        Ok(self)
    }

    /// Installs a general norm specification after validating it.
    pub fn with_spec(mut self, place: Place, spec: NormSpec) -> Result<AdelicBundle> {
        self.validate(&place, &spec)?;
        self.set_spec(place, spec);
        Ok(self)
    }

    /// Diagonal norm `diag(d_1, ..., d_n)` at `place`.
    pub fn with_diagonal(self, place: Place, d: &[BigRational]) -> Result<AdelicBundle> {
        let k = self.field.clone();
        let n = d.len();
        let m = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            k.from_rational(d[i].clone())
                        } else {
                            k.zero()
                        }
                    })
                    .collect()
            })
            .collect();
        self.with_matrix(place, m)
    }

    fn set_spec(&mut self, place: Place, spec: NormSpec) {
        if let Some(slot) = self.deviations.iter_mut().find(|(w, _)| *w == place) {
            slot.1 = spec;
        } else {
            self.deviations.push((place, spec));
        }
    }

    fn validate(&self, place: &Place, spec: &NormSpec) -> Result<()> {
        let k = &self.field;
        match spec {
            NormSpec::Finite { matrix } => {
                if place.is_archimedean() {
                    return Err(Error::KindMismatch("finite spec at an archimedean place".into()));
                }
                let (r, c) = linalg::dims(matrix);
                if r != self.dim || c != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: r.max(c),
                    });
                }
                if self.dim > 0 && k.is_zero(&linalg::det(k, matrix)) {
                    return Err(Error::SingularNormSpec);
                }
            }
            NormSpec::Arch {
                frame,
                kernel,
                lift,
            } => {
                if !place.is_archimedean() {
                    return Err(Error::KindMismatch("archimedean spec at a finite place".into()));
                }
                let (_, n0) = linalg::dims(frame);
                let (lr, lc) = linalg::dims(lift);
                if lc != self.dim || (self.dim > 0 && lr != n0) || kernel.iter().any(|c| c.len() != n0)
                {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: lc,
                    });
                }
                if linalg::rank(k, frame) != n0 {
                    return Err(Error::SingularNormSpec);
                }
                let mut cols = kernel.clone();
                cols.extend(linalg::columns(lift));
                if !cols.is_empty()
                    && linalg::rank(k, &linalg::from_columns(&cols)) != cols.len()
                {
                    return Err(Error::SingularNormSpec);
                }
            }
        }
        Ok(())
    }

    fn d(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.field.degree()))
    }

    /// `log ||x||_v` for `x != 0`.
    pub fn log_norm_at(
        &self,
        x: &[FieldElement],
        v: &Place,
        ctx: &PrecisionContext,
    ) -> Result<LogReal> {
        let k = &self.field;
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().all(|c| c.is_zero()) {
            return Err(Error::Invalid("norm logarithm of the zero vector".into()));
        }
        match (self.spec_at(v), v.kind()) {
            (None, PlaceKind::Finite) => finite_log_max(k, x, v, ctx.arch_bits),
            (Some(NormSpec::Finite { matrix }), _) => {
                finite_log_max(k, &linalg::matvec(k, matrix, x), v, ctx.arch_bits)
            }
            (None, _) => log_volume(k, v, &[x.to_vec()], ctx),
            (
                Some(NormSpec::Arch {
                    frame,
                    kernel,
                    lift,
                }),
                _,
            ) => {
                let mk: Vec<Vec<FieldElement>> =
                    kernel.iter().map(|c| linalg::matvec(k, frame, c)).collect();
                let y = linalg::matvec(k, frame, &linalg::matvec(k, lift, x));
                let mut all = mk.clone();
                all.push(y);
                Ok(log_volume(k, v, &all, ctx)?.sub(&log_volume(k, v, &mk, ctx)?))
            }
        }
    }

    /// Normalized Arakelov degree `-(1/D) sum_v n_v log |det M_v|_v`.
    pub fn degree(&self, ctx: &PrecisionContext) -> Result<LogReal> {
        let k = &self.field;
        let mut acc = LogReal::zero(ctx.arch_bits);
        if self.dim == 0 {
            return Ok(acc);
        }
        for (v, spec) in &self.deviations {
            let nv = v.local_degree() as i64;
            let local = match spec {
                NormSpec::Finite { matrix } => {
                    let d = linalg::det(k, matrix);
                    let val = v.valuation(k, &d)?.ok_or(Error::SingularNormSpec)?;
                    LogReal::log_prime_multiple(
                        &BigUint::from(v.prime().expect("finite")),
                        BigRational::from_integer(BigInt::from(-val)),
                        ctx.arch_bits,
                    )
                }
                NormSpec::Arch {
                    frame,
                    kernel,
                    lift,
                } => {
                    let mk: Vec<Vec<FieldElement>> =
                        kernel.iter().map(|c| linalg::matvec(k, frame, c)).collect();
                    let mut all = mk.clone();
                    all.extend(linalg::columns(&linalg::matmul(k, frame, lift)));
                    log_volume(k, v, &all, ctx)?.sub(&log_volume(k, v, &mk, ctx)?)
                }
            };
            acc = acc.sub(&local.scale_int(nv));
        }
        Ok(acc.scale(&self.d()))
    }

    pub fn slope(&self, ctx: &PrecisionContext) -> Result<LogReal> {
        if self.dim == 0 {
            return Err(Error::ZeroBundle);
        }
        Ok(self
            .degree(ctx)?
            .scale(&BigRational::new(BigInt::one(), BigInt::from(self.dim))))
    }

    /// True when every deviation is diagonal in the reference basis.
    pub fn is_diagonal(&self) -> bool {
        let k = &self.field;
        self.deviations.iter().all(|(_, s)| {
            s.square_matrix(k).is_some_and(|m| {
                m.iter()
                    .enumerate()
                    .all(|(i, r)| r.iter().enumerate().all(|(j, e)| i == j || e.is_zero()))
            })
        })
    }

    /// Maximal slope: exact for diagonal bundles, otherwise the best slope over a
    /// family of candidate subspaces (coordinate subspaces and spans of columns of
    /// the inverse deviation matrices).
    pub fn max_slope(&self, ctx: &PrecisionContext) -> Result<MaxSlope> {
        if self.dim == 0 {
            return Err(Error::ZeroBundle);
        }
        let k = &self.field;
        let n = self.dim;
        let unit = |i: usize| -> Vec<FieldElement> {
            (0..n).map(|j| if i == j { k.one() } else { k.zero() }).collect()
        };
        if self.is_diagonal() {
            let mut best: Option<(LogReal, usize)> = None;
            for i in 0..n {
                let s = self.sub(&[unit(i)])?.degree(ctx)?;
                best = Some(match best {
                    Some((b, j)) if !matches!(s.try_cmp(&b), Some(core::cmp::Ordering::Greater)) => {
                        (b.max(&s), j)
                    }
                    _ => (s, i),
                });
            }
            let (value, i) = best.expect("dim >= 1");
            return Ok(MaxSlope {
                value,
                exact: true,
                subspace: vec![unit(i)],
            });
        }
        let mut families: Vec<Vec<Vec<FieldElement>>> = vec![(0..n).map(unit).collect()];
        for (_, s) in &self.deviations {
            if let Some(m) = s.square_matrix(k) {
                if let Some(inv) = linalg::inverse(k, &m) {
                    families.push(linalg::columns(&inv));
                }
            }
        }
        let mut best: Option<(LogReal, Vec<Vec<FieldElement>>)> = None;
        for fam in &families {
            for cols in subsets(fam, n) {
                let b = self.sub(&cols)?;
                let s = b.slope(ctx)?;
                best = Some(match best {
                    Some((bv, bc)) if !matches!(s.try_cmp(&bv), Some(core::cmp::Ordering::Greater)) => {
                        (bv.max(&s), bc)
                    }
                    _ => (s, cols),
                });
            }
        }
        let (value, subspace) = best.expect("nonempty family");
        Ok(MaxSlope {
            value,
            exact: false,
            subspace,
        })
    }

    /// Subbundle on the span of `spanning` (vectors of length `dim`), expressed in a
    /// reduced echelon basis of that span.
    pub fn sub(&self, spanning: &[Vec<FieldElement>]) -> Result<AdelicBundle> {
        let k = &self.field;
        let b = echelon_basis(k, self.dim, spanning)?;
        let r = b.len();
        let bm = linalg::from_columns(&b);
        let mut out = AdelicBundle::standard(k.clone(), r);
        if r == 0 {
            return Ok(out);
        }
        let ctx_arch = archimedean_places(k, &PrecisionContext::default())?;
        for v in ctx_arch {
            let spec = match self.spec_at(&v) {
                Some(NormSpec::Arch {
                    frame,
                    kernel,
                    lift,
                }) => NormSpec::Arch {
                    frame: frame.clone(),
                    kernel: kernel.clone(),
                    lift: linalg::matmul(k, lift, &bm),
                },
                _ => NormSpec::Arch {
                    frame: linalg::identity(k, self.dim),
                    kernel: Vec::new(),
                    lift: bm.clone(),
                },
            };
            out.deviations.push((v, spec));
        }
        for v in self.finite_places_with(&b)? {
            let m = match self.spec_at(&v) {
                Some(NormSpec::Finite { matrix }) => linalg::matmul(k, matrix, &bm),
                _ => bm.clone(),
            };
            let red = reduce_rows(k, &v, m, r)?;
            let sq: Matrix<FieldElement> = red.into_iter().take(r).collect();
            if self.spec_at(&v).is_some() || !is_unimodular(k, &v, &sq)? {
                out.deviations.push((v, NormSpec::Finite { matrix: sq }));
            }
        }
        Ok(out)
    }

    /// Quotient by the span of `spanning`, together with the projection matrix onto
    /// the quotient coordinates.
    pub fn quotient(
        &self,
        spanning: &[Vec<FieldElement>],
    ) -> Result<(AdelicBundle, Matrix<FieldElement>)> {
        let k = &self.field;
        let n = self.dim;
        let b = echelon_basis(k, n, spanning)?;
        let r = b.len();
        let pivots: Vec<usize> = b
            .iter()
            .map(|c| c.iter().position(|e| !e.is_zero()).expect("nonzero"))
            .collect();
        let c: Vec<Vec<FieldElement>> = (0..n)
            .filter(|j| !pivots.contains(j))
            .map(|j| (0..n).map(|i| if i == j { k.one() } else { k.zero() }).collect())
            .collect();
        let mut all = b.clone();
        all.extend(c.iter().cloned());
        let basis = linalg::from_columns(&all);
        let inv = linalg::inverse(k, &basis).ok_or_else(|| Error::NotASubspace("basis".into()))?;
        let projection: Matrix<FieldElement> = inv.into_iter().skip(r).collect();
        let q = n - r;
        let mut out = AdelicBundle::standard(k.clone(), q);
        if q == 0 {
            return Ok((out, projection));
        }
        let bm = linalg::from_columns(&b);
        let cm = linalg::from_columns(&c);
        for v in archimedean_places(k, &PrecisionContext::default())? {
            let spec = match self.spec_at(&v) {
                Some(NormSpec::Arch {
                    frame,
                    kernel,
                    lift,
                }) => {
                    let mut kern = kernel.clone();
                    kern.extend(linalg::columns(&linalg::matmul(k, lift, &bm)));
                    NormSpec::Arch {
                        frame: frame.clone(),
                        kernel: kern,
                        lift: linalg::matmul(k, lift, &cm),
                    }
                }
                _ => NormSpec::Arch {
                    frame: linalg::identity(k, n),
                    kernel: b.clone(),
                    lift: cm.clone(),
                },
            };
            out.deviations.push((v, spec));
        }
        for v in self.finite_places_with(&b)? {
            let m = match self.spec_at(&v) {
                Some(NormSpec::Finite { matrix }) => linalg::matmul(k, matrix, &basis),
                _ => basis.clone(),
            };
            let red = reduce_rows(k, &v, m, r)?;
            let d: Matrix<FieldElement> = red.into_iter().skip(r).map(|row| row[r..].to_vec()).collect();
            if self.spec_at(&v).is_some() || !is_unimodular(k, &v, &d)? {
                out.deviations.push((v, NormSpec::Finite { matrix: d }));
            }
        }
        Ok((out, projection))
    }

    /// Deviating finite places plus places above primes dividing a denominator of `b`.
    fn finite_places_with(&self, b: &[Vec<FieldElement>]) -> Result<Vec<Place>> {
        let k = &self.field;
        let mut out: Vec<Place> = self
            .deviations
            .iter()
            .filter(|(v, _)| !v.is_archimedean())
            .map(|(v, _)| v.clone())
            .collect();
        let mut primes: Vec<u64> = Vec::new();
        for e in b.iter().flatten() {
            let (_, d) = k.integral_decomposition(e);
            if !d.is_one() {
                for p in support_primes(k, &k.from_rational(BigRational::from_integer(d)))? {
                    if !primes.contains(&p) {
                        primes.push(p);
                    }
                }
            }
        }
        for p in primes {
            for v in places_above(k, p)? {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        Ok(out)
    }

    /// Dual bundle (inverse transpose frames). Archimedean norms must be of the form
    /// `|M x|` with `M` square.
    pub fn dual(&self) -> Result<AdelicBundle> {
        let k = &self.field;
        let mut out = AdelicBundle::standard(k.clone(), self.dim);
        for (v, s) in &self.deviations {
            let m = s.square_matrix(k).ok_or_else(|| {
                Error::Unsupported("dual of a non-square archimedean frame".into())
            })?;
            let inv = linalg::inverse(k, &m).ok_or(Error::SingularNormSpec)?;
            out.deviations.push((
                v.clone(),
                NormSpec::matrix(v, k, linalg::transpose(&inv)),
            ));
        }
        Ok(out)
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &AdelicBundle) -> Result<AdelicBundle> {
        let k = &self.field;
        if *k != other.field {
            return Err(Error::Invalid("direct sum of bundles over different fields".into()));
        }
        let (n1, n2) = (self.dim, other.dim);
        let mut out = AdelicBundle::standard(k.clone(), n1 + n2);
        let mut places: Vec<Place> = self.deviations.iter().map(|(v, _)| v.clone()).collect();
        for (v, _) in &other.deviations {
            if !places.contains(v) {
                places.push(v.clone());
            }
        }
        for v in places {
            let a = self.spec_at(&v).cloned().unwrap_or_else(|| standard_spec(k, &v, n1));
            let b = other.spec_at(&v).cloned().unwrap_or_else(|| standard_spec(k, &v, n2));
            let spec = match (a, b) {
                (NormSpec::Finite { matrix: m1 }, NormSpec::Finite { matrix: m2 }) => {
                    NormSpec::Finite {
                        matrix: block_diag(k, &m1, &m2),
                    }
                }
                (
                    NormSpec::Arch {
                        frame: f1,
                        kernel: k1,
                        lift: l1,
                    },
                    NormSpec::Arch {
                        frame: f2,
                        kernel: k2,
                        lift: l2,
                    },
                ) => {
                    let a0 = linalg::dims(&f1).1;
                    let b0 = linalg::dims(&f2).1;
                    let pad = |c: &Vec<FieldElement>, before: usize, after: usize| {
                        let mut v = vec![k.zero(); before];
                        v.extend(c.iter().cloned());
                        v.extend(vec![k.zero(); after]);
                        v
                    };
                    let mut kern: Vec<Vec<FieldElement>> = k1.iter().map(|c| pad(c, 0, b0)).collect();
                    kern.extend(k2.iter().map(|c| pad(c, a0, 0)));
                    NormSpec::Arch {
                        frame: block_diag(k, &f1, &f2),
                        kernel: kern,
                        lift: block_diag_sized(k, &l1, (a0, n1), &l2, (b0, n2)),
                    }
                }
                _ => return Err(Error::KindMismatch("place kinds differ".into())),
            };
            out.deviations.push((v, spec));
        }
        Ok(out)
    }
}

fn standard_spec(k: &NumberField, v: &Place, n: usize) -> NormSpec {
    NormSpec::matrix(v, k, linalg::identity(k, n))
}

fn block_diag(k: &NumberField, a: &Matrix<FieldElement>, b: &Matrix<FieldElement>) -> Matrix<FieldElement> {
    let da = linalg::dims(a);
    let db = linalg::dims(b);
    block_diag_sized(k, a, da, b, db)
}

fn block_diag_sized(
    k: &NumberField,
    a: &Matrix<FieldElement>,
    (ar, ac): (usize, usize),
    b: &Matrix<FieldElement>,
    (br, bc): (usize, usize),
) -> Matrix<FieldElement> {
    let mut out = vec![vec![k.zero(); ac + bc]; ar + br];
    for i in 0..ar {
        for j in 0..ac {
            out[i][j] = a[i][j].clone();
        }
    }
    for i in 0..br {
        for j in 0..bc {
            out[ar + i][ac + j] = b[i][j].clone();
        }
    }
    out
}

/// Basis of the span of `spanning`, as the nonzero rows of its reduced echelon form.
fn echelon_basis(
    k: &NumberField,
    dim: usize,
    spanning: &[Vec<FieldElement>],
) -> Result<Vec<Vec<FieldElement>>> {
    if spanning.iter().any(|c| c.len() != dim) {
        return Err(Error::NotASubspace(format!("vectors must have length {dim}")));
    }
    if spanning.is_empty() {
        return Ok(Vec::new());
    }
    let (red, pivots) = linalg::rref(k, &spanning.to_vec());
    Ok(red.into_iter().take(pivots.len()).collect())
}

fn subsets(fam: &[Vec<FieldElement>], n: usize) -> Vec<Vec<Vec<FieldElement>>> {
    let m = fam.len();
    if m <= 8 {
        (1u32..(1 << m))
            .map(|mask| {
                (0..m)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| fam[i].clone())
                    .collect()
            })
            .collect()
    } else {
        let mut out: Vec<Vec<Vec<FieldElement>>> = fam.iter().map(|c| vec![c.clone()]).collect();
        out.push(fam[..n.min(m)].to_vec());
        out
    }
}

/// Row operations in `GL(O_v)` bringing the first `pivots` columns to echelon form.
pub(crate) fn reduce_rows(
    k: &NumberField,
    v: &Place,
    mut a: Matrix<FieldElement>,
    pivots: usize,
) -> Result<Matrix<FieldElement>> {
    let rows = a.len();
    for c in 0..pivots {
        let mut best: Option<(usize, i64)> = None;
        for (r, row) in a.iter().enumerate().skip(c) {
            if let Some(val) = v.valuation(k, &row[c])? {
                if best.is_none_or(|(_, b)| val < b) {
                    best = Some((r, val));
                }
            }
        }
        let (pr, _) = best.ok_or_else(|| Error::NotASubspace("rank deficiency".into()))?;
        a.swap(pr, c);
        let piv = a[c][c].clone();
        for r in c + 1..rows {
            if a[r][c].is_zero() {
                continue;
            }
            let f = k.div(&a[r][c], &piv).expect("nonzero pivot");
            let pivot_row = a[c].clone();
            for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                *x = k.sub(x, &k.mul(&f, y));
            }
        }
    }
    Ok(a)
}

fn is_unimodular(k: &NumberField, v: &Place, m: &Matrix<FieldElement>) -> Result<bool> {
    if m.iter().flatten().any(|e| matches!(v.valuation(k, e), Ok(Some(x)) if x < 0)) {
        return Ok(false);
    }
    Ok(v.valuation(k, &linalg::det(k, m))? == Some(0))
}

/// `log max_i |x_i|_v` at a finite place.
fn finite_log_max(k: &NumberField, x: &[FieldElement], v: &Place, prec: u32) -> Result<LogReal> {
    let mut best: Option<i64> = None;
    for e in x {
        if let Some(val) = v.valuation(k, e)? {
            best = Some(best.map_or(val, |b| b.min(val)));
        }
    }
    let val = best.ok_or_else(|| Error::Invalid("zero vector".into()))?;
    Ok(LogReal::log_prime_multiple(
        &BigUint::from(v.prime().expect("finite")),
        BigRational::from_integer(BigInt::from(-val)),
        prec,
    ))
}

/// Complex conjugation on an imaginary quadratic field (the nontrivial automorphism).
fn quadratic_conjugate(k: &NumberField, a: &FieldElement) -> FieldElement {
    let a1 = BigRational::from_integer(k.poly()[1].clone());
    let (x, y) = (&a.coeffs[0], &a.coeffs[1]);
    FieldElement {
        coeffs: vec![x - y * &a1, -y.clone()],
    }
}

/// `(1/2) log det Gram(sigma_v(cols))`; exact whenever the Gram determinant can be
/// formed inside `K`.
pub fn log_volume(
    k: &NumberField,
    v: &Place,
    cols: &[Vec<FieldElement>],
    ctx: &PrecisionContext,
) -> Result<LogReal> {
    if cols.is_empty() {
        return Ok(LogReal::zero(ctx.arch_bits));
    }
    let n = cols.len();
    let gram_in_k = |conj: &dyn Fn(&FieldElement) -> FieldElement| -> FieldElement {
        let g: Matrix<FieldElement> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        cols[i].iter().zip(&cols[j]).fold(k.zero(), |acc, (a, b)| {
                            k.add(&acc, &k.mul(&conj(a), b))
                        })
                    })
                    .collect()
            })
            .collect();
        linalg::det(k, &g)
    };
    match v.kind() {
        PlaceKind::Real => {
            let d = gram_in_k(&|a| a.clone());
            if d.is_zero() {
                return Err(Error::SingularNormSpec);
            }
            Ok(log_abs(k, &d, v, ctx)?.half())
        }
        PlaceKind::Complex if k.degree() == 2 => {
            let d = gram_in_k(&|a| quadratic_conjugate(k, a));
            let q = d.as_rational().expect("hermitian determinant is rational");
            if q.is_zero() {
                return Err(Error::SingularNormSpec);
            }
            Ok(LogReal::log_rational(&q, ctx.arch_bits).half())
        }
        PlaceKind::Complex => {
            let w = ctx.arch_bits + 32;
            let root = v.root_at(k, w)?;
            let m: BallMatrix = (0..cols[0].len())
                .map(|r| cols.iter().map(|c| k.embed(&c[r], &root)).collect())
                .collect();
            let g = ball_gram(&m, w);
            let d = ball_det(&g, w).ok_or(Error::PrecisionExhausted("Gram determinant".into()))?;
            let l = d
                .re
                .ln()
                .ok_or(Error::PrecisionExhausted("Gram determinant".into()))?;
            Ok(LogReal::from_ball(l.mul_2exp(-1).with_prec(ctx.arch_bits)))
        }
        PlaceKind::Finite => Err(Error::KindMismatch("volume at a finite place".into())),
    }
}

fn weight(blocks: &[Vec<u32>], lens: &[u32]) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (b, l) in blocks.iter().zip(lens) {
        for i in b {
            num *= BigInt::from(factorial(*i as u64));
        }
        den *= BigInt::from(factorial(*l as u64));
    }
    BigRational::new(num, den)
}

/// Norm of `s = sum_i p_i e^i` in `Sym^{l_0} E_0 (x) ... (x) Sym^{l_n} E_n` at `v`,
/// coefficients taken in orthonormal frames at `v`.
pub fn multihomogeneous_norm(
    k: &NumberField,
    coeffs: &[(Vec<Vec<u32>>, FieldElement)],
    degrees: &[u32],
    v: &Place,
    ctx: &PrecisionContext,
) -> Result<PowerNorm> {
    let prec = ctx.arch_bits;
    let mut dims: Option<Vec<usize>> = None;
    for (idx, _) in coeffs {
        if idx.len() != degrees.len() {
            return Err(Error::LengthMismatch {
                expected: degrees.len(),
                got: idx.len(),
            });
        }
        for (b, l) in idx.iter().zip(degrees) {
            let s: u32 = b.iter().sum();
            if s != *l {
                return Err(Error::LengthMismatch {
                    expected: *l as usize,
                    got: s as usize,
                });
            }
        }
        let d: Vec<usize> = idx.iter().map(|b| b.len()).collect();
        match &dims {
            None => dims = Some(d),
            Some(e) if *e != d => {
                return Err(Error::LengthMismatch {
                    expected: e.iter().sum(),
                    got: d.iter().sum(),
                })
            }
            _ => {}
        }
    }
    if v.is_archimedean() {
        let root = v.root_at(k, prec + 16)?;
        let mut sq = Ball::zero(prec + 16);
        let mut length = Ball::zero(prec + 16);
        for (idx, p) in coeffs {
            let a = k.embed(p, &root);
            let w = Ball::from_rational(&weight(idx, degrees), prec + 16);
            sq = sq.add_ball(&a.abs_sq().mul_ball(&w));
            length = length.add_ball(&a.abs());
        }
        let norm = sq.sqrt().expect("nonnegative").with_prec(prec);
        let mut bound = norm.clone();
        if let Some(d) = &dims {
            for (nu, l) in d.iter().zip(degrees) {
                let f = Ball::from_int(*nu as i64, prec + 16)
                    .pow(*l)
                    .sqrt()
                    .expect("positive");
                bound = bound.mul_ball(&f);
            }
        }
        Ok(PowerNorm {
            norm,
            length: length.with_prec(prec),
            length_bound: Some(bound.with_prec(prec)),
        })
    } else {
        let mut best = Ball::zero(prec);
        let mut length = Ball::zero(prec);
        let z = PrecisionContext {
            arch_bits: prec,
            padic_digits: ctx.padic_digits,
        };
        for (_, p) in coeffs {
            let a = crate::places::abs_value(k, p, v, &z)?.to_ball(prec);
            length = length.add_ball(&a);
            best = best.max(&a);
        }
        Ok(PowerNorm {
            norm: best,
            length,
            length_bound: None,
        })
    }
}

/// Norm in `Sym^l E` at `v`; the weight of `e^i` is `i!/l!`.
pub fn sym_power_norm(
    k: &NumberField,
    coeffs: &[(Vec<u32>, FieldElement)],
    ell: u32,
    v: &Place,
    ctx: &PrecisionContext,
) -> Result<PowerNorm> {
    let c: Vec<(Vec<Vec<u32>>, FieldElement)> = coeffs
        .iter()
        .map(|(i, p)| (vec![i.clone()], p.clone()))
        .collect();
    multihomogeneous_norm(k, &c, &[ell], v, ctx)
}

/// `l (mu_max + 2 nu log nu)`, requiring an exact maximal slope.
pub fn sym_max_slope_bound(b: &AdelicBundle, ell: u32, ctx: &PrecisionContext) -> Result<LogReal> {
    let ms = b.max_slope(ctx)?;
    if !ms.exact {
        return Err(Error::InexactMaxSlope);
    }
    let nu = b.dim() as u64;
    let extra = LogReal::log_int(nu, ctx.arch_bits).scale_int(2 * nu as i64);
    Ok(ms.value.add(&extra).scale_int(ell as i64))
}

/// Certifies `h_E(x) >= -mu_max(E)`.
pub fn liouville_check(b: &AdelicBundle, x: &[FieldElement], ctx: &PrecisionContext) -> Result<bool> {
    let ms = b.max_slope(ctx)?;
    if !ms.exact {
        return Err(Error::InexactMaxSlope);
    }
    let h = crate::heights::vector_height(x, b, ctx)?.value;
    match h.add(&ms.value).try_sign() {
        Some(core::cmp::Ordering::Less) => Ok(false),
        Some(_) => Ok(true),
        None => Err(Error::PrecisionExhausted("Liouville comparison".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::find_place;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn log(n: u64) -> LogReal {
        LogReal::log_int(n, 128)
    }

    fn exact_eq(a: &LogReal, b: &LogReal) -> bool {
        a.try_cmp(b) == Some(core::cmp::Ordering::Equal)
    }

    #[test]
    fn degree_examples() {
        let qf = NumberField::rationals();
        let inf = find_place(&qf, "inf", &ctx()).unwrap();
        let p2 = find_place(&qf, "p2", &ctx()).unwrap();
        assert!(AdelicBundle::standard(qf.clone(), 3).degree(&ctx()).unwrap().is_exact_zero());
        let b = AdelicBundle::standard(qf.clone(), 1).with_diagonal(inf.clone(), &[q(3, 1)]).unwrap();
        assert!(exact_eq(&b.degree(&ctx()).unwrap(), &log(3).neg()));
        let b = AdelicBundle::standard(qf.clone(), 1).with_diagonal(p2, &[q(2, 1)]).unwrap();
        assert!(exact_eq(&b.degree(&ctx()).unwrap(), &log(2)));
    }

    #[test]
    fn diagonal_max_slope() {
        let qf = NumberField::rationals();
        let inf = find_place(&qf, "inf", &ctx()).unwrap();
        let b = AdelicBundle::standard(qf, 2).with_diagonal(inf, &[q(1, 2), q(2, 1)]).unwrap();
        assert!(b.degree(&ctx()).unwrap().is_exact_zero());
        let ms = b.max_slope(&ctx()).unwrap();
        assert!(ms.exact);
        assert!(exact_eq(&ms.value, &log(2)));
        let bound = sym_max_slope_bound(&b, 2, &ctx()).unwrap();
        assert!(exact_eq(&bound, &log(2).scale_int(10)));
        let e1 = vec![b.field().one(), b.field().zero()];
        assert!(liouville_check(&b, &e1, &ctx()).unwrap());
    }

    #[test]
    fn sub_and_quotient_additivity() {
        let qf = NumberField::rationals();
        let inf = find_place(&qf, "inf", &ctx()).unwrap();
        let p3 = find_place(&qf, "p3", &ctx()).unwrap();
        let m: Matrix<FieldElement> = [[2, 1], [0, 3]]
            .iter()
            .map(|r| r.iter().map(|&x| qf.from_int(x)).collect())
            .collect();
        let b = AdelicBundle::standard(qf.clone(), 2)
            .with_matrix(inf, m.clone())
            .unwrap()
            .with_matrix(p3, m)
            .unwrap();
        let s = vec![vec![qf.from_int(1), qf.from_int(1)]];
        let sub = b.sub(&s).unwrap();
        let (quo, _) = b.quotient(&s).unwrap();
        let total = sub.degree(&ctx()).unwrap().add(&quo.degree(&ctx()).unwrap());
        assert!(exact_eq(&total, &b.degree(&ctx()).unwrap()));
        let std = AdelicBundle::standard(qf.clone(), 2);
        let d = std.sub(&s).unwrap().degree(&ctx()).unwrap();
        assert!(exact_eq(&d, &log(2).half().neg()));
    }

    #[test]
    fn dual_and_sum() {
        let qf = NumberField::rationals();
        let inf = find_place(&qf, "inf", &ctx()).unwrap();
        let p5 = find_place(&qf, "p5", &ctx()).unwrap();
        let b = AdelicBundle::standard(qf.clone(), 2)
            .with_diagonal(inf, &[q(3, 1), q(1, 7)])
            .unwrap()
            .with_diagonal(p5, &[q(5, 1), q(1, 1)])
            .unwrap();
        let d = b.degree(&ctx()).unwrap();
        assert!(exact_eq(&b.dual().unwrap().degree(&ctx()).unwrap(), &d.neg()));
        let s = b.direct_sum(&b.dual().unwrap()).unwrap();
        assert!(s.degree(&ctx()).unwrap().is_exact_zero());
        assert_eq!(s.dim(), 4);
    }

    #[test]
    fn sym_power_examples() {
        let qf = NumberField::rationals();
        let inf = find_place(&qf, "inf", &ctx()).unwrap();
        let p3 = find_place(&qf, "p3", &ctx()).unwrap();
        let s = vec![(vec![1, 1], qf.from_int(1))];
        let n = sym_power_norm(&qf, &s, 2, &inf, &ctx()).unwrap();
        assert!((n.norm.to_f64() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let n = sym_power_norm(&qf, &s, 2, &p3, &ctx()).unwrap();
        assert_eq!(n.norm.to_f64(), 1.0);
        let bad = vec![(vec![2, 1], qf.from_int(1))];
        assert!(matches!(
            sym_power_norm(&qf, &bad, 2, &inf, &ctx()),
            Err(Error::LengthMismatch { .. })
        ));
        let mh = vec![(vec![vec![1, 1], vec![1, 0]], qf.from_int(1))];
        let n = multihomogeneous_norm(&qf, &mh, &[2, 1], &inf, &ctx()).unwrap();
        assert!((n.norm.to_f64() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gaussian_field_degree_is_exact() {
        let k = NumberField::parse("x^2+1").unwrap();
        let inf = find_place(&k, "inf", &ctx()).unwrap();
        let m = vec![vec![k.from_ints(&[1, 1]).unwrap()]];
        let b = AdelicBundle::standard(k, 1).with_matrix(inf, m).unwrap();
        // |1+i|^2 = 2, n_v = 2, D = 2
        assert!(exact_eq(&b.degree(&ctx()).unwrap(), &log(2).half().neg()));
    }

    #[test]
    fn general_max_slope_is_lower_bound() {
        let qf = NumberField::rationals();
        let inf = find_place(&qf, "inf", &ctx()).unwrap();
        let m: Matrix<FieldElement> = [[1, 1], [0, 4]]
            .iter()
            .map(|r| r.iter().map(|&x| qf.from_int(x)).collect())
            .collect();
        let b = AdelicBundle::standard(qf, 2).with_matrix(inf, m).unwrap();
        let ms = b.max_slope(&ctx()).unwrap();
        assert!(!ms.exact);
        assert!(ms.value.certified_ge(&b.slope(&ctx()).unwrap()));
    }
}
