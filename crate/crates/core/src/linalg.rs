//! Exact Gaussian elimination over a field of scalars, and ball matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ball::{Ball, ComplexBall};

/// Operations of an exact field used by the generic elimination routines.
pub trait Scalars {
    type E: Clone + PartialEq + Debug;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Option<Self::E>;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn neg(&self, a: &Self::E) -> Self::E {
        self.sub(&self.zero(), a)
    }
    fn div(&self, a: &Self::E, b: &Self::E) -> Option<Self::E> {
        Some(self.mul(a, &self.inv(b)?))
    }
}

pub struct Rationals;

impl Scalars for Rationals {
    type E = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}

pub type Matrix<E> = Vec<Vec<E>>;

pub fn dims<E>(m: &Matrix<E>) -> (usize, usize) {
    (m.len(), m.first().map_or(0, |r| r.len()))
}

pub fn identity<S: Scalars>(s: &S, n: usize) -> Matrix<S::E> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { s.one() } else { s.zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<E: Clone>(m: &Matrix<E>) -> Matrix<E> {
    let (r, c) = dims(m);
    (0..c).map(|j| (0..r).map(|i| m[i][j].clone()).collect()).collect()
}

pub fn matmul<S: Scalars>(s: &S, a: &Matrix<S::E>, b: &Matrix<S::E>) -> Matrix<S::E> {
    let (r, k) = dims(a);
    let c = dims(b).1;
    (0..r)
        .map(|i| {
            (0..c)
                .map(|j| {
                    (0..k).fold(s.zero(), |acc, l| s.add(&acc, &s.mul(&a[i][l], &b[l][j])))
                })
                .collect()
        })
        .collect()
}

pub fn matvec<S: Scalars>(s: &S, a: &Matrix<S::E>, x: &[S::E]) -> Vec<S::E> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(s.zero(), |acc, (m, v)| s.add(&acc, &s.mul(m, v)))
        })
        .collect()
}

/// Reduced row echelon form and pivot columns.
pub fn rref<S: Scalars>(s: &S, m: &Matrix<S::E>) -> (Matrix<S::E>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = dims(&a);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !s.is_zero(&a[i][c])) else {
            continue;
        };
        a.swap(r, pr);
        let inv = s.inv(&a[r][c]).expect("nonzero pivot");
        for j in c..cols {
            a[r][j] = s.mul(&a[r][j], &inv);
        }
        for i in 0..rows {
            if i != r && !s.is_zero(&a[i][c]) {
                let f = a[i][c].clone();
                for j in c..cols {
                    let t = s.mul(&f, &a[r][j]);
                    a[i][j] = s.sub(&a[i][j], &t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank<S: Scalars>(s: &S, m: &Matrix<S::E>) -> usize {
    rref(s, m).1.len()
}

pub fn det<S: Scalars>(s: &S, m: &Matrix<S::E>) -> S::E {
    let mut a = m.clone();
    let n = a.len();
    let mut d = s.one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !s.is_zero(&a[i][c])) else {
            return s.zero();
        };
        if pr != c {
            a.swap(pr, c);
            d = s.neg(&d);
        }
        d = s.mul(&d, &a[c][c]);
        let inv = s.inv(&a[c][c]).expect("nonzero pivot");
        for i in c + 1..n {
            if s.is_zero(&a[i][c]) {
                continue;
            }
            let f = s.mul(&a[i][c], &inv);
            for j in c..n {
                let t = s.mul(&f, &a[c][j]);
                a[i][j] = s.sub(&a[i][j], &t);
            }
        }
    }
    d
}

pub fn inverse<S: Scalars>(s: &S, m: &Matrix<S::E>) -> Option<Matrix<S::E>> {
    let n = m.len();
    let aug: Matrix<S::E> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { s.one() } else { s.zero() }));
            r
        })
        .collect();
    let (red, piv) = rref(s, &aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `m x = b` for one solution, if any.
pub fn solve<S: Scalars>(s: &S, m: &Matrix<S::E>, b: &[S::E]) -> Option<Vec<S::E>> {
    let (rows, cols) = dims(m);
    let aug: Matrix<S::E> = (0..rows)
        .map(|i| {
            let mut r = m[i].clone();
            r.push(b[i].clone());
            r
        })
        .collect();
    let (red, piv) = rref(s, &aug);
    if piv.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![s.zero(); cols];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = red[r][cols].clone();
    }
    Some(x)
}

/// Basis of the right kernel, as vectors.
pub fn kernel<S: Scalars>(s: &S, m: &Matrix<S::E>) -> Vec<Vec<S::E>> {
    let (_, cols) = dims(m);
    let (red, piv) = rref(s, m);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !piv.contains(c)) {
        let mut v = vec![s.zero(); cols];
        v[free] = s.one();
        for (r, &pc) in piv.iter().enumerate() {
            v[pc] = s.neg(&red[r][free]);
        }
        out.push(v);
    }
    out
}

/// Columns of `m` as a list of vectors.
pub fn columns<E: Clone>(m: &Matrix<E>) -> Vec<Vec<E>> {
    transpose(m)
}

pub fn from_columns<E: Clone>(cols: &[Vec<E>]) -> Matrix<E> {
    if cols.is_empty() {
        return Vec::new();
    }
    let rows = cols[0].len();
    (0..rows)
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect()
}

pub type BallMatrix = Vec<Vec<ComplexBall>>;

pub fn ball_conj_transpose(m: &BallMatrix) -> BallMatrix {
    let (r, c) = dims(m);
    (0..c)
        .map(|j| (0..r).map(|i| m[i][j].conj()).collect())
        .collect()
}

pub fn ball_matmul(a: &BallMatrix, b: &BallMatrix, prec: u32) -> BallMatrix {
    let (r, k) = dims(a);
    let c = dims(b).1;
    (0..r)
        .map(|i| {
            (0..c)
                .map(|j| {
                    (0..k).fold(ComplexBall::zero(prec), |acc, l| acc.add(&a[i][l].mul(&b[l][j])))
                })
                .collect()
        })
        .collect()
}

/// Gram matrix `M* M`.
pub fn ball_gram(m: &BallMatrix, prec: u32) -> BallMatrix {
    ball_matmul(&ball_conj_transpose(m), m, prec)
}

/// Determinant by elimination; `None` when no pivot can be certified nonzero
/// while the matrix is not certified singular.
pub fn ball_det(m: &BallMatrix, prec: u32) -> Option<ComplexBall> {
    let mut a = m.clone();
    let n = a.len();
    let mut d = ComplexBall::one(prec);
    for c in 0..n {
        // pick the pivot with the largest certified lower bound on modulus
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in a.iter().enumerate().skip(c) {
            let low = row[c].abs_sq().abs_lower().to_f64();
            if low > 0.0 && best.is_none_or(|(_, b)| low > b) {
                best = Some((i, low));
            }
        }
        let (pr, _) = best?;
        if pr != c {
            a.swap(pr, c);
            d = d.neg();
        }
        d = d.mul(&a[c][c]);
        for i in c + 1..n {
            let f = a[i][c].div(&a[c][c])?;
            for j in c..n {
                let t = f.mul(&a[c][j]);
                a[i][j] = a[i][j].sub(&t);
            }
        }
    }
    Some(d)
}

/// Number of eigenvalues of a Hermitian ball matrix strictly greater than `lambda`,
/// via the signs of the `L D L*` pivots of `H - lambda I`. `None` if a pivot sign is
/// not certified.
pub fn hermitian_count_above(h: &BallMatrix, lambda: &Ball) -> Option<usize> {
    let n = h.len();
    let mut a: BallMatrix = h.clone();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = row[i].sub(&ComplexBall::real(lambda.clone()));
    }
    let mut positive = 0;
    for c in 0..n {
        let piv = a[c][c].re.clone();
        if piv.is_positive() {
            positive += 1;
        } else if !piv.is_negative() {
            return None;
        }
        let pc = ComplexBall::real(piv);
        for i in c + 1..n {
            let f = a[i][c].div(&pc)?;
            for j in c + 1..n {
                let t = f.mul(&a[c][j]);
                a[i][j] = a[i][j].sub(&t);
            }
        }
    }
    Some(positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(a: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(a))
    }

    fn mat(rows: &[&[i64]]) -> Matrix<BigRational> {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn determinant_and_inverse() {
        let m = mat(&[&[2, 1], &[7, 4]]);
        assert_eq!(det(&Rationals, &m), q(1));
        let inv = inverse(&Rationals, &m).unwrap();
        assert_eq!(matmul(&Rationals, &m, &inv), identity(&Rationals, 2));
        assert!(inverse(&Rationals, &mat(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn kernel_and_rank() {
        let m = mat(&[&[1, -1, 0], &[0, 1, -1]]);
        assert_eq!(rank(&Rationals, &m), 2);
        let k = kernel(&Rationals, &m);
        assert_eq!(k, vec![vec![q(1), q(1), q(1)]]);
        let x = solve(&Rationals, &m, &[q(1), q(1)]).unwrap();
        assert_eq!(matvec(&Rationals, &m, &x), vec![q(1), q(1)]);
    }

    #[test]
    fn inertia_counts() {
        let prec = 128;
        let b = |x: i64| ComplexBall::real(Ball::from_int(x, prec));
        let h: BallMatrix = vec![vec![b(2), b(1)], vec![b(1), b(2)]];
        // eigenvalues 1 and 3
        assert_eq!(hermitian_count_above(&h, &Ball::from_int(0, prec)), Some(2));
        assert_eq!(hermitian_count_above(&h, &Ball::from_f64(2.5, prec).unwrap()), Some(1));
        assert_eq!(hermitian_count_above(&h, &Ball::from_int(4, prec)), Some(0));
        let d = ball_det(&h, prec).unwrap();
        assert!(d.re.contains(&crate::ball::Dyadic::from_int(3)));
    }
}
