//! Number fields `Q[x]/(f)` with `f` monic irreducible, and their elements in the
//! power basis.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::ComplexBall;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Rationals, Scalars};
use crate::poly::{is_irreducible_over_q, z_degree, ZPoly};

const MAX_DEGREE: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    poly: ZPoly,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub coeffs: Vec<BigRational>,
}

impl NumberField {
    /// Field defined by a monic irreducible integer polynomial, coefficients lowest first.
    pub fn new(poly: ZPoly) -> Result<NumberField> {
        let d = z_degree(&poly).ok_or_else(|| Error::Invalid("zero polynomial".into()))?;
        if d == 0 {
            return Err(Error::Invalid("constant polynomial".into()));
        }
        if d > MAX_DEGREE {
            return Err(Error::DeskScaleExceeded(format!(
                "degree {d} exceeds {MAX_DEGREE}"
            )));
        }
        let poly = poly[..=d].to_vec();
        if !poly[d].is_one() {
            return Err(Error::Invalid("defining polynomial must be monic".into()));
        }
        if !is_irreducible_over_q(&poly) {
            return Err(Error::Invalid("defining polynomial is reducible".into()));
        }
        Ok(NumberField { poly })
    }

    /// The rational field, defined by `x`.
    pub fn rationals() -> NumberField {
        NumberField {
            poly: vec![BigInt::zero(), BigInt::one()],
        }
    }

    pub fn parse(s: &str) -> Result<NumberField> {
        NumberField::new(parse_poly(s)?)
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn poly(&self) -> &[BigInt] {
        &self.poly
    }

    pub fn is_rational_field(&self) -> bool {
        self.degree() == 1
    }

    pub fn element(&self, coeffs: Vec<BigRational>) -> Result<FieldElement> {
        if coeffs.len() > self.degree() {
            return Err(Error::DimensionMismatch {
                expected: self.degree(),
                got: coeffs.len(),
            });
        }
        let mut c = coeffs;
        c.resize(self.degree(), BigRational::zero());
        Ok(FieldElement { coeffs: c })
    }

    pub fn from_rational(&self, q: BigRational) -> FieldElement {
        let mut c = vec![BigRational::zero(); self.degree()];
        c[0] = q;
        FieldElement { coeffs: c }
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ints(&self, c: &[i64]) -> Result<FieldElement> {
        self.element(
            c.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect(),
        )
    }

    /// The class of `x` (for `Q` this is the rational `0`, the root of `x`).
    pub fn generator(&self) -> FieldElement {
        if self.degree() == 1 {
            return self.from_rational(-BigRational::from_integer(self.poly[0].clone()));
        }
        let mut c = vec![BigRational::zero(); self.degree()];
        c[1] = BigRational::one();
        FieldElement { coeffs: c }
    }

    fn reduce(&self, mut c: Vec<BigRational>) -> FieldElement {
        let d = self.degree();
        while c.len() > d {
            let top = c.pop().expect("nonempty");
            if top.is_zero() {
                continue;
            }
            let k = c.len() - d;
            for i in 0..d {
                c[k + i] -= &top * BigRational::from_integer(self.poly[i].clone());
            }
        }
        c.resize(d, BigRational::zero());
        FieldElement { coeffs: c }
    }

    pub fn mul_elem(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let d = self.degree();
        let mut c = vec![BigRational::zero(); 2 * d - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        self.reduce(c)
    }

    /// Matrix of multiplication by `a` in the power basis (columns are `a * x^j`).
    pub fn mult_matrix(&self, a: &FieldElement) -> Matrix<BigRational> {
        let d = self.degree();
        let mut cols = Vec::with_capacity(d);
        let mut basis = vec![BigRational::zero(); d];
        for j in 0..d {
            basis.iter_mut().for_each(|c| *c = BigRational::zero());
            basis[j] = BigRational::one();
            let e = FieldElement {
                coeffs: basis.clone(),
            };
            cols.push(self.mul_elem(a, &e).coeffs);
        }
        linalg::from_columns(&cols)
    }

    pub fn norm(&self, a: &FieldElement) -> BigRational {
        if self.degree() == 1 {
            return a.coeffs[0].clone();
        }
        linalg::det(&Rationals, &self.mult_matrix(a))
    }

    /// Characteristic polynomial of multiplication by `a` (monic, lowest degree first).
    pub fn char_poly(&self, a: &FieldElement) -> Vec<BigRational> {
        let n = self.degree();
        let m = self.mult_matrix(a);
        let mut c = vec![BigRational::zero(); n + 1];
        c[n] = BigRational::one();
        let mut mk: Matrix<BigRational> = vec![vec![BigRational::zero(); n]; n];
        for k in 1..=n {
            let mut next = linalg::matmul(&Rationals, &m, &mk);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += &c[n - k + 1];
            }
            let am = linalg::matmul(&Rationals, &m, &next);
            let tr: BigRational = (0..n).map(|i| am[i][i].clone()).sum();
            c[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
            mk = next;
        }
        c
    }

    pub fn trace(&self, a: &FieldElement) -> BigRational {
        let m = self.mult_matrix(a);
        (0..self.degree()).map(|i| m[i][i].clone()).sum()
    }

    pub fn inv_elem(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        if self.degree() == 1 {
            return Some(self.from_rational(a.coeffs[0].recip()));
        }
        let m = self.mult_matrix(a);
        let mut e = vec![BigRational::zero(); self.degree()];
        e[0] = BigRational::one();
        linalg::solve(&Rationals, &m, &e).map(|c| FieldElement { coeffs: c })
    }

    pub fn pow(&self, a: &FieldElement, e: i64) -> Option<FieldElement> {
        let mut base = if e < 0 { self.inv_elem(a)? } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut r = self.from_int(1);
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul_elem(&r, &base);
            }
            base = self.mul_elem(&base, &base);
            k >>= 1;
        }
        Some(r)
    }

    /// Writes `a = y / d` with `y` having integer power-basis coordinates and `d > 0`.
    pub fn integral_decomposition(&self, a: &FieldElement) -> (Vec<BigInt>, BigInt) {
        let d = a
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let y = a
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(d.clone())).to_integer())
            .collect();
        (y, d)
    }

    /// Image under the embedding sending the generator to `root`.
    pub fn embed(&self, a: &FieldElement, root: &ComplexBall) -> ComplexBall {
        if self.degree() == 1 {
            return ComplexBall::from_rational(&a.coeffs[0], root.prec());
        }
        crate::ball::eval_rational_poly(&a.coeffs, root)
    }

    /// Parses `"[1/2, 3]"` (power-basis coordinates, lowest first) or a bare rational.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let coeffs = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner
                    .split(',')
                    .map(parse_rational)
                    .collect::<Result<Vec<_>>>()?
            };
            return self.element(coeffs);
        }
        Ok(self.from_rational(parse_rational(t)?))
    }

    pub fn format_element(&self, a: &FieldElement) -> String {
        if self.degree() == 1 {
            return a.coeffs[0].to_string();
        }
        let parts: Vec<String> = a.coeffs.iter().map(|c| c.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }

    pub fn format_poly(&self) -> String {
        format_poly(&self.poly)
    }
}

impl Scalars for NumberField {
    type E = FieldElement;
    fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: vec![BigRational::zero(); self.degree()],
        }
    }
    fn one(&self) -> FieldElement {
        self.from_int(1)
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.mul_elem(a, b)
    }
    fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        self.inv_elem(a)
    }
    fn is_zero(&self, a: &FieldElement) -> bool {
        a.is_zero()
    }
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational value, if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let err = || Error::Parse(format!("invalid rational '{t}'"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip = ip.trim().trim_start_matches(['-', '+']);
        let ipv: BigInt = if ip.is_empty() {
            BigInt::zero()
        } else {
            ip.parse().map_err(|_| err())?
        };
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let fpv: BigInt = if fp.is_empty() {
            BigInt::zero()
        } else {
            fp.parse().map_err(|_| err())?
        };
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let v = BigRational::new(ipv * &den + fpv, den);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(BigRational::from_integer(n))
}

/// Parses `"x^2+1"`, `"x^3 - 2x + 5"`, `"2*x^2-x"`; any single-letter variable.
pub fn parse_poly(s: &str) -> Result<ZPoly> {
    let err = |m: &str| Error::Parse(format!("invalid polynomial '{s}': {m}"));
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty"));
    }
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
            terms.push(core::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut var: Option<char> = None;
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(r) => (-1, r),
            None => (1, term.strip_prefix('+').unwrap_or(&term)),
        };
        let pos = body.find(|c: char| c.is_ascii_alphabetic());
        let (coef, deg) = match pos {
            None => (body.parse::<BigInt>().map_err(|_| err("bad constant"))?, 0usize),
            Some(p) => {
                let v = body[p..].chars().next().expect("letter");
                if var.is_some_and(|w| w != v) {
                    return Err(err("mixed variables"));
                }
                var = Some(v);
                let cpart = body[..p].trim_end_matches('*');
                let coef = if cpart.is_empty() {
                    BigInt::one()
                } else {
                    cpart.parse::<BigInt>().map_err(|_| err("bad coefficient"))?
                };
                let rest = &body[p + v.len_utf8()..];
                let deg = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .ok_or_else(|| err("expected '^'"))?
                        .parse::<usize>()
                        .map_err(|_| err("bad exponent"))?
                };
                (coef, deg)
            }
        };
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, BigInt::zero());
        }
        coeffs[deg] += coef * sign;
    }
    Ok(coeffs)
}

pub fn format_poly(p: &[BigInt]) -> String {
    let mut out = String::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coef = if a.is_one() && i > 0 {
            String::new()
        } else {
            a.to_string()
        };
        out.push_str(&match i {
            0 => a.to_string(),
            1 => format!("{coef}x"),
            _ => format!("{coef}x^{i}"),
        });
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[x]/({})", format_poly(&self.poly))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qi() -> NumberField {
        NumberField::parse("x^2+1").unwrap()
    }

    #[test]
    fn char_poly_of_generator() {
        let k = NumberField::parse("x^3-2").unwrap();
        let c = k.char_poly(&k.generator());
        let want: Vec<BigRational> = [-2, 0, 0, 1].iter().map(|&x| BigRational::from_integer(x.into())).collect();
        assert_eq!(c, want);
        let two = k.char_poly(&k.from_int(2));
        assert_eq!(two[0], BigRational::from_integer((-8).into()));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(
            parse_poly("x^3 - 2x + 5").unwrap(),
            vec![BigInt::from(5), BigInt::from(-2), BigInt::zero(), BigInt::one()]
        );
        assert_eq!(parse_poly("2*t^2-t").unwrap().len(), 3);
        assert_eq!(format_poly(&parse_poly("x^2+1").unwrap()), "x^2 + 1");
        assert!(NumberField::parse("x^2-1").is_err());
        assert!(NumberField::parse("2x^2+1").is_err());
        let k = qi();
        let e = k.parse_element("[1/2, 3]").unwrap();
        assert_eq!(e.coeffs[0], BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.69").unwrap(), BigRational::new((-69).into(), 100.into()));
    }

    #[test]
    fn gaussian_arithmetic() {
        let k = qi();
        let a = k.from_ints(&[2, 1]).unwrap();
        assert_eq!(k.norm(&a), BigRational::from_integer(5.into()));
        let i = k.generator();
        assert_eq!(k.mul(&i, &i), k.from_int(-1));
        let inv = k.inv(&a).unwrap();
        assert_eq!(k.mul(&a, &inv), k.one());
        assert_eq!(k.pow(&a, -2).unwrap(), k.mul(&inv, &inv));
    }

    #[test]
    fn rational_field() {
        let q = NumberField::rationals();
        assert_eq!(q.degree(), 1);
        let a = q.parse_element("3/2").unwrap();
        assert_eq!(q.norm(&a), BigRational::new(3.into(), 2.into()));
        assert_eq!(q.generator(), q.from_int(0));
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
            let k = NumberField::parse("x^3-2").unwrap();
            let x = k.from_ints(&[a, b, 1]).unwrap();
            let y = k.from_ints(&[c, d, -1]).unwrap();
            prop_assert_eq!(k.norm(&k.mul(&x, &y)), k.norm(&x) * k.norm(&y));
        }
    }
}
