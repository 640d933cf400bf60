//! Weil heights of field elements and heights of vectors relative to an adelic
//! bundle, with per-place decompositions.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::bundle::AdelicBundle;
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField};
use crate::logreal::LogReal;
use crate::arith::valuation;
use crate::places::{archimedean_places, log_abs, places_above, support_primes, Place};
use crate::precision::PrecisionContext;

#[derive(Clone, Debug)]
pub struct PlaceContribution {
    pub place: Place,
    pub n_v: usize,
    /// `n_v` times the local logarithmic term.
    pub value: LogReal,
}

#[derive(Clone, Debug)]
pub struct HeightReport {
    pub value: LogReal,
    pub per_place: Vec<PlaceContribution>,
    /// Combined contribution of all places above a ramified (or non-monogenic) prime.
    pub ramified: Vec<(u64, LogReal)>,
}

impl HeightReport {
    fn from_parts(
        k: &NumberField,
        per_place: Vec<PlaceContribution>,
        ramified: Vec<(u64, LogReal)>,
        prec: u32,
    ) -> HeightReport {
        let total = per_place
            .iter()
            .map(|c| &c.value)
            .chain(ramified.iter().map(|(_, l)| l))
            .fold(LogReal::zero(prec), |acc, c| acc.add(c));
        HeightReport {
            value: total.scale(&BigRational::new(BigInt::one(), BigInt::from(k.degree()))),
            per_place,
            ramified,
        }
    }
}

/// `h(x) = (1/D) sum_v n_v log max(1, |x|_v)`.
pub fn weil_height(k: &NumberField, x: &FieldElement, ctx: &PrecisionContext) -> Result<HeightReport> {
    let prec = ctx.arch_bits;
    let mut per_place = Vec::new();
    if x.is_zero() {
        return Ok(HeightReport::from_parts(k, per_place, Vec::new(), prec));
    }
    let zero = LogReal::zero(prec);
    for v in archimedean_places(k, ctx)? {
        let l = log_abs(k, x, &v, ctx)?.max(&zero);
        per_place.push(PlaceContribution {
            n_v: v.local_degree(),
            value: l.scale_int(v.local_degree() as i64),
            place: v,
        });
    }
    let mut ramified = Vec::new();
    for p in support_primes(k, x)? {
        match places_above(k, p) {
            Ok(places) => {
                for v in places {
                    let val = v.valuation(k, x)?.expect("nonzero");
                    if val < 0 {
                        let nv = v.local_degree();
                        per_place.push(PlaceContribution {
                            value: LogReal::log_prime_multiple(
                                &BigUint::from(p),
                                BigRational::from_integer(BigInt::from(-val * nv as i64)),
                                prec,
                            ),
                            n_v: nv,
                            place: v,
                        });
                    }
                }
            }
            Err(Error::RamifiedOrNonMonogenic(_)) => {
                let e = leading_valuation(k, x, p);
                if e > 0 {
                    ramified.push((
                        p,
                        LogReal::log_prime_multiple(
                            &BigUint::from(p),
                            BigRational::from_integer(BigInt::from(e)),
                            prec,
                        ),
                    ));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(HeightReport::from_parts(k, per_place, ramified, prec))
}

/// `sum_{v | p} n_v max(0, -v(x))`, read off the leading coefficient of the primitive
/// integral characteristic polynomial of `x`.
fn leading_valuation(k: &NumberField, x: &FieldElement, p: u64) -> i64 {
    let c = k.char_poly(x);
    let den = c.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = c
        .iter()
        .map(|q| (q * BigRational::from_integer(den.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
    let lead = ints.last().expect("monic") / g;
    valuation(&lead, p).unwrap_or(0) as i64
}

/// `h_E(x) = (1/D) sum_v n_v log ||x||_v`, with `h_E(0) = 0`.
pub fn vector_height(x: &[FieldElement], b: &AdelicBundle, ctx: &PrecisionContext) -> Result<HeightReport> {
    let k = b.field();
    let prec = ctx.arch_bits;
    if x.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: x.len(),
        });
    }
    let mut per_place = Vec::new();
    if x.iter().all(|c| c.is_zero()) {
        return Ok(HeightReport::from_parts(k, per_place, Vec::new(), prec));
    }
    let mut places = archimedean_places(k, ctx)?;
    for (v, _) in b.deviations() {
        if !v.is_archimedean() {
            places.push(v.clone());
        }
    }
    let mut primes: Vec<u64> = Vec::new();
    for c in x {
        for p in support_primes(k, c)? {
            if !primes.contains(&p) {
                primes.push(p);
            }
        }
    }
    primes.sort_unstable();
    for p in primes {
        for v in places_above(k, p)? {
            if !places.contains(&v) {
                places.push(v);
            }
        }
    }
    for v in places {
        let l = b.log_norm_at(x, &v, ctx)?;
        if v.is_archimedean() || !l.is_exact_zero() {
            per_place.push(PlaceContribution {
                n_v: v.local_degree(),
                value: l.scale_int(v.local_degree() as i64),
                place: v,
            });
        }
    }
    Ok(HeightReport::from_parts(k, per_place, Vec::new(), prec))
}

/// Checks `|h(x^m) - m h(x)| <= 1e-20`, retrying once at doubled precision.
pub fn height_scaling_check(k: &NumberField, x: &FieldElement, m: u32, ctx: &PrecisionContext) -> Result<bool> {
    if x.is_zero() {
        return Err(Error::Invalid("height scaling needs x != 0".into()));
    }
    let xm = k.pow(x, m as i64).expect("nonzero");
    let attempt = |c: &PrecisionContext| -> Result<bool> {
        let lhs = weil_height(k, &xm, c)?.value;
        let rhs = weil_height(k, x, c)?.value.scale_int(m as i64);
        let diff = lhs.sub(&rhs);
        Ok(diff.is_exact_zero() || diff.to_ball(c.arch_bits).abs_upper().to_f64() <= 1e-20)
    };
    if attempt(ctx)? {
        return Ok(true);
    }
    attempt(&ctx.doubled())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::cmp::Ordering;
    use proptest::prelude::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(100, 20).unwrap()
    }

    fn h(k: &NumberField, s: &str) -> LogReal {
        weil_height(k, &k.parse_element(s).unwrap(), &ctx()).unwrap().value
    }

    fn log(n: u64) -> LogReal {
        LogReal::log_int(n, 100)
    }

    #[test]
    fn rational_heights() {
        let q = NumberField::rationals();
        assert!(h(&q, "0").is_exact_zero());
        assert!(h(&q, "1").is_exact_zero());
        assert_eq!(h(&q, "2").try_cmp(&log(2)), Some(Ordering::Equal));
        assert_eq!(h(&q, "3/2").try_cmp(&log(3)), Some(Ordering::Equal));
        assert_eq!(h(&q, "-5/12").try_cmp(&log(12)), Some(Ordering::Equal));
    }

    #[test]
    fn vector_heights() {
        let q = NumberField::rationals();
        let b = AdelicBundle::standard(q.clone(), 2);
        let v = |a: i64, c: i64| [q.from_int(a), q.from_int(c)];
        let hv = |x: &[FieldElement]| vector_height(x, &b, &ctx()).unwrap().value;
        assert!(hv(&v(1, 0)).is_exact_zero());
        assert_eq!(hv(&v(3, 4)).try_cmp(&log(5)), Some(Ordering::Equal));
        assert_eq!(hv(&v(2, 2)).try_cmp(&log(2).half()), Some(Ordering::Equal));
        assert!(hv(&v(0, 0)).is_exact_zero());
    }

    #[test]
    fn scaling_examples() {
        let q = NumberField::rationals();
        for (s, m) in [("2", 3), ("1", 5), ("3/2", 2)] {
            assert!(height_scaling_check(&q, &q.parse_element(s).unwrap(), m, &ctx()).unwrap());
        }
        let k = NumberField::parse("x^3-2").unwrap();
        let a = k.from_ints(&[1, 1, 3]).unwrap();
        assert!(height_scaling_check(&k, &a, 3, &ctx()).unwrap());
    }

    #[test]
    fn gaussian_conjugates() {
        let k = NumberField::parse("x^2+1").unwrap();
        let a = h(&k, "[3/5, 4/5]");
        let b = h(&k, "[3/5, -4/5]");
        assert_eq!(a.try_cmp(&b), Some(Ordering::Equal));
        assert_eq!(a.try_cmp(&log(5).half()), Some(Ordering::Equal));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn inverse_and_submultiplicative(a in -40i64..40, b in 1i64..40, c in -9i64..9, d in 1i64..9) {
            prop_assume!(a != 0 && c != 0);
            let k = NumberField::parse("x^2+1").unwrap();
            let x = k.element(vec![BigRational::new(a.into(), b.into()), BigRational::new(c.into(), d.into())]).unwrap();
            let y = k.from_ints(&[c, 1]).unwrap();
            let hx = weil_height(&k, &x, &ctx()).unwrap().value;
            let hinv = weil_height(&k, &k.inv_elem(&x).unwrap(), &ctx()).unwrap().value;
            prop_assert!(hx.sub(&hinv).to_ball(100).abs_upper().to_f64() <= 1e-20);
            let hy = weil_height(&k, &y, &ctx()).unwrap().value;
            let hxy = weil_height(&k, &k.mul_elem(&x, &y), &ctx()).unwrap().value;
            prop_assert!(hx.add(&hy).sub(&hxy).to_ball(100).upper().to_f64() >= -1e-20);
        }
    }
}
