//! The acceptance suite: eleven criteria, each checked against an independent oracle.

use std::time::{Duration, Instant};

use adelic_baker_core::ball::{ComplexBall, Dyadic};
use adelic_baker_core::baker::{
    check_param_properties, compute_params, delta_bound_holds, delta_lcm, u_minus1_from_x_condition, BoundInstance,
    BoundKind,
};
use adelic_baker_core::bundle::sym_power_norm;
use adelic_baker_core::heights::weil_height;
use adelic_baker_core::linform::{verify_instance, HypothesisStatus, LinFormInstance, USpec};
use adelic_baker_core::padic::PadicNumber;
use adelic_baker_core::places::{find_place, product_formula_residual};
use adelic_baker_core::siegel::{
    absolute_siegel_witness, approx_siegel_search, classical_bound, classical_siegel_search, TwistedBundle,
};
use adelic_baker_core::{AdelicBundle, Ball, FieldElement, LogReal, NumberField, PrecisionContext};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle;

pub const DEFAULT_SEED: u64 = 20_240_601;
const MC_SAMPLES: u64 = 1_000_000;
const MC_REL_TOL: f64 = 0.02;
const MIN_BOX_FILL: f64 = 0.05;
const HEIGHT_TOL: f64 = 1e-20;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {:>7.2}s  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Check = fn(u64) -> Result<String, String>;

pub const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "product formula", product_formula),
    (2, "height identities", height_identities),
    (3, "degree two ways", degree_two_ways),
    (4, "symmetric-power norms", symmetric_power_norms),
    (5, "slope difference", slope_difference),
    (6, "Siegel witnesses", siegel_witnesses),
    (7, "Liouville inequality", liouville),
    (8, "delta_l(h)", delta),
    (9, "parameter machinery", parameters),
    (10, "p-adic exp and log", padic_analysis),
    (11, "end-to-end verification", end_to_end),
];

pub fn run_one(id: u32, seed: u64) -> Option<CriterionResult> {
    let (id, name, f) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let out = f(seed);
    let elapsed = start.elapsed();
    Some(match out {
        Ok(detail) => CriterionResult {
            id: *id,
            name,
            pass: true,
            detail,
            elapsed,
        },
        Err(detail) => CriterionResult {
            id: *id,
            name,
            pass: false,
            detail,
            elapsed,
        },
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_one(c.0, seed)).collect()
}

fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ id.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn ctx100() -> PrecisionContext {
    PrecisionContext::new(100, 30).expect("valid")
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err_str<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn abs_upper(l: &LogReal) -> f64 {
    l.to_ball(l.prec()).abs_upper().to_f64()
}

fn gaussian_field() -> NumberField {
    NumberField::parse("x^2+1").expect("valid polynomial")
}

const SMALL_PRIMES: [i64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for _ in 0..rng.random_range(0..4) {
        num *= *SMALL_PRIMES.choose(rng).expect("nonempty");
    }
    for _ in 0..rng.random_range(0..4) {
        den *= *SMALL_PRIMES.choose(rng).expect("nonempty");
    }
    if rng.random_bool(0.5) {
        num = -num;
    }
    BigRational::new(num, den)
}

/// `a + b i` with odd norm whose prime factors are at most 97.
fn random_gaussian_integer<R: Rng>(rng: &mut R) -> (i64, i64) {
    loop {
        let a: i64 = rng.random_range(-12..=12);
        let b: i64 = rng.random_range(-12..=12);
        let n = a * a + b * b;
        if n == 0 || n % 2 == 0 {
            continue;
        }
        let mut m = n;
        for p in SMALL_PRIMES {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return (a, b);
        }
    }
}

fn random_gaussian<R: Rng>(k: &NumberField, rng: &mut R) -> FieldElement {
    let (a, b) = random_gaussian_integer(rng);
    let (c, d) = random_gaussian_integer(rng);
    let num = k.from_ints(&[a, b]).expect("degree two");
    let den = k.from_ints(&[c, d]).expect("degree two");
    k.mul_elem(&num, &k.inv_elem(&den).expect("nonzero"))
}

fn product_formula(seed: u64) -> Result<String, String> {
    let start = Instant::now();
    let mut rng = rng_for(seed, 1);
    let ctx = ctx100();
    let qf = NumberField::rationals();
    let kf = gaussian_field();
    let mut worst = 0f64;
    for _ in 0..100 {
        let x = qf.from_rational(random_rational(&mut rng));
        worst = worst.max(product_formula_residual(&qf, &x, &ctx).map_err(err_str)?);
        let y = random_gaussian(&kf, &mut rng);
        worst = worst.max(product_formula_residual(&kf, &y, &ctx).map_err(err_str)?);
    }
    let t = start.elapsed().as_secs_f64();
    ensure(worst <= HEIGHT_TOL, || format!("residual {worst:e} exceeds 1e-20"))?;
    ensure(t < 5.0, || format!("took {t:.2}s, limit 5s"))?;
    Ok(format!("200 elements, max residual {worst:.1e}"))
}

fn height_identities(seed: u64) -> Result<String, String> {
    let mut rng = rng_for(seed, 2);
    let ctx = ctx100();
    let qf = NumberField::rationals();
    let kf = gaussian_field();
    let h = |k: &NumberField, x: &FieldElement| weil_height(k, x, &ctx).map(|r| r.value).map_err(err_str);
    let mut worst = 0f64;
    let mut count = 0;
    for i in 0..200 {
        let (k, x, y) = if i % 2 == 0 {
            (
                &qf,
                qf.from_rational(random_rational(&mut rng)),
                qf.from_rational(random_rational(&mut rng)),
            )
        } else {
            (&kf, random_gaussian(&kf, &mut rng), random_gaussian(&kf, &mut rng))
        };
        let m: i64 = rng.random_range(0..6);
        let hx = h(k, &x)?;
        let hxm = h(k, &k.pow(&x, m).expect("nonzero"))?;
        worst = worst.max(abs_upper(&hxm.sub(&hx.scale_int(m))));
        let hinv = h(k, &k.inv_elem(&x).expect("nonzero"))?;
        worst = worst.max(abs_upper(&hinv.sub(&hx)));
        let hy = h(k, &y)?;
        let hxy = h(k, &k.mul_elem(&x, &y))?;
        let slack = hx.add(&hy).sub(&hxy).to_ball(ctx.arch_bits);
        ensure(slack.upper().to_f64() >= -HEIGHT_TOL, || {
            format!("h(xy) > h(x) + h(y) for {} and {}", k.format_element(&x), k.format_element(&y))
        })?;
        if let Some(r) = x.as_rational() {
            let direct = oracle::rational_height_f64(&r);
            ensure((direct - hx.to_f64()).abs() <= 1e-12 * direct.max(1.0), || {
                format!("h({r}) disagrees with log max(|p|,|q|)")
            })?;
        }
        count += 1;
    }
    ensure(worst <= HEIGHT_TOL, || format!("identity defect {worst:e} exceeds 1e-20"))?;
    Ok(format!("{count} elements, max defect {worst:.1e}"))
}

fn rational_matrix<R: Rng>(rng: &mut R, nu: usize) -> Vec<Vec<BigRational>> {
    (0..nu)
        .map(|_| {
            (0..nu)
                .map(|_| q(rng.random_range(-4..=4), rng.random_range(1..=3)))
                .collect()
        })
        .collect()
}

fn det_f64(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

fn to_f64_matrix(m: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|r| r.iter().map(|x| x.to_f64().expect("finite")).collect())
        .collect()
}

fn to_field_matrix(k: &NumberField, m: &[Vec<BigRational>]) -> Vec<Vec<FieldElement>> {
    m.iter()
        .map(|r| r.iter().map(|x| k.from_rational(x.clone())).collect())
        .collect()
}

fn rel_close(est: f64, exact: f64, tol: f64) -> bool {
    (est - exact).abs() <= tol * exact.abs()
}

/// Integer matrices over `Z_p` whose determinant has valuation at most `max_v`.
fn padic_matrix<R: Rng>(rng: &mut R, nu: usize, p: u64, max_v: i64) -> Vec<Vec<BigRational>> {
    loop {
        let m: Vec<Vec<BigRational>> = (0..nu)
            .map(|_| (0..nu).map(|_| q(rng.random_range(-4..=4), 1)).collect())
            .collect();
        let d = det_f64(&to_f64_matrix(&m)).round() as i64;
        if d == 0 {
            continue;
        }
        if oracle::vp(&q(d, 1), p).is_some_and(|v| (1..=max_v).contains(&v)) {
            return m;
        }
    }
}

fn degree_two_ways(seed: u64) -> Result<String, String> {
    let mut rng = rng_for(seed, 3);
    let ctx = ctx100();
    let k = NumberField::rationals();
    let inf = find_place(&k, "inf", &ctx).map_err(err_str)?;
    let mut worst = 0f64;
    let mut arch = 0;
    let mut thin = 0;
    while arch < 20 {
        let nu = rng.random_range(1..=3);
        let m = rational_matrix(&mut rng, nu);
        let mf = to_f64_matrix(&m);
        let d = det_f64(&mf).abs();
        if d == 0.0 || !(0.5..=4.0).contains(&d.ln().abs()) {
            continue;
        }
        let b = AdelicBundle::standard(k.clone(), nu)
            .with_matrix(inf.clone(), to_field_matrix(&k, &m))
            .map_err(err_str)?;
        let deg = b.degree(&ctx).map_err(err_str)?.to_f64();
        let (est, fill) = oracle::mc_log_volume_ratio(&mf, MC_SAMPLES, &mut rng).ok_or("empty Monte Carlo sample")?;
        if fill < MIN_BOX_FILL {
            thin += 1;
            continue;
        }
        let rel = (est - deg).abs() / deg.abs();
        worst = worst.max(rel);
        ensure(rel_close(est, deg, MC_REL_TOL), || {
            format!("degree {deg:.5} vs volume ratio {est:.5} for {m:?}")
        })?;
        arch += 1;
    }
    let mut finite = 0;
    for i in 0..20 {
        let (p, big_n) = if i % 2 == 0 { (2u64, 2u32) } else { (3, 1) };
        let nu = rng.random_range(1..=3);
        let m = padic_matrix(&mut rng, nu, p, big_n as i64);
        let v = find_place(&k, &p.to_string(), &ctx).map_err(err_str)?;
        let b = AdelicBundle::standard(k.clone(), nu)
            .with_matrix(v, to_field_matrix(&k, &m))
            .map_err(err_str)?;
        let deg = b.degree(&ctx).map_err(err_str)?;
        let count = oracle::lattice_count(&m, nu, p, big_n);
        let e = oracle::exact_log_p_ratio(count, p, big_n, nu).ok_or("lattice count is not a power of p")?;
        let exact = LogReal::log_int(p, ctx.arch_bits).scale_int(e);
        ensure(abs_upper(&deg.sub(&exact)) <= HEIGHT_TOL, || {
            format!("degree {deg} vs lattice count p^{e} at p = {p}")
        })?;
        finite += 1;
    }
    Ok(format!(
        "{arch} archimedean (max rel. err {:.2}%, {thin} thin ellipsoids skipped), {finite} finite exact",
        worst * 100.0
    ))
}

fn symmetric_power_norms(seed: u64) -> Result<String, String> {
    let mut rng = rng_for(seed, 4);
    let ctx = PrecisionContext::default();
    let k = NumberField::rationals();
    let inf = find_place(&k, "inf", &ctx).map_err(err_str)?;
    let mut worst = 0f64;
    let mut count = 0;
    for nu in 1..=3usize {
        for ell in 1..=3u32 {
            let monos = oracle::monomials(nu, ell);
            let mut cases: Vec<Vec<(Vec<u32>, i64)>> = monos.iter().map(|m| vec![(m.clone(), 1)]).collect();
            let mixed: Vec<(Vec<u32>, i64)> = monos
                .iter()
                .map(|m| (m.clone(), rng.random_range(-3..=3)))
                .filter(|(_, c)| *c != 0)
                .collect();
            if !mixed.is_empty() {
                cases.push(mixed);
            }
            for case in cases {
                let coeffs: Vec<(Vec<u32>, FieldElement)> =
                    case.iter().map(|(m, c)| (m.clone(), k.from_int(*c))).collect();
                let n = sym_power_norm(&k, &coeffs, ell, &inf, &ctx).map_err(err_str)?.norm;
                let fc: Vec<(Vec<u32>, f64)> = case.iter().map(|(m, c)| (m.clone(), *c as f64)).collect();
                let brute = oracle::sym_norm_by_projection(nu, ell, &fc).sqrt();
                let rel = (n.to_f64() - brute).abs() / brute;
                worst = worst.max(rel);
                ensure(rel <= 1e-10, || format!("nu = {nu}, l = {ell}, {case:?}: {n} vs {brute}"))?;
                count += 1;
            }
        }
    }
    let e1e2 = sym_power_norm(&k, &[(vec![1, 1], k.from_int(1))], 2, &inf, &ctx).map_err(err_str)?.norm;
    let sq = e1e2.mul_ball(&e1e2);
    let half = Dyadic::from_f64(0.5).expect("finite");
    ensure(sq.contains(&half) && sq.radius_f64() < 1e-30, || format!("|e1 e2|^2 = {sq}, expected 1/2"))?;
    Ok(format!("{count} cases, max rel. err {worst:.1e}; |e1e2| = 1/sqrt 2"))
}

fn slope_difference(seed: u64) -> Result<String, String> {
    let mut rng = rng_for(seed, 5);
    let ctx = ctx100();
    let k = NumberField::rationals();
    let inf = find_place(&k, "inf", &ctx).map_err(err_str)?;
    let mut worst = 0f64;
    let mut arch = 0;
    while arch < 20 {
        let nu = rng.random_range(1..=3usize);
        let mu = rng.random_range(1..=nu);
        let a: Vec<Vec<BigRational>> = (0..mu)
            .map(|_| (0..nu).map(|_| q(rng.random_range(-3..=3), rng.random_range(1..=2))).collect())
            .collect();
        let alpha = q(rng.random_range(1..=6), rng.random_range(1..=4));
        let tb = TwistedBundle::new(
            AdelicBundle::standard(k.clone(), nu),
            inf.clone(),
            k.from_rational(alpha.clone()),
            to_field_matrix(&k, &a),
        )
        .map_err(err_str)?;
        let exact = match tb.slope_difference(&ctx) {
            Ok(v) => v.to_f64(),
            Err(_) => continue,
        };
        if exact > -0.05 || exact < -3.0 {
            continue;
        }
        let est = oracle::mc_log_twisted_ratio(&to_f64_matrix(&a), alpha.to_f64().expect("finite"), nu, MC_SAMPLES, &mut rng)
            .ok_or("empty Monte Carlo sample")?
            / nu as f64;
        let rel = (est - exact).abs() / exact.abs();
        worst = worst.max(rel);
        ensure(rel_close(est, exact, MC_REL_TOL), || {
            format!("slope difference {exact:.5} vs Monte Carlo {est:.5}")
        })?;
        arch += 1;
    }
    let mut finite = 0;
    for i in 0..20 {
        let (p, big_n) = if i % 2 == 0 { (2u64, 2u32) } else { (3, 1) };
        let nu = rng.random_range(1..=3usize);
        let mu = rng.random_range(1..=nu);
        let a: Vec<Vec<BigRational>> = (0..mu)
            .map(|_| (0..nu).map(|_| q(rng.random_range(-4..=4), 1)).collect())
            .collect();
        let kpow = rng.random_range(0..=big_n as i64);
        let alpha = BigRational::new(BigInt::one(), BigInt::from(p).pow(kpow as u32));
        let v = find_place(&k, &p.to_string(), &ctx).map_err(err_str)?;
        let tb = TwistedBundle::new(
            AdelicBundle::standard(k.clone(), nu),
            v,
            k.from_rational(alpha.clone()),
            to_field_matrix(&k, &a),
        )
        .map_err(err_str)?;
        let exact = tb.slope_difference(&ctx).map_err(err_str)?;
        let mut rows: Vec<Vec<BigRational>> = (0..nu)
            .map(|r| (0..nu).map(|c| if r == c { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
        rows.extend(a.iter().map(|r| r.iter().map(|x| x * &alpha).collect::<Vec<_>>()));
        let count = oracle::lattice_count(&rows, nu, p, big_n);
        let e = oracle::exact_log_p_ratio(count, p, big_n, nu).ok_or("lattice count is not a power of p")?;
        let expect = LogReal::log_int(p, ctx.arch_bits).scale(&q(e, nu as i64));
        ensure(abs_upper(&exact.sub(&expect)) <= HEIGHT_TOL, || {
            format!("slope difference {exact} vs lattice exponent {e}/{nu} at p = {p}")
        })?;
        finite += 1;
    }
    let mut ineq = 0;
    while ineq < 100 {
        let nu = rng.random_range(1..=3usize);
        let mu = rng.random_range(1..=3usize);
        let a: Vec<Vec<BigRational>> = (0..mu)
            .map(|_| (0..nu).map(|_| q(rng.random_range(-5..=5), rng.random_range(1..=3))).collect())
            .collect();
        let alpha = q(rng.random_range(-8..=8), rng.random_range(1..=5));
        let v = if rng.random_bool(0.7) {
            inf.clone()
        } else {
            find_place(&k, &["2", "3", "5"].choose(&mut rng).expect("nonempty").to_string(), &ctx).map_err(err_str)?
        };
        let tb = TwistedBundle::new(AdelicBundle::standard(k.clone(), nu), v, k.from_rational(alpha), to_field_matrix(&k, &a))
            .map_err(err_str)?;
        let (Ok(sd), Ok(op)) = (tb.slope_difference(&ctx), tb.operator_norm_upper(&ctx)) else {
            continue;
        };
        let lb = tb.slope_difference_lower_bound(&op, &ctx).map_err(err_str)?;
        let gap = sd.sub(&lb).to_ball(ctx.arch_bits);
        ensure(gap.upper().to_f64() >= -1e-25, || format!("slope difference {sd} below bound {lb}"))?;
        ineq += 1;
    }
    Ok(format!(
        "{arch} archimedean (max rel. err {:.2}%), {finite} finite exact, {ineq} inequalities",
        worst * 100.0
    ))
}

fn siegel_witnesses(seed: u64) -> Result<String, String> {
    let mut rng = rng_for(seed, 6);
    let ctx = PrecisionContext::default();
    let mut classical = 0;
    let mut skipped = 0;
    while classical < 200 {
        let nu = rng.random_range(2..=6usize);
        let mu = rng.random_range(1..nu);
        let a: Vec<Vec<i64>> = (0..mu)
            .map(|_| (0..nu).map(|_| rng.random_range(-9..=9)).collect())
            .collect();
        let Some(min_norm) = oracle::minimal_solution_norm(&a, nu, 3_000_000) else {
            skipped += 1;
            continue;
        };
        let amax = a.iter().flatten().map(|c| c.abs()).max().unwrap_or(0);
        let (bound, floor) = classical_bound(mu, nu, &BigInt::from(amax), 64).map_err(err_str)?;
        ensure(BigInt::from(min_norm) <= floor, || {
            format!("minimal solution {min_norm} exceeds 1 + (nu A)^(mu/(nu-mu)) = {bound} for {a:?}")
        })?;
        let big: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&c| BigInt::from(c)).collect()).collect();
        let w = classical_siegel_search(&big, nu, 10_000_000).map_err(err_str)?;
        let x: Vec<i64> = w.x.iter().map(|c| c.to_i64().expect("small")).collect();
        ensure(a.iter().all(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum::<i64>() == 0), || {
            format!("witness {x:?} does not solve {a:?}")
        })?;
        let sup = x.iter().map(|c| c.abs()).max().unwrap_or(0);
        ensure(sup == min_norm, || format!("witness {x:?} is not minimal ({min_norm}) for {a:?}"))?;
        classical += 1;
    }
    let mut approx = 0;
    for _ in 0..50 {
        let entries: Vec<BigRational> = (0..3).map(|_| q(rng.random_range(-20..=20), 20)).collect();
        let h: u64 = rng.random_range(2..=6);
        let amax: f64 = entries.iter().map(|e| e.abs().to_f64().expect("finite")).sum::<f64>().max(0.05);
        let hf = h as f64;
        let eps_min = 2.0 * hf * amax / ((hf + 1.0).powf(1.5) - 1.0);
        let eps = BigRational::from_float(eps_min * 1.1 + 1e-6).expect("finite");
        let a = vec![entries.iter().map(|e| ComplexBall::from_rational(e, 128)).collect::<Vec<_>>()];
        let w = approx_siegel_search(&a, h, &Ball::from_rational(&eps, 128), 10_000_000).map_err(err_str)?;
        let val = w
            .x
            .iter()
            .zip(&entries)
            .fold(BigRational::zero(), |acc, (x, e)| acc + e * BigRational::from_integer(x.clone()));
        ensure(w.x.iter().any(|c| !c.is_zero()), || "zero witness".into())?;
        ensure(w.x.iter().all(|c| c.abs() <= BigInt::from(h)), || format!("witness {:?} exceeds H = {h}", w.x))?;
        ensure(val.abs() <= eps, || format!("residual {val} exceeds eps {eps}"))?;
        approx += 1;
    }
    let k = NumberField::rationals();
    let inf = find_place(&k, "inf", &ctx).map_err(err_str)?;
    let mut absolute = 0;
    for _ in 0..50 {
        let nu = rng.random_range(1..=4usize);
        let d: Vec<BigRational> = (0..nu).map(|_| q(rng.random_range(1..=9), rng.random_range(1..=9))).collect();
        let b = AdelicBundle::standard(k.clone(), nu).with_diagonal(inf.clone(), &d).map_err(err_str)?;
        let w = absolute_siegel_witness(&b, 50, &ctx).map_err(err_str)?;
        let df: Vec<f64> = d.iter().map(|x| x.to_f64().expect("finite")).collect();
        let x: Vec<f64> = w.x.iter().map(|c| c.to_f64().expect("finite")).collect();
        let g = w.x.iter().fold(BigInt::zero(), |acc, c| num_integer::Integer::gcd(&acc, c));
        let h = x.iter().zip(&df).map(|(a, b)| (a * b).powi(2)).sum::<f64>().sqrt().ln() - g.to_f64().expect("finite").ln();
        let slope = -df.iter().map(|v| v.ln()).sum::<f64>() / nu as f64;
        let bound = -slope + 0.5 * (nu as f64).ln();
        ensure(h <= bound + 1e-12, || format!("witness {:?} has height {h} > {bound}", w.x))?;
        absolute += 1;
    }
    Ok(format!(
        "{classical} classical ({skipped} beyond desk scale), {approx} approximate, {absolute} absolute"
    ))
}

fn liouville(seed: u64) -> Result<String, String> {
    let mut rng = rng_for(seed, 7);
    let ctx = ctx100();
    let k = NumberField::rationals();
    let inf = find_place(&k, "inf", &ctx).map_err(err_str)?;
    let mut tight = 0;
    for _ in 0..100 {
        let nu = rng.random_range(1..=4usize);
        let d: Vec<BigRational> = (0..nu).map(|_| q(rng.random_range(1..=12), rng.random_range(1..=12))).collect();
        let mut b = AdelicBundle::standard(k.clone(), nu).with_diagonal(inf.clone(), &d).map_err(err_str)?;
        let mut dp = vec![BigRational::one(); nu];
        if rng.random_bool(0.5) {
            let p = *[2u64, 3, 5].choose(&mut rng).expect("nonempty");
            dp = (0..nu).map(|_| BigRational::from_integer(BigInt::from(p).pow(rng.random_range(0..3)))).collect();
            let v = find_place(&k, &p.to_string(), &ctx).map_err(err_str)?;
            b = b.with_diagonal(v, &dp).map_err(err_str)?;
        }
        let x: Vec<i64> = loop {
            let x: Vec<i64> = (0..nu).map(|_| rng.random_range(-6..=6)).collect();
            if x.iter().any(|&c| c != 0) {
                break x;
            }
        };
        let xe: Vec<FieldElement> = x.iter().map(|&c| k.from_int(c)).collect();
        ensure(
            adelic_baker_core::bundle::liouville_check(&b, &xe, &ctx).map_err(err_str)?,
            || format!("Liouville fails for x = {x:?}"),
        )?;
        // line slopes of a diagonal bundle bound every sub-bundle slope
        let line = |i: usize| -> f64 { -d[i].to_f64().expect("finite").ln() - p_adic_log_abs(&dp[i]) };
        let mu_max = (0..nu).map(line).fold(f64::MIN, f64::max);
        let h = adelic_baker_core::heights::vector_height(&xe, &b, &ctx).map_err(err_str)?.value.to_f64();
        ensure(h >= -mu_max - 1e-12, || format!("h = {h} < -mu_max = {}", -mu_max))?;
        if (h + mu_max).abs() < 1e-9 {
            tight += 1;
        }
    }
    Ok(format!("100 pairs, {tight} at equality"))
}

/// `log |c|_p` for `c = p^k`.
fn p_adic_log_abs(c: &BigRational) -> f64 {
    if c.is_one() {
        return 0.0;
    }
    -c.to_f64().expect("finite").ln()
}

fn delta(_seed: u64) -> Result<String, String> {
    let mut table = vec![vec![BigUint::one(); 7]; 27];
    for l in 1..=26u64 {
        for h in 1..=6u64 {
            let d = delta_lcm(l, h).map_err(err_str)?;
            let brute = oracle::delta_by_valuations(l, h);
            ensure(d == brute, || format!("delta_{l}({h}) = {d}, brute force {brute}"))?;
            table[l as usize][h as usize] = d;
        }
    }
    for l in 1..=25u64 {
        for h in 1..=5u64 {
            let d = &table[l as usize][h as usize];
            ensure(delta_bound_holds(l, h, d), || format!("delta_{l}({h}) > (4h)^l"))?;
            ensure(*d <= BigUint::from(4 * h).pow(l as u32), || format!("delta_{l}({h}) > (4h)^l by direct comparison"))?;
            ensure((&table[l as usize + 1][h as usize] % d).is_zero(), || format!("delta_{l}({h}) does not divide delta_{}({h})", l + 1))?;
            ensure((&table[l as usize][h as usize + 1] % d).is_zero(), || format!("delta_{l}({h}) does not divide delta_{l}({})", h + 1))?;
        }
    }
    ensure(table[4][1] == BigUint::from(12u32), || format!("delta_4(1) = {}", table[4][1]))?;
    Ok("l <= 25, h <= 5 match brute force; delta_4(1) = 12".into())
}

fn log_frak_e(p: u64, prec: u32) -> LogReal {
    let v = if p == 2 { 3 } else { 1 };
    LogReal::log_prime_multiple(&BigUint::from(p), q(v * (p as i64 - 1) - 2, p as i64 - 1), prec)
}

pub fn parameter_grid(prec: u32) -> Vec<BoundInstance> {
    let lr = |v: i64| LogReal::from_rational(&q(v, 1), prec);
    let mut out = Vec::new();
    for n in 1..=3usize {
        for t in 1..=n {
            for d in [1u64, 2, 5, 10] {
                for la in [1i64, 10, 100] {
                    for lb in [1i64, 50] {
                        for place in [None, Some(2u64), Some(101)] {
                            for beta10 in [false, true] {
                                let log_a = vec![lr(la); n];
                                let mut inst = match place {
                                    None => BoundInstance::archimedean(n, t, d, log_a, lr(lb)),
                                    Some(p) => BoundInstance::ultrametric(n, t, d, p, log_frak_e(p, prec), log_a, lr(lb)),
                                };
                                inst.beta10_nonzero = beta10;
                                out.push(inst);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn parameters(_seed: u64) -> Result<String, String> {
    let prec = 128;
    let grid = parameter_grid(prec);
    let mut worst = 0f64;
    for inst in &grid {
        let ps = compute_params(inst, prec).map_err(err_str)?;
        let props = check_param_properties(&ps, inst);
        ensure(props.all(), || format!("{props:?} for n = {}, t = {}, D = {}", inst.n, inst.t, inst.d))?;
        let alt = u_minus1_from_x_condition(inst, prec).map_err(err_str)?;
        let diff = ps.u_minus1.log_magnitude().to_ball(prec).sub_ball(&alt).abs_upper().to_f64();
        worst = worst.max(diff);
        ensure(diff < 1e-12, || format!("U_-1 differs by {diff:e} from the x = 1 condition"))?;
    }
    Ok(format!("{} grid points, max U_-1 defect {worst:.1e}", grid.len()))
}

fn padic_analysis(seed: u64) -> Result<String, String> {
    let mut rng = rng_for(seed, 10);
    let n = 30i64;
    let mut count = 0;
    for p in [2u64, 3, 5, 7] {
        let min_v = if p == 2 { 2 } else { 1 };
        for _ in 0..100 {
            let v = rng.random_range(min_v..=4u32);
            let unit = loop {
                let u: i64 = rng.random_range(1..1_000_000);
                if u % p as i64 != 0 {
                    break u;
                }
            };
            let den = loop {
                let d: i64 = rng.random_range(1..1000);
                if d % p as i64 != 0 {
                    break d;
                }
            };
            let sign = if rng.random_bool(0.5) { -1 } else { 1 };
            let z = BigRational::new(BigInt::from(sign * unit) * BigInt::from(p).pow(v), BigInt::from(den));
            let x = PadicNumber::from_rational(&z, p, n);
            let round = x.exp().and_then(|e| e.log()).map_err(err_str)?;
            ensure(round.eq_at_precision(&x), || format!("log(exp({z})) != {z} at p = {p}"))?;
            let y = PadicNumber::from_rational(&(BigRational::one() + &z), p, n);
            let back = y.log().and_then(|l| l.exp()).map_err(err_str)?;
            ensure(back.eq_at_precision(&y), || format!("exp(log(1 + {z})) != 1 + {z} at p = {p}"))?;
            count += 1;
        }
    }
    let two = PadicNumber::from_int(2, 2, n);
    ensure(two.exp().is_err(), || "exp(2) accepted at p = 2".into())?;
    let four = PadicNumber::from_int(4, 2, n);
    ensure(four.exp().is_ok(), || "exp(4) rejected at p = 2".into())?;
    Ok(format!("{count} points per direction at N = 30; exp(2) rejected, exp(4) accepted"))
}

/// Instances for the end-to-end check: rational data, one linear form, two logarithms.
pub fn end_to_end_instances(ctx: &PrecisionContext) -> Result<Vec<LinFormInstance>, String> {
    let k = NumberField::rationals();
    let inf = find_place(&k, "inf", ctx).map_err(err_str)?;
    let arch: [((i64, i64), (i64, i64), [(i64, i64); 3]); 10] = [
        ((2, 1), (3, 1), [(0, 1), (1, 1), (-1, 1)]),
        ((2, 1), (3, 1), [(0, 1), (3, 1), (-2, 1)]),
        ((3, 1), (5, 1), [(1, 2), (1, 1), (-1, 1)]),
        ((2, 1), (5, 1), [(0, 1), (7, 1), (-3, 1)]),
        ((5, 3), (7, 1), [(-1, 1), (2, 1), (1, 3)]),
        ((6, 1), (10, 1), [(0, 1), (9, 1), (-7, 1)]),
        ((7, 2), (11, 1), [(1, 5), (-1, 1), (1, 2)]),
        ((2, 1), (7, 1), [(0, 1), (14, 1), (-5, 1)]),
        ((13, 1), (17, 1), [(-2, 1), (1, 1), (1, 1)]),
        ((3, 2), (5, 4), [(0, 1), (11, 1), (-20, 1)]),
    ];
    let padic: [(u64, i64, i64, [(i64, i64); 3]); 10] = [
        (5, 6, 11, [(0, 1), (1, 1), (-1, 1)]),
        (5, 6, 31, [(0, 1), (2, 1), (-1, 1)]),
        (7, 8, 29, [(0, 1), (1, 1), (1, 1)]),
        (7, 15, 43, [(7, 1), (3, 1), (-2, 1)]),
        (3, 10, 19, [(0, 1), (1, 1), (-1, 1)]),
        (3, 28, 37, [(0, 1), (5, 1), (-3, 1)]),
        (2, 9, 17, [(0, 1), (1, 1), (-1, 1)]),
        (2, 25, 41, [(0, 1), (3, 1), (-2, 1)]),
        (11, 12, 23, [(0, 1), (1, 1), (-1, 1)]),
        (13, 14, 53, [(1, 1), (2, 1), (-1, 1)]),
    ];
    let mut out = Vec::new();
    let beta_row = |b: &[(i64, i64); 3]| b.iter().map(|&(n, d)| k.from_rational(q(n, d))).collect::<Vec<_>>();
    for (a1, a2, b) in arch {
        out.push(
            LinFormInstance::new(
                k.clone(),
                vec![k.from_rational(q(a1.0, a1.1)), k.from_rational(q(a2.0, a2.1))],
                USpec::Arch { branches: vec![0, 0] },
                vec![beta_row(&b)],
                inf.clone(),
                ctx,
            )
            .map_err(err_str)?,
        );
    }
    for (p, a1, a2, b) in padic {
        let v0 = find_place(&k, &p.to_string(), ctx).map_err(err_str)?;
        out.push(
            LinFormInstance::new(
                k.clone(),
                vec![k.from_int(a1), k.from_int(a2)],
                USpec::Padic,
                vec![beta_row(&b)],
                v0,
                ctx,
            )
            .map_err(err_str)?,
        );
    }
    Ok(out)
}

/// Bound log-magnitude recomputed from the instance data in floating point.
pub fn rederived_log_magnitude(inst: &LinFormInstance) -> f64 {
    let alphas: Vec<BigRational> = inst.alpha.iter().map(|a| a.as_rational().expect("rational")).collect();
    let betas: Vec<BigRational> = inst.beta.iter().flatten().map(|b| b.as_rational().expect("rational")).collect();
    let d = 1u64;
    let log_b = betas
        .iter()
        .map(oracle::rational_height_f64)
        .fold(1.0f64, f64::max)
        * d as f64;
    let n = alphas.len();
    let (p, log_e, log_a): (Option<u64>, f64, Vec<f64>) = match inst.v0.prime() {
        None => (
            None,
            1.0,
            alphas
                .iter()
                .map(|a| {
                    let u = a.to_f64().expect("finite").ln().abs();
                    oracle::rational_height_f64(a).max(std::f64::consts::E * u / d as f64)
                })
                .collect(),
        ),
        Some(p) => {
            let min_v = alphas
                .iter()
                .map(|a| oracle::vp(&(a - BigRational::one()), p).expect("alpha != 1"))
                .min()
                .expect("nonempty");
            let le = (min_v as f64 - 2.0 / (p as f64 - 1.0)) * (p as f64).ln();
            (Some(p), le, alphas.iter().map(oracle::rational_height_f64).collect())
        }
    };
    let rank = oracle::multiplicative_rank(&alphas);
    let i_set: Vec<usize> = (0..rank).collect();
    oracle::principal_log_magnitude(n, d, log_e, &log_a, log_b, 1, &i_set, p).1
}

fn end_to_end(_seed: u64) -> Result<String, String> {
    let start = Instant::now();
    let ctx = PrecisionContext::default();
    let instances = end_to_end_instances(&ctx)?;
    let reports: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = instances
            .iter()
            .map(|inst| s.spawn(move || verify_instance(inst, BoundKind::Principal, &ctx)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut worst = 0f64;
    let mut min_margin = f64::INFINITY;
    for (i, (inst, r)) in instances.iter().zip(reports).enumerate() {
        let r = r.map_err(|e| format!("instance {}: {e}", i + 1))?;
        ensure(r.hypothesis.status == HypothesisStatus::Certified, || format!("instance {} not certified", i + 1))?;
        ensure(r.hypothesis.i_set.len() == oracle::multiplicative_rank(
            &inst.alpha.iter().map(|a| a.as_rational().expect("rational")).collect::<Vec<_>>(),
        ), || format!("instance {}: rank disagrees with the exponent matrix", i + 1))?;
        ensure(r.pass, || format!("instance {}: margin {} not positive", i + 1, r.margin))?;
        let core = r.bound.value.log_magnitude().to_f64();
        let alt = rederived_log_magnitude(inst);
        let rel = (core - alt).abs() / alt.abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("instance {}: bound log-magnitude {core} vs re-derived {alt}", i + 1))?;
        min_margin = min_margin.min(r.max_log_lambda.to_f64());
    }
    let t = start.elapsed().as_secs_f64();
    ensure(t < 60.0, || format!("took {t:.1}s, limit 60s"))?;
    Ok(format!(
        "{} instances pass; bound re-derivation rel. err {worst:.1e}; min log|Lambda| {min_margin:.3}",
        instances.len()
    ))
}
