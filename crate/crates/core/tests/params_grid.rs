use adelic_baker_core::baker::{
    check_param_properties, compute_params, theorem_bound, u_minus1_from_x_condition,
    BoundInstance, BoundKind,
};
use adelic_baker_core::LogReal;
use num_bigint::BigInt;
use num_rational::BigRational;

const P: u32 = 128;

fn lr(q: i64) -> LogReal {
    LogReal::from_rational(&BigRational::from_integer(BigInt::from(q)), P)
}

/// `log(r_p^2 / |u|_p)` for `v_p(u) = 3` at 2 and `v_p(u) = 1` otherwise.
fn log_frak_e(p: u64) -> LogReal {
    let v = if p == 2 { 3 } else { 1 };
    LogReal::log_prime_multiple(
        &p.into(),
        BigRational::new((v * (p as i64 - 1) - 2).into(), (p as i64 - 1).into()),
        P,
    )
}

fn grid() -> Vec<BoundInstance> {
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
                                    Some(p) => BoundInstance::ultrametric(
                                        n, t, d, p, log_frak_e(p), log_a, lr(lb),
                                    ),
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

#[test]
fn properties_hold_on_grid() {
    for inst in grid() {
        let ps = compute_params(&inst, P).unwrap();
        let props = check_param_properties(&ps, &inst);
        assert!(props.all(), "{props:?} for {inst:?}");
    }
}

#[test]
fn u_minus1_matches_x_condition() {
    for inst in grid() {
        let ps = compute_params(&inst, P).unwrap();
        let alt = u_minus1_from_x_condition(&inst, P).unwrap();
        let diff = ps.u_minus1.log_magnitude().to_ball(P).sub_ball(&alt);
        assert!(diff.abs().upper().to_f64() < 1e-12, "{inst:?}");
    }
}

#[test]
fn bounds_evaluate_on_grid() {
    for inst in grid() {
        for kind in [BoundKind::Principal, BoundKind::Reduit] {
            let b = theorem_bound(kind, &inst, P).unwrap();
            assert_eq!(b.value.sign(), -1);
        }
    }
}


