use adelic_baker::format::{bundle_to_json, parse_log_real, BundleFile, InstanceFile};
use adelic_baker_core::{LogReal, PrecisionContext};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

proptest! {
    #[test]
    fn log_terms_match_direct(c in -20i64..20, cd in 1i64..9, num in 1i64..500, den in 1i64..500, r in -50i64..50) {
        let text = format!("{c}/{cd}*log({num}/{den}) + {r}");
        let got = parse_log_real(&text, 128).unwrap();
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        let want = LogReal::log_rational(&q, 128)
            .scale(&BigRational::new(BigInt::from(c), BigInt::from(cd)))
            .add(&LogReal::from_rational(&BigRational::from_integer(BigInt::from(r)), 128));
        prop_assert!(got.sub(&want).is_exact_zero());
    }

    #[test]
    fn bundle_json_round_trip(a in 1i64..9, b in -5i64..5, c in 1i64..9, p in prop::sample::select(vec![2u64, 3, 5])) {
        let ctx = PrecisionContext::default();
        let text = format!(
            r#"{{"format":"adelic-baker/1","field":"x","dim":2,"deviations":[
                {{"place":"inf","matrix":[["{a}","{b}"],["0","1/{c}"]]}},
                {{"place":"{p}","matrix":[["{p}","0"],["0","1"]]}}]}}"#
        );
        let b1 = BundleFile::parse(&text).unwrap().build(&ctx).unwrap();
        let b2 = BundleFile::from_value(&bundle_to_json(&b1)).unwrap().build(&ctx).unwrap();
        let d1 = b1.degree(&ctx).unwrap();
        let d2 = b2.degree(&ctx).unwrap();
        prop_assert!(d1.sub(&d2).to_f64().abs() < 1e-30);
    }

    #[test]
    fn declared_indices_are_one_based(i in 1usize..=2) {
        let text = format!(
            r#"{{"field":"x","alpha":["2","3"],"u":{{"kind":"arch","branches":[0,0]}},
                "beta":[["0","1","1"]],"v0":"inf","declared_I":[{i}],"declared_s":1}}"#
        );
        let inst = InstanceFile::parse(&text).unwrap().build(&PrecisionContext::default()).unwrap();
        prop_assert_eq!(inst.declared_i, Some(vec![i - 1]));
    }
}

#[test]
fn declared_index_zero_is_rejected() {
    let text = r#"{"field":"x","alpha":["2"],"u":{"kind":"arch","branches":[0]},
        "beta":[["0","1"]],"v0":"inf","declared_I":[0]}"#;
    assert!(InstanceFile::parse(text).unwrap().build(&PrecisionContext::default()).is_err());
}
