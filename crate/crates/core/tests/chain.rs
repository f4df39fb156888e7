use proptest::prelude::*;
use twoadic::fermat::{self, build_center, e_unit_invariance, gamma_series, gamma_series_literal, FermatCase};
use twoadic::report::ClaimRecord;

fn failures(claims: &[ClaimRecord]) -> Vec<String> {
    claims.iter().filter(|c| !c.passed()).map(|c| format!("{} {}", c.id, c.witness)).collect()
}

#[test]
fn e_unit_invariance_for_n3() {
    for d in fermat::all_valid(3) {
        let case = FermatCase::compute(d, 12).unwrap();
        let claim = e_unit_invariance(&case).unwrap();
        assert!(claim.passed(), "{d:?}: {}", claim.witness);
    }
}

#[test]
fn normalized_gamma_matches_literal_expansion_for_n3_n4() {
    for d in fermat::all_valid(3).into_iter().chain(fermat::all_valid(4).into_iter().step_by(5)) {
        let c = build_center(d).unwrap();
        assert_eq!(gamma_series(&c, 12).unwrap(), gamma_series_literal(&c, 12).unwrap(), "{d:?}");
    }
}

#[test]
fn alpha_power_recovers_gamma() {
    let case = FermatCase::compute(fermat::validate_params(5, 7, 8).unwrap(), 32).unwrap();
    let claims = case.all_claims();
    let comp = claims.iter().find(|c| c.id == "oracle.alpha_composition").unwrap();
    assert!(comp.passed(), "{}", comp.witness);
    assert!(failures(&claims).is_empty(), "{:?}", failures(&claims));
}

fn valid_case() -> impl Strategy<Value = fermat::BranchData> {
    let pool: Vec<_> = (3..=4).flat_map(fermat::all_valid).collect();
    prop::sample::select(pool)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn chain_claims_hold(d in valid_case()) {
        let case = FermatCase::compute(d, 16).unwrap();
        let claims = case.all_claims();
        prop_assert!(failures(&claims).is_empty(), "{:?}", failures(&claims));
    }

    #[test]
    fn galois_congruence_for_any_odd_chi(d in valid_case(), k in 0i64..64) {
        let chi = 2 * k + 1;
        let out = fermat::galois_check(d, chi).unwrap();
        prop_assert!(failures(&out.claims).is_empty(), "chi={} {:?}", chi, failures(&out.claims));
        prop_assert_eq!(out.a_prime, (chi as u64 * d.a) % d.modulus());
    }

    #[test]
    fn character_action_composes(d in valid_case(), k1 in 0i64..32, k2 in 0i64..32) {
        let (c1, c2) = (2 * k1 + 1, 2 * k2 + 1);
        prop_assert_eq!(d.act(c1).unwrap().act(c2).unwrap(), d.act(c1 * c2).unwrap());
    }
}
