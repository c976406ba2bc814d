use gcb::algebra::GroupoidFunction;
use gcb::cartan::{identity_witness, multiplier_rank_decomposition, CbapWitness};
use gcb::io::*;
use gcb::isemigroup::{validate_semigroup, RawSAction, RawSemigroup, SAction};
use gcb::linalg::{self, c};
use gcb::multiplier::WeakAmenabilityWitness;
use gcb::partial_action::{validate_partial_action, RawPartialAction};
use gcb::zoo;
use gcb::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[test]
fn zoo_groupoids_round_trip() {
    for z in zoo::groupoids() {
        for w in [None, Some(&z.w)] {
            let file = groupoid_file(&z.g, w);
            let text = serde_json::to_string(&file).unwrap();
            let back: GroupoidFile = serde_json::from_str(&text).unwrap();
            let (g, w2) = groupoid_from_file(&back, 4096).unwrap();
            assert_eq!(g.names(), z.g.names(), "{}", z.name);
            assert_eq!(g.to_raw(), z.g.to_raw());
            if w.is_some() {
                assert_eq!(w2, z.w, "{}", z.name);
            }
            assert_eq!(serde_json::to_string(&groupoid_file(&g, w)).unwrap(), text);
        }
    }
}

#[test]
fn element_cap_and_bad_mu() {
    let z = zoo::groupoid("pair2").unwrap();
    let file = groupoid_file(&z.g, None);
    assert!(matches!(groupoid_from_file(&file, 3), Err(Error::TooLarge { .. })));
    let mut bad: serde_json::Value = serde_json::to_value(&file).unwrap();
    bad["mu"] = json!({"(0,1)": 1.0});
    let bad: GroupoidFile = from_value(bad).unwrap();
    assert!(groupoid_from_file(&bad, 64).is_err());
}

#[test]
fn functions_matrices_and_witnesses_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for z in zoo::groupoids() {
        let f = GroupoidFunction::random(&z.g, &mut rng);
        assert_eq!(function_from_value(&z.g, &function_to_value(&z.g, &f)).unwrap(), f);
        let wa = WeakAmenabilityWitness { phis: vec![f.clone(), GroupoidFunction::unit_indicator(&z.g)], c: 1.5 };
        let back = wa_witness_from_value(&z.g, &wa_witness_to_value(&z.g, &wa)).unwrap();
        assert_eq!((back.phis, back.c), (wa.phis, wa.c));
        let t = multiplier_rank_decomposition(&z.g, &z.w, &f).unwrap();
        let cb = CbapWitness { ops: vec![t, identity_witness(&z.g).ops[0].clone()], c: 2.0 };
        let back = cbap_witness_from_value(&z.g, &cbap_witness_to_value(&z.g, &cb)).unwrap();
        for (a, b) in back.ops.iter().zip(&cb.ops) {
            assert!(linalg::max_abs_diff(&a.dense, &b.dense) < 1e-15, "{}", z.name);
        }
    }
    let m = linalg::CMat::from_fn(2, 3, |i, j| c(i as f64, -(j as f64)));
    assert_eq!(matrix_from_value(&matrix_to_value(&m)).unwrap(), m);
    assert_eq!(matrix_from_value(&json!([[1, 0], [0.5, [0, 1]]])).unwrap()[(1, 1)], c(0.0, 1.0));
    assert!(matrix_from_value(&json!([[1, 0], [1]])).is_err());
}

#[test]
fn partial_actions_round_trip() {
    for z in zoo::partial_actions() {
        let text = serde_json::to_string(&z.pa.to_raw()).unwrap();
        let raw: RawPartialAction = serde_json::from_str(&text).unwrap();
        let back = validate_partial_action(&raw).unwrap();
        assert_eq!((back.dom, back.alpha), (z.pa.dom.clone(), z.pa.alpha.clone()), "{}", z.name);
        assert_eq!(serde_json::to_string(&back_raw(&raw)).unwrap(), text);
    }
}

fn back_raw(raw: &RawPartialAction) -> RawPartialAction {
    validate_partial_action(raw).unwrap().to_raw()
}

#[test]
fn semigroups_round_trip() {
    for z in zoo::semigroups() {
        let text = serde_json::to_string(&z.s.to_raw()).unwrap();
        let raw: RawSemigroup = serde_json::from_str(&text).unwrap();
        let s = validate_semigroup(&raw).unwrap();
        assert_eq!((s.names.clone(), s.mul.clone(), s.zero), (z.s.names.clone(), z.s.mul.clone(), z.s.zero), "{}", z.name);
    }
    let (s, maps) = gcb::isemigroup::InverseSemigroup::symmetric_inverse_maps(2).unwrap();
    let act = SAction::new(s, vec!["0".into(), "1".into()], maps).unwrap();
    let text = serde_json::to_string(&act.to_raw()).unwrap();
    let raw: RawSAction = serde_json::from_str(&text).unwrap();
    let back = SAction::from_raw(&raw).unwrap();
    assert_eq!(back.alpha, act.alpha);
}
