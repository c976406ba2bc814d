use gcb::groupoid::*;
use gcb::Error;
use proptest::prelude::*;

fn z2() -> FiniteGroupoid {
    from_group(&Group::cyclic(2))
}

#[test]
fn group_sizes() {
    let g = z2();
    assert_eq!((g.len(), g.units().len()), (2, 1));
    assert_eq!(from_group(&Group::symmetric3()).len(), 6);
    let bad = vec![vec![0, 0], vec![0, 1]];
    assert!(matches!(Group::from_table(vec!["a".into(), "b".into()], bad), Err(Error::NotAGroup(_))));
}

#[test]
fn unions() {
    let u = disjoint_union(&z2(), &pair_groupoid(2));
    assert_eq!((u.len(), u.units().len()), (6, 3));
    let e = disjoint_union(&pair_groupoid(2), &FiniteGroupoid::empty());
    assert_eq!(e.names(), pair_groupoid(2).names());
    let pp = disjoint_union(&pair_groupoid(2), &pair_groupoid(2));
    assert_eq!(pp.len(), 8);
    assert!(pp.units().iter().all(|&x| pp.source_fiber(x).len() == 2));
}

#[test]
fn reductions() {
    let g = pair_groupoid(3);
    let r = reduction(&g, &[g.units()[1], g.units()[2]]);
    assert!(find_isomorphism(&r, &pair_groupoid(2)).is_some());
    assert_eq!(reduction(&g, g.units()).names(), g.names());
    assert!(reduction(&g, &[]).is_empty());
}

#[test]
fn bisection_cover_of_a_fiber() {
    let g = pair_groupoid(3);
    let fiber = g.source_fiber(g.units()[0]).to_vec();
    assert_eq!(fiber.len(), 3);
    let cover = bisection_cover(&g, &fiber);
    assert_eq!(cover.len(), 3);
    let mut all: Vec<usize> = cover.iter().flat_map(|b| b.carrier.clone()).collect();
    all.sort_unstable();
    assert_eq!(all, fiber);
    assert!(cover.iter().all(|b| is_bisection(&g, &b.carrier)));
    assert_eq!(bisection_cover(&g, g.units()).len(), 1);
    assert_eq!(bisection_cover(&g, &[1]).len(), 1);
}

#[test]
fn invariant_set_counts() {
    assert_eq!(invariant_sets(&pair_groupoid(2)).len(), 2);
    assert_eq!(invariant_sets(&disjoint_union(&z2(), &pair_groupoid(2))).len(), 4);
    let sets = invariant_sets(&z2());
    assert_eq!(sets.len(), 2);
    assert!(sets[0].carrier.is_empty() && sets[1].carrier == vec![0]);
}

#[test]
fn corrupted_raw_is_rejected_with_witness() {
    let mut raw = pair_groupoid(2).to_raw();
    // Break associativity-relevant data: redirect one product.
    let k = raw.comp.iter().position(|t| t[0] == "(0,1)" && t[1] == "(1,0)").unwrap();
    raw.comp[k][2] = "(1,1)".into();
    match validate(&raw) {
        Err(Error::AxiomViolation(v)) => assert!(!v.is_empty() && !v[0].witness.is_empty()),
        other => panic!("expected violation, got {other:?}"),
    }
    let mut raw = pair_groupoid(2).to_raw();
    raw.inv.remove("(0,1)");
    assert!(matches!(validate(&raw), Err(Error::AxiomViolation(_))));
}

#[test]
fn cap_is_enforced() {
    let raw = pair_groupoid(3).to_raw();
    assert!(matches!(validate_capped(&raw, 8), Err(Error::TooLarge { .. })));
}

fn zoo_like() -> impl Strategy<Value = FiniteGroupoid> {
    let atom = prop_oneof![
        (1usize..4).prop_map(|n| from_group(&Group::cyclic(n))),
        Just(from_group(&Group::symmetric3())),
        (1usize..4).prop_map(pair_groupoid),
    ];
    proptest::collection::vec(atom, 1..3).prop_map(|v| v.iter().skip(1).fold(v[0].clone(), |a, b| disjoint_union(&a, b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn raw_round_trip(g in zoo_like()) {
        let back = validate(&g.to_raw()).unwrap();
        prop_assert_eq!(back.names(), g.names());
        prop_assert!(is_isomorphism(&g, &back, &(0..g.len()).collect::<Vec<_>>()));
    }

    #[test]
    fn reductions_are_groupoids(g in zoo_like(), mask in 0u32..64) {
        let y: Vec<usize> = g.units().iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &x)| x).collect();
        let r = reduction(&g, &y);
        prop_assert!(validate(&r.to_raw()).is_ok() || r.is_empty());
        prop_assert_eq!(r.units().len(), y.len());
    }

    #[test]
    fn fibers_partition(g in zoo_like()) {
        let total: usize = g.units().iter().map(|&x| g.source_fiber(x).len()).sum();
        prop_assert_eq!(total, g.len());
        let total: usize = g.units().iter().map(|&x| g.range_fiber(x).len()).sum();
        prop_assert_eq!(total, g.len());
    }
}
