use gcb::algebra::{convolve, expectation, GroupoidFunction};
use gcb::cartan::*;
use gcb::groupoid::{bisection_cover, from_group, pair_groupoid, Group};
use gcb::linalg::{self, c, ONE};
use gcb::measure::full_support_uniform;
use gcb::multiplier::{MultiplierOptions, WeakAmenabilityWitness};
use gcb::zoo;
use gcb::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn quasi_cartan_examples() {
    for g in [pair_groupoid(2), from_group(&Group::cyclic(2))] {
        let w = full_support_uniform(&g).unwrap();
        let r = quasi_cartan_validate(&g, &w).unwrap();
        assert!(r.unit && r.regular && r.expectation);
    }
    let g = pair_groupoid(2);
    let w = full_support_uniform(&g).unwrap();
    let dropped = g.units()[1];
    let broken = |f: &GroupoidFunction| {
        let mut e = expectation(&g, f);
        e.values[dropped] = c(0.0, 0.0);
        e
    };
    assert!(quasi_cartan_validate_with(&g, &w, &broken).is_err());
}

#[test]
fn theta_examples() {
    let g = pair_groupoid(2);
    let w = full_support_uniform(&g).unwrap();
    let x = g.units()[0];
    let dx = GroupoidFunction::delta(&g, x);
    let t = theta(&g, &w, &dx, &dx);
    assert_eq!(t.op.apply(&dx), dx);
    assert!((t.cb_bound - 1.0).abs() < 1e-12);
    let z = theta(&g, &w, &GroupoidFunction::zeros(4), &dx);
    assert_eq!(linalg::max_abs(&z.op.dense), 0.0);
    // E(h* f) = 0 ⟹ Θ(f) = 0.
    let y = g.units()[1];
    assert_eq!(t.op.apply(&GroupoidFunction::delta(&g, y)).sup_norm(), 0.0);
}

#[test]
fn rank_decompositions() {
    let g = pair_groupoid(2);
    let w = full_support_uniform(&g).unwrap();
    let a = g.index_of("(0,1)").unwrap();
    let phi = GroupoidFunction::delta(&g, a).scale(c(0.5, 0.5));
    let t = multiplier_rank_decomposition(&g, &w, &phi).unwrap();
    assert_eq!(t.pairs.len(), 1);
    assert_eq!(t.pairs[0].1, GroupoidFunction::indicator(&g, &[a]));
    assert!(multiplier_rank_decomposition(&g, &w, &GroupoidFunction::zeros(4)).unwrap().pairs.is_empty());
    let one = multiplier_rank_decomposition(&g, &w, &one(&g)).unwrap();
    assert_eq!(one.pairs.len(), 2);
    assert_eq!(one.dense, CartanOperator::identity(&g).dense);
}

#[test]
fn rotation_examples() {
    let g = pair_groupoid(2);
    let w = full_support_uniform(&g).unwrap();
    let deltas: Vec<GroupoidFunction> = (0..4).map(|a| GroupoidFunction::delta(&g, a)).collect();
    let t = multiplier_rank_decomposition(&g, &w, &one(&g)).unwrap();
    let r = rotate(&g, &w, &t, &deltas, 1).unwrap();
    assert_eq!(r.distance, 0.0);
    assert_eq!(r.op.dense, t.dense);
    let all: Vec<usize> = (0..4).collect();
    let bis: Vec<GroupoidFunction> =
        bisection_cover(&g, &all).iter().flat_map(|b| b.carrier.iter().map(|&a| GroupoidFunction::delta(&g, a))).collect();
    let r = rotate(&g, &w, &t, &bis, 10).unwrap();
    assert!(r.distance < 0.1);
    assert!(matches!(rotate(&g, &w, &t, &deltas[..2], 10), Err(Error::BasisNotSpanning(_))));
}

#[test]
fn phi_from_operator_examples() {
    let g = pair_groupoid(2);
    let w = full_support_uniform(&g).unwrap();
    let r = phi_from_operator_discrete(&g, &w, &CartanOperator::identity(&g)).unwrap();
    assert!(r.phi.max_diff(&one(&g)) < 1e-15);
    let r = phi_from_operator_discrete(&g, &w, &CartanOperator::zero(&g)).unwrap();
    assert_eq!(r.phi.sup_norm(), 0.0);
    let psi = GroupoidFunction::from_values(vec![c(0.3, 0.1), c(-0.2, 0.0), c(0.0, 0.5), c(1.0, 0.0)]);
    let r = phi_from_operator_discrete(&g, &w, &CartanOperator::multiplier(&psi)).unwrap();
    assert!(r.phi.max_diff(&psi) < 1e-15);
}

#[test]
fn not_a_linear_is_rejected() {
    let g = pair_groupoid(2);
    let mut d = linalg::identity(4);
    d[(0, 1)] = ONE;
    let t = CartanOperator::from_dense(d);
    assert!(matches!(check_a_linear(&g, &t), Err(Error::NotALinear { .. })));
    let w = full_support_uniform(&g).unwrap();
    let wit = CbapWitness { ops: vec![t], c: 5.0 };
    assert!(matches!(cbap_witness_check(&g, &w, &wit, &MultiplierOptions::default()), Err(Error::WitnessRejected(_))));
}

#[test]
fn pipeline_examples() {
    let g = pair_groupoid(2);
    let w = full_support_uniform(&g).unwrap();
    let opts = MultiplierOptions::default();
    let r = discrete_equality_pipeline(&g, &w, &identity_witness(&g), &opts).unwrap();
    assert!(r.witness.phis[0].max_diff(&one(&g)) < 1e-12);
    assert!((r.report.constant - 1.0).abs() < 1e-6);
    let zero = CbapWitness { ops: vec![CartanOperator::zero(&g)], c: 1.0 };
    assert!(matches!(discrete_equality_pipeline(&g, &w, &zero, &opts), Err(Error::PipelineMismatch { stage, .. }) if stage == "sot"));
    let from_one = cbap_from_weak_amenability(&g, &w, &WeakAmenabilityWitness { phis: vec![one(&g)], c: 1.0 }).unwrap();
    assert!(cbap_witness_check(&g, &w, &from_one, &opts).is_ok());
    let empty = CbapWitness { ops: vec![], c: 1.0 };
    assert!(cbap_witness_check(&g, &w, &empty, &opts).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Θ_{b1,b2} is right A-linear and φ of it is b1(γ)·E(b2* χ)(d γ)-shaped.
    #[test]
    fn theta_is_a_linear(k in 0..zoo::groupoids().len(), seed in any::<u64>()) {
        let z = &zoo::groupoids()[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b1 = GroupoidFunction::random(&z.g, &mut rng);
        let b2 = GroupoidFunction::random(&z.g, &mut rng);
        let t = theta(&z.g, &z.w, &b1, &b2);
        prop_assert!(check_a_linear(&z.g, &t.op).is_ok());
        prop_assert!(t.op.pairs_defect(&z.g) <= 1e-12);
        let f = GroupoidFunction::random(&z.g, &mut rng);
        let direct = convolve(&z.g, &b1, &expectation(&z.g, &convolve(&z.g, &gcb::algebra::involute(&z.g, &b2), &f)));
        prop_assert!(t.op.apply(&f).max_diff(&direct) <= 1e-10);
        let ub = cb_upper(&z.g, &z.w, &t.op, &MultiplierOptions::default()).unwrap();
        prop_assert!(ub <= t.cb_bound + 1e-9);
    }

    /// m_φ = Σ Θ exactly, and the pipeline returns φ.
    #[test]
    fn multiplier_round_trip(k in 0..zoo::groupoids().len(), seed in any::<u64>()) {
        let z = &zoo::groupoids()[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = GroupoidFunction::random(&z.g, &mut rng);
        let t = multiplier_rank_decomposition(&z.g, &z.w, &phi).unwrap();
        prop_assert_eq!(&t.dense, &CartanOperator::multiplier(&phi).dense);
        let r = phi_from_operator_discrete(&z.g, &z.w, &t).unwrap();
        prop_assert!(r.phi.max_diff(&phi) <= 1e-12);
    }
}
