//! Built-in examples: small groupoids with weights, partial actions and
//! inverse semigroups with representations.

use crate::fell::GroupoidRep;
use crate::groupoid::{disjoint_union, from_group, orbits, pair_groupoid, FiniteGroupoid, Group};
use crate::isemigroup::{left_regular, natural_rep, InverseSemigroup};
use crate::linalg::CMat;
use crate::measure::{full_support_uniform, UnitWeight, Weight};
use crate::partial_action::PartialAction;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct ZooGroupoid {
    pub name: String,
    pub g: FiniteGroupoid,
    pub w: UnitWeight,
}

fn entry(name: &str, g: FiniteGroupoid) -> ZooGroupoid {
    let w = full_support_uniform(&g).expect("nonempty");
    ZooGroupoid { name: name.into(), g, w }
}

/// Groups up to S₃, pair groupoids up to 4 points, unions and a weighted pair₂.
pub fn groupoids() -> Vec<ZooGroupoid> {
    let mut out = vec![
        entry("trivial", from_group(&Group::cyclic(1))),
        entry("z2", from_group(&Group::cyclic(2))),
        entry("z3", from_group(&Group::cyclic(3))),
        entry("s3", from_group(&Group::symmetric3())),
    ];
    for n in 1..=4 {
        out.push(entry(&format!("pair{n}"), pair_groupoid(n)));
    }
    out.push(entry("z2+pair2", disjoint_union(&from_group(&Group::cyclic(2)), &pair_groupoid(2))));
    out.push(entry("pair1+pair2", disjoint_union(&pair_groupoid(1), &pair_groupoid(2))));
    let g = pair_groupoid(2);
    let w = UnitWeight::new(&g, &[Weight::parse("1/3").unwrap(), Weight::parse("2/3").unwrap()]).expect("quasi-invariant");
    out.push(ZooGroupoid { name: "pair2-weighted".into(), g, w });
    out
}

pub fn groupoid(name: &str) -> Option<ZooGroupoid> {
    groupoids().into_iter().find(|z| z.name == name)
}

/// Representations used for Fell absorption on `g`.
pub fn reps(g: &FiniteGroupoid) -> Vec<(String, GroupoidRep)> {
    let mut out = vec![("regular".to_string(), GroupoidRep::regular(g)), ("matrix-units".into(), GroupoidRep::matrix_units(g))];
    // One-dimensional at x is a representation only when the orbit of x is {x}.
    if let Some(o) = orbits(g).into_iter().find(|o| o.len() == 1) {
        out.push(("trivial".into(), GroupoidRep::trivial_at(g, o[0])));
    }
    out
}

#[derive(Debug, Clone)]
pub struct ZooPartialAction {
    pub name: String,
    pub pa: PartialAction,
}

/// ℤ/2 swapping two points, and ℤ/2 swapping a, b inside {a, b, c}.
pub fn partial_actions() -> Vec<ZooPartialAction> {
    let global = PartialAction::global(Group::cyclic(2), vec!["p".into(), "q".into()], |t, x| (t + x) % 2)
        .expect("global action");
    let grp = Group::cyclic(2);
    let points: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let dom = vec![vec![true, true, true], vec![true, true, false]];
    let alpha = vec![vec![Some(0), Some(1), Some(2)], vec![Some(1), Some(0), None]];
    let partial = PartialAction { group: grp, points, dom, alpha };
    assert!(crate::partial_action::violations(&partial).is_empty());
    vec![
        ZooPartialAction { name: "z2-swap".into(), pa: global },
        ZooPartialAction { name: "z2-partial-swap".into(), pa: partial },
    ]
}

#[derive(Debug, Clone)]
pub struct ZooSemigroup {
    pub name: String,
    pub s: InverseSemigroup,
    pub reps: Vec<(String, Vec<CMat>)>,
}

fn with_regular(name: &str, s: InverseSemigroup, mut reps: Vec<(String, Vec<CMat>)>) -> ZooSemigroup {
    reps.insert(0, ("left-regular".into(), left_regular(&s)));
    let one = vec![CMat::identity(1, 1); s.len()];
    reps.push(("trivial".into(), one));
    ZooSemigroup { name: name.into(), s, reps }
}

/// I₂, I₃, ℤ/2, {1, e}, {1, e, 0} and the partial shift on three points.
pub fn semigroups() -> Vec<ZooSemigroup> {
    let mut out = Vec::new();
    for n in [2usize, 3] {
        let (s, maps) = InverseSemigroup::symmetric_inverse_maps(n).expect("I_n");
        let natural = ("natural".to_string(), natural_rep(&maps));
        if n == 2 {
            out.push(with_regular("sim2", s, vec![natural]));
        } else {
            // ℓ²(I₃) ⊗ ℓ²(I₃) is too large for routine checks; natural rep only.
            let one = vec![CMat::identity(1, 1); s.len()];
            out.push(ZooSemigroup { name: "sim3".into(), s, reps: vec![natural, ("trivial".into(), one)] });
        }
    }
    out.push(with_regular("z2", InverseSemigroup::from_group(&Group::cyclic(2)), vec![]));
    let lat = InverseSemigroup::semilattice(vec!["1".into(), "e".into()], vec![vec![0, 1], vec![1, 1]]).expect("semilattice");
    out.push(with_regular("semilattice2", lat, vec![]));
    let lat0 = InverseSemigroup::semilattice(
        vec!["1".into(), "e".into(), "0".into()],
        vec![vec![0, 1, 2], vec![1, 1, 2], vec![2, 2, 2]],
    )
    .and_then(|s| s.with_zero(2))
    .expect("semilattice with zero");
    out.push(with_regular("semilattice3-zero", lat0, vec![]));
    let (shift, maps) = InverseSemigroup::generated(3, &[vec![Some(1), Some(2), None]]).expect("partial shift");
    out.push(with_regular("shift3", shift, vec![("natural".into(), natural_rep(&maps))]));
    out
}

/// Counts of zoo objects, for reports.
pub fn summary() -> BTreeMap<&'static str, usize> {
    [("groupoids", groupoids().len()), ("partial_actions", partial_actions().len()), ("semigroups", semigroups().len())]
        .into_iter()
        .collect()
}
