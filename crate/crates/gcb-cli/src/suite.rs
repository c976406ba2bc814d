//! The property suite: one line of JSON per check, grouped by module.

use crate::commands::Outcome;
use crate::report::{finite, Report};
use crate::Global;
use gcb::algebra::{convolve, inner_exactness_check, involute, recover_function, regular_rep, GroupoidFunction};
use gcb::cartan::{
    discrete_equality_pipeline, identity_witness, multiplier_rank_decomposition, one, phi_from_operator_discrete,
    quasi_cartan_validate,
};
use gcb::fell::{diag_embedding, fell_w, weight_identities};
use gcb::groupoid::{bisection_cover, invariant_sets, validate, FiniteGroupoid};
use gcb::harmonic::{coefficient, gns_bundle, godement_witness, BundleRep, Section};
use gcb::io::{self, GroupoidFile};
use gcb::isemigroup::{
    fell_absorption_is, left_regular, rep_laws, restricted_regular, universal_groupoid, validate_semigroup,
    wide_check_and_iso, all_bisections, RawSemigroup,
};
use gcb::linalg::{self, c, CMat};
use gcb::measure::{full_support_uniform, modular_ratio, UnitWeight};
use gcb::multiplier::{lambda_cb_upper, MultiplierOptions};
use gcb::partial_action::{
    coaction_check, delta_check, pa_equality_pipeline, transformation_groupoid, validate_partial_action, PartialAction,
    RawPartialAction,
};
use gcb::schur::{schur_norm_with, SchurOptions, SchurProblem};
use gcb::zoo;
use gcb::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;

pub const MODULES: [&str; 10] =
    ["groupoid", "measure", "algebra", "harmonic", "schur", "multiplier", "cartan", "fell", "partial-action", "isemigroup"];

/// Random instances per law and groupoid.
const INSTANCES: usize = 20;
/// `wide` runs on all bisections only below this many.
const WIDE_BISECTION_CAP: usize = 64;

struct Check {
    module: &'static str,
    name: String,
    value: f64,
    tol: f64,
    pass: bool,
    error: Option<Error>,
}

struct Suite<'a> {
    filter: Option<&'a str>,
    seed: u64,
    checks: Vec<Check>,
}

impl Suite<'_> {
    fn wants(&self, module: &str) -> bool {
        self.filter.map_or(true, |f| module.contains(f))
    }

    /// `f` returns (measured deviation, tolerance).
    fn run(&mut self, module: &'static str, name: &str, f: impl FnOnce() -> Result<(f64, f64)>) {
        if !self.wants(module) {
            return;
        }
        let check = match f() {
            Ok((value, tol)) => Check { module, name: name.into(), value, tol, pass: value <= tol, error: None },
            Err(e) => Check { module, name: name.into(), value: f64::NAN, tol: 0.0, pass: false, error: Some(e) },
        };
        self.checks.push(check);
    }

    fn flag(&mut self, module: &'static str, name: &str, f: impl FnOnce() -> Result<bool>) {
        self.run(module, name, || f().map(|ok| (if ok { 0.0 } else { 1.0 }, 0.0)));
    }
}

pub fn run(gl: &Global, filter: Option<&str>, files: &[PathBuf], rep: &mut Report) -> Result<Outcome> {
    if let Some(f) = filter {
        if !MODULES.iter().any(|m| m.contains(f)) {
            return Err(Error::InvalidInput(format!("filter {f} matches no module ({})", MODULES.join(", "))));
        }
    }
    let mut s = Suite { filter, seed: gl.seed, checks: Vec::new() };
    for z in zoo::groupoids() {
        groupoid_checks(&mut s, &z.name, &z.g, &z.w);
    }
    schur_checks(&mut s);
    for z in zoo::partial_actions() {
        partial_action_checks(&mut s, &z.name, &z.pa);
    }
    for z in zoo::semigroups() {
        semigroup_checks(&mut s, &z.name, &z.s, &z.reps);
    }
    s.run("isemigroup", "universal semilattice2 is two units", || {
        let z = zoo::semigroups().into_iter().find(|z| z.name == "semilattice2").expect("zoo");
        let u = universal_groupoid(&z.s)?;
        Ok((((u.germs.g.units().len() as f64) - 2.0).abs() + (u.germs.g.len() - u.germs.g.units().len()) as f64, 0.0))
    });
    for (k, path) in files.iter().enumerate() {
        extra_file(&mut s, rep, k, path);
    }
    let failed: Vec<&Check> = s.checks.iter().filter(|c| !c.pass).collect();
    let lines: Vec<Value> = s
        .checks
        .iter()
        .map(|c| {
            let mut v = json!({"module": c.module, "name": c.name, "value": finite(c.value), "tol": c.tol, "pass": c.pass});
            if let Some(e) = &c.error {
                v["error"] = crate::report::error_value(e);
            }
            v
        })
        .collect();
    rep.result("checks", lines);
    rep.result("total", s.checks.len());
    rep.result("failed", failed.len());
    if let Some(first) = failed.first() {
        let kind = first.error.as_ref().map_or("CheckFailed", Error::kind);
        let msg = match &first.error {
            Some(e) => format!("{}: {}: {e}", first.module, first.name),
            None => format!("{}: {}: {:e} > {:e}", first.module, first.name, first.value, first.tol),
        };
        return Ok(Outcome::Failed(json!({"kind": kind, "message": msg, "failed": failed.len()}), msg));
    }
    Ok(Outcome::Done)
}

fn extra_file(s: &mut Suite, rep: &mut Report, k: usize, path: &PathBuf) {
    let role = format!("file{k}");
    let label = path.display().to_string();
    let v = match rep.input(&role, path) {
        Ok(v) => v,
        Err(e) => {
            s.checks.push(Check { module: "groupoid", name: format!("{label}: read"), value: f64::NAN, tol: 0.0, pass: false, error: Some(e) });
            return;
        }
    };
    let module = if v.get("comp").is_some() {
        "groupoid"
    } else if v.get("group").is_some() {
        "partial-action"
    } else {
        "isemigroup"
    };
    match module {
        "groupoid" => {
            let parsed = rep.typed::<GroupoidFile>(&role, v).and_then(|f| io::groupoid_from_file(&f, gcb::groupoid::MAX_ELEMENTS));
            match parsed {
                Ok((g, w)) => groupoid_checks(s, &label, &g, &w),
                Err(e) => s.checks.push(Check { module, name: format!("{label}: validate"), value: f64::NAN, tol: 0.0, pass: false, error: Some(e) }),
            }
        }
        "partial-action" => match rep.typed::<RawPartialAction>(&role, v).and_then(|r| validate_partial_action(&r)) {
            Ok(pa) => partial_action_checks(s, &label, &pa),
            Err(e) => s.checks.push(Check { module, name: format!("{label}: validate"), value: f64::NAN, tol: 0.0, pass: false, error: Some(e) }),
        },
        _ => match rep.typed::<RawSemigroup>(&role, v).and_then(|r| validate_semigroup(&r)) {
            Ok(sg) => {
                let one = vec![CMat::identity(1, 1); sg.len()];
                semigroup_checks(s, &label, &sg, &[("trivial".into(), one)]);
            }
            Err(e) => s.checks.push(Check { module, name: format!("{label}: validate"), value: f64::NAN, tol: 0.0, pass: false, error: Some(e) }),
        },
    }
}

fn random_pd(g: &FiniteGroupoid, rng: &mut ChaCha8Rng) -> Result<GroupoidFunction> {
    let rep = BundleRep::regular(g);
    let xi = Section { vec: rep.dims.iter().map(|&d| (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect() };
    coefficient(g, &rep, &xi, &xi)
}

fn groupoid_checks(s: &mut Suite, name: &str, g: &FiniteGroupoid, w: &UnitWeight) {
    let salt = name.bytes().fold(0u64, |h, b| h.wrapping_mul(131).wrapping_add(b as u64));
    let seed = s.seed;
    s.flag("groupoid", &format!("{name}: interchange round trip"), || {
        let back = validate(&g.to_raw())?;
        Ok(back == *g)
    });
    s.flag("groupoid", &format!("{name}: bisections cover"), || {
        let all: Vec<usize> = (0..g.len()).collect();
        let mut hit = vec![false; g.len()];
        for b in bisection_cover(g, &all) {
            for a in b.carrier {
                hit[a] = true;
            }
        }
        Ok(hit.iter().all(|&h| h))
    });
    s.run("measure", &format!("{name}: modular cocycle"), || Ok((modular_ratio(g, w).cocycle_defect(g), 1e-12)));
    s.run("algebra", &format!("{name}: convolution laws"), || {
        let mut rng = s_rng(seed, salt);
        let mut worst = 0.0f64;
        for _ in 0..INSTANCES {
            let f = GroupoidFunction::random(g, &mut rng);
            let h = GroupoidFunction::random(g, &mut rng);
            let u = GroupoidFunction::random(g, &mut rng);
            let lhs = convolve(g, &convolve(g, &f, &h), &u);
            worst = worst.max(lhs.max_diff(&convolve(g, &f, &convolve(g, &h, &u))));
            worst = worst.max(involute(g, &convolve(g, &f, &h)).max_diff(&convolve(g, &involute(g, &h), &involute(g, &f))));
            let prod = regular_rep(g, w, &convolve(g, &f, &h));
            worst = worst.max(prod.max_diff(&regular_rep(g, w, &f).mul(&regular_rep(g, w, &h))));
            worst = worst.max(regular_rep(g, w, &involute(g, &f)).max_diff(&regular_rep(g, w, &f).adjoint()));
            worst = worst.max(recover_function(g, &regular_rep(g, w, &f)).max_diff(&f));
        }
        Ok((worst, 1e-10))
    });
    s.flag("algebra", &format!("{name}: exactness on invariant sets"), || {
        for f in invariant_sets(g) {
            if !inner_exactness_check(g, w, &f.carrier)?.exact {
                return Ok(false);
            }
        }
        Ok(true)
    });
    s.flag("harmonic", &format!("{name}: Godement g = 1"), || {
        let gw = godement_witness(g, w)?;
        Ok(gw.g_is_one && gw.normalized)
    });
    s.run("harmonic", &format!("{name}: GNS round trip"), || {
        let mut rng = s_rng(seed, salt ^ 1);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let b = gns_bundle(g, &random_pd(g, &mut rng)?)?;
            worst = worst.max(b.round_trip).max(b.sup_defect);
        }
        Ok((worst, 1e-9))
    });
    let opts = MultiplierOptions { seed, ..Default::default() };
    s.run("multiplier", &format!("{name}: Λ_cb = 1"), || {
        let r = lambda_cb_upper(g, w, &opts)?;
        Ok(((r.value - 1.0).abs().max((r.m0a_of_one - 1.0).abs()), 1e-6))
    });
    s.flag("cartan", &format!("{name}: quasi Cartan"), || {
        let r = quasi_cartan_validate(g, w)?;
        Ok(r.unit && r.regular && r.expectation)
    });
    s.run("cartan", &format!("{name}: identity pipeline"), || {
        let r = discrete_equality_pipeline(g, w, &identity_witness(g), &opts)?;
        Ok((r.witness.phis[0].max_diff(&one(g)).max(r.s_deviation), 1e-8))
    });
    s.run("cartan", &format!("{name}: multiplier round trip"), || {
        let mut rng = s_rng(seed, salt ^ 2);
        let phi = GroupoidFunction::random(g, &mut rng);
        let t = multiplier_rank_decomposition(g, w, &phi)?;
        Ok((phi_from_operator_discrete(g, w, &t)?.phi.max_diff(&phi), 1e-8))
    });
    s.run("fell", &format!("{name}: absorption on standard reps"), || {
        let mut worst = 0.0f64;
        for (_, r) in zoo::reps(g) {
            r.validate(g, 1e-10)?;
            let f = fell_w(g, &r)?;
            worst = worst.max(f.partial_isometry_defect).max(f.absorption_defect);
        }
        Ok((worst, 1e-10))
    });
    s.run("fell", &format!("{name}: weight identities (sandwich and corner)"), || {
        let r = weight_identities(g, w);
        Ok((r.sandwich.max(r.corner), 1e-10))
    });
    s.flag("fell", &format!("{name}: diagonal embedding injective"), || {
        Ok(diag_embedding(g, w, &GroupoidFunction::zeros(g.len()))?.rank == g.len())
    });
    s.flag("isemigroup", &format!("{name}: bisections are wide"), || {
        let all = all_bisections(g)?;
        if all.len() > WIDE_BISECTION_CAP {
            return Ok(true);
        }
        Ok(wide_check_and_iso(g, &all).is_ok())
    });
}

fn s_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn schur_checks(s: &mut Suite) {
    let seed = s.seed;
    let opts = SchurOptions { seed, ..Default::default() };
    for n in [2usize, 4] {
        s.run("schur", &format!("identity {n}x{n}"), || {
            let (v, cert) = schur_norm_with(&SchurProblem::new(linalg::identity(n), 1e-8), &opts)?;
            Ok(((v - 1.0).abs().max(cert.residual), 1e-6))
        });
        s.run("schur", &format!("ones {n}x{n}"), || {
            let (v, cert) = schur_norm_with(&SchurProblem::new(CMat::from_element(n, n, c(1.0, 0.0)), 1e-8), &opts)?;
            Ok(((v - 1.0).abs().max(cert.residual), 1e-6))
        });
    }
    s.run("schur", "random 3x3 certificates", || {
        let mut rng = s_rng(seed, 77);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let m = CMat::from_fn(3, 3, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let (v, cert) = schur_norm_with(&SchurProblem::new(m, 1e-8), &opts)?;
            worst = worst.max(cert.residual).max(cert.lower - v);
        }
        Ok((worst, 1e-6))
    });
}

fn partial_action_checks(s: &mut Suite, name: &str, pa: &PartialAction) {
    let tg = match transformation_groupoid(pa) {
        Ok(t) => t,
        Err(e) => {
            s.run("partial-action", &format!("{name}: transformation groupoid"), || Err(e));
            return;
        }
    };
    s.run("partial-action", &format!("{name}: Δ"), || {
        let w = full_support_uniform(&tg.g)?;
        let d = delta_check(pa, &tg, &[], &w)?;
        Ok((d.multiplicative.max(d.involutive).max(d.inner).max(d.intertwining), 1e-10))
    });
    s.run("partial-action", &format!("{name}: coaction"), || {
        let r = coaction_check(pa, &tg)?;
        Ok((r.multiplicative.max(r.involutive) + if r.injective { 0.0 } else { 1.0 }, 1e-10))
    });
    s.run("partial-action", &format!("{name}: identity pipeline"), || {
        let w = full_support_uniform(&tg.g)?;
        let r = pa_equality_pipeline(pa, &tg, &w, &identity_witness(&tg.g), &MultiplierOptions::default())?;
        Ok((r.witness.phis[0].max_diff(&one(&tg.g)).max(r.estimate_slack.max(0.0)), 1e-10))
    });
}

fn semigroup_checks(s: &mut Suite, name: &str, sg: &gcb::isemigroup::InverseSemigroup, reps: &[(String, Vec<CMat>)]) {
    s.run("isemigroup", &format!("{name}: regular representation laws"), || {
        let l = rep_laws(sg, &left_regular(sg), false);
        let r = rep_laws(sg, &restricted_regular(sg), true);
        let worst = [l.partial_isometry_defect, l.multiplicative_defect, l.star_defect, r.partial_isometry_defect, r.multiplicative_defect]
            .into_iter()
            .fold(0.0, f64::max);
        Ok((worst, 1e-12))
    });
    s.run("isemigroup", &format!("{name}: Fell absorption"), || {
        let mut worst = 0.0f64;
        for (_, pi) in reps {
            let f = fell_absorption_is(sg, pi)?;
            worst = worst.max(f.intertwining_defect).max(f.partial_isometry_defect);
        }
        Ok((worst, 1e-12))
    });
}
