//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines reach stdout. The process
//! fails only on a criterion that is not listed in `KNOWN_FAILURES`.

mod common;

use common::{gamma2_oracle, random_matrix};
use gcb::algebra::*;
use gcb::cartan::{
    cbap_from_weak_amenability, cbap_witness_check, discrete_equality_pipeline, identity_witness, CartanOperator,
};
use gcb::fell::{diag_embedding, fell_w, lambda, tensor_expectation, weight_identities};
use gcb::groupoid::{invariant_sets, FiniteGroupoid};
use gcb::harmonic::{coefficient, gns_bundle, godement_witness, is_positive_definite, BundleRep, Section};
use gcb::isemigroup::{all_bisections, fell_absorption_is, universal_groupoid, wide_check_and_iso};
use gcb::linalg::{self, c, CMat, ONE};
use gcb::measure::full_support_uniform;
use gcb::multiplier::{
    check_weak_amenability_witness, harmonic_ramp, lambda_cb_upper, m0a_norm_with, multiplier_amplification_lower,
    MultiplierOptions, WeakAmenabilityWitness,
};
use gcb::partial_action::{
    atom_basis, coaction_check, delta_check, pa_equality_pipeline, transformation_groupoid, BundleSection,
};
use gcb::schur::{certificate_residual, schur_norm, SchurProblem};
use gcb::zoo::{self, ZooGroupoid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::Instant;

/// The literal (τ⊗τ)∘ℰ = τ⊗τ clause fails on λ_x⊗λ_y for distinct units x, y.
const KNOWN_FAILURES: [usize; 1] = [8];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pd(g: &FiniteGroupoid, r: &mut ChaCha8Rng) -> GroupoidFunction {
    let rep = BundleRep::regular(g);
    let xi = Section { vec: rep.dims.iter().map(|&d| (0..d).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()).collect() };
    coefficient(g, &rep, &xi, &xi).unwrap()
}

/// Positive definite with max_x φ(x) = 1.
fn contractive_pd(g: &FiniteGroupoid, r: &mut ChaCha8Rng) -> GroupoidFunction {
    let phi = random_pd(g, r);
    let top = g.units().iter().map(|&x| phi.values[x].re).fold(0.0, f64::max);
    phi.scale(c(1.0 / top, 0.0))
}

fn criterion_1() -> Verdict {
    const TOL: f64 = 1e-10;
    let mut worst = [0.0f64; 5];
    for (k, z) in zoo::groupoids().iter().enumerate() {
        let (g, w) = (&z.g, &z.w);
        let mut r = rng(100 + k as u64);
        for _ in 0..100 {
            let f = GroupoidFunction::random(g, &mut r);
            let h = GroupoidFunction::random(g, &mut r);
            let u = GroupoidFunction::random(g, &mut r);
            let assoc = convolve(g, &convolve(g, &f, &h), &u).max_diff(&convolve(g, &f, &convolve(g, &h, &u)));
            let inv = involute(g, &involute(g, &f))
                .max_diff(&f)
                .max(involute(g, &convolve(g, &f, &h)).max_diff(&convolve(g, &involute(g, &h), &involute(g, &f))));
            let lf = regular_rep(g, w, &f);
            let hom = regular_rep(g, w, &convolve(g, &f, &h))
                .max_diff(&lf.mul(&regular_rep(g, w, &h)))
                .max(regular_rep(g, w, &involute(g, &f)).max_diff(&lf.adjoint()));
            let e = expectation(g, &f);
            let a = expectation(g, &h);
            let b = expectation(g, &u);
            let bimod = expectation(g, &convolve(g, &convolve(g, &a, &f), &b)).max_diff(&convolve(g, &convolve(g, &a, &e), &b));
            let pos = expectation(g, &convolve(g, &involute(g, &f), &f));
            let neg = g.units().iter().map(|&x| (-pos.values[x].re).max(pos.values[x].im.abs())).fold(0.0, f64::max);
            let support = if e.is_unit_supported(g, 0.0) { 0.0 } else { 1.0 };
            let cond = expectation(g, &e).max_diff(&e).max(bimod).max(neg).max(support);
            let inner = module_inner(g, &f, &h).max_diff(&expectation(g, &convolve(g, &involute(g, &f), &h)));
            for (slot, v) in [assoc, inv, hom, cond, inner].into_iter().enumerate() {
                worst[slot] = worst[slot].max(v);
            }
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    verdict(
        max <= TOL,
        format!(
            "assoc {:.1e}, involution {:.1e}, λ *-hom {:.1e}, E axioms {:.1e}, ⟨f,g⟩ {:.1e} (tol {TOL:e})",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

/// Fiber Gram PSD by symmetric Gaussian elimination with real pivots,
/// independent of the library eigensolver.
fn brute_psd(g: &FiniteGroupoid, phi: &GroupoidFunction) -> bool {
    g.units().iter().all(|&x| {
        let fib: Vec<usize> = (0..g.len()).filter(|&a| g.src(a) == x).collect();
        let mut m = CMat::from_fn(fib.len(), fib.len(), |i, j| phi.values[g.comp(fib[i], g.inv(fib[j])).unwrap()]);
        let eps = 1e-9 * m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if (&m - m.adjoint()).iter().any(|z| z.norm() > eps) {
            return false;
        }
        let n = m.nrows();
        for k in 0..n {
            let p = m[(k, k)].re;
            if p < -eps {
                return false;
            }
            if p <= eps {
                // A zero pivot needs a zero row.
                if (k + 1..n).any(|j| m[(k, j)].norm() > eps.sqrt()) {
                    return false;
                }
                continue;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let d = m[(i, k)] * m[(k, j)] / p;
                    m[(i, j)] -= d;
                }
            }
        }
        true
    })
}

fn criterion_2() -> Verdict {
    const TOL: f64 = 1e-9;
    let (mut agree, mut total, mut positive) = (0, 0, 0);
    let mut worst = 0.0f64;
    for (k, z) in zoo::groupoids().iter().enumerate() {
        let g = &z.g;
        let mut r = rng(200 + k as u64);
        let mut cases = vec![GroupoidFunction::constant(g.len(), ONE), GroupoidFunction::unit_indicator(g), GroupoidFunction::zeros(g.len())];
        for _ in 0..10 {
            cases.push(random_pd(g, &mut r));
            let f = GroupoidFunction::random(g, &mut r);
            cases.push(f.clone());
            // Hermitian but usually indefinite.
            cases.push(f.add(&involute(g, &f)));
        }
        for phi in cases {
            let brute = brute_psd(g, &phi);
            let gns = match gns_bundle(g, &phi) {
                Ok(b) => {
                    worst = worst.max(b.round_trip).max(b.sup_defect);
                    b.round_trip <= TOL && b.sup_defect <= TOL
                }
                Err(_) => false,
            };
            let lib = is_positive_definite(g, &phi).positive;
            total += 1;
            positive += brute as usize;
            agree += (brute == gns && brute == lib) as usize;
        }
    }
    verdict(
        agree == total && worst <= TOL,
        format!("{agree}/{total} agree ({positive} positive), worst coefficient/sup defect {worst:.1e} (tol {TOL:e})"),
    )
}

fn criterion_3() -> Verdict {
    let mut exact = true;
    let mut worst = 0.0f64;
    for z in zoo::groupoids() {
        let gw = godement_witness(&z.g, &z.w).unwrap();
        exact &= gw.g_is_one && gw.normalized;
        let r = lambda_cb_upper(&z.g, &z.w, &MultiplierOptions::default()).unwrap();
        worst = worst.max((r.value - 1.0).abs());
    }
    verdict(exact && worst <= 1e-6, format!("godement g ≡ 1 exactly: {exact}; max |Λ_cb − 1| = {worst:.1e} (tol 1e-6)"))
}

fn criterion_4() -> Verdict {
    let tol = 1e-6;
    let mut unit_err = 0.0f64;
    let mut residual = 0.0f64;
    for n in 1..=6 {
        for m in [linalg::identity(n), CMat::from_element(n, n, ONE)] {
            let (v, cert) = schur_norm(&SchurProblem::new(m.clone(), tol)).unwrap();
            unit_err = unit_err.max((v - 1.0).abs());
            residual = residual.max(certificate_residual(&m, &cert.a, &cert.b));
        }
    }
    let mut r = rng(400);
    let mut gap = 0.0f64;
    for k in 0..20 {
        let (rows, cols) = (3 + k % 4, 3 + (k / 4) % 4);
        let m = random_matrix(&mut r, rows, cols);
        let (v, cert) = schur_norm(&SchurProblem::new(m.clone(), tol)).unwrap();
        let oracle = gamma2_oracle(&m, 3, k as u64);
        gap = gap.max((v - oracle).abs());
        residual = residual.max(certificate_residual(&m, &cert.a, &cert.b)).max(cert.residual);
    }
    verdict(
        unit_err <= 1e-6 && gap <= 1e-3 && residual <= 1e-6,
        format!("identity/ones |v − 1| {unit_err:.1e} (tol 1e-6); oracle gap {gap:.1e} (tol 1e-3); residual {residual:.1e} (tol 1e-6)"),
    )
}

fn criterion_5() -> Verdict {
    let (mut tested, mut worst, mut amp) = (0, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (k, z) in zoo::groupoids().iter().enumerate() {
        let (g, w) = (&z.g, &z.w);
        let mut r = rng(500 + k as u64);
        let mut phis = vec![GroupoidFunction::constant(g.len(), ONE), GroupoidFunction::unit_indicator(g)];
        for _ in 0..3 {
            phis.push(contractive_pd(g, &mut r).scale(c(0.999, 0.0)));
            phis.push(GroupoidFunction::random(g, &mut r));
        }
        for (i, phi) in phis.iter().enumerate() {
            let seed = 5000 + 100 * k as u64 + i as u64;
            let opts = MultiplierOptions { op_trials: 10, seed, ..Default::default() };
            let m = m0a_norm_with(g, w, phi, &opts).unwrap();
            amp = amp.max(multiplier_amplification_lower(g, w, phi, 8, seed) - m.m0a_value);
            if m.m0a_value > 1.0 {
                continue;
            }
            tested += 1;
            for _ in 0..100 {
                let f = GroupoidFunction::random(g, &mut r);
                worst = worst.max(reduced_norm(g, w, &phi.pointwise(&f)) - reduced_norm(g, w, &f));
            }
        }
    }
    verdict(
        tested > 0 && worst <= 1e-8 && amp <= 1e-6,
        format!("{tested} φ with m0a ≤ 1: max ‖λ(φf)‖ − ‖λ(f)‖ = {worst:.1e} (tol 1e-8); max amplification − Schur = {amp:.1e} (tol 1e-6)"),
    )
}

/// Accepted weak-amenability witnesses with C = 1 on `z`.
fn wa_witnesses(z: &ZooGroupoid, seed: u64) -> Vec<WeakAmenabilityWitness> {
    let g = &z.g;
    let mut r = rng(seed);
    let one = GroupoidFunction::constant(g.len(), ONE);
    let pd = contractive_pd(g, &mut r);
    let convex: Vec<GroupoidFunction> =
        (1..=4).map(|k| one.scale(c(1.0 - 0.5f64.powi(k), 0.0)).add(&pd.scale(c(0.5f64.powi(k), 0.0)))).collect();
    vec![
        WeakAmenabilityWitness { phis: vec![one], c: 1.0 },
        WeakAmenabilityWitness { phis: harmonic_ramp(g, 4), c: 1.0 },
        WeakAmenabilityWitness { phis: convex, c: 1.0 },
    ]
}

fn criterion_6() -> Verdict {
    let opts = MultiplierOptions::default();
    let (mut accepted, mut exact) = (0, true);
    let mut excess = f64::NEG_INFINITY;
    for (k, z) in zoo::groupoids().iter().enumerate() {
        for wa in wa_witnesses(z, 600 + k as u64) {
            if check_weak_amenability_witness(&z.g, &z.w, &wa, &opts).is_err() {
                continue;
            }
            accepted += 1;
            let cb = cbap_from_weak_amenability(&z.g, &z.w, &wa).unwrap();
            for (t, phi) in cb.ops.iter().zip(&wa.phis) {
                exact &= t.dense == CartanOperator::multiplier(phi).dense;
            }
            let rep = cbap_witness_check(&z.g, &z.w, &cb, &opts).unwrap();
            excess = excess.max(rep.constant - wa.c);
        }
    }
    verdict(
        accepted > 0 && exact && excess <= 1e-6,
        format!("{accepted} accepted witnesses; dense form = m_φ exactly: {exact}; max certified − C = {excess:.1e} (tol 1e-6)"),
    )
}

fn criterion_7() -> Verdict {
    let (mut worst, mut reps, mut embedding) = (0.0f64, 0, true);
    for z in zoo::groupoids() {
        for (_, rep) in zoo::reps(&z.g) {
            let f = fell_w(&z.g, &rep).unwrap();
            worst = worst.max(f.partial_isometry_defect).max(f.absorption_defect);
            reps += 1;
        }
        let e = diag_embedding(&z.g, &z.w, &GroupoidFunction::zeros(z.g.len())).unwrap();
        embedding &= e.generator_defect == 0.0 && e.rank == z.g.len();
    }
    verdict(
        worst <= 1e-10 && embedding,
        format!("{reps} reps, max W defect {worst:.1e} (tol 1e-10); π(δ_γ) = λ_γ⊗λ_γ exactly and full rank: {embedding}"),
    )
}

fn criterion_8() -> Verdict {
    let (mut e_worst, mut literal, mut forms) = (0.0f64, 0.0f64, 0.0f64);
    let mut counterexample = None;
    for z in zoo::groupoids() {
        let g = &z.g;
        let n = g.len();
        let zero = linalg::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                let s = linalg::kron(&lambda(g, a), &lambda(g, b));
                let r = tensor_expectation(g, &z.w, &s).unwrap();
                let expect = if a == b { &s } else { &zero };
                e_worst = e_worst.max(linalg::max_abs_diff(&r.op, expect));
            }
        }
        let wi = weight_identities(g, &z.w);
        literal = literal.max(wi.full);
        forms = forms.max(wi.sandwich).max(wi.corner);
        if counterexample.is_none() {
            if let Some((a, b)) = wi.counterexample {
                counterexample = Some(format!("{}: λ_{}⊗λ_{}", z.name, g.name(a), g.name(b)));
            }
        }
    }
    let pass = e_worst <= 1e-10 && literal <= 1e-10 && forms <= 1e-10;
    verdict(
        pass,
        format!(
            "ℰ on all pairs {e_worst:.1e}; literal (τ⊗τ)∘ℰ = τ⊗τ {literal:.1e}{}; sandwiched and corner forms {forms:.1e} (tol 1e-10)",
            counterexample.map_or(String::new(), |c| format!(" at {c}"))
        ),
    )
}

fn criterion_9() -> Verdict {
    let opts = MultiplierOptions::default();
    let (mut runs, mut accepted) = (0, 0);
    let (mut s_dev, mut const_gap) = (0.0f64, 0.0f64);
    for (k, z) in zoo::groupoids().iter().enumerate() {
        let mut witnesses = vec![identity_witness(&z.g)];
        for wa in wa_witnesses(z, 900 + k as u64) {
            witnesses.push(cbap_from_weak_amenability(&z.g, &z.w, &wa).unwrap());
        }
        for cb in &witnesses {
            runs += 1;
            let Ok(before) = cbap_witness_check(&z.g, &z.w, cb, &opts) else { continue };
            let Ok(p) = discrete_equality_pipeline(&z.g, &z.w, cb, &opts) else { continue };
            if check_weak_amenability_witness(&z.g, &z.w, &p.witness, &opts).is_ok() {
                accepted += 1;
            }
            s_dev = s_dev.max(p.s_deviation);
            const_gap = const_gap.max((p.report.constant - before.constant).abs());
        }
    }
    verdict(
        accepted == runs && s_dev <= 1e-8 && const_gap <= 1e-6,
        format!("{accepted}/{runs} pipelines accepted; max |C_out − C_in| {const_gap:.1e} (tol 1e-6); S = m_φ_T deviation {s_dev:.1e} (tol 1e-8)"),
    )
}

fn sample_sections(pa: &gcb::partial_action::PartialAction, tg: &gcb::partial_action::TransformationGroupoid, r: &mut ChaCha8Rng) -> Vec<BundleSection> {
    let atoms = atom_basis(pa, tg);
    (0..5)
        .map(|_| {
            atoms.iter().fold(BundleSection::zeros(pa), |acc, a| {
                let s = c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
                acc.add(&BundleSection { f: a.f.iter().map(|v| v.iter().map(|x| x * s).collect()).collect() })
            })
        })
        .collect()
}

fn criterion_10() -> Verdict {
    let opts = MultiplierOptions::default();
    let (mut delta, mut coaction, mut slack, mut gap) = (0.0f64, 0.0f64, f64::NEG_INFINITY, 0.0f64);
    let (mut runs, mut ok) = (0, 0);
    for (k, z) in zoo::partial_actions().iter().enumerate() {
        let tg = transformation_groupoid(&z.pa).unwrap();
        let w = full_support_uniform(&tg.g).unwrap();
        let mut r = rng(1000 + k as u64);
        let d = delta_check(&z.pa, &tg, &sample_sections(&z.pa, &tg, &mut r), &w).unwrap();
        delta = delta.max(d.multiplicative).max(d.involutive).max(d.inner).max(d.intertwining).max(d.norm);
        let co = coaction_check(&z.pa, &tg).unwrap();
        coaction = coaction.max(co.multiplicative).max(co.involutive) + if co.injective { 0.0 } else { 1.0 };
        let zg = ZooGroupoid { name: z.name.clone(), g: tg.g.clone(), w: w.clone() };
        let mut witnesses = vec![identity_witness(&tg.g)];
        for wa in wa_witnesses(&zg, 1100 + k as u64) {
            witnesses.push(cbap_from_weak_amenability(&tg.g, &w, &wa).unwrap());
        }
        for cb in &witnesses {
            runs += 1;
            let before = cbap_witness_check(&tg.g, &w, cb, &opts).unwrap();
            let Ok(p) = pa_equality_pipeline(&z.pa, &tg, &w, cb, &opts) else { continue };
            ok += 1;
            slack = slack.max(p.estimate_slack);
            gap = gap.max((p.report.constant - before.constant).abs());
        }
    }
    verdict(
        delta <= 1e-10 && coaction <= 1e-10 && ok == runs && gap <= 1e-6 && slack <= 1e-12,
        format!(
            "Δ defect {delta:.1e} (tol 1e-10); coaction {coaction:.1e}; {ok}/{runs} pipelines, constant gap {gap:.1e}; max (|1 − φ| − ‖χ_t − Tχ_t‖) {slack:.1e}"
        ),
    )
}

fn criterion_11() -> Verdict {
    let (mut sets, mut exact) = (0, 0);
    for z in zoo::groupoids() {
        for f in invariant_sets(&z.g) {
            let r = inner_exactness_check(&z.g, &z.w, &f.carrier).unwrap();
            sets += 1;
            exact += (r.exact && r.ideal_in_kernel && r.dim_ideal == r.dim_kernel && r.surjective) as usize;
        }
    }
    verdict(exact == sets, format!("{exact}/{sets} invariant F with dim im ι = dim ker p"))
}

fn criterion_12() -> Verdict {
    let mut worst = 0.0f64;
    for z in zoo::semigroups() {
        for (_, pi) in &z.reps {
            worst = worst.max(fell_absorption_is(&z.s, pi).unwrap().intertwining_defect);
        }
    }
    let mut wide = 0;
    let groupoids = zoo::groupoids();
    for z in &groupoids {
        let all = all_bisections(&z.g).unwrap();
        wide += wide_check_and_iso(&z.g, &all).is_ok() as usize;
    }
    let s = zoo::semigroups().into_iter().find(|z| z.name == "semilattice2").unwrap();
    let u = universal_groupoid(&s.s).unwrap();
    let units = u.germs.g.units().len();
    let arrows = u.germs.g.len() - units;
    let universal = units == 2 && arrows == 0;
    verdict(
        worst <= 1e-12 && wide == groupoids.len() && universal,
        format!("intertwining {worst:.1e} (tol 1e-12); wide on all bisections {wide}/{}; semilattice2 universal: {units} units, {arrows} non-unit arrows", groupoids.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("algebra laws", criterion_1),
        ("positive definiteness and GNS", criterion_2),
        ("amenability gives Λ_cb = 1", criterion_3),
        ("Schur engine", criterion_4),
        ("multiplier contract", criterion_5),
        ("weak inequality", criterion_6),
        ("Fell absorption", criterion_7),
        ("tensor expectation", criterion_8),
        ("discrete equality round trip", criterion_9),
        ("partial actions", criterion_10),
        ("inner exactness", criterion_11),
        ("inverse semigroups", criterion_12),
    ];
    let mut unexpected = Vec::new();
    let start = Instant::now();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        let t = Instant::now();
        let v = f();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {n:>2} {name}: {} [{:.1}s]", v.detail, t.elapsed().as_secs_f64());
        if !v.pass && !KNOWN_FAILURES.contains(&n) {
            unexpected.push(n);
        }
    }
    println!("acceptance: {:.1}s total", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
