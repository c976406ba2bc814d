use crate::report::{error_value, exit_code, finite, Report};
use crate::{suite, Cli, Command, Global};
use gcb::algebra::{i_norm, inner_exactness_check, involute, recover_function, reduced_norm, regular_rep, convolve};
use gcb::cartan::{cbap_witness_check, discrete_equality_pipeline, identity_witness, phi_from_operator_discrete};
use gcb::fell::{diag_embedding_with_cap, fell_w_with_cap, initial_subspace_basis_with_cap, weight_identities, GroupoidRep};
use gcb::groupoid::{disjoint_union, from_group, invariant_sets, orbits, pair_groupoid, FiniteGroupoid, Group};
use gcb::harmonic::{bg_norm_bound, gns_bundle, is_positive_definite};
use gcb::io::{self, GroupoidFile};
use gcb::isemigroup::{
    fell_absorption_is, germ_groupoid, left_regular, rep_laws, restricted_regular, universal_groupoid, validate_semigroup,
    RawSAction, RawSemigroup, SAction,
};
use gcb::linalg::CMat;
use gcb::measure::{full_support_uniform, modular_ratio, UnitWeight, Weight};
use gcb::multiplier::{lambda_cb_upper, m0a_norm_with, MultiplierOptions};
use gcb::partial_action::{
    coaction_check, delta_check, pa_equality_pipeline, transformation_groupoid, validate_partial_action, RawPartialAction,
    COACTION_CAP,
};
use gcb::schur::{schur_norm_with, SchurOptions, SchurProblem};
use gcb::{Error, Result};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Regular representations of semigroups up to this size go through Fell absorption.
const ISG_REGULAR_CAP: usize = 64;

pub fn execute(cli: Cli) -> u8 {
    let start = Instant::now();
    let name = command_name(&cli.command);
    let mut rep = Report::default();
    let outcome = dispatch(&cli.global, cli.command, &mut rep);
    let (error, code) = match &outcome {
        Ok(Outcome::Done) => (Value::Null, 0),
        Ok(Outcome::Failed(e, _)) => (e.clone(), 1),
        Err(e) => {
            eprintln!("error: {e}");
            (error_value(e), exit_code(e))
        }
    };
    let mut doc = json!({
        "schema_version": io::SCHEMA_VERSION,
        "command": name,
        "seed": cli.global.seed,
        "tol": cli.global.tol,
        "inputs": rep.inputs,
        "results": rep.results,
        "deviations": rep.deviations,
        "ok": code == 0,
        "error": error,
    });
    if cli.global.timing {
        doc["wall_time_ms"] = finite(start.elapsed().as_secs_f64() * 1e3);
    }
    if let Ok(Outcome::Failed(_, msg)) = &outcome {
        eprintln!("error: {msg}");
    }
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match &cli.global.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                eprintln!("error: {}: {e}", p.display());
                return 1;
            }
        }
        None => print!("{text}"),
    }
    code
}

pub enum Outcome {
    Done,
    /// A check failed without a library error: (error value, message).
    Failed(Value, String),
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Build { .. } => "build",
        Command::Norm { .. } => "norm",
        Command::Posdef { .. } => "posdef",
        Command::SchurNorm { .. } => "schur-norm",
        Command::M0a { .. } => "m0a",
        Command::LambdaCb { .. } => "lambda-cb",
        Command::FellCheck { .. } => "fell-check",
        Command::Cbap { .. } => "cbap",
        Command::PhiFromOp { .. } => "phi-from-op",
        Command::PaBuild { .. } => "pa-build",
        Command::PaEquality { .. } => "pa-equality",
        Command::IsgValidate { .. } => "isg-validate",
        Command::Germ { .. } => "germ",
        Command::Universal { .. } => "universal",
        Command::InnerExact { .. } => "inner-exact",
        Command::Suite { .. } => "suite",
    }
}

fn opts(g: &Global) -> MultiplierOptions {
    MultiplierOptions { tol: g.tol, seed: g.seed, ..Default::default() }
}

pub fn load_groupoid(rep: &mut Report, path: &Path, max: usize) -> Result<(FiniteGroupoid, UnitWeight)> {
    let v = rep.input("groupoid", path)?;
    let file: GroupoidFile = rep.typed("groupoid", v)?;
    io::groupoid_from_file(&file, max)
}

fn names(g: &FiniteGroupoid, set: &[usize]) -> Vec<String> {
    set.iter().map(|&a| g.name(a).to_string()).collect()
}

fn write_groupoid(path: &Option<PathBuf>, file: &GroupoidFile) -> Result<()> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(file).expect("serializable") + "\n";
        std::fs::write(p, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn weight_value(g: &FiniteGroupoid, w: &UnitWeight) -> Value {
    let file = io::groupoid_file(g, Some(w));
    serde_json::to_value(file.mu).expect("serializable")
}

fn dispatch(gl: &Global, cmd: Command, rep: &mut Report) -> Result<Outcome> {
    match cmd {
        Command::Validate { groupoid } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            rep.result("elements", g.len());
            rep.result("units", names(&g, g.units()));
            rep.result("orbits", orbits(&g).iter().map(|o| names(&g, o)).collect::<Vec<_>>());
            rep.result("mu", weight_value(&g, &w));
            let m = modular_ratio(&g, &w);
            rep.result("cocycle_exact", m.exact_cocycle_holds(&g));
            rep.deviation("cocycle", m.cocycle_defect(&g), 1e-12);
        }
        Command::Build { parts, mu, write } => {
            let g = build(&parts)?;
            if g.len() > gl.max_elements {
                return Err(Error::TooLarge { what: "groupoid".into(), size: g.len(), cap: gl.max_elements });
            }
            let w = match mu {
                None => None,
                Some(s) => {
                    let vals = s.split(',').map(|t| Weight::parse(t.trim())).collect::<Result<Vec<_>>>()?;
                    Some(UnitWeight::new(&g, &vals)?)
                }
            };
            let file = io::groupoid_file(&g, w.as_ref());
            write_groupoid(&write, &file)?;
            rep.result("elements", g.len());
            rep.result("groupoid", &file);
        }
        Command::Norm { groupoid, f } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let f = io::function_from_value(&g, &rep.input("f", &f)?)?;
            rep.result("i_norm", i_norm(&g, &f));
            rep.result("reduced_norm", reduced_norm(&g, &w, &f));
            rep.result("sup_norm", f.sup_norm());
            let op = regular_rep(&g, &w, &f);
            rep.deviation("recover", recover_function(&g, &op).max_diff(&f), 1e-12);
            let star = regular_rep(&g, &w, &convolve(&g, &involute(&g, &f), &f));
            rep.deviation("star_homomorphism", star.max_diff(&op.adjoint().mul(&op)), 1e-10);
        }
        Command::Posdef { groupoid, phi } => {
            let (g, _) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let phi = io::function_from_value(&g, &rep.input("phi", &phi)?)?;
            let pd = is_positive_definite(&g, &phi);
            rep.result("positive", pd.positive);
            rep.result("min_eigenvalue", finite(pd.min_eigenvalue));
            if let Some(wit) = &pd.witness {
                rep.result(
                    "witness",
                    json!({
                        "unit": g.name(wit.unit),
                        "eigenvalue": wit.eigenvalue,
                        "eigenvector": wit.eigenvector.iter().map(|z| io::complex_to_value(*z)).collect::<Vec<_>>(),
                    }),
                );
            }
            if pd.positive {
                let b = gns_bundle(&g, &phi)?;
                rep.result("gns_dims", &b.rep.dims);
                rep.deviation("gns_round_trip", b.round_trip, 1e-9);
                rep.deviation("gns_sup", b.sup_defect, 1e-9);
            }
            let bg = bg_norm_bound(&g, &phi);
            rep.result(
                "bg_upper",
                json!({"value": bg.value, "phase_positive": bg.phase_positive, "polarization": bg.polarization, "coefficient": bg.coefficient}),
            );
        }
        Command::SchurNorm { matrix } => {
            let m = io::matrix_from_value(&rep.input("matrix", &matrix)?)?;
            let (v, cert) = schur_norm_with(&SchurProblem::new(m, gl.tol), &SchurOptions { seed: gl.seed, ..Default::default() })?;
            rep.result("value", v);
            rep.result("lower", cert.lower);
            rep.result("certificate", json!({"a": cert.a, "b": cert.b}));
            rep.deviation("residual", cert.residual, 1e-6);
            rep.deviation("gap", v - cert.lower, gl.tol.max(1e-9) * v.max(1.0) * 10.0);
        }
        Command::M0a { groupoid, phi } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let phi = io::function_from_value(&g, &rep.input("phi", &phi)?)?;
            let r = m0a_norm_with(&g, &w, &phi, &opts(gl))?;
            rep.result("value", r.m0a_value);
            rep.result("fibers", r.fiber_values.iter().map(|(x, v)| json!([g.name(*x), v])).collect::<Vec<_>>());
            rep.result("op_bound_checked", r.op_bound_checked);
            rep.result("op_ratio", finite(r.op_ratio));
        }
        Command::LambdaCb { groupoid } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let r = lambda_cb_upper(&g, &w, &opts(gl))?;
            rep.result("value", r.value);
            rep.result("m0a_of_one", r.m0a_of_one);
            rep.result(
                "godement",
                json!({
                    "xi_sq": r.godement.xi_sq.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                    "g_is_one": r.godement.g_is_one,
                    "normalized": r.godement.normalized,
                }),
            );
            rep.deviation("value", (r.value - 1.0).abs(), gl.tol);
        }
        Command::FellCheck { groupoid, rep: rep_file, tensor_cap } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let reps: Vec<(String, GroupoidRep)> = match rep_file {
                Some(p) => vec![("file".into(), io::rep_from_value(&g, &rep.input("rep", &p)?)?)],
                None => gcb::zoo::reps(&g),
            };
            let mut out = Vec::new();
            let mut worst = 0.0f64;
            for (name, r) in &reps {
                r.validate(&g, 1e-10)?;
                let f = fell_w_with_cap(&g, r, tensor_cap)?;
                worst = worst.max(f.partial_isometry_defect).max(f.absorption_defect);
                out.push(json!({"rep": name, "dim": r.dim, "partial_isometry": f.partial_isometry_defect, "absorption": f.absorption_defect}));
            }
            rep.result("absorption", out);
            rep.deviation("absorption", worst, 1e-10);
            let init = initial_subspace_basis_with_cap(&g, tensor_cap)?;
            rep.result("initial_subspace", json!({"dim": init.pairs.len(), "invariant": init.invariant}));
            rep.deviation("initial_projection", init.projection_defect, 1e-10);
            let emb = diag_embedding_with_cap(&g, &w, &gcb::algebra::GroupoidFunction::zeros(g.len()), tensor_cap)?;
            rep.result("embedding_rank", emb.rank);
            rep.result("embedding_injective", emb.rank == g.len());
            let wi = weight_identities(&g, &w);
            rep.deviation("weight_sandwich", wi.sandwich, 1e-10);
            rep.deviation("weight_corner", wi.corner, 1e-10);
            rep.result(
                "weight_full",
                json!({"defect": wi.full, "counterexample": wi.counterexample.map(|(a, b)| [g.name(a), g.name(b)])}),
            );
        }
        Command::Cbap { groupoid, witness } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let wit = io::cbap_witness_from_value(&g, &rep.input("witness", &witness)?)?;
            let o = opts(gl);
            let c = cbap_witness_check(&g, &w, &wit, &o)?;
            rep.result("constant", c.constant);
            rep.result("cb_bounds", &c.cb_bounds);
            rep.result("generator_deviations", &c.deviations);
            let p = discrete_equality_pipeline(&g, &w, &wit, &o)?;
            rep.result("wa_witness", io::wa_witness_to_value(&g, &p.witness));
            rep.result("wa_constant", p.report.constant);
            rep.result("wa_deviations", &p.report.deviations);
            rep.result("distances", &p.distances);
            rep.result("rescale", &p.rescale);
            rep.deviation("constant", p.report.constant - wit.c, gl.tol);
            rep.deviation("compression", p.s_deviation, 1e-8);
        }
        Command::PhiFromOp { groupoid, op } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let t = io::operator_from_value(&g, &rep.input("op", &op)?)?;
            let r = phi_from_operator_discrete(&g, &w, &t)?;
            rep.result("phi", io::function_to_value(&g, &r.phi));
            rep.result("op_norm_lower", r.op_norm_lower);
            rep.result("bound_holds", r.bound_holds);
        }
        Command::PaBuild { action, write } => {
            let v = rep.input("action", &action)?;
            let raw: RawPartialAction = rep.typed("action", v)?;
            let pa = validate_partial_action(&raw)?;
            let tg = transformation_groupoid(&pa)?;
            let w = full_support_uniform(&tg.g)?;
            let file = io::groupoid_file(&tg.g, None);
            write_groupoid(&write, &file)?;
            rep.result("elements", tg.g.len());
            rep.result("units", tg.g.units().len());
            rep.result("groupoid", &file);
            let d = delta_check(&pa, &tg, &[], &w)?;
            rep.deviation("delta_multiplicative", d.multiplicative, 1e-10);
            rep.deviation("delta_involutive", d.involutive, 1e-10);
            rep.deviation("delta_inner", d.inner, 1e-10);
            rep.deviation("delta_intertwining", d.intertwining, 1e-10);
            rep.deviation("delta_norm", d.norm, 1e-9);
            if pa.order() * tg.g.len() <= COACTION_CAP {
                let co = coaction_check(&pa, &tg)?;
                rep.result("coaction_injective", co.injective);
                rep.deviation("coaction_multiplicative", co.multiplicative, 1e-10);
                rep.deviation("coaction_involutive", co.involutive, 1e-10);
            }
        }
        Command::PaEquality { action, witness } => {
            let v = rep.input("action", &action)?;
            let raw: RawPartialAction = rep.typed("action", v)?;
            let pa = validate_partial_action(&raw)?;
            let tg = transformation_groupoid(&pa)?;
            let w = full_support_uniform(&tg.g)?;
            let wit = match witness {
                Some(p) => io::cbap_witness_from_value(&tg.g, &rep.input("witness", &p)?)?,
                None => identity_witness(&tg.g),
            };
            let r = pa_equality_pipeline(&pa, &tg, &w, &wit, &opts(gl))?;
            rep.result("wa_witness", io::wa_witness_to_value(&tg.g, &r.witness));
            rep.result("wa_constant", r.report.constant);
            rep.result("wa_deviations", &r.report.deviations);
            rep.result("distances", &r.distances);
            rep.result("rescale", &r.rescale);
            rep.deviation("estimate_slack", r.estimate_slack, 1e-10);
            rep.deviation("compression", r.s_deviation, 1e-8);
        }
        Command::IsgValidate { semigroup } => {
            let v = rep.input("semigroup", &semigroup)?;
            let raw: RawSemigroup = rep.typed("semigroup", v)?;
            let s = validate_semigroup(&raw)?;
            rep.result("elements", s.len());
            rep.result("idempotents", s.idempotents().iter().map(|&e| s.names[e].clone()).collect::<Vec<_>>());
            rep.result("zero", s.zero.map(|z| s.names[z].clone()));
            let l = rep_laws(&s, &left_regular(&s), false);
            rep.deviation("left_regular_partial_isometry", l.partial_isometry_defect, 1e-12);
            rep.deviation("left_regular_multiplicative", l.multiplicative_defect, 1e-12);
            rep.deviation("left_regular_star", l.star_defect, 1e-12);
            let r = rep_laws(&s, &restricted_regular(&s), true);
            rep.deviation("restricted_partial_isometry", r.partial_isometry_defect, 1e-12);
            rep.deviation("restricted_multiplicative", r.multiplicative_defect, 1e-12);
            let mut reps = vec![("trivial", vec![CMat::identity(1, 1); s.len()])];
            if s.len() <= ISG_REGULAR_CAP {
                reps.push(("left-regular", left_regular(&s)));
            }
            let mut worst = 0.0f64;
            for (name, pi) in &reps {
                let f = fell_absorption_is(&s, pi)?;
                worst = worst.max(f.intertwining_defect);
                rep.result(&format!("fell_{name}"), json!({"init_dim": f.init_dim, "fin_dim": f.fin_dim, "partial_isometry": f.partial_isometry_defect}));
            }
            rep.deviation("fell_intertwining", worst, 1e-12);
        }
        Command::Germ { action, write } => {
            let v = rep.input("action", &action)?;
            let raw: RawSAction = rep.typed("action", v)?;
            let act = SAction::from_raw(&raw)?;
            let germs = germ_groupoid(&act)?;
            let file = io::groupoid_file(&germs.g, None);
            write_groupoid(&write, &file)?;
            rep.result("elements", germs.g.len());
            rep.result("units", germs.g.units().len());
            rep.result("groupoid", &file);
        }
        Command::Universal { semigroup, write } => {
            let v = rep.input("semigroup", &semigroup)?;
            let raw: RawSemigroup = rep.typed("semigroup", v)?;
            let s = validate_semigroup(&raw)?;
            let u = universal_groupoid(&s)?;
            let file = io::groupoid_file(&u.germs.g, None);
            write_groupoid(&write, &file)?;
            rep.result("characters", &u.action.points);
            rep.result("elements", u.germs.g.len());
            rep.result("units", u.germs.g.units().len());
            rep.result("groupoid", &file);
        }
        Command::InnerExact { groupoid, units } => {
            let (g, w) = load_groupoid(rep, &groupoid, gl.max_elements)?;
            let sets: Vec<Vec<usize>> = match units {
                Some(s) => {
                    let set = s
                        .split(',')
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .map(|t| match g.index_of(t) {
                            Some(a) if g.is_unit(a) => Ok(a),
                            _ => Err(Error::InvalidInput(format!("{t} is not a unit"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    vec![set]
                }
                None => invariant_sets(&g).into_iter().map(|f| f.carrier).collect(),
            };
            let mut out = Vec::new();
            let mut all = true;
            for f in &sets {
                let r = inner_exactness_check(&g, &w, f)?;
                all &= r.exact;
                let mut v = serde_json::to_value(&r).expect("serializable");
                v["f"] = json!(names(&g, f));
                out.push(v);
            }
            rep.result("checks", out);
            rep.result("exact", all);
            if !all {
                let e = json!({"kind": "NotExact", "message": "sequence not exact"});
                return Ok(Outcome::Failed(e, "sequence not exact".into()));
            }
        }
        Command::Suite { filter, files } => return suite::run(gl, filter.as_deref(), &files, rep),
    }
    Ok(Outcome::Done)
}

/// Components `pair:N`, `cyclic:N` (or `zN`), `s3`, `trivial`, joined by disjoint union.
pub fn build(parts: &[String]) -> Result<FiniteGroupoid> {
    let mut acc: Option<FiniteGroupoid> = None;
    for p in parts {
        let g = component(p)?;
        acc = Some(match acc {
            None => g,
            Some(h) => disjoint_union(&h, &g),
        });
    }
    acc.ok_or(Error::EmptyGroupoid)
}

fn component(p: &str) -> Result<FiniteGroupoid> {
    let bad = || Error::InvalidInput(format!("unknown component {p}"));
    let size = |s: &str| s.parse::<usize>().ok().filter(|&n| (1..=64).contains(&n)).ok_or_else(bad);
    if let Some(n) = p.strip_prefix("pair:") {
        return Ok(pair_groupoid(size(n)?));
    }
    if let Some(n) = p.strip_prefix("cyclic:").or_else(|| p.strip_prefix('z')) {
        return Ok(from_group(&Group::cyclic(size(n)?)));
    }
    match p {
        "s3" => Ok(from_group(&Group::symmetric3())),
        "trivial" => Ok(from_group(&Group::cyclic(1))),
        _ => Err(bad()),
    }
}
