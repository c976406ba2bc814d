//! Multipliers m_φ of C*_r(𝒢), their M₀A norms and weak-amenability witnesses.

use crate::algebra::{regular_rep, BlockOperator, GroupoidFunction};
use crate::error::{Error, Result};
use crate::groupoid::{orbits, FiniteGroupoid};
use crate::harmonic::{self, fiber_gram, godement_witness, GodementWitness};
use crate::linalg::{c, ONE};
use crate::measure::UnitWeight;
use crate::schur::{amplification_norm_lower, schur_norm_with, SchurOptions, SchurProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Deviation below which a witness sequence counts as having reached 1.
pub const CONVERGED: f64 = 1e-9;

/// Pointwise product φ·f.
pub fn multiply(_g: &FiniteGroupoid, phi: &GroupoidFunction, f: &GroupoidFunction) -> GroupoidFunction {
    phi.pointwise(f)
}

#[derive(Debug, Clone)]
pub struct MultiplierOptions {
    pub tol: f64,
    pub seed: u64,
    /// Random f used to check ‖λ(φf)‖ ≤ ‖φ‖·‖λ(f)‖.
    pub op_trials: usize,
}

impl Default for MultiplierOptions {
    fn default() -> Self {
        MultiplierOptions { tol: 1e-6, seed: 0, op_trials: 50 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplierReport {
    #[serde(skip)]
    pub phi: GroupoidFunction,
    pub m0a_value: f64,
    /// (unit, Schur norm of its fiber matrix), over supp μ.
    pub fiber_values: Vec<(usize, f64)>,
    pub op_bound_checked: bool,
    /// max ‖λ(φf)‖ / ‖λ(f)‖ over the sampled f.
    pub op_ratio: f64,
    pub tol: f64,
}

pub fn m0a_norm(g: &FiniteGroupoid, w: &UnitWeight, phi: &GroupoidFunction) -> Result<MultiplierReport> {
    m0a_norm_with(g, w, phi, &MultiplierOptions::default())
}

/// Max over units of the Schur norm of [φ(γβ⁻¹)]_{γ,β ∈ 𝒢_x}. Units in one
/// orbit have permutation-equivalent matrices, so one solve per orbit.
pub fn m0a_norm_with(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    phi: &GroupoidFunction,
    opts: &MultiplierOptions,
) -> Result<MultiplierReport> {
    let mut orbit_value = vec![None; g.len()];
    let mut orbit_of = vec![usize::MAX; g.len()];
    for (k, o) in orbits(g).iter().enumerate() {
        for &x in o {
            orbit_of[x] = k;
        }
    }
    let schur_opts = SchurOptions { seed: opts.seed, ..SchurOptions::default() };
    let mut fiber_values = Vec::new();
    for &x in w.support() {
        let k = orbit_of[x];
        let v = match orbit_value[k] {
            Some(v) => v,
            None => {
                let (v, _) = schur_norm_with(&SchurProblem::new(fiber_gram(g, phi, x), opts.tol), &schur_opts)?;
                orbit_value[k] = Some(v);
                v
            }
        };
        fiber_values.push((x, v));
    }
    let m0a_value = fiber_values.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut op_ratio = 0.0f64;
    let mut op_bound_checked = true;
    for _ in 0..opts.op_trials {
        let f = GroupoidFunction::random(g, &mut rng);
        let base = regular_rep(g, w, &f).norm();
        let image = regular_rep(g, w, &phi.pointwise(&f)).norm();
        if base > 0.0 {
            op_ratio = op_ratio.max(image / base);
        }
        if image > m0a_value * base + 1e-8 * (1.0 + base) {
            op_bound_checked = false;
        }
    }
    Ok(MultiplierReport { phi: phi.clone(), m0a_value, fiber_values, op_bound_checked, op_ratio, tol: opts.tol })
}

/// Heuristic lower bound on ‖m_φ‖_cb from matrix amplifications.
pub fn multiplier_amplification_lower(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    phi: &GroupoidFunction,
    trials: usize,
    seed: u64,
) -> f64 {
    let elems: Vec<usize> = (0..g.len()).filter(|&a| w.covers(g, a)).collect();
    let basis: Vec<BlockOperator> = elems.iter().map(|&a| regular_rep(g, w, &GroupoidFunction::delta(g, a))).collect();
    let images: Vec<BlockOperator> = elems.iter().zip(&basis).map(|(&a, b)| b.scale(phi.values[a])).collect();
    amplification_norm_lower(&basis, &images, trials, seed)
}

#[derive(Debug, Clone)]
pub struct WeakAmenabilityWitness {
    pub phis: Vec<GroupoidFunction>,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    /// max_i ‖φ_i‖_{M₀A}.
    pub constant: f64,
    pub m0a_values: Vec<f64>,
    /// max_γ |φ_i(γ) − 1| for each term.
    pub deviations: Vec<f64>,
    pub final_deviation: f64,
}

/// A finite sequence converges if its last deviation is below `CONVERGED`,
/// or if the profile is non-increasing, has at least two terms and ends
/// strictly below where it started.
pub fn converges(deviations: &[f64]) -> bool {
    match deviations {
        [] => false,
        [.., last] if *last <= CONVERGED => true,
        [first, .., last] => deviations.windows(2).all(|p| p[1] <= p[0] + 1e-15) && last < first,
        _ => false,
    }
}

fn deviation_from_one(g: &FiniteGroupoid, w: &UnitWeight, phi: &GroupoidFunction) -> f64 {
    (0..g.len()).filter(|&a| w.covers(g, a)).map(|a| (phi.values[a] - ONE).norm()).fold(0.0, f64::max)
}

pub fn check_weak_amenability_witness(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    witness: &WeakAmenabilityWitness,
    opts: &MultiplierOptions,
) -> Result<WitnessReport> {
    if witness.phis.is_empty() {
        return Err(Error::WitnessRejected("empty sequence".into()));
    }
    let mut m0a_values = Vec::new();
    let mut deviations = Vec::new();
    for (i, phi) in witness.phis.iter().enumerate() {
        if phi.len() != g.len() {
            return Err(Error::DimensionMismatch(format!("phi {i} has {} values", phi.len())));
        }
        let v = m0a_norm_with(g, w, phi, &MultiplierOptions { op_trials: 0, ..opts.clone() })?.m0a_value;
        if v > witness.c + opts.tol {
            return Err(Error::WitnessRejected(format!("term {i} has M0A norm {v} above C = {}", witness.c)));
        }
        m0a_values.push(v);
        deviations.push(deviation_from_one(g, w, phi));
    }
    if !converges(&deviations) {
        return Err(Error::WitnessRejected(format!("no convergence to 1, deviations {deviations:?}")));
    }
    let constant = m0a_values.iter().copied().fold(0.0, f64::max);
    let final_deviation = *deviations.last().expect("nonempty");
    Ok(WitnessReport { constant, m0a_values, deviations, final_deviation })
}

#[derive(Debug, Clone)]
pub struct LambdaCbReport {
    pub value: f64,
    pub witness: WeakAmenabilityWitness,
    pub godement: GodementWitness,
    /// m0a_norm(1), which must be 1 within tol.
    pub m0a_of_one: f64,
}

/// Λ_cb = 1 on a finite groupoid, with witness (1).
pub fn lambda_cb_upper(g: &FiniteGroupoid, w: &UnitWeight, opts: &MultiplierOptions) -> Result<LambdaCbReport> {
    let godement = godement_witness(g, w)?;
    if !godement.g_is_one || !godement.normalized {
        return Err(Error::WitnessRejected("Godement witness does not produce g = 1".into()));
    }
    let one = GroupoidFunction::constant(g.len(), ONE);
    let m0a_of_one = m0a_norm_with(g, w, &one, opts)?.m0a_value;
    if (m0a_of_one - 1.0).abs() > opts.tol {
        return Err(Error::WitnessRejected(format!("m0a(1) = {m0a_of_one}")));
    }
    Ok(LambdaCbReport { value: 1.0, witness: WeakAmenabilityWitness { phis: vec![one], c: 1.0 }, godement, m0a_of_one })
}

#[derive(Debug, Clone, Serialize)]
pub struct AmenabilityReport {
    pub deviations: Vec<f64>,
    pub unit_sup: Vec<f64>,
}

/// Positive-definite g_i, bounded by 1 on units, converging to 1.
pub fn amenability_witness_check(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    gfuns: &[GroupoidFunction],
) -> Result<AmenabilityReport> {
    if gfuns.is_empty() {
        return Err(Error::WitnessRejected("empty sequence".into()));
    }
    let mut deviations = Vec::new();
    let mut unit_sup = Vec::new();
    for (i, f) in gfuns.iter().enumerate() {
        let pd = harmonic::is_positive_definite(g, f);
        if let Some(wit) = pd.witness {
            return Err(Error::WitnessRejected(format!(
                "term {i} is not positive definite at unit {} (eigenvalue {:e})",
                g.name(wit.unit),
                wit.eigenvalue
            )));
        }
        let s = g.units().iter().map(|&x| f.values[x].norm()).fold(0.0, f64::max);
        if s > 1.0 + 1e-12 {
            return Err(Error::WitnessRejected(format!("term {i} exceeds 1 on units ({s})")));
        }
        unit_sup.push(s);
        deviations.push(deviation_from_one(g, w, f));
    }
    if !converges(&deviations) {
        return Err(Error::WitnessRejected(format!("no convergence to 1, deviations {deviations:?}")));
    }
    Ok(AmenabilityReport { deviations, unit_sup })
}

/// (1 − 1/k)·1 for k = 1..=n, a slowly converging witness of constant 1.
pub fn harmonic_ramp(g: &FiniteGroupoid, n: usize) -> Vec<GroupoidFunction> {
    (1..=n).map(|k| GroupoidFunction::constant(g.len(), c(1.0 - 1.0 / k as f64, 0.0))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{from_group, pair_groupoid, Group};
    use crate::measure::full_support_uniform;

    #[test]
    fn sign_character_of_z2() {
        let g = from_group(&Group::cyclic(2));
        let w = full_support_uniform(&g).unwrap();
        let r = m0a_norm(&g, &w, &GroupoidFunction::from_real(&[1.0, -1.0])).unwrap();
        assert!((r.m0a_value - 1.0).abs() < 1e-6);
        assert!(r.op_bound_checked);
    }

    #[test]
    fn convergence_rule() {
        assert!(converges(&[0.0]));
        assert!(!converges(&[1.0]));
        assert!(converges(&[1.0, 0.5, 0.2]));
        assert!(!converges(&[0.5, 0.6]));
        assert!(!converges(&[]));
    }

    #[test]
    fn ramp_is_accepted() {
        let g = pair_groupoid(2);
        let w = full_support_uniform(&g).unwrap();
        let wit = WeakAmenabilityWitness { phis: harmonic_ramp(&g, 5), c: 1.0 };
        let r = check_weak_amenability_witness(&g, &w, &wit, &MultiplierOptions::default()).unwrap();
        assert!((r.final_deviation - 0.2).abs() < 1e-12);
        let zero = WeakAmenabilityWitness { phis: vec![GroupoidFunction::zeros(4)], c: 1.0 };
        assert!(check_weak_amenability_witness(&g, &w, &zero, &MultiplierOptions::default()).is_err());
    }
}
