//! The quasi Cartan pair (C*_r(𝒢), C₀(X)): A-rank-one maps, finite-rank
//! decompositions of multipliers, CBAP witnesses and the φ_T correspondence.

use crate::algebra::{convolve, expectation, involute, reduced_norm, GroupoidFunction};
use crate::error::{Error, Result};
use crate::fell::{compression, DiagEmbedding};
use crate::groupoid::{bisection_cover, is_bisection, FiniteGroupoid};
use crate::linalg::{self, c, CMat, ONE, ZERO};
use crate::measure::UnitWeight;
use crate::multiplier::{
    check_weak_amenability_witness, converges, m0a_norm_with, MultiplierOptions, WeakAmenabilityWitness,
    WitnessReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A linear map on C_c(𝒢), as Σ Θ_{g_i,h_i} when `pairs` is nonempty.
#[derive(Debug, Clone)]
pub struct CartanOperator {
    pub pairs: Vec<(GroupoidFunction, GroupoidFunction)>,
    /// Column β is T(δ_β).
    pub dense: CMat,
}

impl CartanOperator {
    pub fn from_pairs(g: &FiniteGroupoid, pairs: Vec<(GroupoidFunction, GroupoidFunction)>) -> CartanOperator {
        let n = g.len();
        let mut dense = linalg::zeros(n, n);
        for (gi, hi) in &pairs {
            let hs = involute(g, hi);
            for b in 0..n {
                let e = expectation(g, &convolve(g, &hs, &GroupoidFunction::delta(g, b)));
                let col = convolve(g, gi, &e);
                for a in 0..n {
                    dense[(a, b)] += col.values[a];
                }
            }
        }
        CartanOperator { pairs, dense }
    }

    pub fn from_dense(dense: CMat) -> CartanOperator {
        CartanOperator { pairs: Vec::new(), dense }
    }

    pub fn identity(g: &FiniteGroupoid) -> CartanOperator {
        CartanOperator::from_dense(linalg::identity(g.len()))
    }

    pub fn zero(g: &FiniteGroupoid) -> CartanOperator {
        CartanOperator::from_dense(linalg::zeros(g.len(), g.len()))
    }

    /// m_φ in the δ-basis.
    pub fn multiplier(phi: &GroupoidFunction) -> CartanOperator {
        let n = phi.len();
        CartanOperator::from_dense(CMat::from_fn(n, n, |a, b| if a == b { phi.values[a] } else { ZERO }))
    }

    pub fn apply(&self, f: &GroupoidFunction) -> GroupoidFunction {
        let v = &self.dense * linalg::CVec::from_column_slice(&f.values);
        GroupoidFunction::from_values(v.iter().copied().collect())
    }

    pub fn column(&self, b: usize) -> GroupoidFunction {
        GroupoidFunction::from_values(self.dense.column(b).iter().copied().collect())
    }

    /// Whether `dense` agrees with Σ g_i * E(h_i^* * ·) to `tol`.
    pub fn pairs_defect(&self, g: &FiniteGroupoid) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        linalg::max_abs_diff(&CartanOperator::from_pairs(g, self.pairs.clone()).dense, &self.dense)
    }

    /// The diagonal of `dense` when it is exactly diagonal.
    pub fn as_multiplier(&self) -> Option<GroupoidFunction> {
        let n = self.dense.nrows();
        for a in 0..n {
            for b in 0..n {
                if a != b && self.dense[(a, b)] != ZERO {
                    return None;
                }
            }
        }
        Some(GroupoidFunction::from_values((0..n).map(|a| self.dense[(a, a)]).collect()))
    }
}

/// T(f * a) = T(f) * a on generators f = δ_β, a = δ_x.
pub fn check_a_linear(g: &FiniteGroupoid, t: &CartanOperator) -> Result<()> {
    for b in 0..g.len() {
        let tb = t.column(b);
        for &x in g.units() {
            let lhs = t.apply(&convolve(g, &GroupoidFunction::delta(g, b), &GroupoidFunction::delta(g, x)));
            let rhs = convolve(g, &tb, &GroupoidFunction::delta(g, x));
            let dev = lhs.max_diff(&rhs);
            if dev > 1e-10 {
                return Err(Error::NotALinear { generator: format!("{} * {}", g.name(b), g.name(x)), deviation: dev });
            }
        }
    }
    Ok(())
}

/// Θ_{b1,b2}: x ↦ b1 * E(b2^* * x) with its cb bound.
#[derive(Debug, Clone)]
pub struct Theta {
    pub op: CartanOperator,
    pub cb_bound: f64,
}

pub fn theta(g: &FiniteGroupoid, w: &UnitWeight, b1: &GroupoidFunction, b2: &GroupoidFunction) -> Theta {
    let cb_bound = reduced_norm(g, w, b1) * reduced_norm(g, w, b2);
    Theta { op: CartanOperator::from_pairs(g, vec![(b1.clone(), b2.clone())]), cb_bound }
}

/// Σ ‖g_i‖_r ‖h_i‖_r over the pairs (over `to_pairs` when none are given),
/// or m0a(φ) when T = m_φ, whichever is smaller.
pub fn cb_upper(g: &FiniteGroupoid, w: &UnitWeight, t: &CartanOperator, opts: &MultiplierOptions) -> Result<f64> {
    let pairs = if t.pairs.is_empty() { to_pairs(g, t) } else { t.pairs.clone() };
    let mut best: f64 = pairs.iter().map(|(a, b)| reduced_norm(g, w, a) * reduced_norm(g, w, b)).sum();
    if let Some(phi) = t.as_multiplier() {
        let v = m0a_norm_with(g, w, &phi, &MultiplierOptions { op_trials: 0, ..opts.clone() })?.m0a_value;
        best = best.min(v);
    }
    Ok(best)
}

/// An A-linear T as Σ_U Θ_{T(χ_U), χ_U} over a bisection cover of 𝒢.
pub fn to_pairs(g: &FiniteGroupoid, t: &CartanOperator) -> Vec<(GroupoidFunction, GroupoidFunction)> {
    let all: Vec<usize> = (0..g.len()).collect();
    bisection_cover(g, &all)
        .into_iter()
        .map(|u| {
            let chi = GroupoidFunction::indicator(g, &u.carrier);
            (t.apply(&chi), chi)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiCartanReport {
    pub unit: bool,
    pub regular: bool,
    pub expectation: bool,
    pub bisections_checked: usize,
}

pub fn quasi_cartan_validate(g: &FiniteGroupoid, w: &UnitWeight) -> Result<QuasiCartanReport> {
    quasi_cartan_validate_with(g, w, &|f: &GroupoidFunction| expectation(g, f))
}

/// Conditions (i)-(iii) with a caller-supplied expectation.
pub fn quasi_cartan_validate_with(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    e: &dyn Fn(&GroupoidFunction) -> GroupoidFunction,
) -> Result<QuasiCartanReport> {
    if !w.is_full_support(g) {
        return Err(Error::InvalidInput("weight must have full support".into()));
    }
    let n = g.len();
    let fail = |cond: &str, wit: String| Error::ValidationFailed { condition: cond.into(), witness: wit };
    let chi_x = GroupoidFunction::unit_indicator(g);
    for b in 0..n {
        let d = GroupoidFunction::delta(g, b);
        if convolve(g, &chi_x, &d).max_diff(&d) > 1e-12 || convolve(g, &d, &chi_x).max_diff(&d) > 1e-12 {
            return Err(fail("(i) unit", g.name(b).into()));
        }
    }
    // (ii) regularity over bisections.
    let bisections: Vec<Vec<usize>> = if n <= 12 {
        (1u32..(1 << n))
            .map(|mask| (0..n).filter(|&a| mask >> a & 1 == 1).collect::<Vec<_>>())
            .filter(|s| is_bisection(g, s))
            .collect()
    } else {
        let mut v: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
        v.extend(bisection_cover(g, &(0..n).collect::<Vec<_>>()).into_iter().map(|b| b.carrier));
        v
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut unit_fns: Vec<GroupoidFunction> = g.units().iter().map(|&x| GroupoidFunction::delta(g, x)).collect();
    unit_fns.push(expectation(g, &GroupoidFunction::random(g, &mut rng)));
    for u in &bisections {
        let chi = GroupoidFunction::indicator(g, u);
        let chis = involute(g, &chi);
        for a in &unit_fns {
            let conj = convolve(g, &convolve(g, &chis, a), &chi);
            if !conj.is_unit_supported(g, 1e-12) {
                let names: Vec<&str> = u.iter().map(|&b| g.name(b)).collect();
                return Err(fail("(ii) regularity", format!("{{{}}}", names.join(","))));
            }
        }
    }
    // (iii) E is a conditional expectation onto the unit-supported functions.
    let mut tests: Vec<GroupoidFunction> = (0..n).map(|b| GroupoidFunction::delta(g, b)).collect();
    for _ in 0..8 {
        tests.push(GroupoidFunction::random(g, &mut rng));
    }
    for a in &unit_fns {
        if e(a).max_diff(a) > 1e-12 {
            return Err(fail("(iii) projection onto A", format!("{:?}", a.support().iter().map(|&x| g.name(x)).collect::<Vec<_>>())));
        }
    }
    for (k, f) in tests.iter().enumerate() {
        let ef = e(f);
        if !ef.is_unit_supported(g, 1e-12) {
            return Err(fail("(iii) range", format!("test {k}")));
        }
        if e(&ef).max_diff(&ef) > 1e-12 {
            return Err(fail("(iii) idempotent", format!("test {k}")));
        }
        let pos = e(&convolve(g, &involute(g, f), f));
        if g.units().iter().any(|&x| pos.values[x].re < -1e-12 || pos.values[x].im.abs() > 1e-12) {
            return Err(fail("(iii) positive", format!("test {k}")));
        }
        for a in &unit_fns {
            for b in &unit_fns {
                let lhs = e(&convolve(g, &convolve(g, a, f), b));
                let rhs = convolve(g, &convolve(g, a, &ef), b);
                if lhs.max_diff(&rhs) > 1e-12 {
                    return Err(fail("(iii) bimodular", format!("test {k}")));
                }
            }
        }
    }
    Ok(QuasiCartanReport { unit: true, regular: true, expectation: true, bisections_checked: bisections.len() })
}

/// m_φ = Σ_i Θ_{φχ_{U_i}, χ_{U_i}} over a bisection cover of supp φ.
pub fn multiplier_rank_decomposition(g: &FiniteGroupoid, _w: &UnitWeight, phi: &GroupoidFunction) -> Result<CartanOperator> {
    let pairs: Vec<(GroupoidFunction, GroupoidFunction)> = bisection_cover(g, &phi.support())
        .into_iter()
        .map(|u| {
            let chi = GroupoidFunction::indicator(g, &u.carrier);
            (phi.pointwise(&chi), chi)
        })
        .collect();
    let op = CartanOperator::from_pairs(g, pairs);
    let target = CartanOperator::multiplier(phi).dense;
    if op.dense != target {
        return Err(Error::PipelineMismatch {
            stage: "decomposition".into(),
            deviation: linalg::max_abs_diff(&op.dense, &target),
        });
    }
    Ok(op)
}

#[derive(Debug, Clone)]
pub struct Rotated {
    pub op: CartanOperator,
    /// Σ_i ‖g_i − g_{i,n}‖_r ‖h_i‖_r.
    pub distance: f64,
    pub n: usize,
}

/// Replaces each g_i by its least-squares approximation in span(basis), which
/// must be all of C_c(𝒢). The δ-basis is used as is.
pub fn rotate(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    t: &CartanOperator,
    basis: &[GroupoidFunction],
    n: usize,
) -> Result<Rotated> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let size = g.len();
    let pairs = if t.pairs.is_empty() { to_pairs(g, t) } else { t.pairs.clone() };
    let is_delta_basis = basis.len() == size
        && basis.iter().enumerate().all(|(k, f)| *f == GroupoidFunction::delta(g, k));
    let b = CMat::from_fn(size, basis.len(), |i, j| basis[j].values[i]);
    if !is_delta_basis {
        let rank = linalg::rank(&b, 1e-10);
        if rank < size {
            let sv = linalg::singular_values(&b);
            return Err(Error::BasisNotSpanning(sv.get(size - 1).copied().unwrap_or(0.0)));
        }
    }
    let pinv = if is_delta_basis {
        None
    } else {
        Some(b.clone().pseudo_inverse(1e-12).map_err(|e| Error::InvalidInput(e.to_string()))?)
    };
    let mut new_pairs = Vec::with_capacity(pairs.len());
    let mut distance = 0.0;
    for (gi, hi) in &pairs {
        let gn = match &pinv {
            None => gi.clone(),
            Some(p) => {
                let coeffs = p * linalg::CVec::from_column_slice(&gi.values);
                GroupoidFunction::from_values((&b * coeffs).iter().copied().collect())
            }
        };
        distance += reduced_norm(g, w, &gi.sub(&gn)) * reduced_norm(g, w, hi);
        new_pairs.push((gn, hi.clone()));
    }
    if distance >= 1.0 / n as f64 {
        return Err(Error::BasisNotSpanning(distance));
    }
    let op = if distance == 0.0 { CartanOperator { pairs: new_pairs, dense: t.dense.clone() } } else { CartanOperator::from_pairs(g, new_pairs) };
    Ok(Rotated { op, distance, n })
}

#[derive(Debug, Clone)]
pub struct PhiReport {
    pub phi: GroupoidFunction,
    /// max_γ ‖T(δ_γ)‖_r, a lower bound for ‖T‖.
    pub op_norm_lower: f64,
    /// |φ_T(γ)| ≤ ‖T(δ_γ)‖_r for every γ.
    pub bound_holds: bool,
}

/// φ_T(γ) = E(δ_{γ⁻¹} * T(δ_γ))(d(γ)).
pub fn phi_from_operator_discrete(g: &FiniteGroupoid, w: &UnitWeight, t: &CartanOperator) -> Result<PhiReport> {
    check_a_linear(g, t)?;
    let mut phi = GroupoidFunction::zeros(g.len());
    let mut op_norm_lower = 0.0f64;
    let mut bound_holds = true;
    for a in 0..g.len() {
        if !w.covers(g, a) {
            continue;
        }
        let ta = t.column(a);
        let v = expectation(g, &convolve(g, &GroupoidFunction::delta(g, g.inv(a)), &ta)).values[g.src(a)];
        phi.values[a] = v;
        let nr = reduced_norm(g, w, &ta);
        op_norm_lower = op_norm_lower.max(nr);
        if v.norm() > nr + 1e-10 {
            bound_holds = false;
        }
    }
    if !bound_holds {
        return Err(Error::PipelineMismatch { stage: "phi bound".into(), deviation: phi.sup_norm() - op_norm_lower });
    }
    Ok(PhiReport { phi, op_norm_lower, bound_holds })
}

#[derive(Debug, Clone)]
pub struct CbapWitness {
    pub ops: Vec<CartanOperator>,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CbapReport {
    /// Certified Λ_cb(B, A) upper bound: max of `cb_bounds`.
    pub constant: f64,
    pub cb_bounds: Vec<f64>,
    /// max_γ ‖T_i(δ_γ) − δ_γ‖_r.
    pub deviations: Vec<f64>,
}

pub fn generator_deviation(g: &FiniteGroupoid, w: &UnitWeight, t: &CartanOperator) -> f64 {
    (0..g.len())
        .filter(|&a| w.covers(g, a))
        .map(|a| reduced_norm(g, w, &t.column(a).sub(&GroupoidFunction::delta(g, a))))
        .fold(0.0, f64::max)
}

pub fn cbap_witness_check(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    witness: &CbapWitness,
    opts: &MultiplierOptions,
) -> Result<CbapReport> {
    if witness.ops.is_empty() {
        return Err(Error::WitnessRejected("empty sequence".into()));
    }
    let mut cb_bounds = Vec::new();
    let mut deviations = Vec::new();
    for (i, t) in witness.ops.iter().enumerate() {
        if t.dense.shape() != (g.len(), g.len()) {
            return Err(Error::DimensionMismatch(format!("operator {i} has shape {:?}", t.dense.shape())));
        }
        let pd = t.pairs_defect(g);
        if pd > 1e-10 {
            return Err(Error::WitnessRejected(format!("operator {i}: dense form disagrees with its pairs ({pd:e})")));
        }
        if let Err(e) = check_a_linear(g, t) {
            return Err(Error::WitnessRejected(format!("operator {i}: {e}")));
        }
        let bound = cb_upper(g, w, t, opts)?;
        if bound > witness.c + opts.tol {
            return Err(Error::WitnessRejected(format!("operator {i}: cb bound {bound} above C = {}", witness.c)));
        }
        cb_bounds.push(bound);
        deviations.push(generator_deviation(g, w, t));
    }
    if !converges(&deviations) {
        return Err(Error::WitnessRejected(format!("no SOT convergence, deviations {deviations:?}")));
    }
    let constant = cb_bounds.iter().copied().fold(0.0, f64::max);
    Ok(CbapReport { constant, cb_bounds, deviations })
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub witness: WeakAmenabilityWitness,
    pub report: WitnessReport,
    /// Certified rotation distance δ_i of each operator.
    pub distances: Vec<f64>,
    /// C / (C + δ_i).
    pub rescale: Vec<f64>,
    /// max ‖S(δ_γ) − m_{φ_T}(δ_γ)‖ over operators and γ.
    pub s_deviation: f64,
}

/// CBAP witness ↦ weak-amenability witness through φ_T.
pub fn discrete_equality_pipeline(
    g: &FiniteGroupoid,
    w: &UnitWeight,
    witness: &CbapWitness,
    opts: &MultiplierOptions,
) -> Result<PipelineReport> {
    let checked = cbap_witness_check(g, w, witness, opts);
    if let Err(Error::WitnessRejected(msg)) = &checked {
        if msg.starts_with("no SOT") {
            let dev = witness.ops.last().map_or(f64::INFINITY, |t| generator_deviation(g, w, t));
            return Err(Error::PipelineMismatch { stage: "sot".into(), deviation: dev });
        }
    }
    checked?;
    let emb = DiagEmbedding::new(g)?;
    let deltas: Vec<GroupoidFunction> = (0..g.len()).map(|a| GroupoidFunction::delta(g, a)).collect();
    let cst = witness.c;
    let mut phis = Vec::new();
    let mut distances = Vec::new();
    let mut rescale = Vec::new();
    let mut s_deviation = 0.0f64;
    for (i, t) in witness.ops.iter().enumerate() {
        let rot = rotate(g, w, t, &deltas, i + 1)?;
        let factor = if cst > 0.0 { cst / (cst + rot.distance) } else { 1.0 };
        let scaled = CartanOperator {
            pairs: rot.op.pairs.iter().map(|(a, b)| (a.scale(c(factor, 0.0)), b.clone())).collect(),
            dense: rot.op.dense.scale(factor),
        };
        let phi = phi_from_operator_discrete(g, w, &scaled)?.phi;
        let s = compression(g, &emb, &scaled.dense)?;
        for (a, sa) in s.iter().enumerate() {
            let target = GroupoidFunction::delta(g, a).scale(phi.values[a]);
            s_deviation = s_deviation.max(sa.max_diff(&target));
        }
        if s_deviation > 1e-8 {
            return Err(Error::PipelineMismatch { stage: "compression".into(), deviation: s_deviation });
        }
        phis.push(phi);
        distances.push(rot.distance);
        rescale.push(factor);
    }
    let wa = WeakAmenabilityWitness { phis, c: cst };
    let report = check_weak_amenability_witness(g, w, &wa, opts)
        .map_err(|e| Error::PipelineMismatch { stage: format!("weak amenability: {e}"), deviation: f64::NAN })?;
    Ok(PipelineReport { witness: wa, report, distances, rescale, s_deviation })
}

/// The CBAP witness induced by a weak-amenability witness.
pub fn cbap_from_weak_amenability(g: &FiniteGroupoid, w: &UnitWeight, wa: &WeakAmenabilityWitness) -> Result<CbapWitness> {
    let ops = wa.phis.iter().map(|phi| multiplier_rank_decomposition(g, w, phi)).collect::<Result<Vec<_>>>()?;
    Ok(CbapWitness { ops, c: wa.c })
}

pub fn identity_witness(g: &FiniteGroupoid) -> CbapWitness {
    CbapWitness { ops: vec![CartanOperator::identity(g)], c: 1.0 }
}

pub fn one(g: &FiniteGroupoid) -> GroupoidFunction {
    GroupoidFunction::constant(g.len(), ONE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{from_group, pair_groupoid, Group};
    use crate::measure::full_support_uniform;

    #[test]
    fn theta_on_unit() {
        let g = pair_groupoid(2);
        let w = full_support_uniform(&g).unwrap();
        let x = g.units()[0];
        let d = GroupoidFunction::delta(&g, x);
        let t = theta(&g, &w, &d, &d);
        assert_eq!(t.op.apply(&d), d);
        assert!((t.cb_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition_of_one_on_pair_two() {
        let g = pair_groupoid(2);
        let w = full_support_uniform(&g).unwrap();
        let op = multiplier_rank_decomposition(&g, &w, &one(&g)).unwrap();
        assert_eq!(op.pairs.len(), 2);
        assert_eq!(op.dense, linalg::identity(4));
    }

    #[test]
    fn corrupted_expectation_fails() {
        let g = pair_groupoid(2);
        let w = full_support_uniform(&g).unwrap();
        assert!(quasi_cartan_validate(&g, &w).is_ok());
        let x0 = g.units()[0];
        let bad = |f: &GroupoidFunction| {
            let mut e = expectation(&g, f);
            e.values[x0] = ZERO;
            e
        };
        match quasi_cartan_validate_with(&g, &w, &bad) {
            Err(Error::ValidationFailed { condition, .. }) => assert!(condition.starts_with("(iii)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phi_of_multiplier() {
        let g = from_group(&Group::symmetric3());
        let w = full_support_uniform(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = GroupoidFunction::random(&g, &mut rng);
        let r = phi_from_operator_discrete(&g, &w, &CartanOperator::multiplier(&psi)).unwrap();
        assert_eq!(r.phi, psi);
    }

    #[test]
    fn zero_witness_fails_at_sot() {
        let g = pair_groupoid(2);
        let w = full_support_uniform(&g).unwrap();
        let wit = CbapWitness { ops: vec![CartanOperator::zero(&g)], c: 1.0 };
        match discrete_equality_pipeline(&g, &w, &wit, &MultiplierOptions::default()) {
            Err(Error::PipelineMismatch { stage, .. }) => assert_eq!(stage, "sot"),
            other => panic!("{other:?}"),
        }
    }
}
