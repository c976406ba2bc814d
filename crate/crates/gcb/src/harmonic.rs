//! Positive-definite functions, bundle representations and their coefficients.

use crate::algebra::GroupoidFunction;
use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::linalg::{self, c, CMat, C64, I, ONE, ZERO};
use crate::measure::{Rational, UnitWeight};
use num_traits::{ToPrimitive, Zero};

/// Eigenvalues above −PSD_TOL count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;
/// Gram eigenvalues at or below this (relative) threshold span the kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// [φ(γβ⁻¹)] for γ, β ∈ 𝒢_x in canonical order.
pub fn fiber_gram(g: &FiniteGroupoid, phi: &GroupoidFunction, x: usize) -> CMat {
    let fib = g.source_fiber(x);
    CMat::from_fn(fib.len(), fib.len(), |i, j| {
        phi.values[g.comp(fib[i], g.inv(fib[j])).expect("composable")]
    })
}

#[derive(Debug, Clone)]
pub struct PosDefWitness {
    pub unit: usize,
    pub eigenvalue: f64,
    pub eigenvector: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct PosDefReport {
    pub positive: bool,
    /// Smallest Gram eigenvalue over all fibers.
    pub min_eigenvalue: f64,
    pub witness: Option<PosDefWitness>,
}

/// Every fiber Gram matrix is PSD. A non-Hermitian Gram matrix fails with
/// eigenvalue −∞ and an empty eigenvector.
pub fn is_positive_definite(g: &FiniteGroupoid, phi: &GroupoidFunction) -> PosDefReport {
    let mut min_eig = f64::INFINITY;
    let mut witness: Option<PosDefWitness> = None;
    for &x in g.units() {
        let gram = fiber_gram(g, phi, x);
        let scale = linalg::max_abs(&gram).max(1.0);
        if linalg::hermitian_defect(&gram) > PSD_TOL * scale {
            min_eig = f64::NEG_INFINITY;
            if witness.is_none() {
                witness = Some(PosDefWitness { unit: x, eigenvalue: f64::NEG_INFINITY, eigenvector: vec![] });
            }
            continue;
        }
        let (vals, vecs) = linalg::hermitian_eig(&gram);
        let Some(&lo) = vals.first() else { continue };
        min_eig = min_eig.min(lo);
        if lo < -PSD_TOL && witness.as_ref().map_or(true, |w| lo < w.eigenvalue) {
            witness = Some(PosDefWitness { unit: x, eigenvalue: lo, eigenvector: vecs.column(0).iter().copied().collect() });
        }
    }
    PosDefReport { positive: witness.is_none(), min_eigenvalue: min_eig, witness }
}

/// Unitary representation of 𝒢 on a finite-dimensional bundle.
#[derive(Debug, Clone)]
pub struct BundleRep {
    /// Fiber dimension, indexed by unit position.
    pub dims: Vec<usize>,
    /// L(γ): ℋ_{d(γ)} → ℋ_{r(γ)}, indexed by element.
    pub l: Vec<CMat>,
}

/// A section of the bundle, indexed by unit position.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub vec: Vec<Vec<C64>>,
}

impl Section {
    pub fn zeros(dims: &[usize]) -> Self {
        Section { vec: dims.iter().map(|&d| vec![ZERO; d]).collect() }
    }

    /// sup_x ‖ξ(x)‖.
    pub fn sup_norm(&self) -> f64 {
        self.vec.iter().map(|v| linalg::vec_norm(v)).fold(0.0, f64::max)
    }

    pub fn combine(&self, a: C64, other: &Section, b: C64) -> Section {
        Section {
            vec: self.vec.iter().zip(&other.vec).map(|(u, v)| u.iter().zip(v).map(|(x, y)| a * x + b * y).collect()).collect(),
        }
    }
}

impl BundleRep {
    fn dim_at(&self, g: &FiniteGroupoid, x: usize) -> usize {
        self.dims[g.unit_pos(x).expect("unit")]
    }

    /// Checks shapes, L(x) = 1, multiplicativity, inverses and unitarity.
    pub fn validate(&self, g: &FiniteGroupoid, tol: f64) -> Result<()> {
        if self.dims.len() != g.units().len() || self.l.len() != g.len() {
            return Err(Error::DimensionMismatch("bundle representation layout".into()));
        }
        let fail = |cond: &str, a: usize, dev: f64| Error::ValidationFailed {
            condition: cond.into(),
            witness: format!("{} (deviation {dev:.3e})", g.name(a)),
        };
        for a in 0..g.len() {
            let (dr, dd) = (self.dim_at(g, g.rng(a)), self.dim_at(g, g.src(a)));
            if self.l[a].shape() != (dr, dd) {
                return Err(Error::DimensionMismatch(format!("L({}) has shape {:?}", g.name(a), self.l[a].shape())));
            }
        }
        for a in 0..g.len() {
            let la = &self.l[a];
            if g.is_unit(a) {
                let dev = linalg::max_abs_diff(la, &linalg::identity(la.nrows()));
                if dev > tol {
                    return Err(fail("unit-identity", a, dev));
                }
            }
            let dev = linalg::max_abs_diff(&(la.adjoint() * la), &linalg::identity(la.ncols()));
            if dev > tol {
                return Err(fail("unitary", a, dev));
            }
            let dev = linalg::max_abs_diff(&self.l[g.inv(a)], &la.adjoint());
            if dev > tol {
                return Err(fail("inverse", a, dev));
            }
            for &b in g.range_fiber(g.src(a)) {
                let ab = g.comp(a, b).expect("composable");
                let dev = linalg::max_abs_diff(&(la * &self.l[b]), &self.l[ab]);
                if dev > tol {
                    return Err(fail("multiplicative", a, dev));
                }
            }
        }
        Ok(())
    }

    /// The left regular bundle: ℋ_x = ℓ²(𝒢^x), L(γ)δ_β = δ_{γβ}.
    pub fn regular(g: &FiniteGroupoid) -> BundleRep {
        let dims = g.units().iter().map(|&x| g.range_fiber(x).len()).collect();
        let l = (0..g.len())
            .map(|a| {
                let (to, from) = (g.range_fiber(g.rng(a)), g.range_fiber(g.src(a)));
                let mut m = linalg::zeros(to.len(), from.len());
                for (j, &b) in from.iter().enumerate() {
                    let ab = g.comp(a, b).expect("composable");
                    let i = to.iter().position(|&t| t == ab).expect("range fiber");
                    m[(i, j)] = ONE;
                }
                m
            })
            .collect();
        BundleRep { dims, l }
    }

    /// The trivial one-dimensional bundle.
    pub fn trivial(g: &FiniteGroupoid) -> BundleRep {
        BundleRep { dims: vec![1; g.units().len()], l: vec![linalg::identity(1); g.len()] }
    }
}

/// δ_x in each ℓ²(𝒢^x) of the regular bundle.
pub fn regular_unit_section(g: &FiniteGroupoid) -> Section {
    Section {
        vec: g
            .units()
            .iter()
            .map(|&x| g.range_fiber(x).iter().map(|&a| if a == x { ONE } else { ZERO }).collect())
            .collect(),
    }
}

/// (ξ, η)_L(γ) = ⟨ξ(r(γ)), L(γ) η(d(γ))⟩.
pub fn coefficient(g: &FiniteGroupoid, rep: &BundleRep, xi: &Section, eta: &Section) -> Result<GroupoidFunction> {
    let n = g.units().len();
    if rep.dims.len() != n || xi.vec.len() != n || eta.vec.len() != n {
        return Err(Error::DimensionMismatch("section count differs from unit count".into()));
    }
    for k in 0..n {
        if xi.vec[k].len() != rep.dims[k] || eta.vec[k].len() != rep.dims[k] {
            return Err(Error::DimensionMismatch(format!("section length at {}", g.name(g.units()[k]))));
        }
    }
    let pos = |x: usize| g.unit_pos(x).expect("unit");
    let values = (0..g.len())
        .map(|a| {
            let v = &rep.l[a] * linalg::CVec::from_column_slice(&eta.vec[pos(g.src(a))]);
            linalg::inner(&xi.vec[pos(g.rng(a))], v.as_slice())
        })
        .collect();
    Ok(GroupoidFunction::from_values(values))
}

/// The four positive-definite parts Q_k = (ξ + iᵏη, ξ + iᵏη)_L, with
/// (ξ, η)_L = ¼ Σ_k i⁻ᵏ Q_k.
pub fn polarization_parts(
    g: &FiniteGroupoid,
    rep: &BundleRep,
    xi: &Section,
    eta: &Section,
) -> Result<[GroupoidFunction; 4]> {
    let mut out: Vec<GroupoidFunction> = Vec::with_capacity(4);
    let mut ik = ONE;
    for _ in 0..4 {
        let z = xi.combine(ONE, eta, ik);
        out.push(coefficient(g, rep, &z, &z)?);
        ik *= I;
    }
    Ok(out.try_into().expect("four parts"))
}

pub fn recombine_polarization(parts: &[GroupoidFunction; 4]) -> GroupoidFunction {
    let mut acc = GroupoidFunction::zeros(parts[0].len());
    let mut ik = ONE;
    for q in parts {
        acc = acc.add(&q.scale(ik.conj() * 0.25));
        ik *= I;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct GnsBundle {
    pub rep: BundleRep,
    pub xi: Section,
    /// max |coefficient(L, ξ, ξ) − φ|.
    pub round_trip: f64,
    /// |‖φ‖_∞ − max_x ‖ξ(x)‖²|.
    pub sup_defect: f64,
}

/// Realizes φ as a diagonal coefficient.
///
/// ℋ_x is ℂ^{𝒢_x} modulo the kernel of its Gram matrix G = UΛU†, realized as
/// ℂ^k through J = Λ₊^{1/2}U₊†. L(γ) is induced by δ_β ↦ δ_{βγ⁻¹} and
/// ξ(x) = Jδ_x.
pub fn gns_bundle(g: &FiniteGroupoid, phi: &GroupoidFunction) -> Result<GnsBundle> {
    let pd = is_positive_definite(g, phi);
    if let Some(w) = pd.witness {
        return Err(Error::NotPositiveDefinite { unit: g.name(w.unit).to_string(), eigenvalue: w.eigenvalue });
    }
    // Per unit position: J and its right inverse on the range.
    let mut j_of = Vec::new();
    let mut jinv_of = Vec::new();
    for &x in g.units() {
        let gram = fiber_gram(g, phi, x);
        let (vals, vecs) = linalg::hermitian_eig(&gram);
        let top = vals.last().copied().unwrap_or(0.0).max(1.0);
        let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > KERNEL_TOL * top).collect();
        let n = gram.nrows();
        let j = CMat::from_fn(keep.len(), n, |r, col| vecs[(col, keep[r])].conj() * vals[keep[r]].sqrt());
        let jinv = CMat::from_fn(n, keep.len(), |row, r| vecs[(row, keep[r])] / vals[keep[r]].sqrt());
        j_of.push(j);
        jinv_of.push(jinv);
    }
    let pos = |x: usize| g.unit_pos(x).expect("unit");
    let dims: Vec<usize> = j_of.iter().map(|j| j.nrows()).collect();
    let l = (0..g.len())
        .map(|a| {
            let (fr, fd) = (g.source_fiber(g.rng(a)), g.source_fiber(g.src(a)));
            let mut p = linalg::zeros(fr.len(), fd.len());
            for (jj, &b) in fd.iter().enumerate() {
                let t = g.comp(b, g.inv(a)).expect("composable");
                let ii = fr.iter().position(|&e| e == t).expect("source fiber");
                p[(ii, jj)] = ONE;
            }
            &j_of[pos(g.rng(a))] * p * &jinv_of[pos(g.src(a))]
        })
        .collect();
    let xi = Section {
        vec: g
            .units()
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let col = g.source_fiber(x).iter().position(|&e| e == x).expect("unit in fiber");
                j_of[k].column(col).iter().copied().collect()
            })
            .collect(),
    };
    let rep = BundleRep { dims, l };
    let back = coefficient(g, &rep, &xi, &xi)?;
    let round_trip = back.max_diff(phi);
    let sup = phi.sup_norm();
    let xi_sq = xi.sup_norm().powi(2);
    Ok(GnsBundle { rep, xi, round_trip, sup_defect: (sup - xi_sq).abs() })
}

#[derive(Debug, Clone)]
pub struct GodementWitness {
    /// ξ(β) = |𝒢^{r(β)}|^{-1/2}.
    pub xi: Vec<f64>,
    /// |ξ(β)|² as an exact rational.
    pub xi_sq: Vec<Rational>,
    pub g: GroupoidFunction,
    pub g_exact: Vec<Rational>,
    /// Σ_{β ∈ 𝒢^x} |ξ(β)|² = 1 for every x, exactly.
    pub normalized: bool,
    /// g ≡ 1, exactly.
    pub g_is_one: bool,
}

/// One-step amenability witness on a finite groupoid.
pub fn godement_witness(g: &FiniteGroupoid, w: &UnitWeight) -> Result<GodementWitness> {
    if g.units().is_empty() {
        return Err(Error::EmptyGroupoid);
    }
    if !w.is_full_support(g) {
        return Err(Error::InvalidInput("weight must have full support".into()));
    }
    let size = |a: usize| g.range_fiber(g.rng(a)).len() as i128;
    let xi_sq: Vec<Rational> = (0..g.len()).map(|a| Rational::new(1, size(a))).collect();
    let xi: Vec<f64> = (0..g.len()).map(|a| (1.0 / size(a) as f64).sqrt()).collect();
    let normalized = g
        .units()
        .iter()
        .all(|&x| g.range_fiber(x).iter().fold(Rational::zero(), |s, &b| s + xi_sq[b]) == Rational::from_integer(1));
    let mut g_exact = Vec::with_capacity(g.len());
    let mut values = Vec::with_capacity(g.len());
    for a in 0..g.len() {
        let ai = g.inv(a);
        let mut ex = Rational::zero();
        let mut fl = ZERO;
        for &b in g.range_fiber(g.rng(a)) {
            let t = g.comp(ai, b).expect("composable");
            // |𝒢^{r(β)}| = |𝒢^{r(γ⁻¹β)}|: both fibers lie in one orbit.
            assert_eq!(size(b), size(t), "fibers within an orbit have equal size");
            ex += xi_sq[b];
            fl += c(xi[b] * xi[t], 0.0);
        }
        g_exact.push(ex);
        values.push(fl);
    }
    let g_is_one = g_exact.iter().all(|&v| v == Rational::from_integer(1));
    Ok(GodementWitness { xi, xi_sq, g: GroupoidFunction::from_values(values), g_exact, normalized, g_is_one })
}

impl GodementWitness {
    pub fn g_exact_f64(&self) -> Vec<f64> {
        self.g_exact.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct BgBound {
    pub value: f64,
    pub positive_definite: bool,
    /// A unimodular multiple of φ is positive definite.
    pub phase_positive: bool,
    /// ¼ Σ_k ‖sξ + iᵏη/s‖²_∞ for the regular-bundle realization, best s.
    pub polarization: f64,
    /// ‖ξ‖_∞‖η‖_∞ for the same realization.
    pub coefficient: f64,
}

/// Upper bound on ‖φ‖_{B(𝒢)}.
pub fn bg_norm_upper(g: &FiniteGroupoid, phi: &GroupoidFunction) -> f64 {
    bg_norm_bound(g, phi).value
}

pub fn bg_norm_bound(g: &FiniteGroupoid, phi: &GroupoidFunction) -> BgBound {
    let unit_max = g.units().iter().map(|&x| phi.values[x].norm()).fold(0.0, f64::max);
    let positive_definite = is_positive_definite(g, phi).positive;
    let phase_positive = positive_definite || {
        let top = g.units().iter().copied().max_by(|&a, &b| phi.values[a].norm().total_cmp(&phi.values[b].norm()));
        top.map_or(false, |x| {
            let z = phi.values[x];
            z.norm() > 0.0 && is_positive_definite(g, &phi.scale(z.conj() / z.norm())).positive
        })
    };
    // φ = (ξ, η)_L on the regular bundle with η = δ_x and ξ(y) = conj φ|_{𝒢^y}.
    let eta = regular_unit_section(g);
    let xi = Section {
        vec: g.units().iter().map(|&y| g.range_fiber(y).iter().map(|&a| phi.values[a].conj()).collect()).collect(),
    };
    let coefficient = xi.sup_norm() * eta.sup_norm();
    let polar_at = |s: f64| -> f64 {
        let mut ik = ONE;
        let mut acc = 0.0;
        for _ in 0..4 {
            acc += xi.combine(c(s, 0.0), &eta, ik / s).sup_norm().powi(2);
            ik *= I;
        }
        acc / 4.0
    };
    let polarization = if xi.sup_norm() == 0.0 {
        0.0
    } else {
        // Golden-section search over log s.
        let (mut a, mut b) = (-20.0f64, 20.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..100 {
            let (m1, m2) = (b - r * (b - a), a + r * (b - a));
            if polar_at(m1.exp()) < polar_at(m2.exp()) {
                b = m2;
            } else {
                a = m1;
            }
        }
        polar_at((0.5 * (a + b)).exp())
    };
    let mut value = coefficient.min(polarization);
    if phase_positive {
        value = value.min(unit_max);
    }
    BgBound { value, positive_definite, phase_positive, polarization, coefficient }
}
