//! The convolution algebra C_c(𝒢), its norms and the left regular representation.

use crate::error::{Error, Result};
use crate::groupoid::{is_invariant, FiniteGroupoid};
use crate::linalg::{self, c, CMat, C64, ONE, ZERO};
use crate::measure::UnitWeight;
use rand::Rng;

const SUPPORT_TOL: f64 = 1e-14;

/// A complex function on the elements, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupoidFunction {
    pub values: Vec<C64>,
}

impl GroupoidFunction {
    pub fn zeros(n: usize) -> Self {
        GroupoidFunction { values: vec![ZERO; n] }
    }

    pub fn constant(n: usize, v: C64) -> Self {
        GroupoidFunction { values: vec![v; n] }
    }

    pub fn from_values(values: Vec<C64>) -> Self {
        GroupoidFunction { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        GroupoidFunction { values: values.iter().map(|&x| c(x, 0.0)).collect() }
    }

    pub fn delta(g: &FiniteGroupoid, a: usize) -> Self {
        let mut f = GroupoidFunction::zeros(g.len());
        f.values[a] = ONE;
        f
    }

    pub fn indicator(g: &FiniteGroupoid, set: &[usize]) -> Self {
        let mut f = GroupoidFunction::zeros(g.len());
        for &a in set {
            f.values[a] = ONE;
        }
        f
    }

    /// χ_X, the indicator of the unit space.
    pub fn unit_indicator(g: &FiniteGroupoid) -> Self {
        GroupoidFunction::indicator(g, g.units())
    }

    /// Entries with real and imaginary parts uniform in [-1, 1].
    pub fn random<R: Rng>(g: &FiniteGroupoid, rng: &mut R) -> Self {
        GroupoidFunction {
            values: (0..g.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.values[a].norm() > SUPPORT_TOL).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        GroupoidFunction { values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        GroupoidFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GroupoidFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn pointwise(&self, other: &Self) -> Self {
        GroupoidFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "length mismatch");
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_unit_supported(&self, g: &FiniteGroupoid, tol: f64) -> bool {
        (0..self.len()).all(|a| g.is_unit(a) || self.values[a].norm() <= tol)
    }
}

/// (f1 * f2)(γ) = Σ_{β ∈ 𝒢_{d(γ)}} f1(γβ⁻¹) f2(β).
///
/// Terms are summed over the source fiber in canonical order, so that on
/// units the sum is literally the one defining `module_inner`.
pub fn convolve(g: &FiniteGroupoid, f1: &GroupoidFunction, f2: &GroupoidFunction) -> GroupoidFunction {
    let mut out = GroupoidFunction::zeros(g.len());
    for a in 0..g.len() {
        let mut acc = ZERO;
        for &b in g.source_fiber(g.src(a)) {
            let ab = g.comp(a, g.inv(b)).expect("composable");
            acc += f1.values[ab] * f2.values[b];
        }
        out.values[a] = acc;
    }
    out
}

/// f*(γ) = conj f(γ⁻¹).
pub fn involute(g: &FiniteGroupoid, f: &GroupoidFunction) -> GroupoidFunction {
    GroupoidFunction { values: (0..g.len()).map(|a| f.values[g.inv(a)].conj()).collect() }
}

/// max( sup_x Σ_{𝒢^x} |f|, sup_x Σ_{𝒢_x} |f| ).
pub fn i_norm(g: &FiniteGroupoid, f: &GroupoidFunction) -> f64 {
    let mut best = 0.0f64;
    for &x in g.units() {
        let r: f64 = g.range_fiber(x).iter().map(|&a| f.values[a].norm()).sum();
        let d: f64 = g.source_fiber(x).iter().map(|&a| f.values[a].norm()).sum();
        best = best.max(r).max(d);
    }
    best
}

/// Restriction to the unit space.
pub fn expectation(g: &FiniteGroupoid, f: &GroupoidFunction) -> GroupoidFunction {
    let mut out = GroupoidFunction::zeros(g.len());
    for &x in g.units() {
        out.values[x] = f.values[x];
    }
    out
}

/// ⟨f1, f2⟩(x) = Σ_{γ ∈ 𝒢_x} conj f1(γ) f2(γ), as a unit-supported function.
pub fn module_inner(g: &FiniteGroupoid, f1: &GroupoidFunction, f2: &GroupoidFunction) -> GroupoidFunction {
    let mut out = GroupoidFunction::zeros(g.len());
    for &x in g.units() {
        let mut acc = ZERO;
        for &b in g.source_fiber(x) {
            acc += f1.values[b].conj() * f2.values[b];
        }
        out.values[x] = acc;
    }
    out
}

/// One complex matrix per unit of supp(μ), acting on ℓ²(𝒢_x).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub units: Vec<usize>,
    pub fibers: Vec<Vec<usize>>,
    pub blocks: Vec<CMat>,
}

impl BlockOperator {
    pub fn zeros_like(g: &FiniteGroupoid, w: &UnitWeight) -> Self {
        let units = w.support().to_vec();
        let fibers: Vec<Vec<usize>> = units.iter().map(|&x| g.source_fiber(x).to_vec()).collect();
        let blocks = fibers.iter().map(|f| linalg::zeros(f.len(), f.len())).collect();
        BlockOperator { units, fibers, blocks }
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn adjoint(&self) -> Self {
        self.map(|a| a.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|a| a * s)
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        BlockOperator { units: self.units.clone(), fibers: self.fibers.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        assert_eq!(self.units, other.units, "block layouts differ");
        BlockOperator {
            units: self.units.clone(),
            fibers: self.fibers.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| linalg::max_abs_diff(a, b)).fold(0.0, f64::max)
    }

    /// Total matrix dimension, the size of L²(𝒢|_supp, ν⁻¹).
    pub fn dim(&self) -> usize {
        self.fibers.iter().map(Vec::len).sum()
    }
}

/// λ(f): the block at x has entry (γ, β) = f(γβ⁻¹) for γ, β ∈ 𝒢_x.
pub fn regular_rep(g: &FiniteGroupoid, w: &UnitWeight, f: &GroupoidFunction) -> BlockOperator {
    let mut op = BlockOperator::zeros_like(g, w);
    for (k, fiber) in op.fibers.iter().enumerate() {
        let block = &mut op.blocks[k];
        for (i, &a) in fiber.iter().enumerate() {
            for (j, &b) in fiber.iter().enumerate() {
                block[(i, j)] = f.values[g.comp(a, g.inv(b)).expect("composable")];
            }
        }
    }
    op
}

/// Read f back off λ(f), using the entries (γ, d(γ)). Elements outside
/// 𝒢|_supp come back as zero.
pub fn recover_function(g: &FiniteGroupoid, op: &BlockOperator) -> GroupoidFunction {
    let mut f = GroupoidFunction::zeros(g.len());
    for (k, fiber) in op.fibers.iter().enumerate() {
        let x = op.units[k];
        let j = fiber.iter().position(|&b| b == x).expect("unit in its fiber");
        for (i, &a) in fiber.iter().enumerate() {
            f.values[a] = op.blocks[k][(i, j)];
        }
    }
    f
}

pub fn reduced_norm(g: &FiniteGroupoid, w: &UnitWeight, f: &GroupoidFunction) -> f64 {
    regular_rep(g, w, f).norm()
}

/// Basis {δ_γ : γ ∈ 𝒢|_U} of the ideal attached to an invariant open set U.
pub fn ideal_of_open(g: &FiniteGroupoid, _w: &UnitWeight, u: &[usize]) -> Result<Vec<usize>> {
    if !is_invariant(g, u) {
        return Err(Error::NotInvariant(format!("{} units", u.len())));
    }
    let mut inside = vec![false; g.len()];
    for &x in u {
        inside[x] = true;
    }
    Ok((0..g.len()).filter(|&a| inside[g.src(a)]).collect())
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExactnessReport {
    /// dim im(ι) = dim span{δ_γ : γ ∈ 𝒢|_U}.
    pub dim_ideal: usize,
    /// dim C*_r(𝒢, μ).
    pub dim_total: usize,
    /// dim im(p) ⊆ C*_r(𝒢|_F).
    pub dim_quotient: usize,
    /// dim ker(p).
    pub dim_kernel: usize,
    /// ι(δ_γ) ∈ ker(p) for every γ ∈ 𝒢|_U.
    pub ideal_in_kernel: bool,
    /// p maps onto C*_r(𝒢|_F).
    pub surjective: bool,
    pub exact: bool,
}

/// Check 0 → C*_r(𝒢|_U) → C*_r(𝒢) → C*_r(𝒢|_F) → 0 at finite scale, with
/// U the complement of F. The quotient map is compression to the blocks over F.
pub fn inner_exactness_check(g: &FiniteGroupoid, w: &UnitWeight, f_set: &[usize]) -> Result<ExactnessReport> {
    if !is_invariant(g, f_set) {
        return Err(Error::NotInvariant(format!("{} units", f_set.len())));
    }
    let mut in_f = vec![false; g.len()];
    for &x in f_set {
        in_f[x] = true;
    }
    let u: Vec<usize> = g.units().iter().copied().filter(|&x| !in_f[x]).collect();
    let ideal = ideal_of_open(g, w, &u)?;
    let layout = BlockOperator::zeros_like(g, w);
    let rows: usize = layout.fibers.iter().map(|f| f.len() * f.len()).sum();
    let rows_f: usize = layout
        .units
        .iter()
        .zip(&layout.fibers)
        .filter(|(x, _)| in_f[**x])
        .map(|(_, f)| f.len() * f.len())
        .sum();
    let n = g.len();
    let mut full = linalg::zeros(rows, n);
    let mut comp_f = linalg::zeros(rows_f, n);
    for a in 0..n {
        let op = regular_rep(g, w, &GroupoidFunction::delta(g, a));
        let (mut r, mut rf) = (0, 0);
        for (k, block) in op.blocks.iter().enumerate() {
            let over_f = in_f[op.units[k]];
            for z in block.iter() {
                full[(r, a)] = *z;
                r += 1;
                if over_f {
                    comp_f[(rf, a)] = *z;
                    rf += 1;
                }
            }
        }
    }
    let thresh = 1e-9;
    let dim_total = linalg::rank(&full, thresh);
    let dim_quotient = linalg::rank(&comp_f, thresh);
    let ideal_cols = CMat::from_fn(rows, ideal.len(), |i, j| full[(i, ideal[j])]);
    let dim_ideal = linalg::rank(&ideal_cols, thresh);
    let ideal_in_kernel = ideal.iter().all(|&a| (0..rows_f).all(|i| comp_f[(i, a)].norm() <= thresh));
    let dim_kernel = dim_total - dim_quotient;
    let reduced = crate::groupoid::reduction(g, f_set);
    let target_dim = (0..reduced.len()).filter(|&a| w.covers(g, g.index_of(reduced.name(a)).unwrap())).count();
    let surjective = dim_quotient == target_dim;
    Ok(ExactnessReport {
        dim_ideal,
        dim_total,
        dim_quotient,
        dim_kernel,
        ideal_in_kernel,
        surjective,
        exact: ideal_in_kernel && dim_ideal == dim_kernel && surjective,
    })
}
