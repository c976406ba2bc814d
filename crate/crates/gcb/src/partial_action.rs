//! Partial actions of finite groups: transformation groupoids, the semidirect
//! product bundle, Δ, the diagonal coaction and the φ_T pipeline.
//!
//! Arrows of X⋊Γ are (y, t) with y ∈ D_t, r(y, t) = (y, 1) and
//! d(y, t) = (α_{t⁻¹}(y), 1); the product is (y, s)(α_{s⁻¹}(y), t) = (y, st).
//! With this orientation Δ(aδ_t) = a∘r on the slice t and Δ is multiplicative.

use crate::algebra::{convolve, expectation, involute, module_inner, reduced_norm, GroupoidFunction};
use crate::cartan::{check_a_linear, cbap_witness_check, rotate, CartanOperator, CbapWitness};
use crate::error::{Error, Result, Violation};
use crate::fell::{lambda, lambda_of};
use crate::groupoid::{FiniteGroupoid, Group};
use crate::linalg::{self, c, CMat, C64, ONE, ZERO};
use crate::measure::UnitWeight;
use crate::multiplier::{check_weak_amenability_witness, MultiplierOptions, WeakAmenabilityWitness, WitnessReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const GROUP_CAP: usize = 24;
pub const POINT_CAP: usize = 64;
/// Cap on |Γ|·|X⋊Γ| for coaction matrices.
pub const COACTION_CAP: usize = 1024;

#[derive(Debug, Clone)]
pub struct PartialAction {
    pub group: Group,
    pub points: Vec<String>,
    /// dom[t][x]: x ∈ D_t.
    pub dom: Vec<Vec<bool>>,
    /// alpha[t][x] = α_t(x) for x ∈ D_{t⁻¹}.
    pub alpha: Vec<Vec<Option<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawGroup {
    pub elements: Vec<String>,
    /// table[i][j] is the name of elements[i]·elements[j].
    pub table: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawPartialAction {
    pub group: RawGroup,
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "D")]
    pub d: BTreeMap<String, Vec<String>>,
    pub alpha: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawGroup {
    pub fn from_group(g: &Group) -> RawGroup {
        RawGroup {
            elements: g.names.clone(),
            table: g.mul.iter().map(|r| r.iter().map(|&k| g.names[k].clone()).collect()).collect(),
        }
    }

    pub fn to_group(&self) -> Result<Group> {
        let pos = |s: &str| {
            self.elements.iter().position(|e| e == s).ok_or_else(|| Error::NotAGroup(format!("unknown element {s}")))
        };
        let mul = self.table.iter().map(|r| r.iter().map(|s| pos(s)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        Group::from_table(self.elements.clone(), mul)
    }
}

impl PartialAction {
    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn in_dom(&self, t: usize, x: usize) -> bool {
        self.dom[t][x]
    }

    /// α_t(x), defined for x ∈ D_{t⁻¹}.
    pub fn act(&self, t: usize, x: usize) -> Option<usize> {
        self.alpha[t][x]
    }

    /// D_t as point indices.
    pub fn domain(&self, t: usize) -> Vec<usize> {
        (0..self.points.len()).filter(|&x| self.dom[t][x]).collect()
    }

    pub fn to_raw(&self) -> RawPartialAction {
        let names = &self.group.names;
        RawPartialAction {
            group: RawGroup::from_group(&self.group),
            x: self.points.clone(),
            d: (0..self.order()).map(|t| (names[t].clone(), self.domain(t).iter().map(|&x| self.points[x].clone()).collect())).collect(),
            alpha: (0..self.order())
                .map(|t| {
                    let m = (0..self.points.len())
                        .filter_map(|x| self.alpha[t][x].map(|y| (self.points[x].clone(), self.points[y].clone())))
                        .collect();
                    (names[t].clone(), m)
                })
                .collect(),
        }
    }

    /// A global action from a permutation per group element.
    pub fn global(group: Group, points: Vec<String>, perm: impl Fn(usize, usize) -> usize) -> Result<PartialAction> {
        let n = points.len();
        let alpha = (0..group.order()).map(|t| (0..n).map(|x| Some(perm(t, x))).collect()).collect();
        let dom = vec![vec![true; n]; group.order()];
        check(PartialAction { group, points, dom, alpha })
    }
}

fn check(pa: PartialAction) -> Result<PartialAction> {
    let v = violations(&pa);
    if v.is_empty() {
        Ok(pa)
    } else {
        Err(Error::AxiomViolation(v))
    }
}

pub fn validate_partial_action(raw: &RawPartialAction) -> Result<PartialAction> {
    let group = raw.group.to_group()?;
    if group.order() > GROUP_CAP {
        return Err(Error::TooLarge { what: "group".into(), size: group.order(), cap: GROUP_CAP });
    }
    if raw.x.len() > POINT_CAP {
        return Err(Error::TooLarge { what: "point set".into(), size: raw.x.len(), cap: POINT_CAP });
    }
    let n = raw.x.len();
    let pt = |s: &str| raw.x.iter().position(|p| p == s);
    let mut v = Vec::new();
    let mut dom = vec![vec![false; n]; group.order()];
    let mut alpha = vec![vec![None; n]; group.order()];
    for (t, name) in group.names.iter().enumerate() {
        for s in raw.d.get(name).map(Vec::as_slice).unwrap_or(&[]) {
            match pt(s) {
                Some(x) => dom[t][x] = true,
                None => v.push(Violation::new("unknown-point", &[name, s])),
            }
        }
        if let Some(m) = raw.alpha.get(name) {
            for (a, b) in m {
                match (pt(a), pt(b)) {
                    (Some(x), Some(y)) => alpha[t][x] = Some(y),
                    _ => v.push(Violation::new("unknown-point", &[name, a, b])),
                }
            }
        }
    }
    for name in raw.d.keys().chain(raw.alpha.keys()) {
        if !group.names.contains(name) {
            v.push(Violation::new("unknown-group-element", &[name]));
        }
    }
    if !v.is_empty() {
        return Err(Error::AxiomViolation(v));
    }
    check(PartialAction { group, points: raw.x.clone(), dom, alpha })
}

/// Violated partial-action axioms with (s, t, x) witnesses.
pub fn violations(pa: &PartialAction) -> Vec<Violation> {
    let g = &pa.group;
    let n = pa.points.len();
    let p = |x: usize| pa.points[x].as_str();
    let tn = |t: usize| g.names[t].as_str();
    let mut v = Vec::new();
    let e = g.identity;
    for x in 0..n {
        if !pa.dom[e][x] || pa.alpha[e][x] != Some(x) {
            v.push(Violation::new("identity", &[p(x)]));
        }
    }
    for t in 0..g.order() {
        let ti = g.inv[t];
        let mut hit = vec![false; n];
        for x in 0..n {
            match (pa.dom[ti][x], pa.alpha[t][x]) {
                (true, None) => v.push(Violation::new("alpha-domain", &[tn(t), p(x)])),
                (false, Some(_)) => v.push(Violation::new("alpha-domain", &[tn(t), p(x)])),
                (true, Some(y)) => {
                    if !pa.dom[t][y] {
                        v.push(Violation::new("alpha-range", &[tn(t), p(x), p(y)]));
                    }
                    if hit[y] {
                        v.push(Violation::new("alpha-bijective", &[tn(t), p(y)]));
                    }
                    hit[y] = true;
                    if pa.alpha[ti][y] != Some(x) {
                        v.push(Violation::new("alpha-inverse", &[tn(t), p(x)]));
                    }
                }
                (false, None) => {}
            }
        }
        for y in 0..n {
            if pa.dom[t][y] && !hit[y] {
                v.push(Violation::new("alpha-bijective", &[tn(t), p(y)]));
            }
        }
    }
    if !v.is_empty() {
        return v;
    }
    for s in 0..g.order() {
        for t in 0..g.order() {
            let st = g.mul(s, t);
            for x in 0..n {
                let Some(y) = pa.alpha[t][x] else { continue };
                let Some(z) = pa.alpha[s][y] else { continue };
                if pa.alpha[st][x] != Some(z) {
                    v.push(Violation::new("containment", &[tn(s), tn(t), p(x)]));
                }
            }
        }
    }
    v
}

/// X⋊Γ with the slice of every arrow.
#[derive(Debug, Clone)]
pub struct TransformationGroupoid {
    pub g: FiniteGroupoid,
    /// Point y of the arrow (y, t).
    pub point: Vec<usize>,
    /// Group element t of the arrow (y, t).
    pub slice: Vec<usize>,
    /// index[t][y] for y ∈ D_t.
    pub index: Vec<Vec<Option<usize>>>,
}

impl TransformationGroupoid {
    /// χ_t, the indicator of the slice t.
    pub fn chi(&self, t: usize) -> GroupoidFunction {
        let set: Vec<usize> = (0..self.g.len()).filter(|&a| self.slice[a] == t).collect();
        GroupoidFunction::indicator(&self.g, &set)
    }

    /// The unit (x, 1).
    pub fn unit(&self, pa: &PartialAction, x: usize) -> usize {
        self.index[pa.group.identity][x].expect("D_1 = X")
    }
}

pub fn transformation_groupoid(pa: &PartialAction) -> Result<TransformationGroupoid> {
    let grp = &pa.group;
    let e = grp.identity;
    let mut point = Vec::new();
    let mut slice = Vec::new();
    let mut index = vec![vec![None; pa.points.len()]; grp.order()];
    let mut order: Vec<usize> = (0..grp.order()).collect();
    order.sort_by_key(|&t| t != e);
    for &t in &order {
        for y in pa.domain(t) {
            index[t][y] = Some(point.len());
            point.push(y);
            slice.push(t);
        }
    }
    let n = point.len();
    let names = (0..n).map(|a| format!("({},{})", pa.points[point[a]], grp.names[slice[a]])).collect();
    let unit = |x: usize| index[e][x].expect("D_1 = X");
    let units = (0..pa.points.len()).map(unit).collect();
    let rng = (0..n).map(|a| unit(point[a])).collect();
    let src = (0..n).map(|a| unit(pa.act(grp.inv[slice[a]], point[a]).expect("y ∈ D_t"))).collect();
    let inv = (0..n)
        .map(|a| {
            let ti = grp.inv[slice[a]];
            index[ti][pa.act(ti, point[a]).unwrap()].expect("α_{t⁻¹}(y) ∈ D_{t⁻¹}")
        })
        .collect();
    let g = FiniteGroupoid::from_fn(names, units, src, rng, inv, |a, b| {
        let st = grp.mul(slice[a], slice[b]);
        index[st][point[a]]
    })?;
    Ok(TransformationGroupoid { g, point, slice, index })
}

/// Γ⋉X for a global action: arrows (t, x) from x to t·x, (s, t·x)(t, x) = (st, x).
pub fn global_action_groupoid(pa: &PartialAction) -> Result<FiniteGroupoid> {
    let grp = &pa.group;
    let n = pa.points.len();
    if pa.dom.iter().any(|d| d.iter().any(|b| !b)) {
        return Err(Error::InvalidInput("action is not global".into()));
    }
    let idx = |t: usize, x: usize| t * n + x;
    let m = grp.order() * n;
    let names = (0..m).map(|a| format!("[{},{}]", grp.names[a / n], pa.points[a % n])).collect();
    let e = grp.identity;
    let units = (0..n).map(|x| idx(e, x)).collect();
    let src = (0..m).map(|a| idx(e, a % n)).collect();
    let rng = (0..m).map(|a| idx(e, pa.act(a / n, a % n).unwrap())).collect();
    let inv = (0..m).map(|a| idx(grp.inv[a / n], pa.act(a / n, a % n).unwrap())).collect();
    FiniteGroupoid::from_fn(names, units, src, rng, inv, |a, b| Some(idx(grp.mul(a / n, b / n), b % n)))
}

/// A section of the bundle: f[t] is a function on X supported in D_t.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleSection {
    pub f: Vec<Vec<C64>>,
}

impl BundleSection {
    pub fn zeros(pa: &PartialAction) -> Self {
        BundleSection { f: vec![vec![ZERO; pa.points.len()]; pa.order()] }
    }

    pub fn atom(pa: &PartialAction, a: &[C64], t: usize) -> Result<Self> {
        check_support(pa, a, t)?;
        let mut s = BundleSection::zeros(pa);
        s.f[t] = a.to_vec();
        Ok(s)
    }

    pub fn add(&self, other: &Self) -> Self {
        BundleSection {
            f: self.f.iter().zip(&other.f).map(|(u, v)| u.iter().zip(v).map(|(a, b)| a + b).collect()).collect(),
        }
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.f
            .iter()
            .zip(&other.f)
            .flat_map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }
}

fn check_support(pa: &PartialAction, a: &[C64], t: usize) -> Result<()> {
    if a.len() != pa.points.len() {
        return Err(Error::DimensionMismatch(format!("{} values for {} points", a.len(), pa.points.len())));
    }
    for (x, v) in a.iter().enumerate() {
        if *v != ZERO && !pa.dom[t][x] {
            return Err(Error::SupportViolation(format!(
                "value at {} outside D_{}",
                pa.points[x], pa.group.names[t]
            )));
        }
    }
    Ok(())
}

/// β_t(b)(y) = b(α_{t⁻¹}(y)) for y ∈ D_t.
pub fn beta(pa: &PartialAction, t: usize, b: &[C64]) -> Vec<C64> {
    let ti = pa.group.inv[t];
    (0..pa.points.len())
        .map(|y| if pa.dom[t][y] { pa.act(ti, y).map_or(ZERO, |z| b[z]) } else { ZERO })
        .collect()
}

/// (aδ_s)(bδ_t) = β_s(β_{s⁻¹}(a)b)δ_{st}, returned as (function, st).
pub fn bundle_product(pa: &PartialAction, a: &[C64], s: usize, b: &[C64], t: usize) -> Result<(Vec<C64>, usize)> {
    check_support(pa, a, s)?;
    check_support(pa, b, t)?;
    let si = pa.group.inv[s];
    let inner: Vec<C64> = beta(pa, si, a).iter().zip(b).map(|(x, y)| x * y).collect();
    Ok((beta(pa, s, &inner), pa.group.mul(s, t)))
}

/// (aδ_s)* = β_{s⁻¹}(a*)δ_{s⁻¹}.
pub fn bundle_involution(pa: &PartialAction, a: &[C64], s: usize) -> Result<(Vec<C64>, usize)> {
    check_support(pa, a, s)?;
    let si = pa.group.inv[s];
    let conj: Vec<C64> = a.iter().map(|z| z.conj()).collect();
    Ok((beta(pa, si, &conj), si))
}

pub fn section_product(pa: &PartialAction, f: &BundleSection, g: &BundleSection) -> Result<BundleSection> {
    let mut out = BundleSection::zeros(pa);
    for s in 0..pa.order() {
        for t in 0..pa.order() {
            let (p, st) = bundle_product(pa, &f.f[s], s, &g.f[t], t)?;
            for (o, v) in out.f[st].iter_mut().zip(p) {
                *o += v;
            }
        }
    }
    Ok(out)
}

pub fn section_involution(pa: &PartialAction, f: &BundleSection) -> Result<BundleSection> {
    let mut out = BundleSection::zeros(pa);
    for s in 0..pa.order() {
        let (p, si) = bundle_involution(pa, &f.f[s], s)?;
        out.f[si] = p;
    }
    Ok(out)
}

/// ⟨f, g⟩ = Σ_t f(t)* g(t), a function on X = D_1.
pub fn l2_inner(pa: &PartialAction, f: &BundleSection, g: &BundleSection) -> Result<Vec<C64>> {
    let mut out = vec![ZERO; pa.points.len()];
    for t in 0..pa.order() {
        let (fs, ti) = bundle_involution(pa, &f.f[t], t)?;
        let (p, e) = bundle_product(pa, &fs, ti, &g.f[t], t)?;
        debug_assert_eq!(e, pa.group.identity);
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Ok(out)
}

/// Δ(f)(y, t) = f(t)(y).
pub fn delta_iso(pa: &PartialAction, tg: &TransformationGroupoid, f: &BundleSection) -> GroupoidFunction {
    let _ = pa;
    GroupoidFunction::from_values((0..tg.g.len()).map(|a| f.f[tg.slice[a]][tg.point[a]]).collect())
}

/// Δ⁻¹.
pub fn delta_inverse(pa: &PartialAction, tg: &TransformationGroupoid, f: &GroupoidFunction) -> BundleSection {
    let mut s = BundleSection::zeros(pa);
    for a in 0..tg.g.len() {
        s.f[tg.slice[a]][tg.point[a]] = f.values[a];
    }
    s
}

/// e_y δ_t for every y ∈ D_t: the atoms matching the arrows of X⋊Γ.
pub fn atom_basis(pa: &PartialAction, tg: &TransformationGroupoid) -> Vec<BundleSection> {
    (0..tg.g.len())
        .map(|a| {
            let mut s = BundleSection::zeros(pa);
            s.f[tg.slice[a]][tg.point[a]] = ONE;
            s
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    /// max |Δ(fg) − Δ(f)*Δ(g)| over atom pairs.
    pub multiplicative: f64,
    /// max |Δ(f*) − Δ(f)*|.
    pub involutive: f64,
    /// max |⟨f, g⟩ − ⟨Δf, Δg⟩| over atom pairs.
    pub inner: f64,
    /// max |Λ(f) − λ(Δf)| in the atom/δ bases.
    pub intertwining: f64,
    /// |‖Δf‖_r − ‖Λ(f)‖| for the sampled f.
    pub norm: f64,
}

/// Δ checked on all pairs of atoms plus the supplied sections.
pub fn delta_check(pa: &PartialAction, tg: &TransformationGroupoid, extra: &[BundleSection], w: &UnitWeight) -> Result<DeltaReport> {
    let g = &tg.g;
    let mut tests = atom_basis(pa, tg);
    tests.extend_from_slice(extra);
    let (mut mult, mut invo, mut inner, mut inter, mut norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let atoms = atom_basis(pa, tg);
    for f in &tests {
        let df = delta_iso(pa, tg, f);
        invo = invo.max(delta_iso(pa, tg, &section_involution(pa, f)?).max_diff(&involute(g, &df)));
        // Λ(f) on the atoms, read in the δ-basis of ℓ²(X⋊Γ).
        let n = g.len();
        let mut big = linalg::zeros(n, n);
        for (b, at) in atoms.iter().enumerate() {
            let col = delta_iso(pa, tg, &section_product(pa, f, at)?);
            for a in 0..n {
                big[(a, b)] = col.values[a];
            }
        }
        inter = inter.max(linalg::max_abs_diff(&big, &lambda_of(g, &df)));
        norm = norm.max((linalg::spectral_norm(&big) - reduced_norm(g, w, &df)).abs());
        for h in &tests {
            let dh = delta_iso(pa, tg, h);
            let prod = delta_iso(pa, tg, &section_product(pa, f, h)?);
            mult = mult.max(prod.max_diff(&convolve(g, &df, &dh)));
            let lhs = l2_inner(pa, f, h)?;
            let rhs = module_inner(g, &df, &dh);
            for x in 0..pa.points.len() {
                inner = inner.max((lhs[x] - rhs.values[tg.unit(pa, x)]).norm());
            }
        }
    }
    Ok(DeltaReport { multiplicative: mult, involutive: invo, inner, intertwining: inter, norm })
}

/// λ^Γ_t on ℓ²(Γ): δ_s ↦ δ_{ts}.
pub fn lambda_group(grp: &Group, t: usize) -> CMat {
    let n = grp.order();
    let mut m = linalg::zeros(n, n);
    for s in 0..n {
        m[(grp.mul(t, s), s)] = ONE;
    }
    m
}

/// F restricted to the slice t.
pub fn slice_part(tg: &TransformationGroupoid, f: &GroupoidFunction, t: usize) -> GroupoidFunction {
    GroupoidFunction::from_values((0..tg.g.len()).map(|a| if tg.slice[a] == t { f.values[a] } else { ZERO }).collect())
}

fn coaction_cap(pa: &PartialAction, tg: &TransformationGroupoid) -> Result<()> {
    let size = pa.order() * tg.g.len();
    if size > COACTION_CAP {
        return Err(Error::TooLarge { what: "coaction dimension".into(), size, cap: COACTION_CAP });
    }
    Ok(())
}

/// τ(F) = Σ_t λ^Γ_t ⊗ λ(F_t) on ℓ²(Γ) ⊗ ℓ²(X⋊Γ).
pub fn coaction(pa: &PartialAction, tg: &TransformationGroupoid, f: &GroupoidFunction) -> Result<CMat> {
    coaction_cap(pa, tg)?;
    if f.len() != tg.g.len() {
        return Err(Error::DimensionMismatch("function length".into()));
    }
    let (k, n) = (pa.order(), tg.g.len());
    let mut out = linalg::zeros(k * n, k * n);
    for t in 0..k {
        let part = slice_part(tg, f, t);
        if part.values.iter().all(|z| *z == ZERO) {
            continue;
        }
        out += linalg::kron(&lambda_group(&pa.group, t), &lambda_of(&tg.g, &part));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoactionReport {
    /// max over generator pairs of ‖τ(δ_γ * δ_β) − τ(δ_γ)τ(δ_β)‖_max.
    pub multiplicative: f64,
    /// max ‖τ(δ_γ*) − τ(δ_γ)†‖_max.
    pub involutive: f64,
    pub rank: usize,
    pub injective: bool,
}

pub fn coaction_check(pa: &PartialAction, tg: &TransformationGroupoid) -> Result<CoactionReport> {
    let g = &tg.g;
    let n = g.len();
    let gens: Vec<CMat> = (0..n).map(|a| coaction(pa, tg, &GroupoidFunction::delta(g, a))).collect::<Result<_>>()?;
    let (mut mult, mut invo) = (0.0f64, 0.0f64);
    let dim = gens.first().map_or(0, |m| m.nrows());
    let mut vecs = linalg::zeros(dim * dim, n);
    for a in 0..n {
        let da = GroupoidFunction::delta(g, a);
        invo = invo.max(linalg::max_abs_diff(&coaction(pa, tg, &involute(g, &da))?, &gens[a].adjoint()));
        for (k, z) in gens[a].iter().enumerate() {
            vecs[(k, a)] = *z;
        }
        for b in 0..n {
            let prod = coaction(pa, tg, &convolve(g, &da, &GroupoidFunction::delta(g, b)))?;
            mult = mult.max(linalg::max_abs_diff(&prod, &linalg::sparse_mul(&gens[a], &gens[b])));
        }
    }
    let rank = linalg::rank(&vecs, 1e-9);
    Ok(CoactionReport { multiplicative: mult, involutive: invo, rank, injective: rank == n })
}

/// V ξ = Σ_t δ_t ⊗ ξ_t, ξ_t the slice-t part of ξ.
pub fn v_isometry(pa: &PartialAction, tg: &TransformationGroupoid) -> CMat {
    let n = tg.g.len();
    let mut v = linalg::zeros(pa.order() * n, n);
    for b in 0..n {
        v[(tg.slice[b] * n + b, b)] = ONE;
    }
    v
}

#[derive(Debug, Clone)]
pub struct PaPhiReport {
    pub phi: GroupoidFunction,
    /// max_t ‖Tχ_t‖_r, a lower bound for ‖T‖.
    pub op_norm_lower: f64,
    /// max_γ ‖S(δ_γ) − λ(φ_T(γ)δ_γ)‖_max, S(f) = V†(1⊗T)τ(f)V.
    pub s_deviation: f64,
    pub v: CMat,
}

/// φ_T(γ) = E(χ_t^* * Tχ_t)(d(γ)) for γ in the slice t.
pub fn phi_from_operator_pa(
    pa: &PartialAction,
    tg: &TransformationGroupoid,
    w: &UnitWeight,
    t: &CartanOperator,
) -> Result<PaPhiReport> {
    let g = &tg.g;
    check_a_linear(g, t)?;
    coaction_cap(pa, tg)?;
    let n = g.len();
    let mut phi = GroupoidFunction::zeros(n);
    let mut op_norm_lower = 0.0f64;
    let mut t_chi = Vec::with_capacity(pa.order());
    for s in 0..pa.order() {
        let chi = tg.chi(s);
        let tc = t.apply(&chi);
        op_norm_lower = op_norm_lower.max(reduced_norm(g, w, &tc));
        let e = expectation(g, &convolve(g, &involute(g, &chi), &tc));
        t_chi.push((tc, e));
    }
    for a in 0..n {
        let s = tg.slice[a];
        phi.values[a] = t_chi[s].1.values[g.src(a)];
        let bound = reduced_norm(g, w, &t_chi[s].0);
        if phi.values[a].norm() > bound + 1e-10 {
            return Err(Error::PipelineMismatch { stage: "phi bound".into(), deviation: phi.values[a].norm() - bound });
        }
    }
    // S on generators: (1⊗T)τ(δ_γ) = λ^Γ_s ⊗ λ(T δ_γ), compressed by V.
    let v = v_isometry(pa, tg);
    let mut s_deviation = 0.0f64;
    for a in 0..n {
        let lifted = linalg::kron(&lambda_group(&pa.group, tg.slice[a]), &lambda_of(g, &t.column(a)));
        let s_op = v.adjoint() * linalg::sparse_mul(&lifted, &v);
        let target = lambda(g, a) * phi.values[a];
        s_deviation = s_deviation.max(linalg::max_abs_diff(&s_op, &target));
    }
    if s_deviation > 1e-8 {
        return Err(Error::PipelineMismatch { stage: "compression".into(), deviation: s_deviation });
    }
    Ok(PaPhiReport { phi, op_norm_lower, s_deviation, v })
}

#[derive(Debug, Clone)]
pub struct PaPipelineReport {
    pub witness: WeakAmenabilityWitness,
    pub report: WitnessReport,
    pub distances: Vec<f64>,
    pub rescale: Vec<f64>,
    /// max over operators and γ of |1 − φ(γ)| − ‖χ_t − Tχ_t‖_r (≤ 0 when
    /// the estimate holds).
    pub estimate_slack: f64,
    pub s_deviation: f64,
}

pub fn pa_equality_pipeline(
    pa: &PartialAction,
    tg: &TransformationGroupoid,
    w: &UnitWeight,
    witness: &CbapWitness,
    opts: &MultiplierOptions,
) -> Result<PaPipelineReport> {
    let g = &tg.g;
    cbap_witness_check(g, w, witness, opts).map_err(|e| Error::PipelineMismatch { stage: format!("witness: {e}"), deviation: f64::NAN })?;
    // span_A{χ_t} contains χ_t * δ_x = δ_{(α_t(x), t)}: the δ-basis.
    let gens: Vec<GroupoidFunction> = (0..g.len())
        .map(|a| convolve(g, &tg.chi(tg.slice[a]), &GroupoidFunction::delta(g, g.src(a))))
        .collect();
    let cst = witness.c;
    let (mut phis, mut distances, mut rescale) = (Vec::new(), Vec::new(), Vec::new());
    let mut estimate_slack = f64::NEG_INFINITY;
    let mut s_deviation = 0.0f64;
    for (i, t) in witness.ops.iter().enumerate() {
        let rot = rotate(g, w, t, &gens, i + 1)?;
        let factor = if cst > 0.0 { cst / (cst + rot.distance) } else { 1.0 };
        let scaled = CartanOperator {
            pairs: rot.op.pairs.iter().map(|(a, b)| (a.scale(c(factor, 0.0)), b.clone())).collect(),
            dense: rot.op.dense.scale(factor),
        };
        let r = phi_from_operator_pa(pa, tg, w, &scaled)?;
        s_deviation = s_deviation.max(r.s_deviation);
        for a in 0..g.len() {
            let chi = tg.chi(tg.slice[a]);
            let gap = reduced_norm(g, w, &chi.sub(&scaled.apply(&chi)));
            let slack = (ONE - r.phi.values[a]).norm() - gap;
            estimate_slack = estimate_slack.max(slack);
            if slack > 1e-10 {
                return Err(Error::PipelineMismatch { stage: "convergence estimate".into(), deviation: slack });
            }
        }
        phis.push(r.phi);
        distances.push(rot.distance);
        rescale.push(factor);
    }
    let wa = WeakAmenabilityWitness { phis, c: cst };
    let report = check_weak_amenability_witness(g, w, &wa, opts)
        .map_err(|e| Error::PipelineMismatch { stage: format!("weak amenability: {e}"), deviation: f64::NAN })?;
    Ok(PaPipelineReport { witness: wa, report, distances, rescale, estimate_slack, s_deviation })
}
