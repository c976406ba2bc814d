//! Finite inverse semigroups, their regular representations, actions on
//! finite sets, germ groupoids and the universal groupoid.

use crate::error::{Error, Result, Violation};
use crate::groupoid::{is_bisection, is_isomorphism, FiniteGroupoid, Group};
use crate::linalg::{self, CMat, ONE};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SEMIGROUP_CAP: usize = 256;
pub const IDEMPOTENT_CAP: usize = 16;
pub const BISECTION_CAP: usize = 4096;

#[derive(Debug, Clone)]
pub struct InverseSemigroup {
    pub names: Vec<String>,
    pub mul: Vec<Vec<usize>>,
    pub star: Vec<usize>,
    /// A designated zero, excluded from supports of characters.
    pub zero: Option<usize>,
}

/// `mul` lists every product as `[a, b, ab]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSemigroup {
    pub elements: Vec<String>,
    pub mul: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<String>,
}

impl InverseSemigroup {
    pub fn from_table(names: Vec<String>, mul: Vec<Vec<usize>>) -> Result<InverseSemigroup> {
        let n = names.len();
        if n == 0 {
            return Err(Error::NotAnInverseSemigroup("empty".into()));
        }
        if n > SEMIGROUP_CAP {
            return Err(Error::TooLarge { what: "semigroup".into(), size: n, cap: SEMIGROUP_CAP });
        }
        if mul.len() != n || mul.iter().any(|r| r.len() != n || r.iter().any(|&k| k >= n)) {
            return Err(Error::NotAnInverseSemigroup("table is not n×n over the elements".into()));
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a][b];
                for c in 0..n {
                    if mul[ab][c] != mul[a][mul[b][c]] {
                        return Err(Error::NotAnInverseSemigroup(format!(
                            "associativity fails at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        let mut star = Vec::with_capacity(n);
        for s in 0..n {
            let cands: Vec<usize> = (0..n).filter(|&t| mul[mul[s][t]][s] == s && mul[mul[t][s]][t] == t).collect();
            match cands.as_slice() {
                [t] => star.push(*t),
                [] => return Err(Error::NotAnInverseSemigroup(format!("{} has no inverse", names[s]))),
                _ => {
                    return Err(Error::NotAnInverseSemigroup(format!(
                        "{} has {} generalized inverses",
                        names[s],
                        cands.len()
                    )))
                }
            }
        }
        let idem: Vec<usize> = (0..n).filter(|&e| mul[e][e] == e).collect();
        for &e in &idem {
            for &f in &idem {
                if mul[e][f] != mul[f][e] {
                    return Err(Error::NotAnInverseSemigroup(format!("idempotents {} and {} do not commute", names[e], names[f])));
                }
            }
        }
        Ok(InverseSemigroup { names, mul, star, zero: None })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn is_idempotent(&self, e: usize) -> bool {
        self.mul[e][e] == e
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.is_idempotent(e)).collect()
    }

    /// s*s.
    pub fn source_idem(&self, s: usize) -> usize {
        self.mul[self.star[s]][s]
    }

    /// ss*.
    pub fn range_idem(&self, s: usize) -> usize {
        self.mul[s][self.star[s]]
    }

    /// s ≤ t iff s = t·s*s (e ≤ f iff ef = e on idempotents).
    pub fn leq(&self, s: usize, t: usize) -> bool {
        self.mul[t][self.source_idem(s)] == s
    }

    /// An absorbing element, if any.
    pub fn absorbing(&self) -> Option<usize> {
        (0..self.len()).find(|&z| (0..self.len()).all(|s| self.mul[z][s] == z && self.mul[s][z] == z))
    }

    /// Designates `z` as the zero of S; it must be absorbing.
    pub fn with_zero(mut self, z: usize) -> Result<InverseSemigroup> {
        if (0..self.len()).any(|s| self.mul[z][s] != z || self.mul[s][z] != z) {
            return Err(Error::NotAnInverseSemigroup(format!("{} is not a zero", self.names[z])));
        }
        self.zero = Some(z);
        Ok(self)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn to_raw(&self) -> RawSemigroup {
        let n = self.len();
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push([self.names[a].clone(), self.names[b].clone(), self.names[self.mul[a][b]].clone()]);
            }
        }
        RawSemigroup { elements: self.names.clone(), mul, zero: self.zero.map(|z| self.names[z].clone()) }
    }

    pub fn from_group(g: &Group) -> InverseSemigroup {
        InverseSemigroup::from_table(g.names.clone(), g.mul.clone()).expect("groups are inverse semigroups")
    }

    /// A finite semilattice given by a meet table.
    pub fn semilattice(names: Vec<String>, meet: Vec<Vec<usize>>) -> Result<InverseSemigroup> {
        let s = InverseSemigroup::from_table(names, meet)?;
        if let Some(e) = (0..s.len()).find(|&e| !s.is_idempotent(e)) {
            return Err(Error::NotAnInverseSemigroup(format!("{} is not idempotent", s.names[e])));
        }
        Ok(s)
    }

    /// The symmetric inverse monoid I_n of partial bijections of n points.
    pub fn symmetric_inverse(n: usize) -> Result<InverseSemigroup> {
        Ok(InverseSemigroup::symmetric_inverse_maps(n)?.0)
    }

    /// I_n together with the partial bijection behind each element.
    pub fn symmetric_inverse_maps(n: usize) -> Result<(InverseSemigroup, Vec<Vec<Option<usize>>>)> {
        let mut maps = vec![vec![None; n]];
        for x in 0..n {
            let mut next = Vec::new();
            for m in &maps {
                for y in 0..=n {
                    let mut m2: Vec<Option<usize>> = m.clone();
                    if y < n {
                        if m.contains(&Some(y)) {
                            continue;
                        }
                        m2[x] = Some(y);
                    }
                    next.push(m2);
                }
            }
            maps = next;
        }
        partial_bijection_semigroup(maps)
    }

    /// The inverse subsemigroup of I_n generated by the given partial bijections.
    pub fn generated(n: usize, gens: &[Vec<Option<usize>>]) -> Result<(InverseSemigroup, Vec<Vec<Option<usize>>>)> {
        let mut maps: Vec<Vec<Option<usize>>> = Vec::new();
        let push = |m: Vec<Option<usize>>, maps: &mut Vec<Vec<Option<usize>>>| {
            if !maps.contains(&m) {
                maps.push(m);
            }
        };
        for g in gens {
            if g.len() != n {
                return Err(Error::DimensionMismatch("generator length".into()));
            }
            push(g.clone(), &mut maps);
            push(invert_map(g)?, &mut maps);
        }
        let mut i = 0;
        while i < maps.len() {
            for j in 0..=i {
                let (a, b) = (maps[i].clone(), maps[j].clone());
                push(compose_maps(&a, &b), &mut maps);
                push(compose_maps(&b, &a), &mut maps);
                if maps.len() > SEMIGROUP_CAP {
                    return Err(Error::TooLarge { what: "generated semigroup".into(), size: maps.len(), cap: SEMIGROUP_CAP });
                }
            }
            i += 1;
        }
        partial_bijection_semigroup(maps)
    }
}

/// (s∘t)(x) = s(t(x)).
pub fn compose_maps(s: &[Option<usize>], t: &[Option<usize>]) -> Vec<Option<usize>> {
    t.iter().map(|y| y.and_then(|y| s[y])).collect()
}

pub fn invert_map(s: &[Option<usize>]) -> Result<Vec<Option<usize>>> {
    let mut out = vec![None; s.len()];
    for (x, y) in s.iter().enumerate() {
        if let Some(y) = *y {
            if out[y].is_some() {
                return Err(Error::InvalidInput("map is not injective".into()));
            }
            out[y] = Some(x);
        }
    }
    Ok(out)
}

fn map_name(m: &[Option<usize>]) -> String {
    let parts: Vec<String> = m.iter().enumerate().filter_map(|(x, y)| y.map(|y| format!("{x}>{y}"))).collect();
    format!("[{}]", parts.join(" "))
}

/// Partial bijections closed under composition, with product s∘t.
pub fn partial_bijection_semigroup(maps: Vec<Vec<Option<usize>>>) -> Result<(InverseSemigroup, Vec<Vec<Option<usize>>>)> {
    let idx: BTreeMap<Vec<Option<usize>>, usize> = maps.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut mul = vec![vec![0; maps.len()]; maps.len()];
    for (a, ma) in maps.iter().enumerate() {
        for (b, mb) in maps.iter().enumerate() {
            mul[a][b] = *idx
                .get(&compose_maps(ma, mb))
                .ok_or_else(|| Error::NotAnInverseSemigroup("maps not closed under composition".into()))?;
        }
    }
    let names = maps.iter().map(|m| map_name(m)).collect();
    Ok((InverseSemigroup::from_table(names, mul)?, maps))
}

pub fn validate_semigroup(raw: &RawSemigroup) -> Result<InverseSemigroup> {
    let n = raw.elements.len();
    if n > SEMIGROUP_CAP {
        return Err(Error::TooLarge { what: "semigroup".into(), size: n, cap: SEMIGROUP_CAP });
    }
    let pos = |s: &str| {
        raw.elements.iter().position(|e| e == s).ok_or_else(|| Error::NotAnInverseSemigroup(format!("unknown element {s}")))
    };
    let mut mul = vec![vec![None; n]; n];
    for [a, b, ab] in &raw.mul {
        let (a, b, ab) = (pos(a)?, pos(b)?, pos(ab)?);
        if mul[a][b].is_some_and(|k| k != ab) {
            return Err(Error::NotAnInverseSemigroup(format!("conflicting products for ({}, {})", raw.elements[a], raw.elements[b])));
        }
        mul[a][b] = Some(ab);
    }
    let mut table = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            table[a][b] = mul[a][b].ok_or_else(|| {
                Error::NotAnInverseSemigroup(format!("missing product ({}, {})", raw.elements[a], raw.elements[b]))
            })?;
        }
    }
    let s = InverseSemigroup::from_table(raw.elements.clone(), table)?;
    match &raw.zero {
        Some(z) => s.with_zero(pos(z)?),
        None => Ok(s),
    }
}

/// λ_s δ_t = δ_{st} if tt* ≤ s*s, else 0.
pub fn left_regular(s: &InverseSemigroup) -> Vec<CMat> {
    let n = s.len();
    (0..n)
        .map(|a| {
            let mut m = linalg::zeros(n, n);
            let ss = s.source_idem(a);
            for t in 0..n {
                if s.leq(s.range_idem(t), ss) {
                    m[(s.mul(a, t), t)] = ONE;
                }
            }
            m
        })
        .collect()
}

/// λ^R_s δ_t = δ_{st} iff s*s = tt*, else 0.
pub fn restricted_regular(s: &InverseSemigroup) -> Vec<CMat> {
    let n = s.len();
    (0..n)
        .map(|a| {
            let mut m = linalg::zeros(n, n);
            let ss = s.source_idem(a);
            for t in 0..n {
                if s.range_idem(t) == ss {
                    m[(s.mul(a, t), t)] = ONE;
                }
            }
            m
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RepLawReport {
    pub partial_isometry_defect: f64,
    /// max ‖π_sπ_t − π_{st}‖ (restricted: zero when s*s ≠ tt*).
    pub multiplicative_defect: f64,
    /// max ‖π_{s*} − π_s†‖.
    pub star_defect: f64,
}

pub fn rep_laws(s: &InverseSemigroup, pi: &[CMat], restricted: bool) -> RepLawReport {
    let n = s.len();
    let (mut pid, mut mult, mut st) = (0.0f64, 0.0f64, 0.0f64);
    for a in 0..n {
        pid = pid.max(linalg::partial_isometry_defect(&pi[a]));
        st = st.max(linalg::max_abs_diff(&pi[s.star[a]], &pi[a].adjoint()));
        for b in 0..n {
            let prod = &pi[a] * &pi[b];
            let d = if !restricted || s.source_idem(a) == s.range_idem(b) {
                linalg::max_abs_diff(&prod, &pi[s.mul(a, b)])
            } else {
                linalg::max_abs(&prod)
            };
            mult = mult.max(d);
        }
    }
    RepLawReport { partial_isometry_defect: pid, multiplicative_defect: mult, star_defect: st }
}

/// The natural representation of partial bijections on ℂ^X.
pub fn natural_rep(maps: &[Vec<Option<usize>>]) -> Vec<CMat> {
    maps.iter()
        .map(|m| {
            let mut p = linalg::zeros(m.len(), m.len());
            for (x, y) in m.iter().enumerate() {
                if let Some(y) = y {
                    p[(*y, x)] = ONE;
                }
            }
            p
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct IsFellReport {
    pub w: CMat,
    pub partial_isometry_defect: f64,
    /// max_s ‖W(λ_s⊗1) − (λ_s⊗π_s)W‖.
    pub intertwining_defect: f64,
    /// dim Init(W) = Σ_t rank π_{t*t}.
    pub init_dim: usize,
    pub fin_dim: usize,
    /// ‖W†W − ⊕_t π_{t*t}‖.
    pub init_defect: f64,
}

/// W(δ_s⊗ξ) = δ_s⊗π_sξ on ℓ²(S)⊗H, basis index s·dim H + i.
pub fn fell_absorption_is(s: &InverseSemigroup, pi: &[CMat]) -> Result<IsFellReport> {
    let n = s.len();
    if pi.len() != n {
        return Err(Error::DimensionMismatch(format!("{} operators for {} elements", pi.len(), n)));
    }
    let h = pi.first().map_or(0, |p| p.nrows());
    if pi.iter().any(|p| p.shape() != (h, h)) {
        return Err(Error::DimensionMismatch("representation operators differ in shape".into()));
    }
    let mut w = linalg::zeros(n * h, n * h);
    let mut init = linalg::zeros(n * h, n * h);
    for t in 0..n {
        w.view_mut((t * h, t * h), (h, h)).copy_from(&pi[t]);
        init.view_mut((t * h, t * h), (h, h)).copy_from(&pi[s.source_idem(t)]);
    }
    let lam = left_regular(s);
    let id = linalg::identity(h);
    let mut inter = 0.0f64;
    for a in 0..n {
        let lhs = linalg::sparse_mul(&w, &linalg::kron(&lam[a], &id));
        let rhs = linalg::sparse_mul(&linalg::kron(&lam[a], &pi[a]), &w);
        let d = linalg::max_abs_diff(&lhs, &rhs);
        if d > 1e-12 {
            return Err(Error::IntertwiningFailed { element: s.names[a].clone(), deviation: d });
        }
        inter = inter.max(d);
    }
    let wtw = w.adjoint() * &w;
    let init_defect = linalg::max_abs_diff(&wtw, &init);
    let init_dim = (0..n).map(|t| linalg::rank(&pi[s.source_idem(t)], 1e-9)).sum();
    let fin_dim = linalg::rank(&(&w * w.adjoint()), 1e-9);
    Ok(IsFellReport {
        partial_isometry_defect: linalg::partial_isometry_defect(&w),
        intertwining_defect: inter,
        init_dim,
        fin_dim,
        init_defect,
        w,
    })
}

/// An action of S on a finite set by partial bijections α_s: D(s*) → D(s).
#[derive(Debug, Clone)]
pub struct SAction {
    pub s: InverseSemigroup,
    pub points: Vec<String>,
    /// dom[s][x]: x ∈ D(s).
    pub dom: Vec<Vec<bool>>,
    /// alpha[s][x] = α_s(x) for x ∈ D(s*).
    pub alpha: Vec<Vec<Option<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSAction {
    pub semigroup: RawSemigroup,
    #[serde(rename = "X")]
    pub x: Vec<String>,
    /// s → {x: α_s(x)}; D(s) is the image.
    pub alpha: BTreeMap<String, BTreeMap<String, String>>,
}

impl SAction {
    /// From α alone; D(s) is the image of α_s.
    pub fn new(s: InverseSemigroup, points: Vec<String>, alpha: Vec<Vec<Option<usize>>>) -> Result<SAction> {
        let n = points.len();
        if alpha.len() != s.len() || alpha.iter().any(|a| a.len() != n) {
            return Err(Error::DimensionMismatch("alpha shape".into()));
        }
        let mut dom = vec![vec![false; n]; s.len()];
        for (a, m) in alpha.iter().enumerate() {
            for y in m.iter().flatten() {
                dom[a][*y] = true;
            }
        }
        let act = SAction { s, points, dom, alpha };
        let v = act.violations();
        if v.is_empty() {
            Ok(act)
        } else {
            Err(Error::AxiomViolation(v))
        }
    }

    pub fn from_raw(raw: &RawSAction) -> Result<SAction> {
        let s = validate_semigroup(&raw.semigroup)?;
        let n = raw.x.len();
        let pt = |p: &str| raw.x.iter().position(|q| q == p).ok_or_else(|| Error::InvalidInput(format!("unknown point {p}")));
        let mut alpha = vec![vec![None; n]; s.len()];
        for (name, m) in &raw.alpha {
            let a = s.index_of(name).ok_or_else(|| Error::InvalidInput(format!("unknown element {name}")))?;
            for (x, y) in m {
                alpha[a][pt(x)?] = Some(pt(y)?);
            }
        }
        SAction::new(s, raw.x.clone(), alpha)
    }

    pub fn to_raw(&self) -> RawSAction {
        RawSAction {
            semigroup: self.s.to_raw(),
            x: self.points.clone(),
            alpha: (0..self.s.len())
                .map(|a| {
                    let m = (0..self.points.len())
                        .filter_map(|x| self.alpha[a][x].map(|y| (self.points[x].clone(), self.points[y].clone())))
                        .collect();
                    (self.s.names[a].clone(), m)
                })
                .collect(),
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let s = &self.s;
        let n = self.points.len();
        let p = |x: usize| self.points[x].as_str();
        let mut v = Vec::new();
        for a in 0..s.len() {
            if invert_map(&self.alpha[a]).is_err() {
                v.push(Violation::new("alpha-injective", &[&s.names[a]]));
            }
            for x in 0..n {
                if self.alpha[a][x].is_some() != self.dom[s.star[a]][x] {
                    v.push(Violation::new("alpha-domain", &[&s.names[a], p(x)]));
                }
            }
            for b in 0..s.len() {
                if compose_maps(&self.alpha[a], &self.alpha[b]) != self.alpha[s.mul(a, b)] {
                    v.push(Violation::new("homomorphism", &[&s.names[a], &s.names[b]]));
                }
            }
        }
        for x in 0..n {
            if !(0..s.len()).any(|a| self.dom[a][x]) {
                v.push(Violation::new("domains-cover", &[p(x)]));
            }
        }
        v
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Germs {
    pub g: FiniteGroupoid,
    /// Representative (x, s) of every germ.
    pub reps: Vec<(usize, usize)>,
    /// germ_of[x][s] for x ∈ D(s*).
    pub germ_of: Vec<Vec<Option<usize>>>,
}

/// Germs [x, s], x ∈ D(s*), modulo [x, s] = [x, t] when x ∈ D(e) and se = te.
/// d[x, s] = x, r[x, s] = α_s(x) and [α_t(x), s][x, t] = [x, st].
pub fn germ_groupoid(act: &SAction) -> Result<Germs> {
    let s = &act.s;
    let (k, n) = (s.len(), act.points.len());
    let id = |x: usize, a: usize| x * k + a;
    let mut uf = UnionFind((0..n * k).collect());
    let idem = s.idempotents();
    for x in 0..n {
        for a in 0..k {
            if act.alpha[a][x].is_none() {
                continue;
            }
            for b in 0..a {
                if act.alpha[b][x].is_some() && idem.iter().any(|&e| act.dom[e][x] && s.mul(a, e) == s.mul(b, e)) {
                    uf.union(id(x, a), id(x, b));
                }
            }
        }
    }
    let mut root_idx: BTreeMap<usize, usize> = BTreeMap::new();
    let mut reps = Vec::new();
    let mut germ_of = vec![vec![None; k]; n];
    // Units first: one germ [x, e] per point.
    for pass in 0..2 {
        for x in 0..n {
            for a in 0..k {
                if act.alpha[a][x].is_none() || (pass == 0) != s.is_idempotent(a) {
                    continue;
                }
                let r = uf.find(id(x, a));
                let g = *root_idx.entry(r).or_insert_with(|| {
                    reps.push((x, a));
                    reps.len() - 1
                });
                germ_of[x][a] = Some(g);
            }
        }
    }
    let m = reps.len();
    let unit_of: Vec<usize> = (0..n)
        .map(|x| idem.iter().find_map(|&e| germ_of[x][e]).ok_or_else(|| Error::InvalidInput(format!("point {} has no unit germ", act.points[x]))))
        .collect::<Result<_>>()?;
    let names = reps.iter().map(|&(x, a)| format!("[{},{}]", act.points[x], s.names[a])).collect();
    let units: Vec<usize> = unit_of.clone();
    let src = reps.iter().map(|&(x, _)| unit_of[x]).collect();
    let rng = reps.iter().map(|&(x, a)| unit_of[act.alpha[a][x].unwrap()]).collect();
    let inv = reps.iter().map(|&(x, a)| germ_of[act.alpha[a][x].unwrap()][s.star[a]].expect("α_s(x) ∈ D(s)")).collect();
    let g = FiniteGroupoid::from_fn(names, units, src, rng, inv, |p, q| {
        let (y, a) = reps[p];
        let (x, b) = reps[q];
        debug_assert_eq!(act.alpha[b][x], Some(y));
        let _ = y;
        germ_of[x][s.mul(a, b)]
    })?;
    debug_assert!(m == g.len());
    Ok(Germs { g, reps, germ_of })
}

/// Every bisection of 𝒢 (including ∅), up to `BISECTION_CAP`.
pub fn all_bisections(g: &FiniteGroupoid) -> Result<Vec<Vec<usize>>> {
    let units = g.units().to_vec();
    let mut out = Vec::new();
    let mut used = vec![false; g.len()];
    fn go(
        g: &FiniteGroupoid,
        units: &[usize],
        i: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if i == units.len() {
            let mut c = cur.clone();
            c.sort_unstable();
            out.push(c);
            if out.len() > BISECTION_CAP {
                return Err(Error::TooLarge { what: "bisections".into(), size: out.len(), cap: BISECTION_CAP });
            }
            return Ok(());
        }
        go(g, units, i + 1, cur, used, out)?;
        for &a in g.source_fiber(units[i]) {
            let r = g.rng(a);
            if !used[r] {
                used[r] = true;
                cur.push(a);
                go(g, units, i + 1, cur, used, out)?;
                cur.pop();
                used[r] = false;
            }
        }
        Ok(())
    }
    go(g, &units, 0, &mut Vec::new(), &mut used, &mut out)?;
    Ok(out)
}

/// UV = {uv : u ∈ U, v ∈ V composable}.
pub fn bisection_product(g: &FiniteGroupoid, u: &[usize], v: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = u.iter().flat_map(|&a| v.iter().filter_map(move |&b| g.comp(a, b))).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Bisections closed under products and inverses, as an inverse semigroup.
pub fn bisection_semigroup(g: &FiniteGroupoid, bis: &[Vec<usize>]) -> Result<InverseSemigroup> {
    let sorted: Vec<Vec<usize>> = bis
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b.dedup();
            b
        })
        .collect();
    for b in &sorted {
        if !is_bisection(g, b) {
            return Err(Error::InvalidInput(format!("{b:?} is not a bisection")));
        }
    }
    let idx: BTreeMap<&Vec<usize>, usize> = sorted.iter().enumerate().map(|(i, b)| (b, i)).collect();
    if idx.len() != sorted.len() {
        return Err(Error::InvalidInput("repeated bisection".into()));
    }
    let mut mul = vec![vec![0; sorted.len()]; sorted.len()];
    for (i, u) in sorted.iter().enumerate() {
        for (j, v) in sorted.iter().enumerate() {
            let p = bisection_product(g, u, v);
            mul[i][j] = *idx.get(&p).ok_or_else(|| Error::InvalidInput("bisections not closed under products".into()))?;
        }
    }
    let names = sorted
        .iter()
        .map(|b| format!("{{{}}}", b.iter().map(|&a| g.name(a)).collect::<Vec<_>>().join(",")))
        .collect();
    InverseSemigroup::from_table(names, mul)
}

/// The action of bisections on units: α_U(d(u)) = r(u).
pub fn bisection_action(g: &FiniteGroupoid, bis: &[Vec<usize>]) -> Result<SAction> {
    let s = bisection_semigroup(g, bis)?;
    let units = g.units();
    let points = units.iter().map(|&x| g.name(x).to_string()).collect();
    let mut sorted: Vec<Vec<usize>> = bis.to_vec();
    for b in &mut sorted {
        b.sort_unstable();
        b.dedup();
    }
    let alpha = sorted
        .iter()
        .map(|b| {
            let mut m = vec![None; units.len()];
            for &a in b {
                m[g.unit_pos(g.src(a)).unwrap()] = Some(g.unit_pos(g.rng(a)).unwrap());
            }
            m
        })
        .collect();
    SAction::new(s, points, alpha)
}

#[derive(Debug, Clone)]
pub struct WideReport {
    pub germs: Germs,
    /// Germ index ↦ element of 𝒢.
    pub iso: Vec<usize>,
}

/// The canonical map [x, U] ↦ u ∈ U with d(u) = x.
pub fn canonical_germ_map(g: &FiniteGroupoid, bis: &[Vec<usize>], germs: &Germs) -> Vec<usize> {
    let units = g.units();
    let mut sorted: Vec<Vec<usize>> = bis.to_vec();
    for b in &mut sorted {
        b.sort_unstable();
        b.dedup();
    }
    germs
        .reps
        .iter()
        .map(|&(x, a)| *sorted[a].iter().find(|&&u| g.src(u) == units[x]).expect("x ∈ d(U)"))
        .collect()
}

/// Checks ∪S = 𝒢 and u ∈ U ∩ V ⟹ ∃W ∈ S with u ∈ W ⊆ U ∩ V, then builds
/// and verifies X⋊S ≅ 𝒢.
pub fn wide_check_and_iso(g: &FiniteGroupoid, bis: &[Vec<usize>]) -> Result<WideReport> {
    let act = bisection_action(g, bis)?;
    let mut covered = vec![false; g.len()];
    for b in bis {
        for &a in b {
            covered[a] = true;
        }
    }
    if let Some(a) = covered.iter().position(|c| !c) {
        return Err(Error::NotWide { condition: "union".into(), witness: g.name(a).to_string() });
    }
    let sets: Vec<Vec<bool>> = bis
        .iter()
        .map(|b| {
            let mut m = vec![false; g.len()];
            for &a in b {
                m[a] = true;
            }
            m
        })
        .collect();
    for (i, u) in sets.iter().enumerate() {
        for (j, v) in sets.iter().enumerate().skip(i + 1) {
            for a in 0..g.len() {
                if !(u[a] && v[a]) {
                    continue;
                }
                let ok = sets.iter().any(|w| w[a] && (0..g.len()).all(|b| !w[b] || (u[b] && v[b])));
                if !ok {
                    return Err(Error::NotWide {
                        condition: "refinement".into(),
                        witness: format!("{} in {} ∩ {}", g.name(a), act.s.names[i], act.s.names[j]),
                    });
                }
            }
        }
    }
    let germs = germ_groupoid(&act)?;
    let iso = canonical_germ_map(g, bis, &germs);
    if germs.g.len() != g.len() || !is_isomorphism(&germs.g, g, &iso) {
        return Err(Error::NotWide { condition: "isomorphism".into(), witness: format!("{} germs", germs.g.len()) });
    }
    Ok(WideReport { germs, iso })
}

#[derive(Debug, Clone)]
pub struct Universal {
    /// Characters χ: E → {0, 1} as bit vectors over `idempotents`.
    pub characters: Vec<Vec<bool>>,
    pub idempotents: Vec<usize>,
    pub action: SAction,
    pub germs: Germs,
}

/// Nonzero multiplicative χ: E → {0, 1}, with χ(0) = 0 for a designated zero.
pub fn idempotent_spectrum(s: &InverseSemigroup) -> Result<(Vec<usize>, Vec<Vec<bool>>)> {
    let idem = s.idempotents();
    if idem.len() > IDEMPOTENT_CAP {
        return Err(Error::SpectrumTooLarge(idem.len()));
    }
    let zero = s.zero;
    let pos: BTreeMap<usize, usize> = idem.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut chars = Vec::new();
    for mask in 1u32..(1u32 << idem.len()) {
        let chi: Vec<bool> = (0..idem.len()).map(|i| mask >> i & 1 == 1).collect();
        if zero.is_some_and(|z| chi[pos[&z]]) {
            continue;
        }
        let mult = idem.iter().enumerate().all(|(i, &e)| {
            idem.iter().enumerate().all(|(j, &f)| chi[pos[&s.mul(e, f)]] == (chi[i] && chi[j]))
        });
        if mult {
            chars.push(chi);
        }
    }
    Ok((idem, chars))
}

/// Ê⋊S with α_s(χ)(e) = χ(s*es) on {χ : χ(s*s) = 1}.
pub fn universal_groupoid(s: &InverseSemigroup) -> Result<Universal> {
    let (idem, chars) = idempotent_spectrum(s)?;
    let pos: BTreeMap<usize, usize> = idem.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let cidx: BTreeMap<&Vec<bool>, usize> = chars.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut alpha = vec![vec![None; chars.len()]; s.len()];
    for a in 0..s.len() {
        let st = s.star[a];
        for (ci, chi) in chars.iter().enumerate() {
            if !chi[pos[&s.source_idem(a)]] {
                continue;
            }
            let image: Vec<bool> = idem.iter().map(|&e| chi[pos[&s.mul(s.mul(st, e), a)]]).collect();
            let target = *cidx.get(&image).ok_or_else(|| Error::InvalidInput("image is not a character".into()))?;
            alpha[a][ci] = Some(target);
        }
    }
    let points = chars
        .iter()
        .map(|chi| {
            let on: Vec<&str> = idem.iter().zip(chi).filter(|(_, b)| **b).map(|(&e, _)| s.names[e].as_str()).collect();
            format!("χ{{{}}}", on.join(","))
        })
        .collect();
    let action = SAction::new(s.clone(), points, alpha)?;
    let germs = germ_groupoid(&action)?;
    Ok(Universal { characters: chars, idempotents: idem, action, germs })
}
