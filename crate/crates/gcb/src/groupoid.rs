//! Finite groupoids: storage, axiom validation and constructors.

use crate::error::{Error, Result, Violation};
use std::collections::{BTreeMap, HashMap};

const NONE: u32 = u32::MAX;

/// Default cap on the number of elements accepted by validation.
pub const MAX_ELEMENTS: usize = 4096;

/// Elements are indices into the canonical (input) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupoid {
    names: Vec<String>,
    index: HashMap<String, usize>,
    units: Vec<usize>,
    unit_pos: Vec<Option<usize>>,
    src: Vec<usize>,
    rng: Vec<usize>,
    inv: Vec<usize>,
    comp: Vec<u32>,
    src_fiber: Vec<Vec<usize>>,
    rng_fiber: Vec<Vec<usize>>,
}

/// A groupoid description before validation. Names are strings; `comp`
/// lists every defined product as `[a, b, ab]`.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RawGroupoid {
    pub elements: Vec<String>,
    pub units: Vec<String>,
    pub src: BTreeMap<String, String>,
    pub rng: BTreeMap<String, String>,
    pub inv: BTreeMap<String, String>,
    pub comp: Vec<[String; 3]>,
}

impl FiniteGroupoid {
    pub fn empty() -> Self {
        FiniteGroupoid::from_parts(Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new())
    }

    /// Assemble from index data. Callers guarantee the axioms; `validate` is
    /// the checked entry point.
    fn from_parts(
        names: Vec<String>,
        units: Vec<usize>,
        src: Vec<usize>,
        rng: Vec<usize>,
        inv: Vec<usize>,
        comp: Vec<u32>,
    ) -> Self {
        let n = names.len();
        let mut unit_pos = vec![None; n];
        for (k, &u) in units.iter().enumerate() {
            unit_pos[u] = Some(k);
        }
        let mut src_fiber = vec![Vec::new(); units.len()];
        let mut rng_fiber = vec![Vec::new(); units.len()];
        for a in 0..n {
            src_fiber[unit_pos[src[a]].expect("src is a unit")].push(a);
            rng_fiber[unit_pos[rng[a]].expect("rng is a unit")].push(a);
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        FiniteGroupoid { names, index, units, unit_pos, src, rng, inv, comp, src_fiber, rng_fiber }
    }

    /// Build from a composition closure on index data and validate the result.
    pub fn from_fn(
        names: Vec<String>,
        units: Vec<usize>,
        src: Vec<usize>,
        rng: Vec<usize>,
        inv: Vec<usize>,
        compose: impl Fn(usize, usize) -> Option<usize>,
    ) -> Result<Self> {
        let n = names.len();
        let mut comp = vec![NONE; n * n];
        for a in 0..n {
            for b in 0..n {
                if src[a] == rng[b] {
                    if let Some(c) = compose(a, b) {
                        comp[a * n + b] = c as u32;
                    }
                }
            }
        }
        let g = FiniteGroupoid::from_parts(names, units, src, rng, inv, comp);
        let v = g.check_axioms();
        if v.is_empty() {
            Ok(g)
        } else {
            Err(Error::AxiomViolation(v))
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Units in canonical order.
    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, a: usize) -> bool {
        self.unit_pos[a].is_some()
    }

    /// Position of a unit inside `units()`.
    pub fn unit_pos(&self, x: usize) -> Option<usize> {
        self.unit_pos[x]
    }

    pub fn src(&self, a: usize) -> usize {
        self.src[a]
    }

    pub fn rng(&self, a: usize) -> usize {
        self.rng[a]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn comp(&self, a: usize, b: usize) -> Option<usize> {
        let c = self.comp[a * self.len() + b];
        (c != NONE).then_some(c as usize)
    }

    /// 𝒢_x = d⁻¹(x), in canonical order.
    pub fn source_fiber(&self, x: usize) -> &[usize] {
        &self.src_fiber[self.unit_pos[x].expect("unit")]
    }

    /// 𝒢^x = r⁻¹(x), in canonical order.
    pub fn range_fiber(&self, x: usize) -> &[usize] {
        &self.rng_fiber[self.unit_pos[x].expect("unit")]
    }

    pub fn to_raw(&self) -> RawGroupoid {
        let n = self.len();
        let nm = |a: usize| self.names[a].clone();
        let mut comp = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Some(c) = self.comp(a, b) {
                    comp.push([nm(a), nm(b), nm(c)]);
                }
            }
        }
        RawGroupoid {
            elements: self.names.clone(),
            units: self.units.iter().map(|&u| nm(u)).collect(),
            src: (0..n).map(|a| (nm(a), nm(self.src[a]))).collect(),
            rng: (0..n).map(|a| (nm(a), nm(self.rng[a]))).collect(),
            inv: (0..n).map(|a| (nm(a), nm(self.inv[a]))).collect(),
            comp,
        }
    }

    /// All groupoid axioms on already index-resolved data.
    fn check_axioms(&self) -> Vec<Violation> {
        let n = self.len();
        let mut out = Vec::new();
        let push = |out: &mut Vec<Violation>, kind: &str, w: &[usize]| {
            if out.iter().filter(|v: &&Violation| v.kind == kind).count() < 16 {
                out.push(Violation {
                    kind: kind.to_string(),
                    witness: w.iter().map(|&a| self.names[a].clone()).collect(),
                });
            }
        };
        for &x in &self.units {
            if self.src[x] != x || self.rng[x] != x {
                push(&mut out, "unit-law", &[x]);
            }
        }
        for a in 0..n {
            for b in 0..n {
                let composable = self.src[a] == self.rng[b];
                match (composable, self.comp(a, b)) {
                    (true, None) => push(&mut out, "comp-domain", &[a, b]),
                    (false, Some(_)) => push(&mut out, "comp-domain", &[a, b]),
                    (true, Some(c)) => {
                        if self.src[c] != self.src[b] || self.rng[c] != self.rng[a] {
                            push(&mut out, "comp-src-rng", &[a, b, c]);
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for a in 0..n {
            if self.comp(a, self.src[a]) != Some(a) || self.comp(self.rng[a], a) != Some(a) {
                push(&mut out, "identity-law", &[a]);
            }
            let i = self.inv[a];
            if self.inv[i] != a
                || self.src[i] != self.rng[a]
                || self.comp(a, i) != Some(self.rng[a])
                || self.comp(i, a) != Some(self.src[a])
            {
                push(&mut out, "inverse-law", &[a]);
            }
        }
        for a in 0..n {
            for b in self.composable_right(self.src[a]) {
                let ab = self.comp(a, b).expect("composable");
                for c in self.composable_right(self.src[b]) {
                    let bc = self.comp(b, c).expect("composable");
                    if self.comp(ab, c) != self.comp(a, bc) {
                        push(&mut out, "associativity", &[a, b, c]);
                    }
                }
            }
        }
        out
    }

    /// Elements with range x (those b with a·b defined when d(a) = x).
    fn composable_right(&self, x: usize) -> Vec<usize> {
        self.unit_pos[x].map(|k| self.rng_fiber[k].clone()).unwrap_or_default()
    }
}

/// Validate a raw description, collecting every violated axiom.
pub fn validate(raw: &RawGroupoid) -> Result<FiniteGroupoid> {
    validate_capped(raw, MAX_ELEMENTS)
}

pub fn validate_capped(raw: &RawGroupoid, max_elements: usize) -> Result<FiniteGroupoid> {
    let n = raw.elements.len();
    if n > max_elements {
        return Err(Error::TooLarge { what: "groupoid".into(), size: n, cap: max_elements });
    }
    let mut v = Vec::new();
    let mut index = HashMap::new();
    for (i, e) in raw.elements.iter().enumerate() {
        if index.insert(e.clone(), i).is_some() {
            v.push(Violation::new("duplicate-element", &[e]));
        }
    }
    let look = |name: &str, v: &mut Vec<Violation>| -> Option<usize> {
        let r = index.get(name).copied();
        if r.is_none() {
            v.push(Violation::new("unknown-element", &[name]));
        }
        r
    };
    let mut is_unit = vec![false; n];
    for u in &raw.units {
        if let Some(i) = look(u, &mut v) {
            is_unit[i] = true;
        }
    }
    let map = |m: &BTreeMap<String, String>, kind: &str, v: &mut Vec<Violation>| -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (k, val) in m {
            if let (Some(a), Some(b)) = (look(k, v), look(val, v)) {
                out[a] = b;
            }
        }
        for a in 0..n {
            if out[a] == usize::MAX {
                v.push(Violation::new(kind, &[&raw.elements[a]]));
            }
        }
        out
    };
    let src = map(&raw.src, "missing-src", &mut v);
    let rng = map(&raw.rng, "missing-rng", &mut v);
    let inv = map(&raw.inv, "missing-inv", &mut v);
    if !v.is_empty() {
        return Err(Error::AxiomViolation(v));
    }
    for a in 0..n {
        if !is_unit[src[a]] {
            v.push(Violation::new("src-not-unit", &[&raw.elements[a]]));
        }
        if !is_unit[rng[a]] {
            v.push(Violation::new("rng-not-unit", &[&raw.elements[a]]));
        }
    }
    let mut comp = vec![NONE; n * n];
    for [a, b, c] in &raw.comp {
        let (Some(a), Some(b), Some(c)) = (look(a, &mut v), look(b, &mut v), look(c, &mut v)) else {
            continue;
        };
        let slot = &mut comp[a * n + b];
        if *slot != NONE && *slot != c as u32 {
            v.push(Violation::new("comp-conflict", &[&raw.elements[a], &raw.elements[b]]));
        }
        *slot = c as u32;
    }
    if !v.is_empty() {
        return Err(Error::AxiomViolation(v));
    }
    let units: Vec<usize> = (0..n).filter(|&i| is_unit[i]).collect();
    let g = FiniteGroupoid::from_parts(raw.elements.clone(), units, src, rng, inv, comp);
    let v = g.check_axioms();
    if v.is_empty() {
        Ok(g)
    } else {
        Err(Error::AxiomViolation(v))
    }
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub names: Vec<String>,
    pub mul: Vec<Vec<usize>>,
    pub identity: usize,
    pub inv: Vec<usize>,
}

impl Group {
    pub fn from_table(names: Vec<String>, mul: Vec<Vec<usize>>) -> Result<Group> {
        let n = names.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        if mul.len() != n || mul.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::NotAGroup("table is not square over the element set".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::NotAGroup(format!(
                            "associativity fails on ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or_else(|| Error::NotAGroup("no identity".into()))?;
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a][b] == identity && mul[b][a] == identity)
                .ok_or_else(|| Error::NotAGroup(format!("{} has no inverse", names[a])))?;
        }
        Ok(Group { names, mul, identity, inv })
    }

    pub fn cyclic(n: usize) -> Group {
        let names = (0..n).map(|k| k.to_string()).collect();
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Group::from_table(names, mul).expect("cyclic group")
    }

    /// S₃ as permutations of {0,1,2} in lexicographic order.
    pub fn symmetric3() -> Group {
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let names = perms.iter().map(|p| format!("{}{}{}", p[0], p[1], p[2])).collect();
        let pos = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        // (a·b)(i) = a(b(i))
        let mul = perms
            .iter()
            .map(|a| perms.iter().map(|b| pos([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        Group::from_table(names, mul).expect("S3")
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }
}

/// The group as a one-unit groupoid.
pub fn from_group(g: &Group) -> FiniteGroupoid {
    let n = g.order();
    let e = g.identity;
    FiniteGroupoid::from_fn(g.names.clone(), vec![e], vec![e; n], vec![e; n], g.inv.clone(), |a, b| {
        Some(g.mul(a, b))
    })
    .expect("groups are groupoids")
}

pub fn from_group_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<FiniteGroupoid> {
    Ok(from_group(&Group::from_table(names, table)?))
}

/// Elements `(i,j)` for `0 ≤ i,j < n` in row-major order, with `d(i,j) = (j,j)`,
/// `r(i,j) = (i,i)` and `(i,j)(j,k) = (i,k)`.
pub fn pair_groupoid(n: usize) -> FiniteGroupoid {
    let idx = |i: usize, j: usize| i * n + j;
    let names = (0..n * n).map(|a| format!("({},{})", a / n, a % n)).collect();
    let units = (0..n).map(|i| idx(i, i)).collect();
    let src = (0..n * n).map(|a| idx(a % n, a % n)).collect();
    let rng = (0..n * n).map(|a| idx(a / n, a / n)).collect();
    let inv = (0..n * n).map(|a| idx(a % n, a / n)).collect();
    FiniteGroupoid::from_fn(names, units, src, rng, inv, |a, b| Some(idx(a / n, b % n)))
        .expect("pair groupoids are groupoids")
}

/// Tagged union with names prefixed `0.` and `1.`. A union with an empty
/// groupoid returns the other operand unchanged.
pub fn disjoint_union(g1: &FiniteGroupoid, g2: &FiniteGroupoid) -> FiniteGroupoid {
    if g2.is_empty() {
        return g1.clone();
    }
    if g1.is_empty() {
        return g2.clone();
    }
    let n1 = g1.len();
    let n = n1 + g2.len();
    let names = g1
        .names()
        .iter()
        .map(|s| format!("0.{s}"))
        .chain(g2.names().iter().map(|s| format!("1.{s}")))
        .collect();
    let lift = |a: usize, f1: &dyn Fn(usize) -> usize, f2: &dyn Fn(usize) -> usize| {
        if a < n1 {
            f1(a)
        } else {
            f2(a - n1) + n1
        }
    };
    let units = g1.units().iter().copied().chain(g2.units().iter().map(|&u| u + n1)).collect();
    let src = (0..n).map(|a| lift(a, &|x| g1.src(x), &|x| g2.src(x))).collect();
    let rng = (0..n).map(|a| lift(a, &|x| g1.rng(x), &|x| g2.rng(x))).collect();
    let inv = (0..n).map(|a| lift(a, &|x| g1.inv(x), &|x| g2.inv(x))).collect();
    FiniteGroupoid::from_fn(names, units, src, rng, inv, |a, b| match (a < n1, b < n1) {
        (true, true) => g1.comp(a, b),
        (false, false) => g2.comp(a - n1, b - n1).map(|c| c + n1),
        _ => None,
    })
    .expect("unions of groupoids are groupoids")
}

/// 𝒢|_Y = r⁻¹(Y) ∩ d⁻¹(Y), names preserved, canonical order inherited.
pub fn reduction(g: &FiniteGroupoid, y: &[usize]) -> FiniteGroupoid {
    let mut in_y = vec![false; g.len()];
    for &x in y {
        if g.is_unit(x) {
            in_y[x] = true;
        }
    }
    let keep: Vec<usize> = (0..g.len()).filter(|&a| in_y[g.src(a)] && in_y[g.rng(a)]).collect();
    let mut new_idx = vec![usize::MAX; g.len()];
    for (k, &a) in keep.iter().enumerate() {
        new_idx[a] = k;
    }
    let names = keep.iter().map(|&a| g.name(a).to_string()).collect();
    let units = keep.iter().filter(|&&a| g.is_unit(a)).map(|&a| new_idx[a]).collect();
    let src = keep.iter().map(|&a| new_idx[g.src(a)]).collect();
    let rng = keep.iter().map(|&a| new_idx[g.rng(a)]).collect();
    let inv = keep.iter().map(|&a| new_idx[g.inv(a)]).collect();
    FiniteGroupoid::from_fn(names, units, src, rng, inv, |a, b| {
        g.comp(keep[a], keep[b]).map(|c| new_idx[c])
    })
    .expect("reductions are groupoids")
}

/// A subset on which source and range are injective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bisection {
    pub carrier: Vec<usize>,
}

impl Bisection {
    pub fn new(g: &FiniteGroupoid, mut carrier: Vec<usize>) -> Result<Self> {
        carrier.sort_unstable();
        carrier.dedup();
        if is_bisection(g, &carrier) {
            Ok(Bisection { carrier })
        } else {
            Err(Error::InvalidInput("carrier is not a bisection".into()))
        }
    }
}

pub fn is_bisection(g: &FiniteGroupoid, set: &[usize]) -> bool {
    let mut ds = std::collections::HashSet::new();
    let mut rs = std::collections::HashSet::new();
    set.iter().all(|&a| ds.insert(g.src(a)) && rs.insert(g.rng(a)))
}

/// Greedy first-fit partition of `support` into bisections, scanning the
/// support in canonical order.
pub fn bisection_cover(g: &FiniteGroupoid, support: &[usize]) -> Vec<Bisection> {
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut parts: Vec<(Vec<usize>, Vec<bool>, Vec<bool>)> = Vec::new();
    for a in sorted {
        let (d, r) = (g.src(a), g.rng(a));
        match parts.iter_mut().find(|(_, ds, rs)| !ds[d] && !rs[r]) {
            Some((c, ds, rs)) => {
                c.push(a);
                ds[d] = true;
                rs[r] = true;
            }
            None => {
                let mut ds = vec![false; g.len()];
                let mut rs = vec![false; g.len()];
                ds[d] = true;
                rs[r] = true;
                parts.push((vec![a], ds, rs));
            }
        }
    }
    parts.into_iter().map(|(carrier, _, _)| Bisection { carrier }).collect()
}

/// A set of units saturated under the groupoid action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSet {
    pub carrier: Vec<usize>,
}

pub fn is_invariant(g: &FiniteGroupoid, units: &[usize]) -> bool {
    let mut inside = vec![false; g.len()];
    for &x in units {
        inside[x] = true;
    }
    (0..g.len()).all(|a| inside[g.src(a)] == inside[g.rng(a)])
}

/// Orbits of the unit space, each sorted, ordered by their first unit.
pub fn orbits(g: &FiniteGroupoid) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; g.len()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &x in g.units() {
        if label[x] != usize::MAX {
            continue;
        }
        let k = out.len();
        let mut orbit: Vec<usize> = g.source_fiber(x).iter().map(|&a| g.rng(a)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &y in &orbit {
            label[y] = k;
        }
        out.push(orbit);
    }
    out
}

/// Every invariant subset, i.e. every union of orbits (2^#orbits of them),
/// ordered by the bitmask of included orbits.
pub fn invariant_sets(g: &FiniteGroupoid) -> Vec<InvariantSet> {
    let orb = orbits(g);
    assert!(orb.len() < 32, "too many orbits to enumerate invariant sets");
    (0u64..(1u64 << orb.len()))
        .map(|mask| {
            let mut carrier: Vec<usize> = (0..orb.len())
                .filter(|&k| mask >> k & 1 == 1)
                .flat_map(|k| orb[k].iter().copied())
                .collect();
            carrier.sort_unstable();
            InvariantSet { carrier }
        })
        .collect()
}

/// Search for an isomorphism `g → h`, returned as an element map.
pub fn find_isomorphism(g: &FiniteGroupoid, h: &FiniteGroupoid) -> Option<Vec<usize>> {
    if g.len() != h.len() || g.units().len() != h.units().len() {
        return None;
    }
    // Units first so that src/rng images are known when an arrow is placed.
    let mut order: Vec<usize> = g.units().to_vec();
    order.extend((0..g.len()).filter(|&a| !g.is_unit(a)));
    let mut map = vec![usize::MAX; g.len()];
    let mut used = vec![false; h.len()];
    fn fits(g: &FiniteGroupoid, h: &FiniteGroupoid, map: &[usize], a: usize, b: usize) -> bool {
        if g.is_unit(a) != h.is_unit(b) {
            return false;
        }
        if g.is_unit(a) {
            return g.source_fiber(a).len() == h.source_fiber(b).len()
                && g.range_fiber(a).len() == h.range_fiber(b).len();
        }
        if map[g.src(a)] != h.src(b) || map[g.rng(a)] != h.rng(b) {
            return false;
        }
        let ia = g.inv(a);
        if map[ia] != usize::MAX && map[ia] != h.inv(b) {
            return false;
        }
        for c in 0..g.len() {
            if map[c] == usize::MAX {
                continue;
            }
            if let Some(ac) = g.comp(a, c) {
                if map[ac] != usize::MAX && h.comp(b, map[c]) != Some(map[ac]) {
                    return false;
                }
            }
            if let Some(ca) = g.comp(c, a) {
                if map[ca] != usize::MAX && h.comp(map[c], b) != Some(map[ca]) {
                    return false;
                }
            }
        }
        true
    }
    fn go(
        g: &FiniteGroupoid,
        h: &FiniteGroupoid,
        order: &[usize],
        k: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let a = order[k];
        for b in 0..h.len() {
            if used[b] || !fits(g, h, map, a, b) {
                continue;
            }
            map[a] = b;
            used[b] = true;
            if go(g, h, order, k + 1, map, used) {
                return true;
            }
            map[a] = usize::MAX;
            used[b] = false;
        }
        false
    }
    if go(g, h, &order, 0, &mut map, &mut used) && is_isomorphism(g, h, &map) {
        Some(map)
    } else {
        None
    }
}

/// Exhaustive check that `map` is a bijective functor preserving inverses.
pub fn is_isomorphism(g: &FiniteGroupoid, h: &FiniteGroupoid, map: &[usize]) -> bool {
    if g.len() != h.len() || map.len() != g.len() {
        return false;
    }
    let mut seen = vec![false; h.len()];
    for &b in map {
        if b >= h.len() || seen[b] {
            return false;
        }
        seen[b] = true;
    }
    (0..g.len()).all(|a| {
        g.is_unit(a) == h.is_unit(map[a])
            && map[g.src(a)] == h.src(map[a])
            && map[g.rng(a)] == h.rng(map[a])
            && map[g.inv(a)] == h.inv(map[a])
            && (0..g.len()).all(|b| match g.comp(a, b) {
                Some(c) => h.comp(map[a], map[b]) == Some(map[c]),
                None => h.comp(map[a], map[b]).is_none(),
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_counts() {
        assert_eq!(pair_groupoid(1).len(), 1);
        let g = pair_groupoid(2);
        assert_eq!((g.len(), g.units().len()), (4, 2));
        let g3 = pair_groupoid(3);
        for &x in g3.units() {
            assert_eq!(g3.source_fiber(x).len(), 3);
        }
    }

    #[test]
    fn cyclic_three_validates_from_raw() {
        let g = from_group(&Group::cyclic(3));
        let back = validate(&g.to_raw()).unwrap();
        assert_eq!((back.len(), back.units().len()), (3, 1));
    }

    #[test]
    fn inverse_law_violation() {
        // ℤ/3 with inv(1) = 1 although 1·1 = 2.
        let mut raw = from_group(&Group::cyclic(3)).to_raw();
        raw.inv.insert("1".into(), "1".into());
        raw.inv.insert("2".into(), "2".into());
        match validate(&raw) {
            Err(Error::AxiomViolation(v)) => {
                assert!(v.iter().any(|x| x.kind == "inverse-law" && x.witness == vec!["1".to_string()]))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_associative_table() {
        let t = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 2, 0]];
        assert!(matches!(
            Group::from_table(vec!["a".into(), "b".into(), "c".into()], t),
            Err(Error::NotAGroup(_))
        ));
    }

    #[test]
    fn unions_and_reductions() {
        let z2 = from_group(&Group::cyclic(2));
        let u = disjoint_union(&z2, &pair_groupoid(2));
        assert_eq!((u.len(), u.units().len()), (6, 3));
        assert_eq!(disjoint_union(&z2, &FiniteGroupoid::empty()), z2);
        let pp = disjoint_union(&pair_groupoid(2), &pair_groupoid(2));
        assert_eq!(pp.len(), 8);
        assert!(pp.units().iter().all(|&x| pp.source_fiber(x).len() == 2));
        let p3 = pair_groupoid(3);
        let red = reduction(&p3, &[p3.units()[0], p3.units()[1]]);
        assert!(find_isomorphism(&red, &pair_groupoid(2)).is_some());
        assert_eq!(reduction(&p3, &[]).len(), 0);
        assert_eq!(reduction(&p3, p3.units()), p3);
    }

    #[test]
    fn covers_and_invariant_sets() {
        let p3 = pair_groupoid(3);
        let fiber = p3.source_fiber(p3.units()[0]).to_vec();
        let cover = bisection_cover(&p3, &fiber);
        assert_eq!(cover.len(), 3);
        assert_eq!(bisection_cover(&p3, p3.units()).len(), 1);
        assert_eq!(invariant_sets(&pair_groupoid(2)).len(), 2);
        let u = disjoint_union(&from_group(&Group::cyclic(2)), &pair_groupoid(2));
        assert_eq!(invariant_sets(&u).len(), 4);
    }

    #[test]
    fn s3_is_nonabelian_group() {
        let s3 = Group::symmetric3();
        assert_eq!(s3.order(), 6);
        assert!((0..6).any(|a| (0..6).any(|b| s3.mul(a, b) != s3.mul(b, a))));
    }
}
