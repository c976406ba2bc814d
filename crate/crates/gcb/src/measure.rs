//! Probability weights on units and the measures they induce.

use crate::error::{Error, Result};
use crate::groupoid::{is_invariant, FiniteGroupoid};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

const SUM_TOL: f64 = 1e-12;

/// A weight value as supplied: exact when given as a rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Exact(Rational),
    Float(f64),
}

impl Weight {
    pub fn value(&self) -> f64 {
        match self {
            Weight::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Weight::Float(x) => *x,
        }
    }

    /// Parse `"p/q"` or a decimal string.
    pub fn parse(s: &str) -> Result<Weight> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| Error::InvalidInput(format!("bad weight {s}")))?;
            let q: i128 = q.trim().parse().map_err(|_| Error::InvalidInput(format!("bad weight {s}")))?;
            if q == 0 {
                return Err(Error::InvalidInput(format!("zero denominator in {s}")));
            }
            return Ok(Weight::Exact(Rational::new(p, q)));
        }
        if let Ok(p) = s.parse::<i128>() {
            return Ok(Weight::Exact(Rational::from_integer(p)));
        }
        s.parse::<f64>()
            .map(Weight::Float)
            .map_err(|_| Error::InvalidInput(format!("bad weight {s}")))
    }
}

/// Quasi-invariant probability weight μ on the units.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitWeight {
    /// Indexed by unit position (see `FiniteGroupoid::unit_pos`).
    mu: Vec<f64>,
    exact: Option<Vec<Rational>>,
    support: Vec<usize>,
    in_support: Vec<bool>,
}

impl UnitWeight {
    /// `values[k]` is the weight of `g.units()[k]`.
    pub fn new(g: &FiniteGroupoid, values: &[Weight]) -> Result<UnitWeight> {
        if values.len() != g.units().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} units",
                values.len(),
                g.units().len()
            )));
        }
        let mu: Vec<f64> = values.iter().map(Weight::value).collect();
        if let Some(k) = mu.iter().position(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput(format!("negative or non-finite weight at {}", g.name(g.units()[k]))));
        }
        let exact: Option<Vec<Rational>> = values
            .iter()
            .map(|w| match w {
                Weight::Exact(r) => Some(*r),
                Weight::Float(_) => None,
            })
            .collect();
        match &exact {
            Some(ex) => {
                let total: Rational = ex.iter().copied().fold(Rational::zero(), |a, b| a + b);
                if total != Rational::from_integer(1) {
                    return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
                }
            }
            None => {
                let total: f64 = mu.iter().sum();
                if (total - 1.0).abs() > SUM_TOL {
                    return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
                }
            }
        }
        let support: Vec<usize> = g.units().iter().zip(&mu).filter(|(_, &m)| m > 0.0).map(|(&u, _)| u).collect();
        if !is_invariant(g, &support) {
            return Err(Error::NotQuasiInvariant("support of mu is not an invariant set".into()));
        }
        let mut in_support = vec![false; g.len()];
        for &u in &support {
            in_support[u] = true;
        }
        Ok(UnitWeight { mu, exact, support, in_support })
    }

    pub fn from_floats(g: &FiniteGroupoid, values: &[f64]) -> Result<UnitWeight> {
        UnitWeight::new(g, &values.iter().map(|&v| Weight::Float(v)).collect::<Vec<_>>())
    }

    /// μ(x) for a unit element x.
    pub fn mu(&self, g: &FiniteGroupoid, x: usize) -> f64 {
        self.mu[g.unit_pos(x).expect("unit")]
    }

    pub fn mu_exact(&self, g: &FiniteGroupoid, x: usize) -> Option<Rational> {
        self.exact.as_ref().map(|e| e[g.unit_pos(x).expect("unit")])
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Units with positive weight, in canonical order.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Whether the unit or element lies over the support (d(γ) ∈ supp μ).
    pub fn covers(&self, g: &FiniteGroupoid, a: usize) -> bool {
        self.in_support[g.src(a)]
    }

    pub fn is_full_support(&self, g: &FiniteGroupoid) -> bool {
        self.support.len() == g.units().len()
    }
}

pub fn full_support_uniform(g: &FiniteGroupoid) -> Result<UnitWeight> {
    let n = g.units().len();
    if n == 0 {
        return Err(Error::EmptyGroupoid);
    }
    UnitWeight::new(g, &vec![Weight::Exact(Rational::new(1, n as i128)); n])
}

/// ν(A) = Σ_x |A ∩ 𝒢^x| μ(x).
pub fn nu_mass(g: &FiniteGroupoid, w: &UnitWeight, set: &[usize]) -> f64 {
    set.iter().map(|&a| w.mu(g, g.rng(a))).sum()
}

/// ν⁻¹(A) = Σ_x |A ∩ 𝒢_x| μ(x).
pub fn nu_inv_mass(g: &FiniteGroupoid, w: &UnitWeight, set: &[usize]) -> f64 {
    set.iter().map(|&a| w.mu(g, g.src(a))).sum()
}

/// D(γ) = μ(r(γ)) / μ(d(γ)) on 𝒢|_supp μ.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularRatio {
    pub d: Vec<Option<f64>>,
    pub exact: Option<Vec<Option<Rational>>>,
}

impl ModularRatio {
    /// max |D(γ)D(β) − D(γβ)| and max |D(γ⁻¹)D(γ) − 1| over the support;
    /// exactly zero for rational weights when the identities hold.
    pub fn cocycle_defect(&self, g: &FiniteGroupoid) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..g.len() {
            let Some(da) = self.d[a] else { continue };
            worst = worst.max((da * self.d[g.inv(a)].unwrap_or(f64::NAN) - 1.0).abs());
            for &b in g.range_fiber(g.src(a)) {
                let ab = g.comp(a, b).expect("composable");
                if let (Some(db), Some(dab)) = (self.d[b], self.d[ab]) {
                    worst = worst.max((da * db - dab).abs());
                }
            }
        }
        worst
    }

    pub fn exact_cocycle_holds(&self, g: &FiniteGroupoid) -> Option<bool> {
        let ex = self.exact.as_ref()?;
        Some((0..g.len()).all(|a| {
            let Some(da) = ex[a] else { return true };
            ex[g.inv(a)].map_or(false, |di| di * da == Rational::from_integer(1))
                && g.range_fiber(g.src(a)).iter().all(|&b| {
                    let ab = g.comp(a, b).expect("composable");
                    match (ex[b], ex[ab]) {
                        (Some(db), Some(dab)) => da * db == dab,
                        _ => true,
                    }
                })
        }))
    }
}

pub fn modular_ratio(g: &FiniteGroupoid, w: &UnitWeight) -> ModularRatio {
    let d = (0..g.len())
        .map(|a| w.covers(g, a).then(|| w.mu(g, g.rng(a)) / w.mu(g, g.src(a))))
        .collect();
    let exact = w.is_exact().then(|| {
        (0..g.len())
            .map(|a| {
                w.covers(g, a).then(|| w.mu_exact(g, g.rng(a)).unwrap() / w.mu_exact(g, g.src(a)).unwrap())
            })
            .collect()
    });
    ModularRatio { d, exact }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{disjoint_union, from_group, pair_groupoid, Group};

    #[test]
    fn masses() {
        let g = pair_groupoid(2);
        let w = full_support_uniform(&g).unwrap();
        assert!((nu_mass(&g, &w, g.units()) - 1.0).abs() < 1e-15);
        let all: Vec<usize> = (0..g.len()).collect();
        assert!((nu_mass(&g, &w, &all) - 2.0).abs() < 1e-15);
        assert_eq!(nu_mass(&g, &w, &[]), 0.0);
    }

    #[test]
    fn ratio_on_pair_two() {
        let g = pair_groupoid(2);
        let w = UnitWeight::new(&g, &[Weight::parse("1/3").unwrap(), Weight::parse("2/3").unwrap()]).unwrap();
        let d = modular_ratio(&g, &w);
        // (0,1) has range (0,0) and source (1,1).
        let a = g.index_of("(0,1)").unwrap();
        assert_eq!(d.exact.as_ref().unwrap()[a], Some(Rational::new(1, 2)));
        assert_eq!(d.exact_cocycle_holds(&g), Some(true));
    }

    #[test]
    fn rejects_non_invariant_support() {
        let g = pair_groupoid(2);
        assert!(matches!(UnitWeight::from_floats(&g, &[1.0, 0.0]), Err(Error::NotQuasiInvariant(_))));
        let u = disjoint_union(&from_group(&Group::cyclic(2)), &pair_groupoid(2));
        assert!(UnitWeight::from_floats(&u, &[1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn uniform_weights() {
        assert!(matches!(
            full_support_uniform(&crate::groupoid::FiniteGroupoid::empty()),
            Err(Error::EmptyGroupoid)
        ));
        let w = full_support_uniform(&pair_groupoid(3)).unwrap();
        assert_eq!(w.mu_exact(&pair_groupoid(3), 0), Some(Rational::new(1, 3)));
    }
}
