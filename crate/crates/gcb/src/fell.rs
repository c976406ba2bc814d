//! Fell absorption on ℓ²(𝒢), the diagonal embedding, the weight τ, the
//! modular flow and the tensor conditional expectation ℰ.
//!
//! Operators here act on the full ℓ²(𝒢) (basis δ_β in canonical order) and
//! tensor operators on H ⊗ ℓ²(𝒢) with basis index `i·|𝒢| + β`.

use crate::algebra::GroupoidFunction;
use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::measure::{modular_ratio, UnitWeight};

/// Default cap on |𝒢| for tensor constructions.
pub const TENSOR_CAP: usize = 32;

pub fn check_tensor_cap(g: &FiniteGroupoid, cap: usize) -> Result<()> {
    if g.len() > cap {
        return Err(Error::TooLarge { what: "groupoid for tensor operators".into(), size: g.len(), cap });
    }
    Ok(())
}

/// λ_γ on ℓ²(𝒢): δ_β ↦ δ_{γβ} when d(γ) = r(β), else 0.
pub fn lambda(g: &FiniteGroupoid, a: usize) -> CMat {
    let n = g.len();
    let mut m = linalg::zeros(n, n);
    for &b in g.range_fiber(g.src(a)) {
        m[(g.comp(a, b).expect("composable"), b)] = ONE;
    }
    m
}

/// λ(f) = Σ_γ f(γ) λ_γ.
pub fn lambda_of(g: &FiniteGroupoid, f: &GroupoidFunction) -> CMat {
    let n = g.len();
    let mut m = linalg::zeros(n, n);
    for a in 0..n {
        for &b in g.range_fiber(g.src(a)) {
            m[(g.comp(a, b).expect("composable"), b)] += f.values[a];
        }
    }
    m
}

/// A *-representation of 𝒢 by partial isometries.
#[derive(Debug, Clone)]
pub struct GroupoidRep {
    pub dim: usize,
    pub pi: Vec<CMat>,
}

impl GroupoidRep {
    /// One-dimensional: π(γ) = 1 on the isotropy group at `x0`, else 0.
    pub fn trivial_at(g: &FiniteGroupoid, x0: usize) -> GroupoidRep {
        let pi = (0..g.len())
            .map(|a| CMat::from_element(1, 1, if g.src(a) == x0 && g.rng(a) == x0 { ONE } else { ZERO }))
            .collect();
        GroupoidRep { dim: 1, pi }
    }

    pub fn regular(g: &FiniteGroupoid) -> GroupoidRep {
        GroupoidRep { dim: g.len(), pi: (0..g.len()).map(|a| lambda(g, a)).collect() }
    }

    /// π(γ) = e_{r(γ)} e_{d(γ)}† on ℂ^{units}.
    pub fn matrix_units(g: &FiniteGroupoid) -> GroupoidRep {
        let k = g.units().len();
        let pi = (0..g.len())
            .map(|a| {
                let mut m = linalg::zeros(k, k);
                m[(g.unit_pos(g.rng(a)).unwrap(), g.unit_pos(g.src(a)).unwrap())] = ONE;
                m
            })
            .collect();
        GroupoidRep { dim: k, pi }
    }

    /// Worst deviation among the partial-isometry, multiplicativity and
    /// adjoint laws.
    pub fn defect(&self, g: &FiniteGroupoid) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..g.len() {
            let p = &self.pi[a];
            worst = worst.max(linalg::partial_isometry_defect(p));
            worst = worst.max(linalg::max_abs_diff(&self.pi[g.inv(a)], &p.adjoint()));
            for b in 0..g.len() {
                let prod = p * &self.pi[b];
                let dev = match g.comp(a, b) {
                    Some(ab) => linalg::max_abs_diff(&prod, &self.pi[ab]),
                    None => linalg::max_abs(&prod),
                };
                worst = worst.max(dev);
            }
        }
        worst
    }

    pub fn validate(&self, g: &FiniteGroupoid, tol: f64) -> Result<()> {
        if self.pi.len() != g.len() || self.pi.iter().any(|p| p.shape() != (self.dim, self.dim)) {
            return Err(Error::DimensionMismatch("representation layout".into()));
        }
        let d = self.defect(g);
        if d > tol {
            return Err(Error::ValidationFailed { condition: "representation".into(), witness: format!("deviation {d:e}") });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FellReport {
    pub w: CMat,
    /// ‖W − WW†W‖_max.
    pub partial_isometry_defect: f64,
    /// max_γ ‖W(1⊗λ_γ)W† − π(γ)⊗λ_γ‖_max.
    pub absorption_defect: f64,
}

/// W_π = Σ_β π(β) ⊗ e_ββ, checked against the absorption identity.
pub fn fell_w(g: &FiniteGroupoid, rep: &GroupoidRep) -> Result<FellReport> {
    fell_w_with_cap(g, rep, TENSOR_CAP)
}

/// `fell_w` with the tensor dimension capped at `cap²`.
pub fn fell_w_with_cap(g: &FiniteGroupoid, rep: &GroupoidRep, cap: usize) -> Result<FellReport> {
    let n = g.len();
    let dim = rep.dim * n;
    if dim > cap * cap {
        return Err(Error::TooLarge { what: "tensor dimension".into(), size: dim, cap: cap * cap });
    }
    let mut w = linalg::zeros(dim, dim);
    for b in 0..n {
        let p = &rep.pi[b];
        for i in 0..rep.dim {
            for j in 0..rep.dim {
                w[(i * n + b, j * n + b)] = p[(i, j)];
            }
        }
    }
    let pid = linalg::max_abs_diff(&linalg::sparse_mul(&linalg::sparse_conj(&w, &linalg::identity(dim)), &w), &w);
    let one_h = linalg::identity(rep.dim);
    let mut absorption = 0.0f64;
    for a in 0..n {
        let lg = lambda(g, a);
        let lhs = linalg::sparse_conj(&w, &linalg::kron(&one_h, &lg));
        let rhs = linalg::kron(&rep.pi[a], &lg);
        let dev = linalg::max_abs_diff(&lhs, &rhs);
        absorption = absorption.max(dev);
        if dev > 1e-10 {
            return Err(Error::AbsorptionFailed { element: g.name(a).to_string(), deviation: dev });
        }
    }
    if pid > 1e-10 {
        return Err(Error::AbsorptionFailed { element: "W".into(), deviation: pid });
    }
    Ok(FellReport { w, partial_isometry_defect: pid, absorption_defect: absorption })
}

#[derive(Debug, Clone)]
pub struct InitialSubspace {
    /// Pairs (α, β) with r(α) = d(β).
    pub pairs: Vec<(usize, usize)>,
    /// ‖P − W_λ†W_λ‖_max for the projection P onto their span.
    pub projection_defect: f64,
    /// Whether every 1⊗λ_γ maps the span into itself.
    pub invariant: bool,
}

pub fn initial_subspace_basis(g: &FiniteGroupoid) -> Result<InitialSubspace> {
    initial_subspace_basis_with_cap(g, TENSOR_CAP)
}

pub fn initial_subspace_basis_with_cap(g: &FiniteGroupoid, cap: usize) -> Result<InitialSubspace> {
    check_tensor_cap(g, cap)?;
    let n = g.len();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if g.rng(a) == g.src(b) {
                pairs.push((a, b));
            }
        }
    }
    let mut p = linalg::zeros(n * n, n * n);
    let mut inside = vec![false; n * n];
    for &(a, b) in &pairs {
        p[(a * n + b, a * n + b)] = ONE;
        inside[a * n + b] = true;
    }
    let w = fell_w(g, &GroupoidRep::regular(g))?.w;
    let projection_defect = linalg::max_abs_diff(&p, &linalg::sparse_mul(&w.adjoint(), &w));
    let invariant = (0..n).all(|gam| {
        pairs.iter().all(|&(a, b)| match g.comp(gam, b) {
            Some(gb) => inside[a * n + gb],
            None => true,
        })
    });
    Ok(InitialSubspace { pairs, projection_defect, invariant })
}

/// π(f) = W_λ(1 ⊗ λ(f))W_λ†, with W_λ computed once.
#[derive(Debug, Clone)]
pub struct DiagEmbedding {
    pub w: CMat,
    n: usize,
}

impl DiagEmbedding {
    pub fn new(g: &FiniteGroupoid) -> Result<DiagEmbedding> {
        DiagEmbedding::with_cap(g, TENSOR_CAP)
    }

    pub fn with_cap(g: &FiniteGroupoid, cap: usize) -> Result<DiagEmbedding> {
        check_tensor_cap(g, cap)?;
        Ok(DiagEmbedding { w: fell_w_with_cap(g, &GroupoidRep::regular(g), cap)?.w, n: g.len() })
    }

    pub fn pi(&self, g: &FiniteGroupoid, f: &GroupoidFunction) -> CMat {
        linalg::sparse_conj(&self.w, &linalg::kron(&linalg::identity(self.n), &lambda_of(g, f)))
    }

    /// Least-squares coefficients of S against {π(δ_γ)}; the π(δ_γ) have
    /// disjoint supports, so the normal equations are diagonal.
    pub fn pi_inverse(&self, g: &FiniteGroupoid, s: &CMat) -> Result<GroupoidFunction> {
        let n = self.n;
        let mut f = GroupoidFunction::zeros(n);
        let mut recon = linalg::zeros(n * n, n * n);
        for a in 0..n {
            let mut num = ZERO;
            let mut den = 0.0;
            for &b in g.range_fiber(g.src(a)) {
                let ab = g.comp(a, b).unwrap();
                for &b2 in g.range_fiber(g.src(a)) {
                    let ab2 = g.comp(a, b2).unwrap();
                    num += s[(ab * n + ab2, b * n + b2)];
                    den += 1.0;
                }
            }
            f.values[a] = num / den;
            for &b in g.range_fiber(g.src(a)) {
                let ab = g.comp(a, b).unwrap();
                for &b2 in g.range_fiber(g.src(a)) {
                    recon[(ab * n + g.comp(a, b2).unwrap(), b * n + b2)] += f.values[a];
                }
            }
        }
        let res = linalg::max_abs_diff(&recon, s);
        if res > 1e-9 * (1.0 + linalg::max_abs(s)) {
            return Err(Error::NotInSpan(res));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub op: CMat,
    /// max_γ ‖π(δ_γ) − λ_γ⊗λ_γ‖_max.
    pub generator_defect: f64,
    pub rank: usize,
}

pub fn diag_embedding(g: &FiniteGroupoid, w: &UnitWeight, f: &GroupoidFunction) -> Result<EmbeddingReport> {
    diag_embedding_with_cap(g, w, f, TENSOR_CAP)
}

pub fn diag_embedding_with_cap(g: &FiniteGroupoid, w: &UnitWeight, f: &GroupoidFunction, cap: usize) -> Result<EmbeddingReport> {
    if !w.is_full_support(g) {
        return Err(Error::InvalidInput("weight must have full support".into()));
    }
    let emb = DiagEmbedding::with_cap(g, cap)?;
    let n = g.len();
    let mut generator_defect = 0.0f64;
    let mut vecs = linalg::zeros(n * n * n * n, n);
    for a in 0..n {
        let p = emb.pi(g, &GroupoidFunction::delta(g, a));
        let l = lambda(g, a);
        generator_defect = generator_defect.max(linalg::max_abs_diff(&p, &linalg::kron(&l, &l)));
        for (k, z) in p.iter().enumerate() {
            vecs[(k, a)] = *z;
        }
    }
    let rank = linalg::rank(&vecs, 1e-9);
    if rank != n {
        return Err(Error::InjectivityFailed { rank, expected: n });
    }
    Ok(EmbeddingReport { op: emb.pi(g, f), generator_defect, rank })
}

/// τ(T) = ⟨χ_X, Tχ_X⟩ in L²(𝒢, ν⁻¹) = Σ_x μ(x) Σ_y T[x][y].
pub fn weight_tau(g: &FiniteGroupoid, w: &UnitWeight, t: &CMat) -> C64 {
    let mut acc = ZERO;
    for &x in g.units() {
        for &y in g.units() {
            acc += t[(x, y)] * w.mu(g, x);
        }
    }
    acc
}

/// (τ⊗τ)(S) for S on ℓ²(𝒢)⊗ℓ²(𝒢).
pub fn weight_tau_tensor(g: &FiniteGroupoid, w: &UnitWeight, s: &CMat) -> C64 {
    let n = g.len();
    let mut acc = ZERO;
    for &x in g.units() {
        for &x2 in g.units() {
            for &y in g.units() {
                for &y2 in g.units() {
                    acc += s[(x * n + x2, y * n + y2)] * (w.mu(g, x) * w.mu(g, x2));
                }
            }
        }
    }
    acc
}

#[derive(Debug, Clone)]
pub struct ModularFlowReport {
    pub op: CMat,
    /// Whether σ_t(λ_γ) = λ_γ for every γ.
    pub generators_fixed: bool,
    /// max_γ ‖σ_t(λ_γ) − λ_γ‖_max.
    pub max_deviation: f64,
    /// max_γ ‖σ_t(λ_γ) − D(γ)^{it}λ_γ‖_max, zero up to rounding.
    pub phase_defect: f64,
}

/// The diagonal unitary D^{it}, with D(β) = μ(r(β))/μ(d(β)).
pub fn modular_unitary(g: &FiniteGroupoid, w: &UnitWeight, t: f64) -> Result<CMat> {
    if !w.is_full_support(g) {
        return Err(Error::InvalidInput("weight must have full support".into()));
    }
    let d = modular_ratio(g, w);
    let n = g.len();
    let mut u = linalg::zeros(n, n);
    for b in 0..n {
        let db = d.d[b].expect("full support");
        u[(b, b)] = C64::from_polar(1.0, t * db.ln());
    }
    Ok(u)
}

/// σ_t(T) = D^{it} T D^{-it}, with the generator check.
pub fn modular_flow(g: &FiniteGroupoid, w: &UnitWeight, t_op: &CMat, t: f64) -> Result<ModularFlowReport> {
    let u = modular_unitary(g, w, t)?;
    let d = modular_ratio(g, w);
    let flow = |m: &CMat| &u * m * u.adjoint();
    let mut max_deviation = 0.0f64;
    let mut phase_defect = 0.0f64;
    for a in 0..g.len() {
        let l = lambda(g, a);
        let s = flow(&l);
        max_deviation = max_deviation.max(linalg::max_abs_diff(&s, &l));
        let phase = C64::from_polar(1.0, t * d.d[a].expect("full support").ln());
        phase_defect = phase_defect.max(linalg::max_abs_diff(&s, &(&l * phase)));
    }
    Ok(ModularFlowReport { op: flow(t_op), generators_fixed: max_deviation <= 1e-10, max_deviation, phase_defect })
}

/// Coefficients c[α][β] of S = Σ c_{αβ} λ_α⊗λ_β. The λ_α⊗λ_β have disjoint
/// supports, so each coefficient is a Frobenius projection.
pub fn tensor_coefficients(g: &FiniteGroupoid, s: &CMat) -> Result<CMat> {
    let n = g.len();
    let mut coef = linalg::zeros(n, n);
    let mut recon = linalg::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            let (fa, fb) = (g.range_fiber(g.src(a)), g.range_fiber(g.src(b)));
            let mut num = ZERO;
            for &p in fa {
                for &q in fb {
                    num += s[(g.comp(a, p).unwrap() * n + g.comp(b, q).unwrap(), p * n + q)];
                }
            }
            let k = num / (fa.len() * fb.len()) as f64;
            coef[(a, b)] = k;
            for &p in fa {
                for &q in fb {
                    recon[(g.comp(a, p).unwrap() * n + g.comp(b, q).unwrap(), p * n + q)] += k;
                }
            }
        }
    }
    let res = linalg::max_abs_diff(&recon, s);
    if res > 1e-9 * (1.0 + linalg::max_abs(s)) {
        return Err(Error::NotInSpan(res));
    }
    Ok(coef)
}

/// Σ c_{αβ} λ_α⊗λ_β.
pub fn tensor_from_coefficients(g: &FiniteGroupoid, coef: &CMat) -> CMat {
    let n = g.len();
    let mut s = linalg::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            let k = coef[(a, b)];
            if k == ZERO {
                continue;
            }
            for &p in g.range_fiber(g.src(a)) {
                for &q in g.range_fiber(g.src(b)) {
                    s[(g.comp(a, p).unwrap() * n + g.comp(b, q).unwrap(), p * n + q)] += k;
                }
            }
        }
    }
    s
}

/// ℰ on coefficients: keeps the diagonal α = β.
pub fn expectation_coefficients(coef: &CMat) -> CMat {
    let n = coef.nrows();
    CMat::from_fn(n, n, |a, b| if a == b { coef[(a, a)] } else { ZERO })
}

#[derive(Debug, Clone)]
pub struct TensorExpectationReport {
    pub op: CMat,
    /// ‖ℰ(ℰ(S)) − ℰ(S)‖_max.
    pub idempotent_defect: f64,
    /// min eigenvalue of ℰ(S†S).
    pub positivity_min_eig: f64,
    /// max over α, β of |(τ⊗τ)(ℰ(λ_α⊗λ_β)) − (τ⊗τ)(λ_α⊗λ_β)|.
    pub weight_defect: f64,
    /// The first (α, β) attaining `weight_defect`, when nonzero.
    pub weight_counterexample: Option<(usize, usize)>,
    /// max over x = λ_α⊗λ_β and y, z ∈ {π(δ_γ)} of
    /// |(τ⊗τ)(z†ℰ(x)y) − (τ⊗τ)(z†xy)|.
    pub sandwich_defect: f64,
    /// The same weight identity on the corner π(1)(·)π(1).
    pub corner_defect: f64,
}

/// ℰ applied to S, with the expectation and weight identities checked.
pub fn tensor_expectation(g: &FiniteGroupoid, w: &UnitWeight, s: &CMat) -> Result<TensorExpectationReport> {
    check_tensor_cap(g, TENSOR_CAP)?;
    let coef = tensor_coefficients(g, s)?;
    let e = expectation_coefficients(&coef);
    let op = tensor_from_coefficients(g, &e);
    let idempotent_defect = linalg::max_abs_diff(&tensor_from_coefficients(g, &expectation_coefficients(&e)), &op);
    let sts = s.adjoint() * s;
    let positivity_min_eig = linalg::min_eigenvalue(&tensor_from_coefficients(
        g,
        &expectation_coefficients(&tensor_coefficients(g, &sts)?),
    ));
    let check = weight_identities(g, w);
    Ok(TensorExpectationReport {
        op,
        idempotent_defect,
        positivity_min_eig,
        weight_defect: check.full,
        weight_counterexample: check.counterexample,
        sandwich_defect: check.sandwich,
        corner_defect: check.corner,
    })
}

#[derive(Debug, Clone)]
pub struct WeightIdentities {
    pub full: f64,
    pub counterexample: Option<(usize, usize)>,
    pub sandwich: f64,
    pub corner: f64,
}

/// The (τ⊗τ)∘ℰ = τ⊗τ identity in three forms, evaluated symbolically with
/// λ_αλ_β = λ_{αβ} and τ(λ_ε) = μ(ε) for units ε, 0 otherwise.
pub fn weight_identities(g: &FiniteGroupoid, w: &UnitWeight) -> WeightIdentities {
    let n = g.len();
    let tau = |a: usize| if g.is_unit(a) { w.mu(g, a) } else { 0.0 };
    let tt = |a: usize, b: usize| tau(a) * tau(b);
    let mut full = 0.0f64;
    let mut counterexample = None;
    let mut corner = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let lhs = if a == b { tt(a, a) } else { 0.0 };
            let dev = (lhs - tt(a, b)).abs();
            if dev > full + 1e-15 && counterexample.is_none() && dev > 1e-10 {
                counterexample = Some((a, b));
            }
            full = full.max(dev);
            // π(1) = Σ_x λ_x⊗λ_x; the corner keeps λ_α⊗λ_β when r(α) = r(β)
            // and d(α) = d(β), and is zero otherwise.
            if g.rng(a) == g.rng(b) && g.src(a) == g.src(b) {
                corner = corner.max(dev);
            }
        }
    }
    // z†ℰ(x)y vs z†xy with x = λ_α⊗λ_β, y = λ_γ⊗λ_γ, z = λ_ζ⊗λ_ζ.
    let mut sandwich = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for gam in 0..n {
                for zeta in 0..n {
                    let zi = g.inv(zeta);
                    let leg = |m: usize| g.comp(zi, m).and_then(|t| g.comp(t, gam));
                    let rhs = match (leg(a), leg(b)) {
                        (Some(p), Some(q)) => tt(p, q),
                        _ => 0.0,
                    };
                    let lhs = if a == b {
                        match leg(a) {
                            Some(p) => tt(p, p),
                            None => 0.0,
                        }
                    } else {
                        0.0
                    };
                    sandwich = sandwich.max((lhs - rhs).abs());
                }
            }
        }
    }
    WeightIdentities { full, counterexample, sandwich, corner }
}

/// S = π⁻¹∘ℰ∘(id⊗T)∘π on δ_γ, for T given by its columns T(δ_γ).
pub fn compression(g: &FiniteGroupoid, emb: &DiagEmbedding, t_dense: &CMat) -> Result<Vec<GroupoidFunction>> {
    let n = g.len();
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        // (id⊗T)(λ_γ⊗λ_γ) = Σ_β T(δ_γ)(β) λ_γ⊗λ_β.
        let mut coef = linalg::zeros(n, n);
        for b in 0..n {
            coef[(a, b)] = t_dense[(b, a)];
        }
        let e = tensor_from_coefficients(g, &expectation_coefficients(&coef));
        out.push(emb.pi_inverse(g, &e)?);
    }
    Ok(out)
}
