//! Schur multiplier norms of complex matrices.
//!
//! The norm of the Schur multiplier `X ↦ M ∘ X` equals
//! `min max_i ‖a_i‖ · max_j ‖b_j‖` over factorizations `M_ij = ⟨a_i, b_j⟩`,
//! which is the feasibility SDP `[[P, M], [M†, Q]] ⪰ 0`, `diag ≤ t`.
//!
//! Upper bounds always come with an explicit factorization. Lower bounds come
//! from the dual `max_{p,q} ‖D_p^{1/2} M D_q^{1/2}‖_tr` over probability
//! vectors, so a returned value is certified to lie within `tol` of the norm.

use crate::algebra::BlockOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64, ZERO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct SchurProblem {
    pub m: CMat,
    pub tol: f64,
}

impl SchurProblem {
    pub fn new(m: CMat, tol: f64) -> Self {
        SchurProblem { m, tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurCertificate {
    /// Left factor vectors, one per row.
    pub a: Vec<Vec<C64>>,
    /// Right factor vectors, one per column.
    pub b: Vec<Vec<C64>>,
    /// max‖a_i‖ · max‖b_j‖ for the vectors above.
    pub value: f64,
    /// max |⟨a_i, b_j⟩ − M_ij|.
    pub residual: f64,
    /// Certified lower bound from the dual.
    pub lower: f64,
}

#[derive(Debug, Clone)]
pub struct SchurOptions {
    pub seed: u64,
    pub max_iter: usize,
    pub stall: f64,
}

impl Default for SchurOptions {
    fn default() -> Self {
        SchurOptions { seed: 0, max_iter: 50_000, stall: 1e-12 }
    }
}

/// Projection onto the PSD cone in Frobenius norm.
pub fn psd_project(a: &CMat) -> Result<CMat> {
    let scale = linalg::max_abs(a).max(1.0);
    let defect = linalg::hermitian_defect(a);
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(linalg::clip_psd(a))
}

pub fn schur_norm(p: &SchurProblem) -> Result<(f64, SchurCertificate)> {
    schur_norm_with(p, &SchurOptions::default())
}

pub fn schur_norm_with(p: &SchurProblem, opts: &SchurOptions) -> Result<(f64, SchurCertificate)> {
    if !(p.tol >= 1e-9) {
        return Err(Error::InvalidInput(format!("tol must be at least 1e-9, got {}", p.tol)));
    }
    if p.m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let (rows, cols) = p.m.shape();
    let keep_r: Vec<usize> = (0..rows).filter(|&i| (0..cols).any(|j| p.m[(i, j)] != ZERO)).collect();
    let keep_c: Vec<usize> = (0..cols).filter(|&j| (0..rows).any(|i| p.m[(i, j)] != ZERO)).collect();
    if keep_r.is_empty() {
        let cert = SchurCertificate {
            a: vec![vec![ZERO]; rows],
            b: vec![vec![ZERO]; cols],
            value: 0.0,
            residual: 0.0,
            lower: 0.0,
        };
        return Ok((0.0, cert));
    }
    let m = CMat::from_fn(keep_r.len(), keep_c.len(), |i, j| p.m[(keep_r[i], keep_c[j])]);

    let mut lo_cert = linalg::max_abs(&m);
    let fro = linalg::frobenius(&m);
    let bracket_hi = (linalg::spectral_norm(&m) * (m.nrows().min(m.ncols()) as f64).sqrt()).min(fro);

    let mut best = svd_factorization(&m);
    let dual = dual_ascent(&m, p.tol * 0.25, 300);
    lo_cert = lo_cert.max(dual.lower);
    if dual.upper.value < best.value {
        best = dual.upper;
    }

    if best.value - lo_cert > p.tol {
        let b = barrier_solve(&m, p.tol);
        lo_cert = lo_cert.max(b.lower);
        if let Some(f) = b.upper {
            if f.value < best.value {
                best = f;
            }
        }
    }

    // Fallback: bisection on t, each feasibility test running Dykstra's
    // projections followed by an exact repair of the PSD iterate.
    let mut lo = lo_cert;
    let mut hi = best.value.min(bracket_hi.max(best.value));
    let mut iterations = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while hi - lo_cert > p.tol && hi - lo > p.tol * 0.5 && iterations < opts.max_iter {
        let t = 0.5 * (lo + hi);
        let budget = (opts.max_iter - iterations).min(opts.max_iter / 4).max(1);
        let (found, used) = dykstra_feasible(&m, t, budget, opts.stall, p.tol, &mut rng);
        iterations += used;
        match found {
            Some(f) if f.value <= t + p.tol * 0.25 => {
                hi = f.value.min(hi);
                if f.value < best.value {
                    best = f;
                }
            }
            _ => lo = t,
        }
    }
    if best.value - lo_cert > p.tol {
        return Err(Error::NoConvergence { iterations, gap: best.value - lo_cert });
    }
    Ok((best.value, expand_certificate(&p.m, &keep_r, &keep_c, &best, lo_cert)))
}

#[derive(Debug, Clone)]
struct Factorization {
    x: CMat,
    y: CMat,
    value: f64,
}

fn row_norms(a: &CMat) -> Vec<f64> {
    (0..a.nrows()).map(|i| a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Make `x y† = m` exact up to rounding by appending an SVD of the residual.
fn repaired(m: &CMat, x: CMat, y: CMat) -> Factorization {
    let e = m - &x * y.adjoint();
    let (x, y) = if linalg::max_abs(&e) > 0.0 {
        let (ue, ve) = split_svd(&e);
        let mut xa = linalg::zeros(x.nrows(), x.ncols() + ue.ncols());
        let mut ya = linalg::zeros(y.nrows(), y.ncols() + ve.ncols());
        xa.columns_mut(0, x.ncols()).copy_from(&x);
        xa.columns_mut(x.ncols(), ue.ncols()).copy_from(&ue);
        ya.columns_mut(0, y.ncols()).copy_from(&y);
        ya.columns_mut(y.ncols(), ve.ncols()).copy_from(&ve);
        (xa, ya)
    } else {
        (x, y)
    };
    let value = max_of(&row_norms(&x)) * max_of(&row_norms(&y));
    Factorization { x, y, value }
}

/// `a = U Σ^{1/2}`, `b = V Σ^{1/2}` so that `a b† = m`.
fn split_svd(m: &CMat) -> (CMat, CMat) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u");
    let vt = svd.v_t.expect("v_t");
    let k = svd.singular_values.len();
    let mut a = linalg::zeros(m.nrows(), k);
    let mut b = linalg::zeros(m.ncols(), k);
    for l in 0..k {
        let s = svd.singular_values[l].max(0.0).sqrt();
        for i in 0..m.nrows() {
            a[(i, l)] = u[(i, l)] * s;
        }
        for j in 0..m.ncols() {
            b[(j, l)] = vt[(l, j)].conj() * s;
        }
    }
    (a, b)
}

fn svd_factorization(m: &CMat) -> Factorization {
    let (a, b) = split_svd(m);
    repaired(m, a, b)
}

struct Dual {
    lower: f64,
    upper: Factorization,
}

/// Fixed-point ascent on the dual `‖D_p^{1/2} M D_q^{1/2}‖_tr`.
///
/// Every iterate gives a lower bound, and the scaled SVD of the iterate gives
/// the primal factorization `X = D_p^{-1/2} U Σ^{1/2}`, `Y = D_q^{-1/2} V Σ^{1/2}`.
fn dual_ascent(m: &CMat, gap: f64, iters: usize) -> Dual {
    let (rows, cols) = m.shape();
    let mut p = vec![1.0 / rows as f64; rows];
    let mut q = vec![1.0 / cols as f64; cols];
    let mut lower = 0.0f64;
    let mut best: Option<Factorization> = None;
    for _ in 0..iters {
        let n = CMat::from_fn(rows, cols, |i, j| m[(i, j)] * (p[i] * q[j]).sqrt());
        let svd = n.clone().svd(true, true);
        let u = svd.u.expect("u");
        let vt = svd.v_t.expect("v_t");
        let s = &svd.singular_values;
        let tr: f64 = s.iter().sum();
        lower = lower.max(tr);
        let mut du = vec![0.0; rows];
        let mut dv = vec![0.0; cols];
        for l in 0..s.len() {
            for i in 0..rows {
                du[i] += u[(i, l)].norm_sqr() * s[l];
            }
            for j in 0..cols {
                dv[j] += vt[(l, j)].norm_sqr() * s[l];
            }
        }
        let x = CMat::from_fn(rows, s.len(), |i, l| u[(i, l)] * (s[l].sqrt() / p[i].sqrt()));
        let y = CMat::from_fn(cols, s.len(), |j, l| vt[(l, j)].conj() * (s[l].sqrt() / q[j].sqrt()));
        let f = repaired(m, x, y);
        if best.as_ref().map_or(true, |b| f.value < b.value) {
            best = Some(f);
        }
        if best.as_ref().unwrap().value - lower <= gap || tr <= 0.0 {
            break;
        }
        let floor = 1e-300;
        for i in 0..rows {
            p[i] = (du[i] / tr).max(floor);
        }
        for j in 0..cols {
            q[j] = (dv[j] / tr).max(floor);
        }
    }
    Dual { lower, upper: best.unwrap_or_else(|| svd_factorization(m)) }
}

struct BarrierResult {
    lower: f64,
    upper: Option<Factorization>,
}

#[derive(Clone, Copy)]
enum Param {
    T,
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

/// Log-barrier path following for `min t` s.t. `Z = [[P, M], [M†, Q]] ≻ 0`,
/// `Z_ii < t`, with Newton centering over the free Hermitian blocks.
///
/// On the central path `μ Z⁻¹` is dual feasible with diagonal `μ / (t − Z_ii)`;
/// normalizing that diagonal gives the weights `p`, `q` of the trace-norm
/// lower bound, and a Cholesky factor of `Z` gives the upper bound.
fn barrier_solve(m_in: &CMat, tol: f64) -> BarrierResult {
    let s0 = linalg::max_abs(m_in);
    let m = m_in.unscale(s0);
    let (rows, cols) = m.shape();
    let n = rows + cols;
    let mut params = vec![Param::T];
    for (off, size) in [(0, rows), (rows, cols)] {
        for i in off..off + size {
            params.push(Param::Diag(i));
        }
        for i in off..off + size {
            for j in i + 1..off + size {
                params.push(Param::Re(i, j));
                params.push(Param::Im(i, j));
            }
        }
    }
    let d = params.len();
    let start = linalg::spectral_norm(&m) + 1.0;
    let mut z = linalg::zeros(n, n);
    for i in 0..n {
        z[(i, i)] = c(start, 0.0);
    }
    z.view_mut((0, rows), (rows, cols)).copy_from(&m);
    z.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    let mut t = start + 1.0;

    let entries = |p: Param| -> Vec<(usize, usize, C64)> {
        match p {
            Param::T => vec![],
            Param::Diag(i) => vec![(i, i, c(1.0, 0.0))],
            Param::Re(i, j) => vec![(i, j, c(1.0, 0.0)), (j, i, c(1.0, 0.0))],
            Param::Im(i, j) => vec![(i, j, c(0.0, 1.0)), (j, i, c(0.0, -1.0))],
        }
    };
    let ents: Vec<Vec<(usize, usize, C64)>> = params.iter().map(|&p| entries(p)).collect();
    // f(z, t) = t/μ − log det Z − Σ log(t − Z_ii); None outside the domain.
    let value = |z: &CMat, t: f64, mu: f64| -> Option<f64> {
        let mut acc = t / mu;
        for i in 0..n {
            let s = t - z[(i, i)].re;
            if s <= 0.0 {
                return None;
            }
            acc -= s.ln();
        }
        let ch = nalgebra::Cholesky::new(z.clone())?;
        let l = ch.l();
        for i in 0..n {
            acc -= 2.0 * l[(i, i)].re.ln();
        }
        Some(acc)
    };
    let apply = |z: &CMat, t: f64, dx: &nalgebra::DVector<f64>, a: f64| -> (CMat, f64) {
        let mut z2 = z.clone();
        let mut t2 = t;
        for (k, &p) in params.iter().enumerate() {
            let v = dx[k] * a;
            match p {
                Param::T => t2 += v,
                Param::Diag(i) => z2[(i, i)] += c(v, 0.0),
                Param::Re(i, j) => {
                    z2[(i, j)] += c(v, 0.0);
                    z2[(j, i)] += c(v, 0.0);
                }
                Param::Im(i, j) => {
                    z2[(i, j)] += c(0.0, v);
                    z2[(j, i)] += c(0.0, -v);
                }
            }
        }
        (z2, t2)
    };

    let tol_s = tol / s0;
    let mut mu = 1.0;
    let mut lower = 0.0f64;
    let mut best: Option<Factorization> = None;
    for _outer in 0..80 {
        for _newton in 0..60 {
            let Some(w) = z.clone().try_inverse() else { break };
            let slack: Vec<f64> = (0..n).map(|i| t - z[(i, i)].re).collect();
            let mut g = nalgebra::DVector::<f64>::zeros(d);
            let mut h = nalgebra::DMatrix::<f64>::zeros(d, d);
            for a in 0..d {
                let mut ga = 0.0;
                for &(i, j, al) in &ents[a] {
                    ga -= (al * w[(j, i)]).re;
                }
                g[a] = ga;
                for b in a..d {
                    let mut hab = 0.0;
                    for &(i, j, al) in &ents[a] {
                        for &(k, l, be) in &ents[b] {
                            hab += (al * be * w[(l, i)] * w[(j, k)]).re;
                        }
                    }
                    h[(a, b)] = hab;
                    h[(b, a)] = hab;
                }
            }
            g[0] += 1.0 / mu;
            for (a, &p) in params.iter().enumerate() {
                match p {
                    Param::T => {
                        for s in &slack {
                            g[a] -= 1.0 / s;
                            h[(a, a)] += 1.0 / (s * s);
                        }
                    }
                    Param::Diag(i) => {
                        let s = slack[i];
                        g[a] += 1.0 / s;
                        h[(a, a)] += 1.0 / (s * s);
                        h[(a, 0)] -= 1.0 / (s * s);
                        h[(0, a)] -= 1.0 / (s * s);
                    }
                    _ => {}
                }
            }
            let dx = match nalgebra::Cholesky::new(h.clone()) {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    let reg = h + nalgebra::DMatrix::<f64>::identity(d, d) * 1e-12;
                    match reg.lu().solve(&(-&g)) {
                        Some(v) => v,
                        None => break,
                    }
                }
            };
            let dec = -g.dot(&dx);
            if !(dec > 1e-18) {
                break;
            }
            let f0 = value(&z, t, mu).unwrap_or(f64::INFINITY);
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-12 {
                let (z2, t2) = apply(&z, t, &dx, step);
                if let Some(f1) = value(&z2, t2, mu) {
                    if f1 <= f0 - 0.25 * step * dec {
                        z = z2;
                        t = t2;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved || dec < 1e-12 {
                break;
            }
        }
        // Dual weights from the central point, and the primal factor.
        let a: Vec<f64> = (0..n).map(|i| mu / (t - z[(i, i)].re)).collect();
        let sa: f64 = a[..rows].iter().sum();
        let sb: f64 = a[rows..].iter().sum();
        if sa > 0.0 && sb > 0.0 {
            let nm = CMat::from_fn(rows, cols, |i, j| m[(i, j)] * (a[i] / sa * a[rows + j] / sb).sqrt());
            lower = lower.max(linalg::trace_norm(&nm));
        }
        if let Some(ch) = nalgebra::Cholesky::new(z.clone()) {
            let l = ch.l();
            let f = repaired(&m, l.rows(0, rows).into_owned(), l.rows(rows, cols).into_owned());
            if best.as_ref().map_or(true, |b| f.value < b.value) {
                best = Some(f);
            }
        }
        let up = best.as_ref().map_or(f64::INFINITY, |b| b.value);
        if up - lower <= tol_s * 0.25 || mu < 1e-15 {
            break;
        }
        mu *= 0.1;
    }
    let root = s0.sqrt();
    BarrierResult {
        lower: lower * s0,
        upper: best.map(|f| Factorization { x: f.x * c(root, 0.0), y: f.y * c(root, 0.0), value: f.value * s0 }),
    }
}

/// Dykstra's alternating projections between the PSD cone and the affine set
/// `{Z : Z_12 = M, Re Z_ii ≤ t}`. Returns a repaired factorization when one
/// with value near `t` was found, and the number of iterations used.
fn dykstra_feasible(
    m: &CMat,
    t: f64,
    budget: usize,
    stall: f64,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> (Option<Factorization>, usize) {
    let (rows, cols) = m.shape();
    let n = rows + cols;
    let mut x = linalg::zeros(n, n);
    for i in 0..n {
        x[(i, i)] = c(t, 0.0);
    }
    x.view_mut((0, rows), (rows, cols)).copy_from(m);
    x.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    // Tiny seeded Hermitian perturbation of the start point.
    for i in 0..n {
        for j in i..n {
            let z = c(rng.gen_range(-1.0..1.0), if i == j { 0.0 } else { rng.gen_range(-1.0..1.0) }) * 1e-9;
            x[(i, j)] += z;
            if i != j {
                x[(j, i)] += z.conj();
            }
        }
    }
    let mut pc = linalg::zeros(n, n);
    let mut qc = linalg::zeros(n, n);
    let mut best: Option<Factorization> = None;
    let mut used = 0;
    while used < budget {
        used += 1;
        let y = linalg::clip_psd(&(&x + &pc));
        pc = &x + &pc - &y;
        let mut xn = &y + &qc;
        project_affine(&mut xn, m, t);
        qc = &y + &qc - &xn;
        let step = linalg::frobenius(&(&xn - &x));
        x = xn;
        if used % 25 == 0 || step < stall {
            let f = factor_psd_repaired(&y, m);
            let good = f.value <= t + tol * 0.25;
            if best.as_ref().map_or(true, |b| f.value < b.value) {
                best = Some(f);
            }
            if good || step < stall {
                break;
            }
        }
    }
    (best, used)
}

fn project_affine(z: &mut CMat, m: &CMat, t: f64) {
    let (rows, cols) = m.shape();
    z.view_mut((0, rows), (rows, cols)).copy_from(m);
    z.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    for i in 0..rows + cols {
        z[(i, i)] = c(z[(i, i)].re.min(t), 0.0);
    }
}

/// Repair a PSD point so its off-diagonal block is exactly M, then factor it:
/// `Z' = Z + [[sI, E], [E†, sI]]` with `E = M − Z_12` and `s = ‖E‖`.
fn factor_psd_repaired(z: &CMat, m: &CMat) -> Factorization {
    let (rows, cols) = m.shape();
    let n = rows + cols;
    let e = m - z.view((0, rows), (rows, cols));
    let s = linalg::spectral_norm(&e);
    let mut zr = z.clone();
    for i in 0..n {
        zr[(i, i)] += c(s, 0.0);
    }
    zr.view_mut((0, rows), (rows, cols)).copy_from(m);
    zr.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    let (vals, vecs) = linalg::hermitian_eig(&zr);
    let v = CMat::from_fn(n, n, |i, k| vecs[(i, k)] * vals[k].max(0.0).sqrt());
    // Z' = V V†, so M_ij = Σ_k V_ik conj(V_{rows+j,k}).
    let x = v.rows(0, rows).into_owned();
    let y = v.rows(rows, cols).into_owned();
    repaired(m, x, y)
}

fn expand_certificate(
    full: &CMat,
    keep_r: &[usize],
    keep_c: &[usize],
    f: &Factorization,
    lower: f64,
) -> SchurCertificate {
    // Balance so that max‖a_i‖ = max‖b_j‖.
    let nx = max_of(&row_norms(&f.x));
    let ny = max_of(&row_norms(&f.y));
    let scale = if nx > 0.0 && ny > 0.0 { (ny / nx).sqrt() } else { 1.0 };
    let dim = f.x.ncols();
    let mut a = vec![vec![ZERO; dim]; full.nrows()];
    let mut b = vec![vec![ZERO; dim]; full.ncols()];
    // M = X Y† means M_ij = ⟨conj(x_i), conj(y_j)⟩ with ⟨u, v⟩ = Σ conj(u) v.
    for (k, &i) in keep_r.iter().enumerate() {
        a[i] = f.x.row(k).iter().map(|z| z.conj() * scale).collect();
    }
    for (k, &j) in keep_c.iter().enumerate() {
        b[j] = f.y.row(k).iter().map(|z| z.conj() / scale).collect();
    }
    let residual = certificate_residual(full, &a, &b);
    let value = a.iter().map(|v| linalg::vec_norm(v)).fold(0.0, f64::max)
        * b.iter().map(|v| linalg::vec_norm(v)).fold(0.0, f64::max);
    SchurCertificate { a, b, value, residual, lower }
}

/// max |⟨a_i, b_j⟩ − M_ij| for a certificate against a matrix.
pub fn certificate_residual(m: &CMat, a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let mut r = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            r = r.max((linalg::inner(&a[i], &b[j]) - m[(i, j)]).norm());
        }
    }
    r
}

/// Heuristic lower bound on the cb norm of a linear map on a block algebra.
///
/// `basis` spans the domain and `images[l]` is the image of `basis[l]`. Each
/// trial draws a random element of `M_k(B)`, normalizes it, and hill-climbs on
/// `‖(T ⊗ id_k)(A)‖ / ‖A‖`. Trial `j` uses its own seed, so the result is
/// monotone in `trials`.
pub fn amplification_norm_lower(
    basis: &[BlockOperator],
    images: &[BlockOperator],
    trials: usize,
    seed: u64,
) -> f64 {
    assert_eq!(basis.len(), images.len(), "basis and images must pair up");
    if basis.is_empty() {
        return 0.0;
    }
    let kmax = basis.len().min(AMPLIFICATION_CAP);
    let mut best = 0.0f64;
    for trial in 0..trials.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let k = 1 + trial % kmax;
        let mut coeffs: Vec<CMat> = (0..basis.len()).map(|_| random_matrix(&mut rng, k)).collect();
        let mut ratio = amplified_ratio(basis, images, &coeffs);
        let mut step = 0.5;
        for _ in 0..30 {
            let trial_coeffs: Vec<CMat> =
                coeffs.iter().map(|ck| ck + random_matrix(&mut rng, k).scale(step)).collect();
            let r = amplified_ratio(basis, images, &trial_coeffs);
            if r > ratio {
                ratio = r;
                coeffs = trial_coeffs;
            } else {
                step *= 0.8;
            }
        }
        best = best.max(ratio);
    }
    best
}

/// Largest amplification size tried by `amplification_norm_lower`.
pub const AMPLIFICATION_CAP: usize = 4;

fn random_matrix(rng: &mut ChaCha8Rng, k: usize) -> CMat {
    CMat::from_fn(k, k, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn amplified_norm(ops: &[BlockOperator], coeffs: &[CMat]) -> f64 {
    let nblocks = ops[0].blocks.len();
    let k = coeffs[0].nrows();
    let mut norm = 0.0f64;
    for bidx in 0..nblocks {
        let d = ops[0].blocks[bidx].nrows();
        let mut acc = linalg::zeros(d * k, d * k);
        for (op, ck) in ops.iter().zip(coeffs) {
            acc += linalg::kron(&op.blocks[bidx], ck);
        }
        norm = norm.max(linalg::spectral_norm(&acc));
    }
    norm
}

fn amplified_ratio(basis: &[BlockOperator], images: &[BlockOperator], coeffs: &[CMat]) -> f64 {
    let den = amplified_norm(basis, coeffs);
    if den <= 1e-300 {
        return 0.0;
    }
    amplified_norm(images, coeffs) / den
}
