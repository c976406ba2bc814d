//! Shared helpers for integration tests.
#![allow(dead_code)]

use gcb::linalg::{c, CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat {
    CMat::from_fn(m, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Independent estimate of the factorization norm γ2(M).
///
/// γ2(M)² = inf over A = LL† with unit diagonal of max_j (M† A⁻¹ M)_jj: fix
/// the left vectors as the unit rows of L, the best right vectors are then
/// the minimum-norm solutions. Minimized by projected gradient descent on a
/// log-sum-exp smoothing of the max (sharpened in stages), with random
/// restarts. Every evaluated L
/// gives a valid upper bound, so the returned value is an upper estimate.
pub fn gamma2_oracle(m: &CMat, restarts: usize, seed: u64) -> f64 {
    let rows = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let m = m.unscale(scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for r in 0..restarts {
        let mut l = if r == 0 {
            CMat::identity(rows, rows)
        } else {
            random_matrix(&mut rng, rows, rows)
        };
        normalize_rows(&mut l);
        if let Some(v) = objective(&m, &l) {
            best = best.min(v);
        }
        for beta in [10.0, 100.0, 1e3, 1e4, 1e5, 1e6] {
            let mut step = 0.1;
            let Some(mut cur) = smooth_objective(&m, &l, beta) else { break };
            for _ in 0..3000 {
                let Some(mut grad) = smooth_gradient(&m, &l, beta) else { break };
                tangent(&l, &mut grad);
                let gn: f64 = grad.iter().map(|z| z.norm_sqr()).sum();
                if gn < 1e-30 {
                    break;
                }
                let mut accepted = false;
                while step > 1e-14 {
                    let mut cand = &l - &grad * c(step, 0.0);
                    normalize_rows(&mut cand);
                    match smooth_objective(&m, &cand, beta) {
                        Some(v) if v <= cur - 1e-4 * step * gn => {
                            l = cand;
                            cur = v;
                            accepted = true;
                            break;
                        }
                        _ => step *= 0.5,
                    }
                }
                if !accepted {
                    break;
                }
                if let Some(v) = objective(&m, &l) {
                    best = best.min(v);
                }
                step *= 2.0;
            }
        }
    }
    best.sqrt() * scale
}

/// Removes the per-row radial component, so steps follow the unit spheres.
fn tangent(l: &CMat, g: &mut CMat) {
    for i in 0..l.nrows() {
        let dot: C64 = (0..l.ncols()).map(|j| l[(i, j)].conj() * g[(i, j)]).sum();
        for j in 0..l.ncols() {
            let v = l[(i, j)] * C64::new(dot.re, 0.0);
            g[(i, j)] -= v;
        }
    }
}

fn smooth_objective(m: &CMat, l: &CMat, beta: f64) -> Option<f64> {
    let (costs, _) = column_costs(m, l)?;
    let top = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = costs.iter().map(|v| ((v - top) * beta).exp()).sum();
    Some(top + s.ln() / beta)
}

fn normalize_rows(l: &mut CMat) {
    for i in 0..l.nrows() {
        let n = l.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        for j in 0..l.ncols() {
            l[(i, j)] /= n;
        }
    }
}

fn column_costs(m: &CMat, l: &CMat) -> Option<(Vec<f64>, CMat)> {
    let a = l * l.adjoint();
    let ainv = a.try_inverse()?;
    let q = m.adjoint() * &ainv * m;
    let costs = (0..m.ncols()).map(|j| q[(j, j)].re).collect::<Vec<_>>();
    if costs.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return None;
    }
    Some((costs, ainv))
}

fn objective(m: &CMat, l: &CMat) -> Option<f64> {
    column_costs(m, l).map(|(v, _)| v.into_iter().fold(0.0, f64::max))
}

fn smooth_gradient(m: &CMat, l: &CMat, beta: f64) -> Option<CMat> {
    let (costs, ainv) = column_costs(m, l)?;
    let top = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = costs.iter().map(|v| ((v - top) * beta).exp()).collect();
    let total: f64 = w.iter().sum();
    let wd = CMat::from_fn(m.ncols(), m.ncols(), |i, j| if i == j { c(w[i] / total, 0.0) } else { C64::new(0.0, 0.0) });
    let b = m * wd * m.adjoint();
    Some(&ainv * b * &ainv * l * c(-2.0, 0.0))
}
