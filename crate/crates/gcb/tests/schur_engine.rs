mod common;

use common::{gamma2_oracle, random_matrix};
use gcb::linalg::{c, CMat};
use gcb::schur::{certificate_residual, schur_norm, SchurProblem};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-6;

fn norm(m: &CMat) -> f64 {
    schur_norm(&SchurProblem::new(m.clone(), TOL)).unwrap().0
}

#[test]
fn random_matrices_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..20 {
        let (m, n) = (3 + k % 4, 3 + (k / 2) % 4);
        let a = random_matrix(&mut rng, m, n);
        let (v, cert) = schur_norm(&SchurProblem::new(a.clone(), TOL)).unwrap();
        let o = gamma2_oracle(&a, 3, k as u64);
        assert!((o - v).abs() <= 1e-3, "{m}x{n}: sdp {v} oracle {o}");
        assert!(cert.residual <= 1e-6);
        assert!(certificate_residual(&a, &cert.a, &cert.b) <= 1e-6);
        assert!(cert.value <= v + TOL && cert.lower <= v + 1e-12 && v - cert.lower <= TOL);
    }
}

#[test]
fn hadamard_matches_oracle() {
    let h = CMat::from_fn(2, 2, |i, j| c(if i == 1 && j == 1 { -1.0 } else { 1.0 }, 0.0));
    let o = gamma2_oracle(&h, 4, 1);
    assert!((norm(&h) - o).abs() < 1e-4, "{o}");
}

#[test]
fn complex_phases() {
    // Rank one with unimodular entries: γ2 = 1.
    let u = [c(1.0, 0.0), c(0.0, 1.0), c(-0.6, 0.8)];
    let m = CMat::from_fn(3, 3, |i, j| u[i] * u[j].conj());
    assert!((norm(&m) - 1.0).abs() < TOL);
}

fn small_matrix() -> impl Strategy<Value = CMat> {
    (2usize..5, 2usize..5, any::<u64>()).prop_map(|(m, n, s)| random_matrix(&mut ChaCha8Rng::seed_from_u64(s), m, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling(m in small_matrix(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let z = c(re, im);
        let lhs = norm(&(&m * z));
        prop_assert!((lhs - z.norm() * norm(&m)).abs() <= 2.0 * TOL * (1.0 + z.norm()));
    }

    #[test]
    fn submatrix_monotone(m in small_matrix()) {
        let sub = m.view((0, 0), (m.nrows() - 1, m.ncols())).into_owned();
        prop_assert!(norm(&sub) <= norm(&m) + TOL);
    }

    #[test]
    fn certificate_sound(m in small_matrix()) {
        let (v, cert) = schur_norm(&SchurProblem::new(m.clone(), TOL)).unwrap();
        prop_assert!(certificate_residual(&m, &cert.a, &cert.b) <= 1e-6);
        let amax = cert.a.iter().map(|x| gcb::linalg::vec_norm(x)).fold(0.0, f64::max);
        let bmax = cert.b.iter().map(|x| gcb::linalg::vec_norm(x)).fold(0.0, f64::max);
        prop_assert!(amax * bmax <= v + TOL);
        prop_assert!(v >= gcb::linalg::max_abs(&m) - 1e-12);
    }
}
