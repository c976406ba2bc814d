//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::from_element(r, c, ZERO)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// A·B, skipping the zero entries of A.
pub fn sparse_mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "shape mismatch");
    let mut out = zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, k)];
            if z == ZERO {
                continue;
            }
            for j in 0..b.ncols() {
                let v = b[(k, j)];
                if v != ZERO {
                    out[(i, j)] += z * v;
                }
            }
        }
    }
    out
}

/// A·B·A†, skipping zeros.
pub fn sparse_conj(a: &CMat, b: &CMat) -> CMat {
    let ab = sparse_mul(a, b);
    sparse_mul(a, &ab.adjoint()).adjoint()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    // Symmetrize first; nalgebra reads only one triangle.
    let h = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eig(a).0.first().copied().unwrap_or(0.0)
}

/// Largest singular value, via the eigenvalues of M†M.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let g = if a.nrows() < a.ncols() { a * a.adjoint() } else { a.adjoint() * a };
    let top = hermitian_eig(&g).0.last().copied().unwrap_or(0.0);
    top.max(0.0).sqrt()
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn trace_norm(a: &CMat) -> f64 {
    singular_values(a).iter().sum()
}

pub fn rank(a: &CMat, thresh: f64) -> usize {
    singular_values(a).iter().filter(|&&s| s > thresh).count()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise modulus of a - b. Shapes must agree.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(a: &CMat) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(a, &a.adjoint())
}

/// Kronecker product, row index of the result is i*p + k.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (m, n) = a.shape();
    let (p, q) = b.shape();
    let mut out = zeros(m * p, n * q);
    for i in 0..m {
        for j in 0..n {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Clip negative eigenvalues of a Hermitian matrix.
pub fn clip_psd(a: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eig(a);
    let mut scaled = vecs.clone();
    for (k, v) in vals.iter().enumerate() {
        let s = v.max(0.0);
        for i in 0..scaled.nrows() {
            scaled[(i, k)] *= s;
        }
    }
    let out = scaled * vecs.adjoint();
    (&out + out.adjoint()).scale(0.5)
}

/// Orthonormal basis (as columns) of the column space, SVD threshold `thresh`.
pub fn range_basis(a: &CMat, thresh: f64) -> CMat {
    if a.nrows() == 0 || a.ncols() == 0 {
        return zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > thresh)
        .collect();
    let mut out = zeros(a.nrows(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        out.set_column(j, &u.column(k));
    }
    out
}

/// W = W W† W defect.
pub fn partial_isometry_defect(w: &CMat) -> f64 {
    if w.nrows() == 0 || w.ncols() == 0 {
        return 0.0;
    }
    max_abs_diff(w, &(w * w.adjoint() * w))
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_all_ones() {
        let a = CMat::from_element(2, 2, ONE);
        assert!((spectral_norm(&a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eig_sorted() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let (v, _) = hermitian_eig(&a);
        assert_eq!(v.len(), 3);
        assert!((v[0] + 1.0).abs() < 1e-12 && (v[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kron_shape_and_entry() {
        let a = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(2.0, 0.0)]);
        let b = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), I]);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (2, 4));
        assert_eq!(k[(1, 3)], c(0.0, 2.0));
    }

    #[test]
    fn clip_psd_diag() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![ONE, c(-2.0, 0.0)]));
        let p = clip_psd(&a);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-12 && p[(1, 1)].norm() < 1e-12);
    }
}
