//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vnorm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product conjugate-linear in the first slot.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * r(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with cutoff `rel * max singular value`.
pub fn rank(m: &CMat, rel: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&smax) if smax <= f64::MIN_POSITIVE => 0,
        Some(&smax) => s.iter().filter(|&&x| x > rel * smax).count(),
    }
}

/// Orthonormal basis (as columns) of the kernel of `m`.
///
/// A matrix that is identically zero has the whole space as kernel.
pub fn null_space(m: &CMat, rel: f64) -> CMat {
    null_space_scaled(m, rel, 0.0)
}

/// As [`null_space`], with cutoff `rel · max(σ_max, scale)` so that a matrix
/// made only of rounding noise, relative to `scale`, counts as zero.
pub fn null_space_scaled(m: &CMat, rel: f64, scale: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 || frob(m) == 0.0 {
        return CMat::identity(cols, cols);
    }
    // pad to at least square so the thin SVD carries the full right basis
    let work = if m.nrows() < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(work, false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
        .max(scale);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rel * smax)
        .collect();
    let mut out = CMat::zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        let row = vt.row(i).adjoint();
        out.set_column(k, &row);
    }
    out
}

/// Unitary factor `U V*` of the polar decomposition.
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    u * vt
}

/// `f(h)` for Hermitian `h` via its spectral decomposition.
pub fn hermitian_fn(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let mut d = CMat::zeros(n, n);
    for (i, v) in vals.iter().enumerate() {
        d[(i, i)] = r(f(*v));
    }
    &vecs * d * vecs.adjoint()
}

/// Incrementally grown orthonormal basis of a subspace of `C^dim`.
///
/// Vectors are accepted when the component orthogonal to the current span
/// exceeds `rel` times their norm. Classical Gram-Schmidt is applied twice.
#[derive(Debug, Clone)]
pub struct OrthoSpan {
    dim: usize,
    rel: f64,
    basis: Vec<CVec>,
}

impl OrthoSpan {
    pub fn new(dim: usize, rel: f64) -> Self {
        OrthoSpan {
            dim,
            rel,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CVec] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<CVec> {
        self.basis
    }

    /// Component of `v` orthogonal to the span.
    pub fn residual(&self, v: &CVec) -> CVec {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let p = inner(q, &w);
                if p != ZERO {
                    w.axpy(-p, q, ONE);
                }
            }
        }
        w
    }

    /// Adds `v` if it is not already (numerically) in the span.
    pub fn push(&mut self, v: &CVec) -> bool {
        self.push_scaled(v, 0.0)
    }

    /// As [`push`](Self::push), but also treats `v` as zero when its residual
    /// is below `rel · scale`, for families whose members can cancel to noise.
    pub fn push_scaled(&mut self, v: &CVec, scale: f64) -> bool {
        if self.basis.len() >= self.dim {
            return false;
        }
        let n = vnorm(v);
        if n <= f64::MIN_POSITIVE {
            return false;
        }
        let w = self.residual(v);
        let rn = vnorm(&w);
        if rn > self.rel * n.max(scale) {
            self.basis.push(w / r(rn));
            true
        } else {
            false
        }
    }

    /// Coordinates of the orthogonal projection of `v` onto the span.
    pub fn coefficients(&self, v: &CVec) -> Vec<C64> {
        self.basis.iter().map(|q| inner(q, v)).collect()
    }

    /// Basis as columns of a `dim x len` matrix.
    pub fn matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.basis.len());
        for (k, q) in self.basis.iter().enumerate() {
            m.set_column(k, q);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        // [1 1 0] has a two-dimensional kernel in C^3
        let m = CMat::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let k = null_space(&m, 1e-8);
        assert_eq!(k.ncols(), 2);
        assert!(frob(&(&m * &k)) < 1e-12);
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let m = CMat::from_row_slice(2, 2, &[ZERO, r(3.0), r(3.0), ZERO]);
        let u = polar_unitary(&m);
        assert!(frob(&(&u - &m * r(1.0 / 3.0))) < 1e-12);
    }

    #[test]
    fn ortho_span_rejects_dependent() {
        let mut s = OrthoSpan::new(3, 1e-8);
        assert!(s.push(&CVec::from_vec(vec![ONE, ZERO, ZERO])));
        assert!(s.push(&CVec::from_vec(vec![ONE, ONE, ZERO])));
        assert!(!s.push(&CVec::from_vec(vec![r(2.0), r(-5.0), ZERO])));
        assert_eq!(s.len(), 2);
    }
}
