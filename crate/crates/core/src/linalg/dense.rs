//! Dense Hermitian eigensolves and matrix functions backed by `faer`.

use faer::{Mat, Side};
use num_complex::Complex64;

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Dense kernels needed by the spectral code, implemented for `f64` and `Complex64`.
pub trait DenseOps: Scalar {
    /// Eigenvalues of a Hermitian matrix, ascending.
    fn eigvalsh(m: &Mat<Self>) -> Result<Vec<f64>>;
    /// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
    fn eigh(m: &Mat<Self>) -> Result<(Vec<f64>, Mat<Self>)>;
    /// Singular values, descending.
    fn svdvals(m: &Mat<Self>) -> Result<Vec<f64>>;
    fn matmul(a: &Mat<Self>, b: &Mat<Self>) -> Mat<Self>;
    fn adjoint(m: &Mat<Self>) -> Mat<Self>;
}

macro_rules! impl_dense_ops {
    ($t:ty, $re:expr) => {
        impl DenseOps for $t {
            fn eigvalsh(m: &Mat<Self>) -> Result<Vec<f64>> {
                check_square(m.nrows(), m.ncols())?;
                if m.nrows() == 0 {
                    return Ok(Vec::new());
                }
                let vals = m
                    .as_ref()
                    .self_adjoint_eigenvalues(Side::Lower)
                    .map_err(|e| Error::Eigen(format!("{e:?}")))?;
                Ok(vals)
            }

            fn eigh(m: &Mat<Self>) -> Result<(Vec<f64>, Mat<Self>)> {
                check_square(m.nrows(), m.ncols())?;
                if m.nrows() == 0 {
                    return Ok((Vec::new(), Mat::zeros(0, 0)));
                }
                let evd = m
                    .as_ref()
                    .self_adjoint_eigen(Side::Lower)
                    .map_err(|e| Error::Eigen(format!("{e:?}")))?;
                let re: fn(&$t) -> f64 = $re;
                let s = evd.S().column_vector();
                let vals = (0..m.nrows()).map(|i| re(&s[i])).collect();
                Ok((vals, evd.U().to_owned()))
            }

            fn svdvals(m: &Mat<Self>) -> Result<Vec<f64>> {
                if m.nrows() == 0 || m.ncols() == 0 {
                    return Ok(Vec::new());
                }
                m.as_ref()
                    .singular_values()
                    .map_err(|e| Error::Eigen(format!("{e:?}")))
            }

            fn matmul(a: &Mat<Self>, b: &Mat<Self>) -> Mat<Self> {
                a * b
            }

            fn adjoint(m: &Mat<Self>) -> Mat<Self> {
                m.adjoint().to_owned()
            }
        }
    };
}

impl_dense_ops!(f64, |x: &f64| *x);
impl_dense_ops!(Complex64, |x: &Complex64| x.re);

fn check_square(r: usize, c: usize) -> Result<()> {
    if r != c {
        return Err(Error::Shape(format!("expected square matrix, got {r}x{c}")));
    }
    Ok(())
}

/// `U diag(g(λ)) U*` for a Hermitian matrix with eigenpairs `(λ, U)`.
pub fn apply_spectral<T: DenseOps>(vals: &[f64], vecs: &Mat<T>, g: impl Fn(f64) -> f64) -> Mat<T> {
    let n = vals.len();
    let gv: Vec<f64> = vals.iter().map(|&l| g(l)).collect();
    let scaled = Mat::<T>::from_fn(n, n, |i, j| vecs[(i, j)] * T::from_re(gv[j]));
    T::matmul(&scaled, &T::adjoint(vecs))
}

/// Largest `|A_ij - conj(A_ji)|`.
pub fn hermitian_defect<T: Scalar>(m: &Mat<T>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).abs());
        }
    }
    worst
}

/// Replaces `m` by `(m + m*)/2` in place.
pub fn symmetrize<T: Scalar>(m: &mut Mat<T>) {
    let n = m.nrows();
    let half = T::from_re(0.5);
    for i in 0..n {
        for j in 0..i {
            let a = (m[(i, j)] + m[(j, i)].conj()) * half;
            m[(i, j)] = a;
            m[(j, i)] = a.conj();
        }
        let d = m[(i, i)];
        m[(i, i)] = T::from_re(d.re());
    }
}

pub fn max_abs<T: Scalar>(m: &Mat<T>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

/// `diag(d) * m * diag(d)` for a real diagonal `d`.
pub fn diag_sandwich<T: Scalar>(d: &[f64], m: &Mat<T>) -> Mat<T> {
    Mat::<T>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * T::from_re(d[i] * d[j]))
}
