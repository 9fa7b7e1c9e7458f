//! A matrix that is either sparse or dense, real or complex.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dense, CsrMatrix, DenseOps, Scalar};

/// Largest dimension accepted by dense eigensolves.
pub const DENSE_LIMIT: usize = 5000;

#[derive(Debug, Clone)]
pub enum Matrix {
    Sparse(CsrMatrix<f64>),
    SparseComplex(CsrMatrix<Complex64>),
    Dense(Mat<f64>),
    DenseComplex(Mat<Complex64>),
}

fn dense_of<T: Scalar>(m: &CsrMatrix<T>) -> Result<Mat<T>> {
    if m.nrows() > DENSE_LIMIT {
        return Err(Error::Input(format!(
            "dimension {} exceeds the dense limit {DENSE_LIMIT}; use a block decomposition",
            m.nrows()
        )));
    }
    Ok(m.to_dense())
}

fn map_dense<T: DenseOps>(m: &Mat<T>, g: impl Fn(f64) -> Result<f64>) -> Result<Mat<T>> {
    let (vals, vecs) = T::eigh(m)?;
    let mapped = vals.iter().map(|&v| g(v)).collect::<Result<Vec<_>>>()?;
    Ok(dense::apply_spectral(&mapped, &vecs, |x| x))
}

fn to_complex_dense(m: &Mat<f64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

impl Matrix {
    pub fn dim(&self) -> usize {
        match self {
            Self::Sparse(m) => m.nrows(),
            Self::SparseComplex(m) => m.nrows(),
            Self::Dense(m) => m.nrows(),
            Self::DenseComplex(m) => m.nrows(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Self::SparseComplex(_) | Self::DenseComplex(_))
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Sparse(m) => m.max_abs(),
            Self::SparseComplex(m) => m.max_abs(),
            Self::Dense(m) => dense::max_abs(m),
            Self::DenseComplex(m) => dense::max_abs(m),
        }
    }

    /// `max |A − A*|`.
    pub fn hermitian_defect(&self) -> f64 {
        match self {
            Self::Sparse(m) => m.hermitian_defect(),
            Self::SparseComplex(m) => m.hermitian_defect(),
            Self::Dense(m) => dense::hermitian_defect(m),
            Self::DenseComplex(m) => dense::hermitian_defect(m),
        }
    }

    pub fn to_dense_complex(&self) -> Result<Mat<Complex64>> {
        Ok(match self {
            Self::Sparse(m) => to_complex_dense(&dense_of(m)?),
            Self::SparseComplex(m) => dense_of(m)?,
            Self::Dense(m) => to_complex_dense(m),
            Self::DenseComplex(m) => m.clone(),
        })
    }

    /// Densified copy, keeping real matrices real.
    pub fn to_dense(&self) -> Result<Matrix> {
        Ok(match self {
            Self::Sparse(m) => Self::Dense(dense_of(m)?),
            Self::SparseComplex(m) => Self::DenseComplex(dense_of(m)?),
            other => other.clone(),
        })
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        match self.to_dense()? {
            Self::Dense(m) => f64::eigvalsh(&m),
            Self::DenseComplex(m) => Complex64::eigvalsh(&m),
            _ => unreachable!("to_dense returns a dense variant"),
        }
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        match self.to_dense()? {
            Self::Dense(m) => f64::svdvals(&m),
            Self::DenseComplex(m) => Complex64::svdvals(&m),
            _ => unreachable!("to_dense returns a dense variant"),
        }
    }

    /// Functional calculus `g(A)` of a Hermitian matrix; the result is dense.
    pub fn map_spectrum(&self, g: impl Fn(f64) -> Result<f64>) -> Result<Matrix> {
        Ok(match self.to_dense()? {
            Self::Dense(m) => Self::Dense(map_dense(&m, g)?),
            Self::DenseComplex(m) => Self::DenseComplex(map_dense(&m, g)?),
            _ => unreachable!("to_dense returns a dense variant"),
        })
    }

    /// `diag(d) A diag(d)`.
    pub fn diag_sandwich(&self, d: &[f64]) -> Matrix {
        match self {
            Self::Sparse(m) => Self::Sparse(m.scale_rows(d).scale_cols(d)),
            Self::SparseComplex(m) => {
                let dc: Vec<Complex64> = d.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                Self::SparseComplex(m.scale_rows(&dc).scale_cols(&dc))
            }
            Self::Dense(m) => Self::Dense(dense::diag_sandwich(d, m)),
            Self::DenseComplex(m) => Self::DenseComplex(dense::diag_sandwich(d, m)),
        }
    }

    /// `diag(d) A` for a real diagonal.
    pub fn scale_rows(&self, d: &[f64]) -> Matrix {
        match self {
            Self::Sparse(m) => Self::Sparse(m.scale_rows(d)),
            Self::SparseComplex(m) => {
                let dc: Vec<Complex64> = d.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                Self::SparseComplex(m.scale_rows(&dc))
            }
            Self::Dense(m) => Self::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| d[i] * m[(i, j)])),
            Self::DenseComplex(m) => Self::DenseComplex(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[i])),
        }
    }

    /// `A diag(d)` for a real diagonal.
    pub fn scale_cols(&self, d: &[f64]) -> Matrix {
        match self {
            Self::Sparse(m) => Self::Sparse(m.scale_cols(d)),
            Self::SparseComplex(m) => {
                let dc: Vec<Complex64> = d.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                Self::SparseComplex(m.scale_cols(&dc))
            }
            Self::Dense(m) => Self::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[j])),
            Self::DenseComplex(m) => Self::DenseComplex(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[j])),
        }
    }

    /// Eigenvalues `λ_k` of a Hermitian matrix paired with `⟨u_k, diag(w) u_k⟩`.
    pub fn eigen_expectations(&self, w: &[Complex64]) -> Result<Vec<(f64, Complex64)>> {
        if w.len() != self.dim() {
            return Err(Error::Shape(format!("weights of length {} for dimension {}", w.len(), self.dim())));
        }
        fn pairs<T: DenseOps>(m: &Mat<T>, w: &[Complex64]) -> Result<Vec<(f64, Complex64)>> {
            let (vals, vecs) = T::eigh(m)?;
            Ok(vals
                .iter()
                .enumerate()
                .map(|(k, &l)| {
                    let e = (0..m.nrows()).map(|r| w[r] * vecs[(r, k)].abs().powi(2)).sum();
                    (l, e)
                })
                .collect())
        }
        match self.to_dense()? {
            Self::Dense(m) => pairs(&m, w),
            Self::DenseComplex(m) => pairs(&m, w),
            _ => unreachable!("to_dense returns a dense variant"),
        }
    }

    /// Matrix product; mixed sparse/dense operands are densified.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("cannot multiply {} by {}", self.dim(), other.dim())));
        }
        Ok(match (self, other) {
            (Self::Sparse(a), Self::Sparse(b)) => Self::Sparse(a.matmul(b)?),
            (Self::SparseComplex(a), Self::SparseComplex(b)) => Self::SparseComplex(a.matmul(b)?),
            (Self::Sparse(a), Self::SparseComplex(b)) => Self::SparseComplex(a.to_complex().matmul(b)?),
            (Self::SparseComplex(a), Self::Sparse(b)) => Self::SparseComplex(a.matmul(&b.to_complex())?),
            (Self::Dense(a), Self::Dense(b)) => Self::Dense(a * b),
            (Self::Dense(a), Self::Sparse(b)) => Self::Dense(a * dense_of(b)?),
            (Self::Sparse(a), Self::Dense(b)) => Self::Dense(dense_of(a)? * b),
            (a, b) => Self::DenseComplex(a.to_dense_complex()? * b.to_dense_complex()?),
        })
    }

    /// Sum of two matrices of equal dimension; mixed operands are densified.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("cannot add {} and {}", self.dim(), other.dim())));
        }
        Ok(match (self, other) {
            (Self::Sparse(a), Self::Sparse(b)) => Self::Sparse(a.add(b)?),
            (Self::SparseComplex(a), Self::SparseComplex(b)) => Self::SparseComplex(a.add(b)?),
            (Self::Dense(a), Self::Dense(b)) => Self::Dense(a + b),
            (a, b) if !a.is_complex() && !b.is_complex() => {
                let (Self::Dense(x), Self::Dense(y)) = (a.to_dense()?, b.to_dense()?) else {
                    unreachable!("real operands densify to real matrices")
                };
                Self::Dense(x + y)
            }
            (a, b) => Self::DenseComplex(a.to_dense_complex()? + b.to_dense_complex()?),
        })
    }

    /// `A + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Result<Matrix> {
        if d.len() != self.dim() {
            return Err(Error::Shape(format!("diagonal of length {} for dimension {}", d.len(), self.dim())));
        }
        Ok(match self {
            Self::Sparse(m) => Self::Sparse(m.add(&CsrMatrix::from_diagonal(d))?),
            Self::SparseComplex(m) => {
                let dc: Vec<Complex64> = d.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                Self::SparseComplex(m.add(&CsrMatrix::from_diagonal(&dc))?)
            }
            Self::Dense(m) => {
                let mut out = m.clone();
                d.iter().enumerate().for_each(|(i, v)| out[(i, i)] += v);
                Self::Dense(out)
            }
            Self::DenseComplex(m) => {
                let mut out = m.clone();
                d.iter().enumerate().for_each(|(i, v)| out[(i, i)] += v);
                Self::DenseComplex(out)
            }
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        match self {
            Self::Sparse(m) => Self::Sparse(m.scale(s)),
            Self::SparseComplex(m) => Self::SparseComplex(m.scale(Complex64::new(s, 0.0))),
            Self::Dense(m) => Self::Dense(m * faer::Scale(s)),
            Self::DenseComplex(m) => Self::DenseComplex(m * faer::Scale(Complex64::new(s, 0.0))),
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        match self {
            Self::Sparse(m) => {
                let re: Vec<f64> = x.iter().map(|z| z.re).collect();
                let im: Vec<f64> = x.iter().map(|z| z.im).collect();
                m.mul_vec(&re)
                    .into_iter()
                    .zip(m.mul_vec(&im))
                    .map(|(a, b)| Complex64::new(a, b))
                    .collect()
            }
            Self::SparseComplex(m) => m.mul_vec(x),
            Self::Dense(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| x[j] * m[(i, j)]).sum())
                .collect(),
            Self::DenseComplex(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
                .collect(),
        }
    }
}
