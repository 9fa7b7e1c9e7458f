//! Compressed sparse row matrices over `f64` or `Complex64`.
//!
//! Only what operator assembly needs: triplet construction, linear
//! combinations, products, adjoints and Kronecker products.

use num_complex::Complex64;

use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Shape(format!(
                    "triplet ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
            rows[i].push((j, v));
        }
        Ok(Self::from_rows(nrows, ncols, rows))
    }

    fn from_rows(nrows: usize, ncols: usize, mut rows: Vec<Vec<(usize, T)>>) -> Self {
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    let k = values.len() - 1;
                    values[k] += v;
                } else {
                    indices.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Iterator over the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "mul_vec: length mismatch");
        (0..self.nrows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, v) in self.row(i) {
                    acc += v * x[j];
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = *v * s);
        out
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let rows = (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .map(|(j, v)| (j, a * v))
                    .chain(other.row(i).map(|(j, v)| (j, b * v)))
                    .collect()
            })
            .collect();
        Ok(Self::from_rows(self.nrows, self.ncols, rows))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpby(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpby(T::one(), other, -T::one())
    }

    /// Sparse product `self * other` via a dense accumulator per row.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let n = other.ncols;
        let mut acc = vec![T::zero(); n];
        let mut mark = vec![usize::MAX; n];
        let mut pattern = Vec::new();
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            pattern.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = T::zero();
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                indices.push(j);
                values.push(acc[j]);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: n,
            indptr,
            indices,
            values,
        })
    }

    pub fn transpose(&self) -> Self {
        self.transpose_with(|v| v)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.transpose_with(|v| v.conj())
    }

    fn transpose_with(&self, f: impl Fn(T) -> T) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.ncols];
        for (i, j, v) in self.triplets() {
            rows[j].push((i, f(v)));
        }
        Self::from_rows(self.ncols, self.nrows, rows)
    }

    /// Left multiplication by a diagonal matrix.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.nrows);
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.values[k] = d[i] * out.values[k];
            }
        }
        out
    }

    /// Right multiplication by a diagonal matrix.
    pub fn scale_cols(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.ncols);
        let mut out = self.clone();
        for k in 0..out.values.len() {
            out.values[k] = out.values[k] * d[out.indices[k]];
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.nrows, other.ncols);
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.nrows * p];
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                rows[i * p + k].push((j * q + l, a * b));
            }
        }
        Self::from_rows(self.nrows * p, self.ncols * q, rows)
    }

    /// Largest `|A_ij - conj(A_ji)|`; zero for an exactly Hermitian matrix.
    pub fn hermitian_defect(&self) -> f64 {
        let adj = self.adjoint();
        match self.sub(&adj) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Largest `|A_ij + conj(A_ji)|`; zero for an exactly anti-Hermitian matrix.
    pub fn antihermitian_defect(&self) -> f64 {
        let adj = self.adjoint();
        match self.add(&adj) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Drops stored entries with modulus `<= tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let rows = (0..self.nrows)
            .map(|i| self.row(i).filter(|(_, v)| v.abs() > tol).collect())
            .collect();
        Self::from_rows(self.nrows, self.ncols, rows)
    }

    pub fn to_dense(&self) -> faer::Mat<T> {
        let mut m = faer::Mat::<T>::from_fn(self.nrows, self.ncols, |_, _| T::zero());
        for (i, j, v) in self.triplets() {
            m[(i, j)] = m[(i, j)] + v;
        }
        m
    }

    pub fn to_complex(&self) -> CsrMatrix<Complex64> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v.to_complex()).collect(),
        }
    }

    /// Half-bandwidth `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets()
            .map(|(i, j, _)| i.abs_diff(j))
            .max()
            .unwrap_or(0)
    }
}

impl CsrMatrix<f64> {
    /// Writes the matrix in coordinate format: a header line `rows cols nnz`
    /// followed by one `i j value` line per stored entry (0-based indices).
    pub fn write_coo(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }

    pub fn read_coo(r: impl std::io::BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (nrows, ncols) = loop {
            let Some((ln, line)) = lines.next() else {
                return Err(Error::Parse {
                    line: 0,
                    msg: "missing header".into(),
                });
            };
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: "header must be `rows cols nnz`".into(),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    line: ln + 1,
                    msg: e.to_string(),
                })
            };
            break (parse(parts[0])?, parse(parts[1])?);
        };
        let mut trip = Vec::new();
        for (ln, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: String| Error::Parse { line: ln + 1, msg };
            if parts.len() != 3 {
                return Err(bad("expected `i j value`".into()));
            }
            let i = parts[0].parse::<usize>().map_err(|e| bad(e.to_string()))?;
            let j = parts[1].parse::<usize>().map_err(|e| bad(e.to_string()))?;
            let v = parts[2].parse::<f64>().map_err(|e| bad(e.to_string()))?;
            trip.push((i, j, v));
        }
        Self::from_triplets(nrows, ncols, trip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CsrMatrix<f64> {
        CsrMatrix::from_triplets(3, 3, [(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (2, 0, 4.0), (0, 2, 1.0)])
            .unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let a = small();
        assert_eq!(a.get(0, 2), 3.0);
        assert_eq!(a.nnz(), 4);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = small();
        let b = a.transpose();
        let c = a.matmul(&b).unwrap().to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        let cd = &ad * &bd;
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c[(i, j)], cd[(i, j)]);
            }
        }
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = small();
        let i2 = CsrMatrix::<f64>::identity(2);
        let k = a.kron(&i2);
        assert_eq!(k.nrows(), 6);
        assert_eq!(k.get(1, 5), 3.0);
        assert_eq!(k.get(0, 5), 0.0);
    }

    #[test]
    fn coo_roundtrip() {
        let a = small();
        let mut buf = Vec::new();
        a.write_coo(&mut buf).unwrap();
        let b = CsrMatrix::read_coo(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_range_triplet_is_shape_error() {
        let r = CsrMatrix::<f64>::from_triplets(2, 2, [(2, 0, 1.0)]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }
}
