//! Lanczos iteration with full reorthogonalization for the algebraically
//! largest eigenvalues of a Hermitian operator given only through its action.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::DenseOps;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Largest Krylov dimension before giving up.
    pub max_dim: usize,
    /// Relative residual `|β s_last| / |θ|` accepted for convergence.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_dim: 600,
            tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * *y;
    }
    acc
}

fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs() * x.abs()).sum::<f64>().sqrt()
}

/// Ritz values of the `want` largest eigenvalues (descending), or every
/// Ritz value above `floor` when `floor` is given and more than `want` of
/// them exceed it. Convergence is declared when all returned Ritz values
/// meet the residual tolerance.
pub fn largest_eigenvalues<T: Scalar>(
    n: usize,
    apply: impl Fn(&[T]) -> Vec<T>,
    want: usize,
    floor: Option<f64>,
    opts: LanczosOptions,
) -> Result<Vec<f64>> {
    if n == 0 || want == 0 {
        return Ok(Vec::new());
    }
    let max_dim = opts.max_dim.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<T> = (0..n)
        .map(|_| T::from_re(rng.random::<f64>() - 0.5))
        .collect();
    let nq = norm(&q);
    q.iter_mut().for_each(|v| *v = *v * T::from_re(1.0 / nq));

    let mut basis: Vec<Vec<T>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let check_every = 8;

    loop {
        let j = basis.len() - 1;
        let mut w = apply(&basis[j]);
        let a = dot(&basis[j], &w).re();
        alpha.push(a);
        // Two Gram–Schmidt sweeps against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi = *wi - c * *vi;
                }
            }
        }
        let b = norm(&w);
        let exhausted = b <= 1e-13 * alpha.iter().map(|x| x.abs()).fold(1e-300, f64::max);
        let dim = alpha.len();
        if exhausted || dim >= max_dim || (dim >= want && dim % check_every == 0) {
            let (theta, last) = tridiagonal_ritz(&alpha, &beta)?;
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&x, &y| theta[y].total_cmp(&theta[x]));
            let mut take = want.min(dim);
            if let Some(fl) = floor {
                while take < dim && theta[order[take]] > fl {
                    take += 1;
                }
            }
            let converged = order[..take]
                .iter()
                .all(|&i| (b * last[i]).abs() <= opts.tol * theta[i].abs().max(1e-300));
            if converged || exhausted || dim >= max_dim {
                if !converged && !exhausted {
                    return Err(Error::Eigen(format!(
                        "Lanczos did not converge within {max_dim} steps"
                    )));
                }
                return Ok(order[..take].iter().map(|&i| theta[i]).collect());
            }
        }
        beta.push(b);
        let inv = T::from_re(1.0 / b);
        basis.push(w.into_iter().map(|x| x * inv).collect());
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix and the last component of
/// each eigenvector.
fn tridiagonal_ritz(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let (vals, vecs) = f64::eigh(&t)?;
    let last = (0..m).map(|k| vecs[(m - 1, k)]).collect();
    Ok((vals, last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn top_of_diagonal_operator() {
        let d: Vec<f64> = (0..200).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let got = largest_eigenvalues(200, |x: &[f64]| x.iter().zip(&d).map(|(a, b)| a * b).collect(), 10, None, LanczosOptions::default())
            .unwrap();
        for (k, v) in got.iter().enumerate() {
            assert!((v - d[k]).abs() < 1e-9, "{k}: {v} vs {}", d[k]);
        }
    }

    #[test]
    fn complex_hermitian_matches_dense() {
        let n = 60;
        let m = Mat::<Complex64>::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j { 0.3 } else if i > j { -0.3 } else { 0.0 };
            Complex64::new(1.0 / (1.0 + a + b), im / (1.0 + (a - b).abs()))
        });
        let dense = Complex64::eigvalsh(&m).unwrap();
        let got = largest_eigenvalues(
            n,
            |x: &[Complex64]| (0..n).map(|i| (0..n).map(|j| m[(i, j)] * x[j]).sum()).collect(),
            5,
            None,
            LanczosOptions::default(),
        )
        .unwrap();
        for k in 0..5 {
            assert!((got[k] - dense[n - 1 - k]).abs() < 1e-8);
        }
    }
}
