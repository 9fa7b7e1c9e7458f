//! One-dimensional periodic difference operators and their Fourier symbols.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Discretization of first derivatives along one periodic axis.
///
/// * `Central`: `(u_{j+1} − u_{j−1}) / 2h`, symbol `i sin θ / h`. Second
///   derivatives are its square, which has a spurious zero at `θ = π`.
/// * `Forward`: `(u_{j+1} − u_j) / h`; the sub-Laplacian is the quadratic
///   form `−Σ X⁺ᵀX⁺`, which on `ℝ^d` is the 3-point Laplacian.
/// * `Fourier`: trigonometric differentiation, symbol `iθ/h` with the
///   Nyquist mode sent to zero; second derivatives use the full symbol
///   `−(θ/h)²` including Nyquist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Central,
    Forward,
    Fourier,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" => Ok(Self::Central),
            "forward" => Ok(Self::Forward),
            "fourier" => Ok(Self::Fourier),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected central, forward or fourier)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Central => "central",
            Self::Forward => "forward",
            Self::Fourier => "fourier",
        })
    }
}

/// Angle `θ_m = 2πm/N` of DFT mode `m`, folded into `(−π, π]`.
pub fn mode_angle(m: usize, n: usize) -> f64 {
    let k = if 2 * m > n { m as f64 - n as f64 } else { m as f64 };
    2.0 * PI * k / n as f64
}

impl Scheme {
    /// Eigenvalue of the first-derivative matrix on `e^{iθ j}`.
    pub fn derivative_symbol(self, theta: f64, h: f64) -> Complex64 {
        match self {
            Self::Central => Complex64::new(0.0, theta.sin() / h),
            Self::Forward => (Complex64::new(0.0, theta).exp() - 1.0) / h,
            Self::Fourier => {
                if (theta.abs() - PI).abs() < 1e-12 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, theta / h)
                }
            }
        }
    }

    /// Eigenvalue of the second-derivative matrix used in the sub-Laplacian.
    pub fn second_symbol(self, theta: f64, h: f64) -> f64 {
        match self {
            Self::Central => -(theta.sin() / h).powi(2),
            Self::Forward => -(2.0 - 2.0 * theta.cos()) / (h * h),
            Self::Fourier => -(theta / h).powi(2),
        }
    }

    /// Whether the sub-Laplacian is `−Σ Xᵀ X` rather than `Σ X²`.
    pub fn is_quadratic_form(self) -> bool {
        matches!(self, Self::Forward)
    }

    /// First-derivative matrix on `n` points with spacing `h`.
    pub fn derivative_matrix(self, n: usize, h: f64) -> CsrMatrix<f64> {
        match self {
            Self::Central => circulant(n, &[(1, 0.5 / h), (n - 1, -0.5 / h)]),
            Self::Forward => circulant(n, &[(0, -1.0 / h), (1, 1.0 / h)]),
            Self::Fourier => {
                // Entry (j, k) depends on r = k − j mod n; exact antisymmetry
                // is enforced by mirroring r ↦ n − r.
                let l = 0.5 * n as f64 * h;
                let mut c = vec![0.0; n];
                for r in 1..n / 2 {
                    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                    let v = -(PI / l) * 0.5 * sign / (PI * r as f64 / n as f64).tan();
                    c[r] = v;
                    c[n - r] = -v;
                }
                circulant(n, &c.iter().copied().enumerate().collect::<Vec<_>>())
            }
        }
    }

    /// Second-derivative matrix with symbol [`second_symbol`](Self::second_symbol).
    pub fn second_matrix(self, n: usize, h: f64) -> CsrMatrix<f64> {
        match self {
            Self::Central => {
                let a = 0.25 / (h * h);
                circulant(n, &[(0, -2.0 * a), (2, a), (n - 2, a)])
            }
            Self::Forward => {
                let a = 1.0 / (h * h);
                circulant(n, &[(0, -2.0 * a), (1, a), (n - 1, a)])
            }
            Self::Fourier => {
                // Closed form of the trigonometric second-derivative matrix,
                // rescaled from period 2π to period n·h.
                let l = 0.5 * n as f64 * h;
                let s = PI / l;
                let h2 = 2.0 * PI / n as f64;
                let mut c = vec![0.0; n];
                c[0] = s * s * (-PI * PI / (3.0 * h2 * h2) - 1.0 / 6.0);
                for r in 1..=n / 2 {
                    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                    let v = -s * s * sign / (2.0 * (r as f64 * h2 / 2.0).sin().powi(2));
                    c[r] = v;
                    c[n - r] = v;
                }
                circulant(n, &c.iter().copied().enumerate().collect::<Vec<_>>())
            }
        }
    }
}

/// Circulant matrix with `A[j][(j + r) mod n] = value` for each `(r, value)`.
fn circulant(n: usize, offsets: &[(usize, f64)]) -> CsrMatrix<f64> {
    let triplets = (0..n).flat_map(|j| {
        offsets
            .iter()
            .filter(|(_, v)| *v != 0.0)
            .map(move |&(r, v)| (j, (j + r) % n, v))
    });
    CsrMatrix::from_triplets(n, n, triplets).expect("circulant indices are in range")
}
