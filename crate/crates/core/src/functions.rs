//! Analytic test functions: gaussians, smooth bumps and box indicators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `a · exp(−Σ ((x_i − c_i)/w_i)²)`; an infinite width makes the
    /// function constant along that axis.
    Gaussian {
        center: Vec<f64>,
        width: Vec<f64>,
        amplitude: f64,
    },
    /// `a · exp(1 − 1/(1 − s²))` for `s = |x − c|/r < 1`, zero outside.
    Bump {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
    },
    /// `a` on the closed box `[lo, hi]`, zero outside.
    Indicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
        amplitude: f64,
    },
    Constant {
        value: f64,
    },
}

impl FunctionSpec {
    pub fn gaussian(center: Vec<f64>, width: Vec<f64>) -> Self {
        Self::Gaussian {
            center,
            width,
            amplitude: 1.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let e: f64 = x
                    .iter()
                    .zip(center)
                    .zip(width)
                    .map(|((xi, ci), wi)| if wi.is_finite() { ((xi - ci) / wi).powi(2) } else { 0.0 })
                    .sum();
                amplitude * (-e).exp()
            }
            Self::Bump {
                center,
                radius,
                amplitude,
            } => {
                let s2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (radius * radius);
                if s2 < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - s2)).exp()
                } else {
                    0.0
                }
            }
            Self::Indicator { lo, hi, amplitude } => {
                let inside = x.iter().zip(lo).zip(hi).all(|((xi, a), b)| a <= xi && xi <= b);
                if inside {
                    *amplitude
                } else {
                    0.0
                }
            }
            Self::Constant { value } => *value,
        }
    }

    /// Coordinate axes the function varies along.
    pub fn depends_on_axis(&self, axis: usize) -> bool {
        match self {
            Self::Gaussian { width, .. } => width.get(axis).is_some_and(|w| w.is_finite()),
            Self::Constant { .. } => false,
            _ => true,
        }
    }

    pub fn check_dimension(&self, d: usize) -> Result<()> {
        let lens: Vec<usize> = match self {
            Self::Gaussian { center, width, .. } => vec![center.len(), width.len()],
            Self::Bump { center, .. } => vec![center.len()],
            Self::Indicator { lo, hi, .. } => vec![lo.len(), hi.len()],
            Self::Constant { .. } => vec![],
        };
        if lens.iter().any(|&l| l != d) {
            return Err(Error::Shape(format!("function parameters do not match dimension {d}: {self:?}")));
        }
        Ok(())
    }
}
