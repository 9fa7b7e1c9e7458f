//! Singular values, Schatten norms, asymptotic fits and the experiments
//! built on them.

mod constants;
mod experiments;
mod product;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{linear_fit, median};
use crate::operator::DiscreteOperator;

pub use constants::{
    euclidean_constant, group_constant, heat_constant_hn, heat_constant_hn_both, ConstantEntry, ConstantTable,
    Provenance,
};
pub use experiments::{
    connes_trace_check, cwikel_ratio_experiment, zeta_trace, ConnesReport, CwikelCase, CwikelRow, CwikelTable,
    ZetaReport,
};
pub use product::{product_convolution, sandwich_spectrum, SpectrumMethod, Variant};

/// Smallest number of values an asymptotic fit accepts.
pub const MIN_REPORT_LEN: usize = 50;
/// Smallest fit window.
pub const MIN_WINDOW: usize = 20;

/// Decreasing singular values of an operator, optionally with a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub operator_label: String,
    pub singular_values: Vec<f64>,
    pub fit: Option<AsymptoticFit>,
}

impl SpectralReport {
    /// Sorts the values decreasingly; negative values are rejected.
    pub fn new(operator_label: impl Into<String>, mut values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Input(format!("singular values must be nonnegative, got {v}")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            operator_label: operator_label.into(),
            singular_values: values,
            fit: None,
        })
    }

    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    /// CSV rows `n, μ(n), (n+1)μ(n)^p`.
    pub fn write_csv(&self, p: f64, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "n,mu,scaled")?;
        for (n, mu) in self.singular_values.iter().enumerate() {
            writeln!(w, "{n},{mu:e},{:e}", (n + 1) as f64 * mu.powf(p))?;
        }
        Ok(())
    }
}

/// Singular values of `op`, keeping the `count` largest when given.
pub fn singular_values(op: &DiscreteOperator, count: Option<usize>) -> Result<SpectralReport> {
    let mut values = op.singular_values()?;
    if let Some(c) = count {
        if c > values.len() {
            log::warn!("requested {c} singular values of a {}-dimensional operator", values.len());
        }
        values.truncate(c);
    }
    SpectralReport::new(op.label.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenNorms {
    pub p: f64,
    /// `(Σ μ(n)^p)^{1/p}`.
    pub strong: f64,
    /// `sup (n+1)^{1/p} μ(n)`.
    pub weak: f64,
}

pub fn schatten_norms(report: &SpectralReport, p: f64) -> Result<SchattenNorms> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("Schatten exponent must be positive, got {p}")));
    }
    let mu = &report.singular_values;
    let strong = mu.iter().map(|m| m.powf(p)).sum::<f64>().powf(1.0 / p);
    let weak = mu
        .iter()
        .enumerate()
        .map(|(n, m)| ((n + 1) as f64).powf(1.0 / p) * m)
        .fold(0.0, f64::max);
    Ok(SchattenNorms { p, strong, weak })
}

/// Inclusive index range `[lo, hi]` of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: usize,
    pub hi: usize,
}

impl FitWindow {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> usize {
        (self.hi + 1).saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub p: f64,
    pub window: FitWindow,
    /// Median of `(n+1) μ(n)^p` over the window.
    pub fitted_constant: f64,
    /// Slope of `log μ` against `log(n+1)`; close to `−1/p` in the
    /// scaling regime.
    pub slope: f64,
    /// `max |(n+1)μ(n)^p − fitted| / fitted` over the window.
    pub residual_spread: f64,
    pub expected_constant: Option<f64>,
    /// `fitted / expected − 1`.
    pub deviation: Option<f64>,
}

pub fn asymptotic_fit(
    report: &SpectralReport,
    p: f64,
    window: FitWindow,
    expected_constant: Option<f64>,
) -> Result<AsymptoticFit> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("exponent must be positive, got {p}")));
    }
    if report.len() < MIN_REPORT_LEN {
        return Err(Error::Fit(format!(
            "report has {} values, at least {MIN_REPORT_LEN} are needed",
            report.len()
        )));
    }
    if window.hi >= report.len() || window.lo > window.hi {
        return Err(Error::Fit(format!(
            "window [{}, {}] outside the {} available values",
            window.lo,
            window.hi,
            report.len()
        )));
    }
    if window.len() < MIN_WINDOW {
        return Err(Error::Fit(format!(
            "window of {} points is smaller than {MIN_WINDOW}",
            window.len()
        )));
    }
    let mu = &report.singular_values[window.lo..=window.hi];
    let scaled: Vec<f64> = mu
        .iter()
        .enumerate()
        .map(|(i, m)| (window.lo + i + 1) as f64 * m.powf(p))
        .collect();
    let fitted = median(&scaled).expect("window is nonempty");
    if mu.iter().any(|&m| m <= 0.0) {
        return Err(Error::Fit("zero singular values inside the fit window".into()));
    }
    let x: Vec<f64> = (window.lo..=window.hi).map(|n| ((n + 1) as f64).ln()).collect();
    let y: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let slope = linear_fit(&x, &y).map(|f| f.slope).ok_or_else(|| Error::Fit("degenerate regression".into()))?;
    let residual_spread = scaled.iter().map(|s| (s - fitted).abs()).fold(0.0, f64::max) / fitted;
    Ok(AsymptoticFit {
        p,
        window,
        fitted_constant: fitted,
        slope,
        residual_spread,
        expected_constant,
        deviation: expected_constant.map(|e| fitted / e - 1.0),
    })
}

#[cfg(test)]
mod tests;
