//! Trace identities and Cwikel-ratio tables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::product::{sandwich_spectrum, SpectrumMethod, Variant};
use super::{asymptotic_fit, schatten_norms, AsymptoticFit, FitWindow, SpectralReport};
use crate::algebra::StratifiedAlgebra;
use crate::covering::{mixed_norm, mixed_norm_log, Covering};
use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::grid::SampledFunction;
use crate::numerics::{gamma, gamma_complex};
use crate::operator::{multiplier_samples, operator_function, DiscreteOperator, ScalarFunction};

fn nonnegative_samples(f: &FunctionSpec, op: &DiscreteOperator) -> Result<Vec<f64>> {
    let d = multiplier_samples(f, op)?;
    if let Some(v) = d.iter().find(|v| **v < 0.0) {
        return Err(Error::Input(format!("f must be nonnegative, found {v}")));
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaReport {
    pub z_re: f64,
    pub z_im: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub expected_re: f64,
    pub expected_im: f64,
    /// `|trace / expected − 1|`, zero when both vanish.
    pub deviation: f64,
}

impl ZetaReport {
    pub fn trace(&self) -> Complex64 {
        Complex64::new(self.trace_re, self.trace_im)
    }

    pub fn expected(&self) -> Complex64 {
        Complex64::new(self.expected_re, self.expected_im)
    }
}

/// `Tr(M_f^{2z} (1−Δ)^{−z/2})` from the eigenpairs of `Δ`, compared with
/// `c_G Γ(d/2+1) Γ((z−d)/2) / Γ(z/2) ∫ f^{2z}`.
///
/// `c_G` is the heat-kernel constant; the factor `Γ(d/2+1)` converts it to
/// the normalization of the trace formula.
pub fn zeta_trace(f: &FunctionSpec, z: Complex64, lap: &DiscreteOperator, d_hom: f64, c_g: f64) -> Result<ZetaReport> {
    if z.re <= d_hom {
        return Err(Error::Domain(format!(
            "Re z = {} is outside the half-plane Re z > {d_hom}",
            z.re
        )));
    }
    let d = nonnegative_samples(f, lap)?;
    let w: Vec<Complex64> = d
        .iter()
        .map(|&v| if v == 0.0 { Complex64::new(0.0, 0.0) } else { (2.0 * z * v.ln()).exp() })
        .collect();
    let parts = lap.per_block(|m| m.eigen_expectations(&w))?;
    let mut trace = Complex64::new(0.0, 0.0);
    for (pairs, mult) in parts {
        let block: Complex64 = pairs
            .iter()
            .map(|&(l, e)| (-(z / 2.0) * (1.0 - l).ln()).exp() * e)
            .sum();
        trace += block * mult as f64;
    }
    let integral: Complex64 = w.iter().sum::<Complex64>() * lap.sample_volume();
    let factor = gamma(d_hom / 2.0 + 1.0) * gamma_complex((z - d_hom) / 2.0) / gamma_complex(z / 2.0);
    let expected = factor * integral * c_g;
    let deviation = if expected.norm() == 0.0 && trace.norm() == 0.0 {
        0.0
    } else {
        (trace / expected - 1.0).norm()
    };
    Ok(ZetaReport {
        z_re: z.re,
        z_im: z.im,
        trace_re: trace.re,
        trace_im: trace.im,
        expected_re: expected.re,
        expected_im: expected.im,
        deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnesReport {
    pub fitted_constant: f64,
    /// `c_G ∫ f` by the midpoint rule on the grid.
    pub target: f64,
    pub fit: Option<AsymptoticFit>,
    pub spectrum: SpectralReport,
}

/// Fitted `lim (n+1) μ(n)` of `(1−Δ)^{−d/4} M_f (1−Δ)^{−d/4}` against `c_G ∫ f`.
pub fn connes_trace_check(
    f: &FunctionSpec,
    lap: &DiscreteOperator,
    d_hom: f64,
    c_g: f64,
    window: FitWindow,
    method: SpectrumMethod,
) -> Result<ConnesReport> {
    let d = nonnegative_samples(f, lap)?;
    let target = c_g * d.iter().sum::<f64>() * lap.sample_volume();
    let values = if d.iter().all(|&v| v == 0.0) {
        vec![0.0; window.hi + 1]
    } else {
        sandwich_spectrum(f, d_hom, Variant::Bessel, lap, method)?
    };
    let spectrum = SpectralReport::new("J^(-d/2)·M_f·J^(-d/2)", values)?;
    if target == 0.0 {
        return Ok(ConnesReport {
            fitted_constant: 0.0,
            target,
            fit: None,
            spectrum,
        });
    }
    let fit = asymptotic_fit(&spectrum, 1.0, window, Some(target))?;
    Ok(ConnesReport {
        fitted_constant: fit.fitted_constant,
        target,
        fit: Some(fit),
        spectrum,
    })
}

/// Which estimate of the Cwikel theorem is tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CwikelCase {
    /// `‖M_f (−Δ)^{−d/2p}‖_{p,∞} ≤ c ‖f‖_{L_p}`, `p > 2`.
    Lebesgue { p: f64 },
    /// `‖M_f (1−Δ)^{−d/2p}‖_{p,∞} ≤ c ‖f‖_{ℓ_p(L_q)}`, `p < 2 < q`.
    Mixed { p: f64, q: f64 },
    /// `‖M_f (1−Δ)^{−d/4}‖_{2,∞} ≤ c ‖f‖_{ℓ_{2,log}(L_q)}`, `q > 2`.
    Logarithmic { q: f64 },
}

impl CwikelCase {
    fn check(self) -> Result<()> {
        let ok = match self {
            Self::Lebesgue { p } => p > 2.0 && p.is_finite(),
            Self::Mixed { p, q } => p > 0.0 && p < 2.0 && q > 2.0,
            Self::Logarithmic { q } => q > 2.0,
        };
        if !ok {
            return Err(Error::Config(format!("exponents outside the range of the estimate: {self:?}")));
        }
        Ok(())
    }

    pub fn p(self) -> f64 {
        match self {
            Self::Lebesgue { p } | Self::Mixed { p, .. } => p,
            Self::Logarithmic { .. } => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwikelRow {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, defined as 0 when `lhs = 0`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwikelTable {
    pub case: CwikelCase,
    pub rows: Vec<CwikelRow>,
    pub sup_ratio: f64,
}

/// Weak-Schatten norm of `M_f g(−Δ)` against the function-space norm of
/// `f` for every member of `family`.
pub fn cwikel_ratio_experiment(
    family: &[FunctionSpec],
    case: CwikelCase,
    alg: &StratifiedAlgebra,
    lap: &DiscreteOperator,
    covering: Option<&Covering>,
) -> Result<CwikelTable> {
    case.check()?;
    let p = case.p();
    let d_hom = alg.homogeneous_dimension() as f64;
    // μ(M_f G)² are the eigenvalues of M_{|f|} G² M_{|f|}.
    let (g, deflate) = match case {
        CwikelCase::Lebesgue { .. } => (ScalarFunction::Riesz { s: d_hom / p }, true),
        _ => (ScalarFunction::Bessel { s: d_hom / p }, false),
    };
    let squared = operator_function(&lap.scale(-1.0), &g, deflate)?;
    let needs_covering = || covering.ok_or_else(|| Error::Config("this case needs a covering".into()));
    let mut rows = Vec::with_capacity(family.len());
    for (index, f) in family.iter().enumerate() {
        let d: Vec<f64> = multiplier_samples(f, lap)?.iter().map(|v| v.abs()).collect();
        let mu: Vec<f64> = squared
            .diag_sandwich(d)?
            .eigenvalues()?
            .into_iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        let lhs = schatten_norms(&SpectralReport::new("M_f·G", mu)?, p)?.weak;
        let sampled = SampledFunction::on_grid(&lap.grid, |x| f.eval(x));
        let rhs = match case {
            CwikelCase::Lebesgue { p } => sampled.lp_norm(p),
            CwikelCase::Mixed { p, q } => mixed_norm(alg, &sampled, needs_covering()?, p, q)?,
            CwikelCase::Logarithmic { q } => mixed_norm_log(alg, &sampled, needs_covering()?, 2.0, q)?,
        };
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        rows.push(CwikelRow { index, lhs, rhs, ratio });
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(CwikelTable { case, rows, sup_ratio })
}
