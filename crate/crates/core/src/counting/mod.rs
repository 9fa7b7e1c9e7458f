//! Negative-eigenvalue counting, the Birman–Schwinger principle at matrix
//! level and the semiclassical sweep for `−h²Δ + V`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::grid::SampledFunction;
use crate::linalg::ldlt::{sparse_inertia, LdltError};
use crate::linalg::CsrMatrix;
use crate::operator::{multiplier_samples, DiscreteOperator, Matrix, DENSE_LIMIT};
use crate::spectral::{asymptotic_fit, AsymptoticFit, FitWindow, SpectralReport};

/// Eigenvalues this close to a counting threshold count as a collision.
pub const COLLISION_TOL: f64 = 1e-12;
/// Shift applied to a threshold that collides with an eigenvalue.
pub const THRESHOLD_SHIFT: f64 = 1e-10;
/// Relative pivot size below which the `LDLᵀ` factorization gives up.
const PIVOT_TOL: f64 = 1e-12;
const BS_RETRIES: u64 = 16;

/// Number of eigenvalues of a Hermitian operator below `threshold`.
///
/// Real sparse matrices are counted by the inertia of an `LDLᵀ`
/// factorization of `A − threshold`; complex sparse ones through their
/// real form `[[Re, −Im], [Im, Re]]`, which doubles every eigenvalue.
/// Dense matrices, and sparse ones whose factorization breaks down, are
/// counted from a full eigensolve.
pub fn negative_count(op: &DiscreteOperator, threshold: f64) -> Result<usize> {
    if !op.hermitian {
        return Err(Error::Input(format!("operator `{}` is not Hermitian", op.label)));
    }
    let parts = op.per_block(|m| matrix_negative_count(m, threshold))?;
    Ok(parts.into_iter().map(|(c, mult)| c * mult).sum())
}

/// [`negative_count`] for a single Hermitian matrix.
pub fn matrix_negative_count(m: &Matrix, threshold: f64) -> Result<usize> {
    match m {
        Matrix::Sparse(a) => sparse_count(a, threshold, m),
        Matrix::SparseComplex(a) => Ok(sparse_count(&realify(a)?, threshold, m)? / 2),
        _ => dense_count(m, threshold),
    }
}

fn dense_count(m: &Matrix, threshold: f64) -> Result<usize> {
    let vals = m.eigenvalues()?;
    let mut t = threshold;
    if vals.iter().any(|v| (v - t).abs() < COLLISION_TOL) {
        log::warn!("threshold {t} is an eigenvalue; counting below {}", t + THRESHOLD_SHIFT);
        t += THRESHOLD_SHIFT;
    }
    Ok(vals.iter().filter(|&&v| v < t).count())
}

fn sparse_count(a: &CsrMatrix<f64>, threshold: f64, original: &Matrix) -> Result<usize> {
    let n = a.nrows();
    let shifted = |t: f64| a.add(&CsrMatrix::from_diagonal(&vec![-t; n]));
    let breakdown = match sparse_inertia(&shifted(threshold)?, PIVOT_TOL) {
        Ok(i) => return Ok(i.negative),
        Err(LdltError::NotSquare) => return Err(Error::Shape("inertia of a non-square matrix".into())),
        Err(LdltError::Breakdown { row, pivot }) => format!("pivot {pivot:e} at row {row}"),
    };
    if original.dim() <= DENSE_LIMIT {
        log::info!("LDLᵀ breakdown ({breakdown}); falling back to a dense eigensolve");
        return dense_count(original, threshold);
    }
    log::warn!("LDLᵀ breakdown ({breakdown}); counting below {}", threshold + THRESHOLD_SHIFT);
    sparse_inertia(&shifted(threshold + THRESHOLD_SHIFT)?, PIVOT_TOL)
        .map(|i| i.negative)
        .map_err(|e| Error::Eigen(format!("LDLᵀ failed after a threshold shift: {e:?}")))
}

fn realify(a: &CsrMatrix<Complex64>) -> Result<CsrMatrix<f64>> {
    let n = a.nrows();
    let triplets = a.triplets().flat_map(|(i, j, z)| {
        [(i, j, z.re), (i + n, j + n, z.re), (i, j + n, -z.im), (i + n, j, z.im)]
    });
    Ok(CsrMatrix::from_triplets(2 * n, 2 * n, triplets)?.prune(0.0))
}

/// Both sides of the Birman–Schwinger principle
/// `#{T+V < −λ} = #{−(T+λ)^{−1/2} V (T+λ)^{−1/2} > 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirmanSchwinger {
    /// The `λ` actually used, after any re-randomization.
    pub lambda: f64,
    pub lhs: usize,
    pub rhs: usize,
    pub equal: bool,
    pub retries: u64,
}

pub fn birman_schwinger_check(t: &Matrix, v: &Matrix, lambda: f64) -> Result<BirmanSchwinger> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    let tol = 1e-10 * t.max_abs().max(1.0);
    if t.hermitian_defect() > tol || v.hermitian_defect() > tol {
        return Err(Error::Input("T and V must be Hermitian".into()));
    }
    let t_vals = t.eigenvalues()?;
    if t_vals.first().is_some_and(|&e| e < -tol) {
        return Err(Error::Input(format!("T must be nonnegative, smallest eigenvalue {}", t_vals[0])));
    }
    let sum = t.add(v)?.eigenvalues()?;
    let mut rng = ChaCha8Rng::seed_from_u64(lambda.to_bits());
    let mut lam = lambda;
    for retries in 0..=BS_RETRIES {
        let root = t.map_spectrum(|x| Ok((x + lam).powf(-0.5)))?;
        let bs = root.matmul(v)?.matmul(&root)?.scale(-1.0).eigenvalues()?;
        let collides = sum.iter().any(|e| (e + lam).abs() < COLLISION_TOL)
            || bs.iter().any(|e| (e - 1.0).abs() < COLLISION_TOL);
        if collides {
            lam = lambda * rng.random_range(0.9..1.1);
            continue;
        }
        let lhs = sum.iter().filter(|&&e| e < -lam).count();
        let rhs = bs.iter().filter(|&&e| e > 1.0).count();
        return Ok(BirmanSchwinger {
            lambda: lam,
            lhs,
            rhs,
            equal: lhs == rhs,
            retries,
        });
    }
    Err(Error::Eigen(format!("threshold collisions persisted over {BS_RETRIES} choices of λ")))
}

/// A real potential with `V = V₊ − V₋`, sampled like a multiplier of some
/// operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSplit {
    pub v: SampledFunction,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Length of the axes integrated out by a block decomposition (1 for
    /// full grids).
    pub extent: f64,
}

impl PotentialSplit {
    pub fn new(v: SampledFunction) -> Self {
        let plus = v.values.iter().map(|&x| (x.abs() + x) / 2.0).collect();
        let minus = v.values.iter().map(|&x| (x.abs() - x) / 2.0).collect();
        Self {
            v,
            plus,
            minus,
            extent: 1.0,
        }
    }

    /// Samples `f` where `op` expects its multipliers.
    pub fn for_operator(f: &FunctionSpec, op: &DiscreteOperator) -> Result<Self> {
        let values = multiplier_samples(f, op)?;
        let (lattice, extent) = match op.blocks() {
            Some(b) => (
                op.grid.without_axis(b.axis())?.lattice(),
                2.0 * op.grid.half_widths()[b.axis()],
            ),
            None => (op.grid.lattice(), 1.0),
        };
        let mut split = Self::new(SampledFunction::new(lattice, values)?);
        split.extent = extent;
        Ok(split)
    }

    /// `∫ V₋^a` over the whole box.
    pub fn negative_part_integral(&self, a: f64) -> f64 {
        self.minus.iter().map(|m| m.powf(a)).sum::<f64>() * self.v.cell_volume() * self.extent
    }
}

/// `−h²Δ + M_V`.
pub fn schrodinger_operator(lap: &DiscreteOperator, v: &PotentialSplit, h: f64) -> Result<DiscreteOperator> {
    let mut op = lap.scale(-h * h).add_diagonal(v.v.values.clone())?;
    op.label = format!("-{h}²Δ + V");
    Ok(op)
}

/// Negative-eigenvalue counts of `−h²Δ + V` over a list of `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub h_list: Vec<f64>,
    pub counts: Vec<usize>,
    /// `h^{d} N(h)`.
    pub scaled: Vec<f64>,
    /// `c_G ∫ V₋^{d/2}`.
    pub target: f64,
    /// `scaled / target − 1`.
    pub deviations: Vec<f64>,
    pub d_hom: f64,
    /// Whether `d_hom > 2`, the range of the semiclassical law.
    pub law_applies: bool,
}

impl CountReport {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "h,N,scaled,target,deviation")?;
        for i in 0..self.h_list.len() {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e}",
                self.h_list[i], self.counts[i], self.scaled[i], self.target, self.deviations[i]
            )?;
        }
        Ok(())
    }

    /// `|deviation|` strictly decreases along the sweep.
    pub fn deviation_decreasing(&self) -> bool {
        self.deviations.windows(2).all(|w| w[1].abs() < w[0].abs())
    }
}

pub fn semiclassical_sweep(
    lap: &DiscreteOperator,
    v: &PotentialSplit,
    h_list: &[f64],
    d_hom: f64,
    c_g: f64,
) -> Result<CountReport> {
    if let Some(h) = h_list.iter().find(|&&h| !(h > 0.0)) {
        return Err(Error::Domain(format!("h must be positive, got {h}")));
    }
    let counts = h_list
        .par_iter()
        .map(|&h| negative_count(&schrodinger_operator(lap, v, h)?, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let target = c_g * v.negative_part_integral(d_hom / 2.0);
    let scaled: Vec<f64> = h_list.iter().zip(&counts).map(|(h, &n)| h.powf(d_hom) * n as f64).collect();
    let deviations = scaled
        .iter()
        .map(|s| if target == 0.0 { 0.0 } else { s / target - 1.0 })
        .collect();
    Ok(CountReport {
        h_list: h_list.to_vec(),
        counts,
        scaled,
        target,
        deviations,
        d_hom,
        law_applies: d_hom > 2.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingRow {
    pub h: f64,
    pub count: usize,
    /// `h^p · #{μ > h}`.
    pub scaled: f64,
}

/// The counting estimate `h^p #{μ > h}` next to the fitted `(n+1)μ(n)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingConsistency {
    pub fit: AsymptoticFit,
    pub rows: Vec<CountingRow>,
    /// Median of the counting column.
    pub counting_constant: f64,
    pub relative_difference: f64,
    /// The fit's residual spread plus the largest rounding factor
    /// `1 − (μ(n+1)/μ(n))^{p/2}` from placing `h` between two values.
    pub tolerance: f64,
    pub agree: bool,
}

/// Compares both estimators over the fit window. Thresholds are the
/// geometric midpoints `√(μ(n)μ(n+1))` of consecutive distinct values.
pub fn counting_vs_singular_values(report: &SpectralReport, p: f64, window: FitWindow) -> Result<CountingConsistency> {
    let fit = asymptotic_fit(report, p, window, None)?;
    let mu = &report.singular_values;
    let last = window.hi.min(mu.len() - 2);
    let mut rows = Vec::new();
    let mut rounding: f64 = 0.0;
    for n in window.lo..=last {
        if mu[n + 1] >= mu[n] {
            continue;
        }
        let h = (mu[n] * mu[n + 1]).sqrt();
        let count = mu.partition_point(|&m| m > h);
        rows.push(CountingRow {
            h,
            count,
            scaled: h.powf(p) * count as f64,
        });
        rounding = rounding.max(1.0 - (mu[n + 1] / mu[n]).powf(p / 2.0));
    }
    let scaled: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
    let counting_constant = crate::numerics::median(&scaled)
        .ok_or_else(|| Error::Fit("no distinct consecutive values in the window".into()))?;
    let relative_difference = (counting_constant / fit.fitted_constant - 1.0).abs();
    let tolerance = fit.residual_spread + rounding;
    Ok(CountingConsistency {
        agree: relative_difference <= tolerance,
        fit,
        rows,
        counting_constant,
        relative_difference,
        tolerance,
    })
}
