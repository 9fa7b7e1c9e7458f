//! Product-convolution operators `J^{−k/2} M_f J^{−k/2}` and `M_f J^{−k/2}`
//! and their spectra.

use std::str::FromStr;
use std::sync::Arc;

use faer::{ColMut, Mat, Side};
use faer::linalg::solvers::Solve;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::linalg::lanczos::{largest_eigenvalues, LanczosOptions};
use crate::operator::{
    multiplier_samples, operator_function, DiscreteOperator, Matrix, ScalarFunction, Storage,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `(1−Δ)^{−k/4} M_f (1−Δ)^{−k/4}`.
    Bessel,
    /// `(−Δ)^{−k/4} M_f (−Δ)^{−k/4}` with the kernel projected out.
    RieszDeflated,
    /// `M_f (1−Δ)^{−k/4}`.
    LeftMultiplier,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bessel" => Ok(Self::Bessel),
            "riesz-deflated" => Ok(Self::RieszDeflated),
            "left-multiplier" => Ok(Self::LeftMultiplier),
            other => Err(Error::Config(format!(
                "unknown variant `{other}` (expected bessel, riesz-deflated or left-multiplier)"
            ))),
        }
    }
}

impl Variant {
    fn power(self, s: f64) -> (ScalarFunction, bool) {
        match self {
            Self::RieszDeflated => (ScalarFunction::Riesz { s }, true),
            _ => (ScalarFunction::Bessel { s }, false),
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("order k must be positive, got {k}")));
    }
    Ok(())
}

/// The product-convolution operator of `f` and `lap`.
pub fn product_convolution(
    f: &FunctionSpec,
    k: f64,
    variant: Variant,
    lap: &DiscreteOperator,
) -> Result<DiscreteOperator> {
    check_k(k)?;
    let d = Arc::new(multiplier_samples(f, lap)?);
    let (g, deflate) = variant.power(k / 4.0);
    let root = operator_function(&lap.scale(-1.0), &g, deflate)?;
    match variant {
        Variant::LeftMultiplier => root.map_matrices(format!("M_f·J^(-{k}/2)"), false, true, move |m| {
            Ok(m.scale_rows(&d))
        }),
        _ => root.map_matrices(format!("J^(-{k}/2)·M_f·J^(-{k}/2)"), true, true, move |m| {
            m.scale_cols(&d).matmul(&m)
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumMethod {
    /// Dense eigensolve of every block.
    Dense,
    /// The `count` largest values by Lanczos on Cholesky solves; needs an
    /// even integer `k`.
    Lanczos { count: usize },
}

/// Singular values (descending) of the product-convolution operator.
///
/// For `f ≥ 0` the sandwich has the nonzero spectrum of
/// `M_{√f} J^{−k} M_{√f}`, which needs one eigensolve per block; the
/// left-multiplier variant uses `μ(M_f J^{−k/2})² = λ(M_{|f|} J^{−k} M_{|f|})`.
pub fn sandwich_spectrum(
    f: &FunctionSpec,
    k: f64,
    variant: Variant,
    lap: &DiscreteOperator,
    method: SpectrumMethod,
) -> Result<Vec<f64>> {
    check_k(k)?;
    let d = multiplier_samples(f, lap)?;
    let nonneg = d.iter().all(|&v| v >= 0.0);
    let (w, take_root) = match variant {
        Variant::LeftMultiplier => (d.iter().map(|v| v.abs()).collect::<Vec<_>>(), true),
        _ if nonneg => (d.iter().map(|v| v.sqrt()).collect(), false),
        _ => {
            if let SpectrumMethod::Lanczos { .. } = method {
                return Err(Error::Input("the Lanczos path needs f ≥ 0".into()));
            }
            return product_convolution(f, k, variant, lap)?.singular_values();
        }
    };
    let mut vals = match method {
        SpectrumMethod::Dense => {
            let (g, deflate) = variant.power(k / 2.0);
            let inner = operator_function(&lap.scale(-1.0), &g, deflate)?;
            let mut v = inner.diag_sandwich(w)?.eigenvalues()?;
            v.reverse();
            v
        }
        SpectrumMethod::Lanczos { count } => {
            if variant == Variant::RieszDeflated {
                return Err(Error::Input("the Lanczos path supports the Bessel variants only".into()));
            }
            let m = k / 2.0;
            if m.fract() != 0.0 {
                return Err(Error::Input(format!("the Lanczos path needs an even integer k, got {k}")));
            }
            lanczos_top(lap, &w, m as usize, count)?
        }
    };
    for v in vals.iter_mut() {
        *v = v.max(0.0);
        if take_root {
            *v = v.sqrt();
        }
    }
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

struct BlockTop {
    values: Vec<f64>,
    mult: usize,
    /// Every eigenvalue above this level is in `values`.
    complete_above: f64,
}

/// Largest `count` eigenvalues of `diag(w) (1−Δ)^{−m} diag(w)` over all
/// blocks. Each block first yields a few leading values; blocks that may
/// hold more values above the running `count`-th largest are revisited
/// with that level as a floor.
fn lanczos_top(lap: &DiscreteOperator, w: &[f64], m: usize, count: usize) -> Result<Vec<f64>> {
    let blocks: Vec<(Box<dyn Fn() -> Result<Matrix> + Send + Sync + '_>, usize)> = match &lap.storage {
        Storage::Single(mat) => vec![(Box::new(move || Ok(mat.clone())), 1)],
        Storage::Blocks(fam) => fam
            .distinct_modes()
            .into_iter()
            .map(|(mode, mult)| {
                let f: Box<dyn Fn() -> Result<Matrix> + Send + Sync> = Box::new(move || fam.block(mode));
                (f, mult)
            })
            .collect(),
    };
    let first = count.clamp(1, 64);
    let solve = |idx: usize, want: usize, floor: Option<f64>| -> Result<Vec<f64>> {
        let lap_b = blocks[idx].0()?;
        block_lanczos(&lap_b, w, m, want, floor)
    };
    let mut tops = (0..blocks.len())
        .into_par_iter()
        .map(|i| {
            let values = solve(i, first, None)?;
            // Fewer values than requested means the block was exhausted.
            let exhausted = values.len() < first;
            Ok(BlockTop {
                complete_above: if exhausted { f64::NEG_INFINITY } else { f64::INFINITY },
                values,
                mult: blocks[i].1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for _ in 0..8 {
        let merged = merge(&tops);
        let level = if merged.len() >= count {
            merged[count - 1]
        } else {
            tops.iter().filter_map(|t| t.values.last().copied()).fold(f64::INFINITY, f64::min)
        };
        let redo: Vec<usize> = (0..tops.len())
            .filter(|&i| {
                let t = &tops[i];
                t.complete_above > level && t.values.last().is_some_and(|&v| v > level)
            })
            .collect();
        if redo.is_empty() {
            let mut out = merged;
            out.truncate(count);
            return Ok(out);
        }
        let redone = redo
            .par_iter()
            .map(|&i| solve(i, tops[i].values.len(), Some(level)))
            .collect::<Result<Vec<_>>>()?;
        for (&i, values) in redo.iter().zip(redone) {
            tops[i].values = values;
            tops[i].complete_above = level;
        }
    }
    Err(Error::Eigen("block Lanczos selection did not settle".into()))
}

fn merge(tops: &[BlockTop]) -> Vec<f64> {
    let mut all: Vec<f64> = tops
        .iter()
        .flat_map(|t| t.values.iter().flat_map(move |&v| std::iter::repeat_n(v, t.mult)))
        .collect();
    all.sort_by(|a, b| b.total_cmp(a));
    all
}

fn block_lanczos(lap: &Matrix, w: &[f64], m: usize, want: usize, floor: Option<f64>) -> Result<Vec<f64>> {
    let a = lap.to_dense_complex()?;
    let n = a.nrows();
    let shifted = Mat::<Complex64>::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - a[(i, j)]
    });
    drop(a);
    let llt = shifted
        .llt(Side::Lower)
        .map_err(|e| Error::Eigen(format!("Cholesky of 1 − Δ failed: {e:?}")))?;
    drop(shifted);
    let apply = |x: &[Complex64]| {
        let mut y: Vec<Complex64> = x.iter().zip(w).map(|(v, s)| v * s).collect();
        for _ in 0..m {
            llt.solve_in_place(ColMut::from_slice_mut(&mut y).as_mat_mut());
        }
        y.iter_mut().zip(w).for_each(|(v, s)| *v *= s);
        y
    };
    let opts = LanczosOptions {
        max_dim: (4 * want + 200).min(n),
        tol: 1e-9,
        ..LanczosOptions::default()
    };
    largest_eigenvalues(n, apply, want, floor, opts)
}
