//! Discretized vector fields, sub-Laplacians, multipliers and functions of
//! them on periodic coordinate boxes.

mod matrix;
mod stencil;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Polynomial, StratifiedAlgebra, VectorField};
use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::grid::{GridSpec, SampledFunction};
use crate::linalg::{CsrMatrix, Scalar};
use crate::numerics::gamma;

pub use matrix::{Matrix, DENSE_LIMIT};
pub use stencil::{mode_angle, Scheme};

/// One Fourier mode of the decomposition axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockMode {
    /// DFT index `m ∈ [0, N)`.
    pub index: usize,
    /// Angle `2πm/N` folded into `(−π, π]`.
    pub theta: f64,
}

type BlockBuilder = Arc<dyn Fn(BlockMode) -> Result<Matrix> + Send + Sync>;

/// Block-diagonal operator indexed by the Fourier modes of one axis.
/// Blocks are produced on demand so that families too large to hold in
/// memory can still be streamed through eigensolvers.
#[derive(Clone)]
pub struct BlockFamily {
    axis: usize,
    modes: Vec<BlockMode>,
    builder: BlockBuilder,
    /// The block at `−θ` is the complex conjugate of the block at `θ`.
    conjugate_symmetric: bool,
}

impl std::fmt::Debug for BlockFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockFamily")
            .field("axis", &self.axis)
            .field("modes", &self.modes.len())
            .field("conjugate_symmetric", &self.conjugate_symmetric)
            .finish()
    }
}

impl BlockFamily {
    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn modes(&self) -> &[BlockMode] {
        &self.modes
    }

    pub fn is_conjugate_symmetric(&self) -> bool {
        self.conjugate_symmetric
    }

    pub fn block(&self, mode: BlockMode) -> Result<Matrix> {
        (self.builder)(mode)
    }

    /// Modes whose spectra must be computed, each with its multiplicity
    /// (2 for a conjugate pair represented by its `θ > 0` member).
    pub fn distinct_modes(&self) -> Vec<(BlockMode, usize)> {
        if !self.conjugate_symmetric {
            return self.modes.iter().map(|&m| (m, 1)).collect();
        }
        self.modes
            .iter()
            .filter(|m| m.theta >= 0.0)
            .map(|&m| {
                let paired = m.theta > 0.0
                    && self.modes.iter().any(|o| (o.theta + m.theta).abs() < 1e-12);
                (m, if paired { 2 } else { 1 })
            })
            .collect()
    }

    /// Family with each block transformed by `f`; `keeps_conjugation` states
    /// whether `f` commutes with complex conjugation.
    pub fn map(
        &self,
        keeps_conjugation: bool,
        f: impl Fn(BlockMode, Matrix) -> Result<Matrix> + Send + Sync + 'static,
    ) -> BlockFamily {
        let inner = Arc::clone(&self.builder);
        BlockFamily {
            axis: self.axis,
            modes: self.modes.clone(),
            builder: Arc::new(move |m| f(m, inner(m)?)),
            conjugate_symmetric: self.conjugate_symmetric && keeps_conjugation,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Storage {
    Single(Matrix),
    Blocks(BlockFamily),
}

/// Operator on the grid of a periodic box, stored as one matrix or as a
/// family of Fourier blocks.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub storage: Storage,
    pub grid: GridSpec,
    pub hermitian: bool,
    pub label: String,
}

/// Tolerance of the hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-10;

impl DiscreteOperator {
    pub fn new(matrix: Matrix, grid: GridSpec, label: impl Into<String>) -> Result<Self> {
        if matrix.dim() != grid.len() {
            return Err(Error::Shape(format!(
                "matrix of dimension {} on a grid with {} points",
                matrix.dim(),
                grid.len()
            )));
        }
        let hermitian = matrix.hermitian_defect() < HERMITIAN_TOL;
        Ok(Self {
            storage: Storage::Single(matrix),
            grid,
            hermitian,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn matrix(&self) -> Option<&Matrix> {
        match &self.storage {
            Storage::Single(m) => Some(m),
            Storage::Blocks(_) => None,
        }
    }

    pub fn blocks(&self) -> Option<&BlockFamily> {
        match &self.storage {
            Storage::Single(_) => None,
            Storage::Blocks(b) => Some(b),
        }
    }

    fn with_storage(&self, storage: Storage, label: String) -> Self {
        Self {
            storage,
            grid: self.grid.clone(),
            hermitian: self.hermitian,
            label,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let storage = match &self.storage {
            Storage::Single(m) => Storage::Single(m.scale(s)),
            Storage::Blocks(b) => Storage::Blocks(b.map(true, move |_, m| Ok(m.scale(s)))),
        };
        self.with_storage(storage, format!("{s}·{}", self.label))
    }

    /// Applies `f` to the single matrix or, lazily, to every block.
    /// `keeps_conjugation` states whether `f` commutes with complex
    /// conjugation of the blocks.
    pub fn map_matrices(
        &self,
        label: impl Into<String>,
        hermitian: bool,
        keeps_conjugation: bool,
        f: impl Fn(Matrix) -> Result<Matrix> + Send + Sync + 'static,
    ) -> Result<Self> {
        let storage = match &self.storage {
            Storage::Single(m) => Storage::Single(f(m.clone())?),
            Storage::Blocks(b) => Storage::Blocks(b.map(keeps_conjugation, move |_, m| f(m))),
        };
        let mut out = self.with_storage(storage, label.into());
        out.hermitian = hermitian;
        Ok(out)
    }

    /// `diag(d) A diag(d)`, with `d` sampled on the grid (or on the reduced
    /// grid of a block family).
    pub fn diag_sandwich(&self, d: Vec<f64>) -> Result<Self> {
        let label = format!("M·{}·M", self.label);
        self.map_matrices(label, self.hermitian, true, move |m| {
            check_len(&d, m.dim())?;
            Ok(m.diag_sandwich(&d))
        })
    }

    /// `A + M_d`, with `d` sampled like [`DiscreteOperator::diag_sandwich`].
    pub fn add_diagonal(&self, d: Vec<f64>) -> Result<Self> {
        let label = format!("{} + M", self.label);
        self.map_matrices(label, self.hermitian, true, move |m| m.add_diagonal(&d))
    }

    /// Volume represented by one multiplier sample: the grid cell, times
    /// the length of the decomposition axis for block families.
    pub fn sample_volume(&self) -> f64 {
        let c = self.grid.cell_volume();
        match self.blocks() {
            Some(b) => c * self.grid.dims()[b.axis()] as f64,
            None => c,
        }
    }

    /// Operator product; block families must share their decomposition.
    pub fn compose(&self, other: &DiscreteOperator) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Shape("operators live on different grids".into()));
        }
        let storage = match (&self.storage, &other.storage) {
            (Storage::Single(a), Storage::Single(b)) => Storage::Single(a.matmul(b)?),
            (Storage::Blocks(a), Storage::Blocks(b)) if a.axis == b.axis && a.modes == b.modes => {
                let rhs = b.clone();
                Storage::Blocks(a.map(b.conjugate_symmetric, move |mode, m| m.matmul(&rhs.block(mode)?)))
            }
            _ => {
                return Err(Error::DecompositionInvalid(
                    "cannot compose a block family with a differently stored operator".into(),
                ))
            }
        };
        let mut out = self.with_storage(storage, format!("{}·{}", self.label, other.label));
        out.hermitian = false;
        Ok(out)
    }

    /// Eigenvalues of a Hermitian operator, ascending. Blocks are solved in
    /// parallel and merged by sorting.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.block_spectra(|m| m.eigenvalues())
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let mut v = self.block_spectra(|m| m.singular_values())?;
        v.reverse();
        Ok(v)
    }

    /// Evaluates `f` on the single matrix or on every distinct block, in
    /// parallel, returning each result with its multiplicity.
    pub fn per_block<R: Send>(&self, f: impl Fn(&Matrix) -> Result<R> + Sync) -> Result<Vec<(R, usize)>> {
        match &self.storage {
            Storage::Single(m) => Ok(vec![(f(m)?, 1)]),
            Storage::Blocks(b) => b
                .distinct_modes()
                .into_par_iter()
                .map(|(mode, mult)| Ok((f(&b.block(mode)?)?, mult)))
                .collect(),
        }
    }

    /// Applies `solve` to every block (or to the single matrix) and merges
    /// the results into one ascending list.
    pub fn block_spectra(&self, solve: impl Fn(&Matrix) -> Result<Vec<f64>> + Sync) -> Result<Vec<f64>> {
        let mut all: Vec<f64> = self
            .per_block(solve)?
            .into_iter()
            .flat_map(|(vals, mult)| std::iter::repeat_n(vals, mult).flatten())
            .collect();
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Dense or sparse matrix of the full operator, assembling a block
    /// family back into grid ordering when needed.
    pub fn to_matrix(&self) -> Result<Matrix> {
        match &self.storage {
            Storage::Single(m) => Ok(m.clone()),
            Storage::Blocks(b) => assemble_from_blocks(b, &self.grid),
        }
    }

    /// Writes the matrix as `row col value` lines (0-based), preceded by a
    /// `rows cols nnz` header. Only real sparse operators are exported.
    pub fn write_coo(&self, w: impl std::io::Write) -> Result<()> {
        match self.matrix() {
            Some(Matrix::Sparse(m)) => Ok(m.write_coo(w)?),
            _ => Err(Error::Input(format!(
                "operator `{}` is not a real sparse matrix; only those can be exported",
                self.label
            ))),
        }
    }
}

fn check_len(d: &[f64], n: usize) -> Result<()> {
    if d.len() != n {
        return Err(Error::Shape(format!("diagonal of length {} for dimension {n}", d.len())));
    }
    Ok(())
}

/// Inverse DFT along the block axis: `A[(r, j), (r', j')] = (1/N) Σ_m
/// e^{iθ_m (j − j')} B_m[r, r']`.
fn assemble_from_blocks(b: &BlockFamily, grid: &GridSpec) -> Result<Matrix> {
    let n = grid.len();
    if n > DENSE_LIMIT {
        return Err(Error::Input(format!("dimension {n} exceeds the dense limit {DENSE_LIMIT}")));
    }
    let a = b.axis;
    let na = grid.dims()[a];
    let lattice = grid.lattice();
    let reduced = lattice.without_axis(a);
    let blocks = b
        .modes
        .iter()
        .map(|&m| b.block(m)?.to_dense_complex())
        .collect::<Result<Vec<_>>>()?;
    let split = |flat: usize| {
        let mut idx = lattice.unravel(flat);
        let j = idx.remove(a);
        (reduced.ravel(&idx), j)
    };
    let mut out = faer::Mat::<Complex64>::zeros(n, n);
    for p in 0..n {
        let (r, j) = split(p);
        for q in 0..n {
            let (rq, jq) = split(q);
            let mut acc = Complex64::new(0.0, 0.0);
            for (mode, blk) in b.modes.iter().zip(&blocks) {
                let phase = 2.0 * std::f64::consts::PI * (mode.index as f64) * (j as f64 - jq as f64) / na as f64;
                acc += Complex64::from_polar(1.0, phase) * blk[(r, rq)];
            }
            out[(p, q)] = acc / na as f64;
        }
    }
    Ok(Matrix::DenseComplex(out))
}

/// Per-axis first and second derivative matrices in the full or reduced
/// index space; the block axis is a scalar symbol.
struct AxisOps<T> {
    first: Vec<CsrMatrix<T>>,
    second: Vec<CsrMatrix<T>>,
}

fn lift<T: Scalar>(m: &CsrMatrix<f64>) -> CsrMatrix<T> {
    let trip: Vec<(usize, usize, T)> = m.triplets().map(|(i, j, v)| (i, j, T::from_re(v))).collect();
    CsrMatrix::from_triplets(m.nrows(), m.ncols(), trip).expect("same shape")
}

/// `I ⊗ … ⊗ m ⊗ … ⊗ I` with `m` at position `axis` (last axis fastest).
fn axis_operator<T: Scalar>(dims: &[usize], axis: usize, m: &CsrMatrix<T>) -> CsrMatrix<T> {
    let before: usize = dims[..axis].iter().product();
    let after: usize = dims[axis + 1..].iter().product();
    CsrMatrix::<T>::identity(before).kron(m).kron(&CsrMatrix::identity(after))
}

fn full_axis_ops(grid: &GridSpec, scheme: Scheme) -> AxisOps<f64> {
    let dims = grid.dims();
    let first = (0..grid.ndim())
        .map(|a| axis_operator(dims, a, &scheme.derivative_matrix(dims[a], grid.spacing(a))))
        .collect();
    let second = (0..grid.ndim())
        .map(|a| axis_operator(dims, a, &scheme.second_matrix(dims[a], grid.spacing(a))))
        .collect();
    AxisOps { first, second }
}

fn reduced_axis_ops(grid: &GridSpec, scheme: Scheme, axis: usize, theta: f64) -> AxisOps<Complex64> {
    let reduced: Vec<usize> = grid
        .dims()
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != axis)
        .map(|(_, &n)| n)
        .collect();
    let size: usize = reduced.iter().product();
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mut r = 0;
    for a in 0..grid.ndim() {
        let h = grid.spacing(a);
        if a == axis {
            let id = CsrMatrix::<Complex64>::identity(size);
            first.push(id.scale(scheme.derivative_symbol(theta, h)));
            second.push(id.scale(Complex64::new(scheme.second_symbol(theta, h), 0.0)));
        } else {
            let n = grid.dims()[a];
            first.push(axis_operator(&reduced, r, &lift(&scheme.derivative_matrix(n, h))));
            second.push(axis_operator(&reduced, r, &lift(&scheme.second_matrix(n, h))));
            r += 1;
        }
    }
    AxisOps { first, second }
}

/// Grid points of the full grid, or of the reduced grid with the block
/// coordinate set to zero.
fn sample_points(grid: &GridSpec, skip: Option<usize>) -> Vec<Vec<f64>> {
    let lattice = grid.lattice();
    match skip {
        None => lattice.points().collect(),
        Some(a) => lattice
            .without_axis(a)
            .points()
            .map(|mut p| {
                p.insert(a, 0.0);
                p
            })
            .collect(),
    }
}

fn check_field(field: &VectorField, grid: &GridSpec) -> Result<()> {
    if field.coefficients.len() != grid.ndim() {
        return Err(Error::Shape(format!(
            "vector field on {} coordinates, grid has {} axes",
            field.coefficients.len(),
            grid.ndim()
        )));
    }
    if let Some((j, _)) = field.support().find(|(j, c)| c.depends_on(*j)) {
        return Err(Error::UnsupportedStencil(format!(
            "coefficient of ∂_{j} depends on coordinate {j}"
        )));
    }
    Ok(())
}

fn sample_poly<T: Scalar>(p: &Polynomial, points: &[Vec<f64>]) -> Vec<T> {
    points.iter().map(|x| T::from_re(p.eval(x))).collect()
}

/// `Σ_j M_{c_j} D_j` together with the squared coefficients of each axis.
fn field_matrix<T: Scalar>(
    field: &VectorField,
    ops: &AxisOps<T>,
    points: &[Vec<f64>],
) -> Result<(CsrMatrix<T>, Vec<(usize, Vec<T>)>)> {
    let n = points.len();
    let mut x = CsrMatrix::<T>::zeros(n, n);
    let mut squares = Vec::new();
    for (j, c) in field.support() {
        let cj: Vec<T> = sample_poly(c, points);
        x = x.add(&ops.first[j].scale_rows(&cj))?;
        squares.push((j, cj.iter().map(|&v| v * v).collect()));
    }
    Ok((x, squares))
}

/// `Σ X²` (central, Fourier) or `−Σ X*X` (forward), with the Fourier
/// Nyquist correction `M_{c_j²}(S_j − D_j²)` on every axis.
fn sublaplacian_matrix<T: Scalar>(
    fields: &[VectorField],
    ops: &AxisOps<T>,
    points: &[Vec<f64>],
    scheme: Scheme,
) -> Result<CsrMatrix<T>> {
    let n = points.len();
    let mut lap = CsrMatrix::<T>::zeros(n, n);
    for field in fields {
        let (x, squares) = field_matrix(field, ops, points)?;
        let term = match scheme {
            Scheme::Forward => x.adjoint().matmul(&x)?.scale(T::from_re(-1.0)),
            Scheme::Central => x.matmul(&x)?,
            // One term c ∂_j with c independent of x_j: M_c commutes with
            // D_j, so X² + M_{c²}(S_j − D_j²) is just M_{c²} S_j.
            Scheme::Fourier if squares.len() == 1 => {
                let (j, c2) = &squares[0];
                ops.second[*j].scale_rows(c2)
            }
            Scheme::Fourier => {
                let mut t = x.matmul(&x)?;
                for (j, c2) in squares {
                    let dd = ops.first[j].matmul(&ops.first[j])?;
                    t = t.add(&ops.second[j].sub(&dd)?.scale_rows(&c2))?;
                }
                t
            }
        };
        lap = lap.add(&term)?;
    }
    // (A + A*)/2 removes rounding asymmetry; the result is exactly Hermitian.
    let adj = lap.adjoint();
    let sym = lap.axpby(T::from_re(0.5), &adj, T::from_re(0.5))?;
    Ok(sym.prune(0.0))
}

/// Matrix of a left-invariant vector field on the grid.
pub fn assemble_vector_field(field: &VectorField, grid: &GridSpec, scheme: Scheme) -> Result<DiscreteOperator> {
    check_field(field, grid)?;
    let ops = full_axis_ops(grid, scheme);
    let points = sample_points(grid, None);
    let (x, _) = field_matrix(field, &ops, &points)?;
    let mut op = DiscreteOperator::new(Matrix::Sparse(x), grid.clone(), "X_h")?;
    op.hermitian = false;
    Ok(op)
}

fn check_grid_for(alg: &StratifiedAlgebra, grid: &GridSpec) -> Result<Vec<VectorField>> {
    if alg.dimension() != grid.ndim() {
        return Err(Error::Shape(format!(
            "algebra `{}` has dimension {}, grid has {} axes",
            alg.name(),
            alg.dimension(),
            grid.ndim()
        )));
    }
    let fields = alg.horizontal_fields();
    for f in &fields {
        check_field(f, grid)?;
    }
    Ok(fields)
}

/// Sub-Laplacian `Δ_h` generated by the first-layer fields.
pub fn assemble_sublaplacian(alg: &StratifiedAlgebra, grid: &GridSpec, scheme: Scheme) -> Result<DiscreteOperator> {
    let fields = check_grid_for(alg, grid)?;
    let ops = full_axis_ops(grid, scheme);
    let points = sample_points(grid, None);
    let lap = sublaplacian_matrix(&fields, &ops, &points, scheme)?;
    DiscreteOperator::new(Matrix::Sparse(lap), grid.clone(), "Δ_h")
}

/// Diagonal multiplication operator `M_f`.
pub fn assemble_multiplier(f: &SampledFunction, grid: &GridSpec) -> Result<DiscreteOperator> {
    if f.lattice.dims != grid.dims() {
        return Err(Error::Shape(format!(
            "function sampled on {:?}, grid is {:?}",
            f.lattice.dims,
            grid.dims()
        )));
    }
    DiscreteOperator::new(
        Matrix::Sparse(CsrMatrix::from_diagonal(&f.values)),
        grid.clone(),
        "M_f",
    )
}

/// Multiplier of `f` restricted to the reduced grid of a block family.
pub fn block_multiplier_diagonal(f: &FunctionSpec, grid: &GridSpec, axis: usize) -> Result<Vec<f64>> {
    f.check_dimension(grid.ndim())?;
    if f.depends_on_axis(axis) {
        return Err(Error::DecompositionInvalid(format!(
            "function varies along the decomposition axis {axis}"
        )));
    }
    Ok(sample_points(grid, Some(axis)).iter().map(|x| f.eval(x)).collect())
}

/// Samples of `f` on the grid of `op`, or on the reduced grid when `op`
/// is a block family.
pub fn multiplier_samples(f: &FunctionSpec, op: &DiscreteOperator) -> Result<Vec<f64>> {
    match op.blocks() {
        Some(b) => block_multiplier_diagonal(f, &op.grid, b.axis()),
        None => {
            f.check_dimension(op.grid.ndim())?;
            Ok(op.grid.lattice().points().map(|x| f.eval(&x)).collect())
        }
    }
}

/// Axis along which no horizontal coefficient varies; the largest such
/// axis is chosen (`t` for the Heisenberg algebra).
pub fn decomposition_axis(alg: &StratifiedAlgebra) -> Option<usize> {
    let fields = alg.horizontal_fields();
    (0..alg.dimension())
        .rev()
        .find(|&a| fields.iter().all(|f| f.coefficients.iter().all(|c| !c.depends_on(a))))
}

/// Sub-Laplacian split into Fourier blocks along the decomposition axis.
/// When `f` is given it must be constant along that axis.
pub fn fourier_block_decompose(
    alg: &StratifiedAlgebra,
    grid: &GridSpec,
    scheme: Scheme,
    f: Option<&FunctionSpec>,
) -> Result<DiscreteOperator> {
    let fields = check_grid_for(alg, grid)?;
    let axis = decomposition_axis(alg).ok_or_else(|| {
        Error::DecompositionInvalid(format!(
            "every coordinate of `{}` appears in a horizontal coefficient",
            alg.name()
        ))
    })?;
    if let Some(f) = f {
        f.check_dimension(grid.ndim())?;
        if f.depends_on_axis(axis) {
            return Err(Error::DecompositionInvalid(format!(
                "function varies along the decomposition axis {axis}"
            )));
        }
    }
    let na = grid.dims()[axis];
    let modes = (0..na)
        .map(|m| BlockMode {
            index: m,
            theta: mode_angle(m, na),
        })
        .collect();
    let points = Arc::new(sample_points(grid, Some(axis)));
    let grid_c = grid.clone();
    let builder: BlockBuilder = Arc::new(move |mode: BlockMode| {
        let ops = reduced_axis_ops(&grid_c, scheme, axis, mode.theta);
        Ok(Matrix::SparseComplex(sublaplacian_matrix(&fields, &ops, &points, scheme)?))
    });
    Ok(DiscreteOperator {
        storage: Storage::Blocks(BlockFamily {
            axis,
            modes,
            builder,
            conjugate_symmetric: true,
        }),
        grid: grid.clone(),
        hermitian: true,
        label: "Δ_h".into(),
    })
}

/// Scalar function applied to the eigenvalues `x` of a Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFunction {
    Identity,
    /// `Σ c_k x^k`.
    Polynomial { coefficients: Vec<f64> },
    /// `(1 + x)^{−s}`; applied to `−Δ` this is `J^{−2s}`.
    Bessel { s: f64 },
    /// `x^{−s}`, singular at 0 unless the kernel is deflated.
    Riesz { s: f64 },
    /// `e^{−s x}`.
    Heat { s: f64 },
}

/// Eigenvalues with `|x|` below this are treated as kernel when deflating.
pub const KERNEL_TOL: f64 = 1e-9;

impl ScalarFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Self::Bessel { s } => (1.0 + x).powf(-s),
            Self::Riesz { s } => x.powf(-s),
            Self::Heat { s } => (-s * x).exp(),
        }
    }

    /// Value on an eigenvalue, deflating the kernel if requested.
    pub fn eval_checked(&self, x: f64, deflate: bool) -> Result<f64> {
        if deflate && x.abs() <= KERNEL_TOL {
            return Ok(0.0);
        }
        let singular = match self {
            Self::Bessel { s } => *s > 0.0 && 1.0 + x <= 0.0,
            Self::Riesz { s } => *s > 0.0 && x <= KERNEL_TOL,
            _ => false,
        };
        if singular {
            return Err(Error::Singular(format!("{self:?} at eigenvalue {x:e}")));
        }
        Ok(self.eval(x))
    }
}

/// `g(A)` by functional calculus on each block; kernel eigenvalues map to
/// zero when `deflate` is set.
pub fn operator_function(op: &DiscreteOperator, g: &ScalarFunction, deflate: bool) -> Result<DiscreteOperator> {
    if !op.hermitian {
        return Err(Error::Input(format!("operator `{}` is not Hermitian", op.label)));
    }
    let label = format!("g({})", op.label);
    let storage = match &op.storage {
        Storage::Single(m) => Storage::Single(m.map_spectrum(|x| g.eval_checked(x, deflate))?),
        Storage::Blocks(b) => {
            let g = g.clone();
            Storage::Blocks(b.map(true, move |_, m| m.map_spectrum(|x| g.eval_checked(x, deflate))))
        }
    };
    Ok(op.with_storage(storage, label))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatTrace {
    pub s: f64,
    pub trace: f64,
    /// `s^{d/2} · trace / (vol · Γ(d/2 + 1))`.
    pub c_hat: f64,
}

/// Heat traces `Tr e^{sΔ}` for several times from one eigensolve.
pub fn heat_traces(lap: &DiscreteOperator, times: &[f64], d_hom: f64) -> Result<Vec<HeatTrace>> {
    if let Some(s) = times.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::Domain(format!("heat time must be positive, got {s}")));
    }
    let ev = lap.eigenvalues()?;
    let vol = lap.grid.box_volume();
    let norm = gamma(d_hom / 2.0 + 1.0);
    Ok(times
        .iter()
        .map(|&s| {
            let trace: f64 = ev.iter().map(|&l| (s * l).exp()).sum();
            HeatTrace {
                s,
                trace,
                c_hat: s.powf(d_hom / 2.0) * trace / (vol * norm),
            }
        })
        .collect())
}

pub fn heat_trace(lap: &DiscreteOperator, s: f64, d_hom: f64) -> Result<HeatTrace> {
    Ok(heat_traces(lap, &[s], d_hom)?[0])
}
