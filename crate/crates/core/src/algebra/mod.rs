//! Stratified Lie algebras given by structure constants, and the group
//! structure they induce in exponential coordinates.

mod group;
mod parse;
pub mod poly;
mod presets;

pub use group::{GroupPoint, LayerNorm, QuasiMetricSpec, VectorField};
pub use poly::Polynomial;
pub use presets::{preset, presets, PresetInfo};

use serde::Serialize;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Tolerance for structural identities (antisymmetry, Jacobi, grading).
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Finite-dimensional graded Lie algebra with basis ordered layer by layer.
#[derive(Debug, Clone)]
pub struct StratifiedAlgebra {
    name: String,
    dimension: usize,
    layer_dims: Vec<usize>,
    /// `c[(i * n + j) * n + k]` with `[e_i, e_j] = Σ_k c_ijk e_k`.
    c: Vec<f64>,
    labels: Vec<String>,
    layer_of: Vec<usize>,
    bch_words: OnceLock<Vec<(Vec<bool>, f64)>>,
}

impl PartialEq for StratifiedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.layer_dims == other.layer_dims
            && self.c == other.c
            && self.labels == other.labels
    }
}

/// A violated stratification constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Antisymmetry { i: usize, j: usize, k: usize, defect: f64 },
    Jacobi { i: usize, j: usize, l: usize, defect: f64 },
    Grading { i: usize, j: usize, k: usize, value: f64 },
    Generation { reached: usize, dimension: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Dimensions of `V_1 ⊂ V_2 ⊂ …` where `V_1` is the first layer and
    /// `V_{m+1} = V_m + [V_1, V_m]`, stopped once it stabilizes.
    pub filtration: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl StratifiedAlgebra {
    /// Builds an algebra from a dense structure-constant array of length `n³`.
    /// Only shapes and finiteness are checked; use [`validate`](Self::validate)
    /// for the algebraic constraints.
    pub fn new(layer_dims: Vec<usize>, c: Vec<f64>) -> Result<Self> {
        let dimension: usize = layer_dims.iter().sum();
        if dimension == 0 {
            return Err(Error::Shape("algebra has dimension 0".into()));
        }
        if layer_dims.contains(&0) {
            return Err(Error::Shape(format!("empty layer in {layer_dims:?}")));
        }
        if c.len() != dimension.pow(3) {
            return Err(Error::Shape(format!(
                "structure constants have {} entries, expected {}^3",
                c.len(),
                dimension
            )));
        }
        if let Some(pos) = c.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite structure constant at flat index {pos}")));
        }
        let layer_of = layer_dims
            .iter()
            .enumerate()
            .flat_map(|(n, &d)| std::iter::repeat(n + 1).take(d))
            .collect();
        Ok(Self {
            name: String::new(),
            dimension,
            layer_dims,
            c,
            labels: (1..=dimension).map(|i| format!("e{i}")).collect(),
            layer_of,
            bch_words: OnceLock::new(),
        })
    }

    /// Builds an algebra from nonzero brackets `(i, j, k, value)` meaning
    /// `c_ijk = value` (0-based). The antisymmetric partner `c_jik = -value`
    /// is filled in unless it is listed explicitly.
    pub fn from_brackets(
        layer_dims: Vec<usize>,
        brackets: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let n: usize = layer_dims.iter().sum();
        let mut c = vec![0.0; n * n * n];
        let mut explicit = vec![false; n * n * n];
        for &(i, j, k, v) in brackets {
            if i >= n || j >= n || k >= n {
                return Err(Error::Shape(format!("bracket index ({i},{j},{k}) out of range for dimension {n}")));
            }
            c[(i * n + j) * n + k] = v;
            explicit[(i * n + j) * n + k] = true;
        }
        for &(i, j, k, v) in brackets {
            let partner = (j * n + i) * n + k;
            if !explicit[partner] {
                c[partner] = -v;
            }
        }
        Self::new(layer_dims, c)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dimension {
            return Err(Error::Shape(format!(
                "{} labels for dimension {}",
                labels.len(),
                self.dimension
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of layers (nilpotency step).
    pub fn steps(&self) -> usize {
        self.layer_dims.len()
    }

    /// Layer (1-based) containing basis vector `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        self.layer_of[i]
    }

    /// Basis indices of layer `n` (1-based).
    pub fn layer_range(&self, n: usize) -> std::ops::Range<usize> {
        let start: usize = self.layer_dims[..n - 1].iter().sum();
        start..start + self.layer_dims[n - 1]
    }

    #[inline]
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dimension;
        self.c[(i * n + j) * n + k]
    }

    /// Nonzero structure constants `(i, j, k, c_ijk)`.
    pub fn nonzero_brackets(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        let n = self.dimension;
        (0..n * n * n).filter_map(move |f| {
            let v = self.c[f];
            (v != 0.0).then(|| (f / (n * n), (f / n) % n, f % n, v))
        })
    }

    /// Lie bracket of two coordinate vectors.
    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.dimension;
        let mut out = vec![0.0; n];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0.0 {
                    continue;
                }
                let row = &self.c[(i * n + j) * n..(i * n + j + 1) * n];
                for (o, &cv) in out.iter_mut().zip(row) {
                    *o += ai * bj * cv;
                }
            }
        }
        out
    }

    fn basis_vector(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dimension];
        e[i] = 1.0;
        e
    }

    /// `Σ_n n · dim 𝔤_n`.
    pub fn homogeneous_dimension(&self) -> usize {
        self.layer_dims
            .iter()
            .enumerate()
            .map(|(n, &d)| (n + 1) * d)
            .sum()
    }

    /// Dimensions of the bracket-closure filtration generated by layer 1.
    pub fn bracket_filtration(&self) -> Vec<usize> {
        let gens: Vec<Vec<f64>> = self.layer_range(1).map(|i| self.basis_vector(i)).collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for g in &gens {
            push_independent(&mut basis, g.clone());
        }
        let mut dims = vec![basis.len()];
        let mut frontier = basis.clone();
        loop {
            let mut fresh = Vec::new();
            for g in &gens {
                for v in &frontier {
                    let w = self.bracket(g, v);
                    if push_independent(&mut basis, w) {
                        fresh.push(basis.last().expect("just pushed").clone());
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            dims.push(basis.len());
            frontier = fresh;
        }
        dims
    }

    /// Layer dimensions implied by the bracket-closure filtration.
    pub fn derived_layer_dims(&self) -> Vec<usize> {
        let f = self.bracket_filtration();
        f.iter()
            .enumerate()
            .map(|(i, &d)| if i == 0 { d } else { d - f[i - 1] })
            .collect()
    }

    /// Checks antisymmetry, the Jacobi identity, the grading and generation
    /// by the first layer.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dimension;
        let scale = self.c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut violations = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    let d = (self.structure_constant(i, j, k) + self.structure_constant(j, i, k)).abs();
                    if d > STRUCTURE_TOL * scale {
                        violations.push(Violation::Antisymmetry { i, j, k, defect: d });
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    let (ei, ej, el) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(l));
                    let a = self.bracket(&ei, &self.bracket(&ej, &el));
                    let b = self.bracket(&ej, &self.bracket(&el, &ei));
                    let c = self.bracket(&el, &self.bracket(&ei, &ej));
                    let defect = a
                        .iter()
                        .zip(&b)
                        .zip(&c)
                        .map(|((x, y), z)| (x + y + z).abs())
                        .fold(0.0, f64::max);
                    if defect > STRUCTURE_TOL * scale * scale {
                        violations.push(Violation::Jacobi { i, j, l, defect });
                    }
                }
            }
        }
        for (i, j, k, v) in self.nonzero_brackets() {
            if v.abs() <= STRUCTURE_TOL * scale {
                continue;
            }
            if self.layer_of(k) != self.layer_of(i) + self.layer_of(j) {
                violations.push(Violation::Grading { i, j, k, value: v });
            }
        }
        let filtration = self.bracket_filtration();
        let reached = *filtration.last().expect("filtration is nonempty");
        if reached != n {
            violations.push(Violation::Generation { reached, dimension: n });
        }
        ValidationReport {
            violations,
            filtration,
        }
    }

    /// Parses the plain-text definition format (see [`Self::to_definition`]).
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_definition(text)
    }

    /// Serializes to the plain-text definition format: `dimension`, `layers`,
    /// optional `name`/`labels`, then one `i j k value` line per nonzero
    /// structure constant with 1-based indices.
    pub fn to_definition(&self) -> String {
        parse::write_definition(self)
    }
}

/// Gram–Schmidt step: appends the normalized component of `v` orthogonal to
/// `basis` if it is not negligible.
fn push_independent(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> bool {
    let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis.iter() {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= 1e-10 * norm0 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    basis.push(v);
    true
}
