//! Group law in exponential coordinates of the first kind, dilations, the
//! homogeneous quasi-norm and left-invariant vector fields.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use super::StratifiedAlgebra;
use crate::error::{Error, Result};

/// Point of the group, identified with its Lie algebra element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint(pub Vec<f64>);

impl GroupPoint {
    pub fn identity(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `g⁻¹ = −g` in exponential coordinates.
    pub fn inverse(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for GroupPoint {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Words `w_1 … w_m` over `{X = false, Y = true}` with their coefficients
/// in Dynkin's form of the BCH series, up to total degree `max_degree`.
/// A word stands for the right-nested bracket `[w_1, [w_2, … [w_{m−1}, w_m]]]`.
fn dynkin_words(max_degree: usize) -> Vec<(Vec<bool>, f64)> {
    let mut acc: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
    // Each block contributes X^r Y^s with r + s ≥ 1.
    fn rec(
        blocks: &mut Vec<(usize, usize)>,
        degree: usize,
        max_degree: usize,
        acc: &mut BTreeMap<Vec<bool>, f64>,
    ) {
        if !blocks.is_empty() {
            let k = blocks.len();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let denom: f64 = blocks
                .iter()
                .map(|&(r, s)| factorial(r) * factorial(s))
                .product();
            let coeff = sign / (k as f64 * degree as f64 * denom);
            let word: Vec<bool> = blocks
                .iter()
                .flat_map(|&(r, s)| std::iter::repeat(false).take(r).chain(std::iter::repeat(true).take(s)))
                .collect();
            let m = word.len();
            if m == 1 || word[m - 1] != word[m - 2] {
                *acc.entry(word).or_insert(0.0) += coeff;
            }
        }
        for r in 0..=max_degree - degree {
            for s in 0..=max_degree - degree - r {
                if r + s == 0 {
                    continue;
                }
                blocks.push((r, s));
                rec(blocks, degree + r + s, max_degree, acc);
                blocks.pop();
            }
        }
    }
    rec(&mut Vec::new(), 0, max_degree, &mut acc);
    acc.into_iter().filter(|(_, c)| c.abs() > 1e-15).collect()
}

/// Coefficients `b_n` of `z / (1 − e^{−z}) = Σ b_n zⁿ`.
fn bernoulli_plus_over_factorial(count: usize) -> Vec<f64> {
    let mut b = vec![0.0; count.max(1)];
    b[0] = 1.0;
    // B_n = −1/(n+1) Σ_{k<n} C(n+1, k) B_k, with B_1 = −1/2.
    for n in 1..count {
        let mut s = 0.0;
        let mut binom = 1.0;
        for (k, bk) in b.iter().enumerate().take(n) {
            s += binom * bk;
            binom *= (n + 1 - k) as f64 / (k + 1) as f64;
        }
        b[n] = -s / (n + 1) as f64;
    }
    if count > 1 {
        b[1] = 0.5;
    }
    b.iter()
        .enumerate()
        .map(|(n, &bn)| bn / factorial(n))
        .collect()
}

/// Left-invariant vector field `Σ_j a_j(x) ∂_j` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub coefficients: Vec<Polynomial>,
}

impl VectorField {
    /// Axes with a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = (usize, &Polynomial)> {
        self.coefficients.iter().enumerate().filter(|(_, p)| !p.is_zero())
    }

    /// Applies the field to a polynomial function.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(f.nvars());
        for (j, a) in self.support() {
            out.add_scaled(&a.mul(&f.derivative(j)), 1.0);
        }
        out
    }

    /// Commutator `[A, B]` of polynomial vector fields.
    pub fn commutator(&self, other: &VectorField) -> VectorField {
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| {
                let mut c = self.apply(b);
                c.add_scaled(&other.apply(a), -1.0);
                c
            })
            .collect();
        VectorField { coefficients }
    }
}

impl StratifiedAlgebra {
    fn check_point(&self, g: &GroupPoint) {
        assert_eq!(
            g.dim(),
            self.dimension(),
            "group point has {} coordinates, algebra has dimension {}",
            g.dim(),
            self.dimension()
        );
    }

    fn nested_bracket(&self, word: &[bool], x: &[f64], y: &[f64]) -> Vec<f64> {
        let pick = |b: bool| if b { y } else { x };
        let mut v = pick(*word.last().expect("nonempty word")).to_vec();
        for &w in word[..word.len() - 1].iter().rev() {
            v = self.bracket(pick(w), &v);
        }
        v
    }

    /// `log(exp g1 · exp g2)` via the BCH series, which terminates at the
    /// nilpotency step.
    pub fn product(&self, g1: &GroupPoint, g2: &GroupPoint) -> GroupPoint {
        self.check_point(g1);
        self.check_point(g2);
        let words = self.bch_words.get_or_init(|| dynkin_words(self.steps()));
        let mut out = vec![0.0; self.dimension()];
        for (word, coeff) in words {
            let term = self.nested_bracket(word, &g1.0, &g2.0);
            for (o, t) in out.iter_mut().zip(term) {
                *o += coeff * t;
            }
        }
        GroupPoint(out)
    }

    /// Graded dilation: layer `k` scaled by `r^k`.
    pub fn dilation(&self, g: &GroupPoint, r: f64) -> Result<GroupPoint> {
        self.check_point(g);
        if !(r > 0.0) {
            return Err(Error::Domain(format!("dilation factor must be positive, got {r}")));
        }
        Ok(GroupPoint(
            g.0.iter()
                .enumerate()
                .map(|(i, &x)| x * r.powi(self.layer_of(i) as i32))
                .collect(),
        ))
    }

    /// Left-invariant extension of basis vector `e_k`:
    /// `X_k(g) = Σ_n b_n ad_gⁿ e_k` with `z/(1−e^{−z}) = Σ b_n zⁿ`.
    pub fn left_invariant_field(&self, k: usize) -> VectorField {
        let n = self.dimension();
        let b = bernoulli_plus_over_factorial(self.steps());
        let mut term: Vec<Polynomial> = (0..n)
            .map(|l| Polynomial::constant(n, if l == k { 1.0 } else { 0.0 }))
            .collect();
        let mut total = term.clone();
        for bn in b.iter().skip(1) {
            // (ad_g v)_l = Σ_{i,j} x_i v_j c_ijl
            let mut next = vec![Polynomial::zero(n); n];
            for (i, j, l, c) in self.nonzero_brackets() {
                if !term[j].is_zero() {
                    next[l].add_scaled(&term[j].times_variable(i), c);
                }
            }
            term = next;
            for (t, p) in total.iter_mut().zip(&term) {
                t.add_scaled(p, *bn);
            }
        }
        VectorField { coefficients: total }
    }

    /// Left-invariant fields of the first layer, the generators of the
    /// sub-Laplacian.
    pub fn horizontal_fields(&self) -> Vec<VectorField> {
        self.layer_range(1).map(|k| self.left_invariant_field(k)).collect()
    }

    /// Uniform sample from the coordinate box `[−a_i, a_i]`.
    pub fn random_point(&self, rng: &mut impl Rng, half_widths: &[f64]) -> GroupPoint {
        GroupPoint(half_widths.iter().map(|&a| rng.random_range(-a..=a)).collect())
    }
}

/// Norm used on each layer projection `p_k(g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerNorm {
    /// Largest absolute coordinate in the layer.
    #[default]
    MaxAbs,
    Euclidean,
}

/// Homogeneous quasi-norm `ρ(g) = max_k ‖p_k(g)‖^{1/k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiMetricSpec {
    pub layer_norm: LayerNorm,
    pub steps: usize,
}

impl QuasiMetricSpec {
    pub fn for_algebra(alg: &StratifiedAlgebra) -> Self {
        Self {
            layer_norm: LayerNorm::MaxAbs,
            steps: alg.steps(),
        }
    }

    pub fn with_norm(mut self, layer_norm: LayerNorm) -> Self {
        self.layer_norm = layer_norm;
        self
    }

    fn layer_norm_of(&self, v: &[f64]) -> f64 {
        match self.layer_norm {
            LayerNorm::MaxAbs => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            LayerNorm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn quasi_norm(&self, alg: &StratifiedAlgebra, g: &GroupPoint) -> f64 {
        debug_assert_eq!(self.steps, alg.steps());
        (1..=alg.steps())
            .map(|k| {
                let r = alg.layer_range(k);
                self.layer_norm_of(&g.0[r]).powf(1.0 / k as f64)
            })
            .fold(0.0, f64::max)
    }

    /// `dist(g1, g2) = ρ(g1⁻¹ g2)`.
    pub fn dist(&self, alg: &StratifiedAlgebra, g1: &GroupPoint, g2: &GroupPoint) -> f64 {
        self.quasi_norm(alg, &alg.product(&g1.inverse(), g2))
    }

    /// Lebesgue volume of the quasi-ball `B(0, r)`; it scales as `r^{d_hom}`.
    pub fn ball_volume(&self, alg: &StratifiedAlgebra, r: f64) -> f64 {
        let unit: f64 = alg
            .layer_dims()
            .iter()
            .map(|&d| match self.layer_norm {
                LayerNorm::MaxAbs => 2f64.powi(d as i32),
                LayerNorm::Euclidean => {
                    let h = d as f64 / 2.0;
                    std::f64::consts::PI.powf(h) / crate::numerics::gamma(h + 1.0)
                }
            })
            .product();
        unit * r.powi(alg.homogeneous_dimension() as i32)
    }

    /// Monte-Carlo estimate of `ν(B(0, r))` for each radius, sampling the
    /// box bounding the largest ball. Returns `(estimate, standard error)`.
    pub fn monte_carlo_ball_volumes(
        &self,
        alg: &StratifiedAlgebra,
        radii: &[f64],
        samples: usize,
        rng: &mut impl Rng,
    ) -> Vec<(f64, f64)> {
        let rmax = radii.iter().copied().fold(0.0, f64::max);
        let half: Vec<f64> = (0..alg.dimension())
            .map(|i| rmax.powi(alg.layer_of(i) as i32))
            .collect();
        let box_vol: f64 = half.iter().map(|a| 2.0 * a).product();
        let mut hits = vec![0usize; radii.len()];
        for _ in 0..samples {
            let g = alg.random_point(rng, &half);
            let rho = self.quasi_norm(alg, &g);
            for (h, &r) in hits.iter_mut().zip(radii) {
                if rho < r {
                    *h += 1;
                }
            }
        }
        hits.iter()
            .map(|&h| {
                let p = h as f64 / samples as f64;
                (box_vol * p, box_vol * (p * (1.0 - p) / samples as f64).sqrt())
            })
            .collect()
    }
}
