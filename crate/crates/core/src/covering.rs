//! Greedy separated coverings of coordinate boxes by left translates of a
//! quasi-ball, and the mixed norms `ℓ_p(L_q)` and `ℓ_{p,log}(L_q)` built on
//! them.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{GroupPoint, QuasiMetricSpec, StratifiedAlgebra};
use crate::error::{Error, Result};
use crate::grid::{Lattice, SampledFunction};

/// Closed coordinate box `Π [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Shape("region bounds must be nonempty and equally long".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::Input(format!("empty region [{lo:?}, {hi:?}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// Lattice of spacing at most `step` including both endpoints of every
    /// axis; a degenerate axis contributes a single point.
    pub fn candidate_lattice(&self, step: f64) -> Lattice {
        let mut origin = Vec::new();
        let mut spacing = Vec::new();
        let mut dims = Vec::new();
        for (&a, &b) in self.lo.iter().zip(&self.hi) {
            let m = ((b - a) / step - 1e-9).ceil().max(0.0) as usize;
            origin.push(a);
            spacing.push(if m == 0 { 1.0 } else { (b - a) / m as f64 });
            dims.push(m + 1);
        }
        Lattice { origin, spacing, dims }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringOptions {
    pub separation: f64,
    pub base_radius: f64,
    /// Candidate lattice spacing; defaults to `separation / 4`.
    pub lattice_step: Option<f64>,
}

impl Default for CoveringOptions {
    fn default() -> Self {
        Self {
            separation: 1.0,
            base_radius: 1.0,
            lattice_step: None,
        }
    }
}

impl CoveringOptions {
    /// Separation and tile radius both equal to `r`.
    pub fn scaled(r: f64) -> Self {
        Self {
            separation: r,
            base_radius: r,
            lattice_step: None,
        }
    }
}

/// Centres `Γ` of a covering by open quasi-balls `γ·B(0, base_radius)`.
#[derive(Debug, Clone, Serialize)]
pub struct Covering {
    pub centers: Vec<GroupPoint>,
    pub base_radius: f64,
    pub separation: f64,
    pub region: BoxRegion,
    pub lattice_step: f64,
    #[serde(skip)]
    spec: QuasiMetricSpec,
}

/// Maximal separated subset of the candidate lattice, scanned in
/// lexicographic order.
pub fn build_covering(
    region: &BoxRegion,
    alg: &StratifiedAlgebra,
    spec: &QuasiMetricSpec,
    opts: CoveringOptions,
) -> Result<Covering> {
    if region.lo.len() != alg.dimension() {
        return Err(Error::Shape(format!(
            "region has {} axes, algebra has dimension {}",
            region.lo.len(),
            alg.dimension()
        )));
    }
    if !(opts.separation > 0.0) || !(opts.base_radius > 0.0) {
        return Err(Error::Domain("separation and base radius must be positive".into()));
    }
    let step = opts.lattice_step.unwrap_or(opts.separation / 4.0);
    if !(step > 0.0) {
        return Err(Error::Domain(format!("lattice step must be positive, got {step}")));
    }
    let lattice = region.candidate_lattice(step);
    let mut centers: Vec<GroupPoint> = Vec::new();
    for x in lattice.points() {
        let x = GroupPoint(x);
        // Left translation by γ⁻¹ maps x to γ⁻¹x; dist is symmetric since ρ(g⁻¹) = ρ(g).
        let far = centers.iter().all(|c| spec.dist(alg, c, &x) >= opts.separation);
        if far {
            centers.push(x);
        }
    }
    Ok(Covering {
        centers,
        base_radius: opts.base_radius,
        separation: opts.separation,
        region: region.clone(),
        lattice_step: step,
        spec: *spec,
    })
}

/// Largest cover count over the samples and the histogram of counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multiplicity {
    pub max_count: usize,
    /// `histogram[k]` = number of samples lying in exactly `k` tiles.
    pub histogram: Vec<usize>,
}

/// Result of checking separation, coverage and the multiplicity bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringCheck {
    pub centers: usize,
    pub min_separation: f64,
    pub uncovered: usize,
    pub max_multiplicity: usize,
    pub multiplicity_bound: f64,
}

impl CoveringCheck {
    pub fn holds(&self, separation: f64) -> bool {
        self.min_separation >= separation
            && self.uncovered == 0
            && (self.max_multiplicity as f64) <= self.multiplicity_bound
    }
}

impl Covering {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn spec(&self) -> &QuasiMetricSpec {
        &self.spec
    }

    /// Whether `x ∈ γ·B(0, r)`, i.e. `dist(γ, x) < r`.
    pub fn tile_contains(&self, alg: &StratifiedAlgebra, gamma: usize, x: &GroupPoint) -> bool {
        self.spec.dist(alg, &self.centers[gamma], x) < self.base_radius
    }

    pub fn cover_count(&self, alg: &StratifiedAlgebra, x: &GroupPoint) -> usize {
        (0..self.len()).filter(|&g| self.tile_contains(alg, g, x)).count()
    }

    pub fn multiplicity(&self, alg: &StratifiedAlgebra, samples: &[GroupPoint]) -> Result<Multiplicity> {
        if samples.is_empty() {
            return Err(Error::Input("multiplicity needs at least one sample point".into()));
        }
        let counts: Vec<usize> = samples.par_iter().map(|x| self.cover_count(alg, x)).collect();
        let max_count = *counts.iter().max().expect("nonempty");
        let mut histogram = vec![0; max_count + 1];
        for c in counts {
            histogram[c] += 1;
        }
        Ok(Multiplicity { max_count, histogram })
    }

    /// `ν(B(0, 2c)) / ν(B(0, 1/(2c)))` with `c` the number of steps.
    pub fn multiplicity_bound(&self, alg: &StratifiedAlgebra) -> f64 {
        let c = alg.steps() as f64;
        self.spec.ball_volume(alg, 2.0 * c) / self.spec.ball_volume(alg, 1.0 / (2.0 * c))
    }

    /// Checks the covering invariants on its own candidate lattice.
    pub fn check(&self, alg: &StratifiedAlgebra) -> CoveringCheck {
        let mut min_sep = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                min_sep = min_sep.min(self.spec.dist(alg, &self.centers[i], &self.centers[j]));
            }
        }
        let samples: Vec<GroupPoint> = self
            .region
            .candidate_lattice(self.lattice_step)
            .points()
            .map(GroupPoint)
            .collect();
        let counts: Vec<usize> = samples.par_iter().map(|x| self.cover_count(alg, x)).collect();
        CoveringCheck {
            centers: self.len(),
            min_separation: min_sep,
            uncovered: counts.iter().filter(|&&c| c == 0).count(),
            max_multiplicity: counts.into_iter().max().unwrap_or(0),
            multiplicity_bound: self.multiplicity_bound(alg),
        }
    }

    /// `L_q` norm of `f` on every tile, by the midpoint rule over the lattice
    /// points inside the tile.
    pub fn tile_norms(&self, alg: &StratifiedAlgebra, f: &SampledFunction, q: f64) -> Result<Vec<f64>> {
        if !(q > 0.0) {
            return Err(Error::Domain(format!("q must be positive, got {q}")));
        }
        if f.lattice.ndim() != alg.dimension() {
            return Err(Error::Shape("function lattice and algebra dimension differ".into()));
        }
        let cell = f.cell_volume();
        let pts: Vec<(GroupPoint, f64)> = f
            .lattice
            .points()
            .zip(&f.values)
            .filter(|(_, v)| **v != 0.0)
            .map(|(x, &v)| (GroupPoint(x), v.abs().powf(q)))
            .collect();
        Ok((0..self.len())
            .into_par_iter()
            .map(|g| {
                let s: f64 = pts
                    .iter()
                    .filter(|(x, _)| self.tile_contains(alg, g, x))
                    .map(|(_, w)| w)
                    .sum();
                (s * cell).powf(1.0 / q)
            })
            .collect())
    }

    pub fn write_centers_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let d = self.region.lo.len();
        let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for c in &self.centers {
            let row: Vec<String> = c.coords().iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("p must be positive, got {p}")));
    }
    Ok(())
}

/// `(Σ_γ ‖f‖_{L_q(γU)}^p)^{1/p}`.
pub fn mixed_norm(
    alg: &StratifiedAlgebra,
    f: &SampledFunction,
    covering: &Covering,
    p: f64,
    q: f64,
) -> Result<f64> {
    check_p(p)?;
    let a = covering.tile_norms(alg, f, q)?;
    Ok(a.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `(Σ_n log(n+2) a_n^p)^{1/p}` over the decreasing rearrangement of the
/// tile norms.
pub fn mixed_norm_log(
    alg: &StratifiedAlgebra,
    f: &SampledFunction,
    covering: &Covering,
    p: f64,
    q: f64,
) -> Result<f64> {
    check_p(p)?;
    let a = covering.tile_norms(alg, f, q)?;
    Ok(log_weighted_norm(&a, p))
}

pub fn log_weighted_norm(tile_norms: &[f64], p: f64) -> f64 {
    let mut a = tile_norms.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    a.iter()
        .enumerate()
        .map(|(n, v)| ((n + 2) as f64).ln() * v.powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceStats {
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Smallest `C` with every ratio in `[1/C, C]`.
    pub constant: f64,
}

/// Ratios `‖f‖^{(A)} / ‖f‖^{(B)}` of the `ℓ_p(L_q)` norms over a family.
/// Functions with both norms zero are skipped.
pub fn covering_equivalence_check(
    alg: &StratifiedAlgebra,
    family: &[SampledFunction],
    a: &Covering,
    b: &Covering,
    p: f64,
    q: f64,
) -> Result<EquivalenceStats> {
    let mut ratios = Vec::with_capacity(family.len());
    for f in family {
        let na = mixed_norm(alg, f, a, p, q)?;
        let nb = mixed_norm(alg, f, b, p, q)?;
        if na == 0.0 && nb == 0.0 {
            continue;
        }
        ratios.push(na / nb);
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(EquivalenceStats {
        constant: max_ratio.max(1.0 / min_ratio),
        ratios,
        min_ratio,
        max_ratio,
    })
}
