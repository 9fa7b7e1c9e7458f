//! Rectangular lattices, periodic grids and functions sampled on them.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points `origin + i ⊙ spacing` for multi-indices `i < dims`, flattened in
/// row-major order (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub dims: Vec<usize>,
}

impl Lattice {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, dims: Vec<usize>) -> Result<Self> {
        if origin.len() != spacing.len() || origin.len() != dims.len() {
            return Err(Error::Shape("lattice origin, spacing and dims differ in length".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0)) || dims.contains(&0) {
            return Err(Error::Input(format!("invalid lattice spacing {spacing:?} or dims {dims:?}")));
        }
        Ok(Self { origin, spacing, dims })
    }

    /// Cell-centred lattice with `cells[i]` cells on `[lo_i, hi_i]`, the
    /// nodes of the midpoint rule.
    pub fn midpoints(lo: &[f64], hi: &[f64], cells: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != cells.len() {
            return Err(Error::Shape("box bounds and cell counts differ in length".into()));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::Input("midpoint lattice needs a box with positive widths".into()));
        }
        let spacing: Vec<f64> = lo
            .iter()
            .zip(hi)
            .zip(cells)
            .map(|((a, b), &m)| (b - a) / m as f64)
            .collect();
        let origin = lo.iter().zip(&spacing).map(|(a, h)| a + 0.5 * h).collect();
        Self::new(origin, spacing, cells.to_vec())
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            idx[a] = flat % self.dims[a];
            flat /= self.dims[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + i as f64 * self.spacing[a])
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|f| self.point(f))
    }

    /// Coordinate of axis `a` at every lattice point.
    pub fn coordinate(&self, a: usize) -> Vec<f64> {
        (0..self.len())
            .map(|f| {
                let i = (f / self.dims[a + 1..].iter().product::<usize>()) % self.dims[a];
                self.origin[a] + i as f64 * self.spacing[a]
            })
            .collect()
    }

    /// Stride of axis `a` in the flat ordering.
    pub fn stride(&self, a: usize) -> usize {
        self.dims[a + 1..].iter().product()
    }

    /// Lattice with axis `a` removed.
    pub fn without_axis(&self, a: usize) -> Lattice {
        let drop = |v: &[f64]| {
            v.iter()
                .enumerate()
                .filter(|&(i, _)| i != a)
                .map(|(_, &x)| x)
                .collect::<Vec<_>>()
        };
        Lattice {
            origin: drop(&self.origin),
            spacing: drop(&self.spacing),
            dims: self
                .dims
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != a)
                .map(|(_, &d)| d)
                .collect(),
        }
    }
}

/// Periodic grid on `Π [−L_i, L_i)` with `N_i` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: Vec<usize>,
    half_widths: Vec<f64>,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, half_widths: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() != half_widths.len() {
            return Err(Error::Shape(format!(
                "grid dims {dims:?} and half-widths {half_widths:?} must be nonempty and equally long"
            )));
        }
        if let Some(n) = dims.iter().find(|&&n| n < 4 || n % 2 == 1) {
            return Err(Error::Input(format!("grid sizes must be even and at least 4, got {n}")));
        }
        if half_widths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::Input(format!("half-widths must be positive, got {half_widths:?}")));
        }
        Ok(Self { dims, half_widths })
    }

    pub fn uniform(ndim: usize, n: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![n; ndim], vec![half_width; ndim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / self.dims[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).product()
    }

    pub fn box_volume(&self) -> f64 {
        self.half_widths.iter().map(|l| 2.0 * l).product()
    }

    pub fn lattice(&self) -> Lattice {
        Lattice {
            origin: self.half_widths.iter().map(|l| -l).collect(),
            spacing: (0..self.ndim()).map(|a| self.spacing(a)).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn without_axis(&self, a: usize) -> Result<GridSpec> {
        let mut dims = self.dims.clone();
        let mut hw = self.half_widths.clone();
        dims.remove(a);
        hw.remove(a);
        GridSpec::new(dims, hw)
    }
}

/// Real function sampled on a lattice; integrals use the midpoint rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Shape(format!(
                "{} values for a lattice of {} points",
                values.len(),
                lattice.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = lattice.points().map(|x| f(&x)).collect();
        Self { lattice, values }
    }

    pub fn on_grid(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid.lattice(), f)
    }

    pub fn cell_volume(&self) -> f64 {
        self.lattice.cell_volume()
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|&v| g(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `∫ |f|^p` by the midpoint rule.
    pub fn integral_abs_pow(&self, p: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.cell_volume()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// `‖f‖_{L_p}` by the midpoint rule.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.integral_abs_pow(p).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `x1,…,xd,value` rows with a header.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.lattice.ndim()).map(|i| format!("x{i}")).collect();
        writeln!(w, "{},value", header.join(","))?;
        for (x, v) in self.lattice.points().zip(&self.values) {
            let coords: Vec<String> = x.iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(w, "{},{v:.17e}", coords.join(","))?;
        }
        Ok(())
    }

    /// Reads a grid dump written by [`write_csv`](Self::write_csv). Rows must
    /// cover a full rectangular lattice in row-major order.
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut ncols = None;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('x')) {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            match ncols {
                None => ncols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Parse { line: i + 1, msg: format!("expected {c} columns") })
                }
                _ => {}
            }
            rows.push(row);
        }
        let ncols = ncols.ok_or_else(|| Error::Input("empty grid dump".into()))?;
        if ncols < 2 {
            return Err(Error::Input("grid dump needs coordinates and a value column".into()));
        }
        let d = ncols - 1;
        let mut axes: Vec<Vec<f64>> = vec![Vec::new(); d];
        for row in &rows {
            for (a, ax) in axes.iter_mut().enumerate() {
                ax.push(row[a]);
            }
        }
        for ax in axes.iter_mut() {
            ax.sort_by(f64::total_cmp);
            ax.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let origin: Vec<f64> = axes.iter().map(|a| a[0]).collect();
        let spacing: Vec<f64> = axes
            .iter()
            .map(|a| if a.len() > 1 { (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64 } else { 1.0 })
            .collect();
        let lattice = Lattice::new(origin, spacing, dims)?;
        if lattice.len() != rows.len() {
            return Err(Error::Shape(format!(
                "{} rows do not fill a {:?} lattice",
                rows.len(),
                lattice.dims
            )));
        }
        let mut values = vec![0.0; rows.len()];
        for row in &rows {
            let idx: Vec<usize> = (0..d)
                .map(|a| ((row[a] - lattice.origin[a]) / lattice.spacing[a]).round() as usize)
                .collect();
            values[lattice.ravel(&idx)] = row[d];
        }
        Self::new(lattice, values)
    }
}
