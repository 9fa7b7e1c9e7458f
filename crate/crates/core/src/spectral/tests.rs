use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{preset, QuasiMetricSpec};
use crate::covering::{build_covering, BoxRegion, CoveringOptions};
use crate::functions::FunctionSpec;
use crate::grid::GridSpec;
use crate::operator::{assemble_sublaplacian, fourier_block_decompose, Matrix, Scheme};

fn dense_op(m: Mat<f64>) -> DiscreteOperator {
    let n = m.nrows();
    let grid = GridSpec::uniform(1, n, 1.0).unwrap();
    DiscreteOperator::new(Matrix::Dense(m), grid, "A").unwrap()
}

fn line(n: usize, l: f64) -> (GridSpec, DiscreteOperator) {
    let grid = GridSpec::uniform(1, n, l).unwrap();
    let lap = assemble_sublaplacian(&preset("r1").unwrap(), &grid, Scheme::Fourier).unwrap();
    (grid, lap)
}

/// Eigenvalues `(θ_m/h)²` of `−Δ` for the spectral scheme on `n` points.
fn line_symbols(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            (2.0 * PI * k / n as f64 / h).powi(2)
        })
        .collect()
}

/// `|det A|` by Gaussian elimination with partial pivoting.
fn abs_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det.abs()
}

fn report(values: Vec<f64>) -> SpectralReport {
    SpectralReport::new("test", values).unwrap()
}

#[test]
fn diagonal_singular_values_are_sorted_magnitudes() {
    let m = Mat::from_fn(4, 4, |i, j| if i == j { [3.0, -1.0, 0.0, 2.0][i] } else { 0.0 });
    let r = singular_values(&dense_op(m), None).unwrap();
    assert_eq!(r.singular_values.len(), 4);
    for (a, b) in r.singular_values.iter().zip([3.0, 2.0, 1.0, 0.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn rank_one_has_a_single_nonzero_value() {
    let u = [1.0, 2.0, -2.0, 0.5];
    let v = [0.0, 3.0, 4.0, 0.0];
    let m = Mat::from_fn(4, 4, |i, j| u[i] * v[j]);
    let r = singular_values(&dense_op(m), Some(2)).unwrap();
    let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((r.singular_values[0] - nu * 5.0).abs() < 1e-10);
    assert!(r.singular_values[1].abs() < 1e-10);
    assert_eq!(r.len(), 2);
}

#[test]
fn random_matrix_matches_frobenius_and_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..20).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let m = Mat::from_fn(20, 20, |i, j| rows[i][j]);
    let mu = singular_values(&dense_op(m), None).unwrap().singular_values;
    let frob: f64 = rows.iter().flatten().map(|x| x * x).sum();
    let sum_sq: f64 = mu.iter().map(|x| x * x).sum();
    assert!((sum_sq / frob - 1.0).abs() < 1e-12);
    let log_prod: f64 = mu.iter().map(|x| x.ln()).sum();
    assert!((log_prod - abs_det(rows).ln()).abs() < 1e-9);
}

#[test]
fn schatten_norms_of_short_sequences() {
    let n = schatten_norms(&report(vec![1.0, 2.0]), 2.0).unwrap();
    assert!((n.strong - 5f64.sqrt()).abs() < 1e-15);
    // sup (n+1)^{1/2} μ(n) = max(2, √2).
    assert!((n.weak - 2.0).abs() < 1e-15);
    let n = schatten_norms(&report(vec![1.0, 0.5, 1.0 / 3.0]), 1.0).unwrap();
    assert!((n.weak - 1.0).abs() < 1e-15);
    assert!(schatten_norms(&report(vec![1.0]), 0.0).is_err());
}

#[test]
fn weak_norm_is_dominated_by_strong_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let v: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
        let r = report(v);
        for p in [0.5, 1.0, 2.0, 3.5] {
            let n = schatten_norms(&r, p).unwrap();
            assert!(n.weak <= n.strong * (1.0 + 1e-12));
        }
    }
}

#[test]
fn fit_recovers_exact_power_law() {
    let values: Vec<f64> = (0..200).map(|n| (0.5 / (n + 1) as f64).sqrt()).collect();
    let fit = asymptotic_fit(&report(values), 2.0, FitWindow::new(20, 150), Some(0.5)).unwrap();
    assert!((fit.fitted_constant - 0.5).abs() < 1e-12);
    assert!((fit.slope + 0.5).abs() < 1e-12);
    assert!(fit.residual_spread < 1e-12);
    assert!(fit.deviation.unwrap().abs() < 1e-12);
}

#[test]
fn fit_rejects_bad_input() {
    let long = report((0..100).map(|n| 1.0 / (n + 1) as f64).collect());
    let short = report((0..40).map(|n| 1.0 / (n + 1) as f64).collect());
    assert!(matches!(asymptotic_fit(&short, 1.0, FitWindow::new(0, 30), None), Err(Error::Fit(_))));
    assert!(matches!(asymptotic_fit(&long, 1.0, FitWindow::new(50, 100), None), Err(Error::Fit(_))));
    assert!(matches!(asymptotic_fit(&long, 1.0, FitWindow::new(10, 20), None), Err(Error::Fit(_))));
    assert!(matches!(asymptotic_fit(&long, 1.0, FitWindow::new(30, 10), None), Err(Error::Fit(_))));
    let mut zeros: Vec<f64> = (0..100).map(|n| 1.0 / (n + 1) as f64).collect();
    zeros[90..].iter_mut().for_each(|v| *v = 0.0);
    assert!(matches!(asymptotic_fit(&report(zeros), 1.0, FitWindow::new(60, 99), None), Err(Error::Fit(_))));
    assert!(SpectralReport::new("neg", vec![1.0, -0.1]).is_err());
}

#[test]
fn squaring_values_halves_the_exponent() {
    let values: Vec<f64> = (0..120).map(|n| 1.0 / ((n + 1) as f64).powf(0.3)).collect();
    let sq = report(values.iter().map(|v| v * v).collect());
    let a = asymptotic_fit(&report(values), 1.0 / 0.3, FitWindow::new(20, 100), None).unwrap();
    let b = asymptotic_fit(&sq, 1.0 / 0.6, FitWindow::new(20, 100), None).unwrap();
    assert!((a.fitted_constant - b.fitted_constant).abs() < 1e-12);
    assert!((2.0 * a.slope - b.slope).abs() < 1e-12);
}

#[test]
fn csv_has_header_and_scaled_column() {
    let mut out = Vec::new();
    report(vec![0.5, 0.25]).write_csv(1.0, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,mu,scaled");
    let cols: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols, vec![1.0, 0.25, 0.5]);
}

#[test]
fn line_sandwich_matches_dense_oracle() {
    let (n, l, k) = (64, 6.0, 1.0);
    let (grid, lap) = line(n, l);
    let h = grid.spacing(0);
    let f = FunctionSpec::gaussian(vec![0.5], vec![1.5]);
    let xs: Vec<f64> = grid.lattice().points().map(|x| x[0]).collect();
    let sym = line_symbols(n, h);
    // Circulant kernel of (1 + ξ²)^{−k/4} by an explicit inverse DFT.
    let kernel: Vec<f64> = (0..n)
        .map(|r| {
            (0..n)
                .map(|m| (1.0 + sym[m]).powf(-k / 4.0) * (2.0 * PI * (m * r) as f64 / n as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let j = Mat::from_fn(n, n, |a, b| kernel[(a + n - b) % n]);
    let mf = Mat::from_fn(n, n, |a, b| if a == b { f.eval(&[xs[a]]) } else { 0.0 });
    let t = &j * &mf * &j;
    let mut want = t.singular_values().unwrap();
    want.sort_by(|a, b| b.total_cmp(a));

    let got = sandwich_spectrum(&f, k, Variant::Bessel, &lap, SpectrumMethod::Dense).unwrap();
    let via_op = product_convolution(&f, k, Variant::Bessel, &lap).unwrap().singular_values().unwrap();
    for ((a, b), c) in got.iter().zip(&want).zip(&via_op) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        assert!((c - b).abs() < 1e-10, "{c} vs {b}");
    }

    let left = &mf * &j * &j;
    let mut want = left.singular_values().unwrap();
    want.sort_by(|a, b| b.total_cmp(a));
    let got = sandwich_spectrum(&f, 2.0 * k, Variant::LeftMultiplier, &lap, SpectrumMethod::Dense).unwrap();
    // Square roots of eigenvalues near round-off lose half the digits.
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-7 * want[0], "{a} vs {b}");
    }
}

#[test]
fn signed_functions_use_singular_values() {
    let (_, lap) = line(32, 4.0);
    let f = FunctionSpec::Gaussian { center: vec![0.0], width: vec![1.0], amplitude: -1.0 };
    let a = sandwich_spectrum(&f, 1.0, Variant::Bessel, &lap, SpectrumMethod::Dense).unwrap();
    let b = product_convolution(&f, 1.0, Variant::Bessel, &lap).unwrap().singular_values().unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
    assert!(sandwich_spectrum(&f, 2.0, Variant::Bessel, &lap, SpectrumMethod::Lanczos { count: 5 }).is_err());
}

#[test]
fn constant_function_commutes_with_the_laplacian() {
    let (n, l, k) = (48, 5.0, 1.5);
    let (grid, lap) = line(n, l);
    let f = FunctionSpec::Constant { value: 2.0 };
    let got = sandwich_spectrum(&f, k, Variant::Bessel, &lap, SpectrumMethod::Dense).unwrap();
    let mut want: Vec<f64> = line_symbols(n, grid.spacing(0)).iter().map(|s| 2.0 * (1.0 + s).powf(-k / 2.0)).collect();
    want.sort_by(|a, b| b.total_cmp(a));
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
    let zero = FunctionSpec::Constant { value: 0.0 };
    let got = sandwich_spectrum(&zero, k, Variant::Bessel, &lap, SpectrumMethod::Dense).unwrap();
    assert!(got.iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn riesz_variant_drops_the_kernel() {
    let (n, l) = (32, 4.0);
    let (grid, lap) = line(n, l);
    let f = FunctionSpec::Constant { value: 1.0 };
    let got = sandwich_spectrum(&f, 1.0, Variant::RieszDeflated, &lap, SpectrumMethod::Dense).unwrap();
    assert!(got[n - 1].abs() < 1e-12);
    let mut want: Vec<f64> = line_symbols(n, grid.spacing(0))
        .iter()
        .filter(|s| **s > 0.0)
        .map(|s| s.powf(-0.5))
        .collect();
    want.sort_by(|a, b| b.total_cmp(a));
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn hilbert_schmidt_norm_of_left_multiplier() {
    let (n, l, k) = (64, 5.0, 1.0);
    let (grid, lap) = line(n, l);
    let f = FunctionSpec::gaussian(vec![-0.3], vec![1.0]);
    let mu = sandwich_spectrum(&f, k, Variant::LeftMultiplier, &lap, SpectrumMethod::Dense).unwrap();
    let hs: f64 = mu.iter().map(|v| v * v).sum();
    // ‖M_f J^{−k/2}‖₂² = Σ f(x)² · J^{−k}(x, x), and the diagonal of a
    // circulant is the mean of its symbol.
    let diag = line_symbols(n, grid.spacing(0)).iter().map(|s| (1.0 + s).powf(-k / 2.0)).sum::<f64>() / n as f64;
    let f2: f64 = grid.lattice().points().map(|x| f.eval(&x).powi(2)).sum();
    assert!((hs / (f2 * diag) - 1.0).abs() < 1e-10);
}

#[test]
fn perturbation_moves_values_by_at_most_the_norm() {
    let (_, lap) = line(64, 5.0);
    let f = FunctionSpec::gaussian(vec![0.0], vec![1.0]);
    let eps = 1e-3;
    let g = FunctionSpec::Gaussian { center: vec![0.0], width: vec![1.0], amplitude: 1.0 + eps };
    let a = sandwich_spectrum(&f, 1.0, Variant::LeftMultiplier, &lap, SpectrumMethod::Dense).unwrap();
    let b = sandwich_spectrum(&g, 1.0, Variant::LeftMultiplier, &lap, SpectrumMethod::Dense).unwrap();
    // ‖M_{εf} J^{−1/2}‖ ≤ ε max f.
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= eps * (1.0 + 1e-9));
    }
}

#[test]
fn lanczos_agrees_with_dense_on_heisenberg_blocks() {
    let alg = preset("h1").unwrap();
    let grid = GridSpec::new(vec![10, 10, 8], vec![3.0, 3.0, 3.0]).unwrap();
    let lap = fourier_block_decompose(&alg, &grid, Scheme::Fourier, None).unwrap();
    let f = FunctionSpec::gaussian(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, f64::INFINITY]);
    let dense = sandwich_spectrum(&f, 4.0, Variant::Bessel, &lap, SpectrumMethod::Dense).unwrap();
    let count = 60;
    let lanczos = sandwich_spectrum(&f, 4.0, Variant::Bessel, &lap, SpectrumMethod::Lanczos { count }).unwrap();
    assert_eq!(lanczos.len(), count);
    for (a, b) in lanczos.iter().zip(&dense) {
        assert!((a - b).abs() <= 1e-7 * dense[0], "{a} vs {b}");
    }
    assert!(sandwich_spectrum(&f, 3.0, Variant::Bessel, &lap, SpectrumMethod::Lanczos { count }).is_err());
}

#[test]
fn zeta_trace_on_the_line() {
    let (_, lap) = line(512, 20.0);
    let c = euclidean_constant(1);
    let f = FunctionSpec::gaussian(vec![0.0], vec![6f64.sqrt()]);
    let r = zeta_trace(&f, Complex64::new(3.0, 0.0), &lap, 1.0, c).unwrap();
    // ∫ e^{−x²} = √π and c·Γ(3/2)·Γ(1)/Γ(3/2) = 1/π.
    assert!((r.expected_re - 1.0 / PI.sqrt()).abs() < 1e-8, "{}", r.expected_re);
    assert!(r.deviation < 0.02, "{}", r.deviation);

    let r = zeta_trace(&f, Complex64::new(3.0, 1.0), &lap, 1.0, c).unwrap();
    assert!(r.trace_im != 0.0);
    assert!(r.deviation < 0.05, "{}", r.deviation);

    assert!(matches!(zeta_trace(&f, Complex64::new(1.0, 0.0), &lap, 1.0, c), Err(Error::Domain(_))));
    let neg = FunctionSpec::Constant { value: -1.0 };
    assert!(matches!(zeta_trace(&neg, Complex64::new(3.0, 0.0), &lap, 1.0, c), Err(Error::Input(_))));
    let zero = FunctionSpec::Constant { value: 0.0 };
    assert_eq!(zeta_trace(&zero, Complex64::new(3.0, 0.0), &lap, 1.0, c).unwrap().deviation, 0.0);
}

#[test]
fn zeta_trace_blocks_match_full_operator() {
    let alg = preset("h1").unwrap();
    let grid = GridSpec::new(vec![8, 8, 8], vec![3.0, 3.0, 3.0]).unwrap();
    let full = assemble_sublaplacian(&alg, &grid, Scheme::Fourier).unwrap();
    let blocks = fourier_block_decompose(&alg, &grid, Scheme::Fourier, None).unwrap();
    let f = FunctionSpec::gaussian(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, f64::INFINITY]);
    let z = Complex64::new(5.0, 0.5);
    let a = zeta_trace(&f, z, &full, 4.0, 1.0 / 128.0).unwrap();
    let b = zeta_trace(&f, z, &blocks, 4.0, 1.0 / 128.0).unwrap();
    assert!((a.trace() - b.trace()).norm() < 1e-10 * a.trace().norm());
    assert!((a.expected() - b.expected()).norm() < 1e-12 * a.expected().norm());
}

#[test]
fn connes_trace_on_the_line() {
    let (_, lap) = line(1024, 10.0);
    let f = FunctionSpec::gaussian(vec![0.0], vec![1.0]);
    let c = euclidean_constant(1);
    let r = connes_trace_check(&f, &lap, 1.0, c, FitWindow::new(20, 100), SpectrumMethod::Dense).unwrap();
    assert!((r.target - PI.sqrt() / PI).abs() < 1e-8);
    let dev = r.fit.as_ref().unwrap().deviation.unwrap();
    assert!(dev.abs() < 0.15, "{dev}");
    let zero = FunctionSpec::Constant { value: 0.0 };
    let r = connes_trace_check(&zero, &lap, 1.0, c, FitWindow::new(20, 100), SpectrumMethod::Dense).unwrap();
    assert_eq!(r.fitted_constant, 0.0);
    assert!(r.fit.is_none());
}

#[test]
fn cwikel_table_rows_and_config_checks() {
    let alg = preset("r1").unwrap();
    let (_, lap) = line(128, 8.0);
    let family = vec![
        FunctionSpec::gaussian(vec![0.0], vec![1.0]),
        FunctionSpec::gaussian(vec![2.0], vec![0.5]),
        FunctionSpec::Constant { value: 0.0 },
    ];
    let t = cwikel_ratio_experiment(&family, CwikelCase::Lebesgue { p: 3.0 }, &alg, &lap, None).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(t.rows[2].ratio, 0.0);
    assert!(t.rows[..2].iter().all(|r| r.ratio > 0.0 && r.ratio.is_finite()));
    assert_eq!(t.sup_ratio, t.rows[0].ratio.max(t.rows[1].ratio));

    // The ratio of a dilated function stays bounded.
    let g = FunctionSpec::Gaussian { center: vec![0.0], width: vec![1.0], amplitude: 3.0 };
    let s = cwikel_ratio_experiment(&[g], CwikelCase::Lebesgue { p: 3.0 }, &alg, &lap, None).unwrap();
    assert!((s.rows[0].ratio / t.rows[0].ratio - 1.0).abs() < 1e-10);

    for bad in [CwikelCase::Lebesgue { p: 2.0 }, CwikelCase::Mixed { p: 2.5, q: 3.0 }, CwikelCase::Logarithmic { q: 2.0 }] {
        assert!(matches!(cwikel_ratio_experiment(&family, bad, &alg, &lap, None), Err(Error::Config(_))));
    }
    assert!(matches!(
        cwikel_ratio_experiment(&family, CwikelCase::Mixed { p: 1.0, q: 3.0 }, &alg, &lap, None),
        Err(Error::Config(_))
    ));

    let region = BoxRegion::cube(1, -8.0, 8.0).unwrap();
    let cov = build_covering(&region, &alg, &QuasiMetricSpec::for_algebra(&alg), CoveringOptions::default()).unwrap();
    for case in [CwikelCase::Mixed { p: 1.0, q: 3.0 }, CwikelCase::Logarithmic { q: 4.0 }] {
        let t = cwikel_ratio_experiment(&family, case, &alg, &lap, Some(&cov)).unwrap();
        assert!(t.sup_ratio > 0.0 && t.sup_ratio.is_finite());
    }
}
