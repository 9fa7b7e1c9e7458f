use faer::Mat;
use proptest::prelude::*;

use subspectra::algebra::{preset, GroupPoint, QuasiMetricSpec};
use subspectra::counting::matrix_negative_count;
use subspectra::covering::{build_covering, mixed_norm, mixed_norm_log, BoxRegion, CoveringOptions};
use subspectra::experiment::Config;
use subspectra::grid::{Lattice, SampledFunction};
use subspectra::linalg::CsrMatrix;
use subspectra::operator::Matrix;
use subspectra::spectral::{schatten_norms, SpectralReport};

fn point(dim: usize) -> impl Strategy<Value = GroupPoint> {
    prop::collection::vec(-2.0..2.0f64, dim).prop_map(GroupPoint)
}

fn square(n: usize) -> impl Strategy<Value = Mat<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| Mat::from_fn(n, n, |i, j| v[i * n + j]))
}

fn pair() -> impl Strategy<Value = (Mat<f64>, Mat<f64>)> {
    (2usize..10).prop_flat_map(|n| (square(n), square(n)))
}

fn svals(m: &Mat<f64>) -> Vec<f64> {
    Matrix::Dense(m.clone()).singular_values().unwrap()
}

/// `#{k : μ(k) > s}`.
fn above(mu: &[f64], s: f64) -> usize {
    mu.iter().filter(|&&m| m > s).count()
}

fn schatten(mu: Vec<f64>, p: f64) -> f64 {
    schatten_norms(&SpectralReport::new("t", mu).unwrap(), p).unwrap().strong
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bch_is_associative((name, a, b, c) in prop::sample::select(vec![("r3", 3), ("h1", 3), ("bony2", 4)])
        .prop_flat_map(|(name, d)| (Just(name), point(d), point(d), point(d))))
    {
        let alg = preset(name).unwrap();
        let left = alg.product(&alg.product(&a, &b), &c);
        let right = alg.product(&a, &alg.product(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-10);
        let e = alg.product(&a, &a.inverse());
        prop_assert!(e.max_abs_diff(&GroupPoint::identity(alg.dimension())) < 1e-12);
    }

    #[test]
    fn dilations_are_automorphisms(g in point(3), h in point(3), r in 0.1..4.0f64) {
        let alg = preset("h1").unwrap();
        let spec = QuasiMetricSpec::for_algebra(&alg);
        let lhs = alg.dilation(&alg.product(&g, &h), r).unwrap();
        let rhs = alg.product(&alg.dilation(&g, r).unwrap(), &alg.dilation(&h, r).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * r.max(1.0).powi(2));
        let n = spec.quasi_norm(&alg, &alg.dilation(&g, r).unwrap());
        prop_assert!((n - r * spec.quasi_norm(&alg, &g)).abs() < 1e-12 * n.max(1.0));
    }

    #[test]
    fn heisenberg_quasi_triangle(x in point(3), y in point(3), z in point(3)) {
        let alg = preset("h1").unwrap();
        let spec = QuasiMetricSpec::for_algebra(&alg);
        let direct = spec.dist(&alg, &x, &z);
        let via = spec.dist(&alg, &x, &y) + spec.dist(&alg, &y, &z);
        prop_assert!(direct <= 2.0 * via + 1e-12);
    }

    #[test]
    fn squaring_singular_values(t in (2usize..12).prop_flat_map(square)) {
        let mu = svals(&t);
        let tt = t.transpose() * &t;
        let nu = svals(&tt);
        for (m, n) in mu.iter().zip(&nu) {
            prop_assert!((m * m - n).abs() <= 1e-9 * nu[0].max(1.0));
        }
    }

    #[test]
    fn fan_counting_inequality((t, s) in pair(), a in 0.0..1.5f64, b in 0.0..1.5f64) {
        let sum = &t + &s;
        prop_assert!(above(&svals(&sum), a + b) <= above(&svals(&t), a) + above(&svals(&s), b));
    }

    #[test]
    fn holder_for_schatten_norms((t, s) in pair(), p in 1.0..4.0f64, q in 1.0..4.0f64) {
        let r = 1.0 / (1.0 / p + 1.0 / q);
        let lhs = schatten(svals(&(&t * &s)), r);
        prop_assert!(lhs <= schatten(svals(&t), p) * schatten(svals(&s), q) * (1.0 + 1e-12));
    }

    #[test]
    fn weak_norm_is_dominated(mu in prop::collection::vec(0.0..5.0f64, 1..60), p in 0.5..4.0f64) {
        let n = schatten_norms(&SpectralReport::new("t", mu).unwrap(), p).unwrap();
        prop_assert!(n.weak <= n.strong * (1.0 + 1e-12));
    }

    #[test]
    fn sparse_counts_match_dense_and_are_monotone(
        entries in prop::collection::vec((0usize..40, 0usize..40, -1.0..1.0f64), 40..200),
        t0 in -2.0..2.0f64,
    ) {
        let mut trip: Vec<_> = (0..40).map(|i| (i, i, 0.5 * (i as f64 - 20.0) / 10.0)).collect();
        for (i, j, v) in entries {
            trip.push((i, j, v));
            trip.push((j, i, v));
        }
        let a = Matrix::Sparse(CsrMatrix::from_triplets(40, 40, trip).unwrap());
        let d = a.to_dense().unwrap();
        let lo = matrix_negative_count(&a, t0).unwrap();
        prop_assert_eq!(lo, matrix_negative_count(&d, t0).unwrap());
        prop_assert!(matrix_negative_count(&a, t0 + 0.5).unwrap() >= lo);
    }

    #[test]
    fn mixed_norms_are_homogeneous(c in -5.0..5.0f64, w in 0.3..2.0f64, p in 1.0..3.0f64, q in 1.0..3.0f64) {
        let alg = preset("r2").unwrap();
        let region = BoxRegion::cube(2, -2.0, 2.0).unwrap();
        let cov = build_covering(&region, &alg, &QuasiMetricSpec::for_algebra(&alg), CoveringOptions::default()).unwrap();
        let lattice = Lattice::midpoints(&[-2.0, -2.0], &[2.0, 2.0], &[16, 16]).unwrap();
        let f = SampledFunction::from_fn(lattice, |x| (-(x[0] * x[0] + x[1] * x[1]) / (w * w)).exp());
        let g = f.scaled(c);
        for norm in [mixed_norm, mixed_norm_log] {
            let (a, b) = (norm(&alg, &f, &cov, p, q).unwrap(), norm(&alg, &g, &cov, p, q).unwrap());
            prop_assert!((b - c.abs() * a).abs() <= 1e-12 * a.max(1.0) * c.abs().max(1.0));
        }
    }

    #[test]
    fn config_round_trips(
        entries in prop::collection::btree_map("[a-z]{1,6}(\\.[a-z_]{1,6})?", "[a-z0-9.,-]{1,10}", 0..12),
    ) {
        let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let cfg = Config::parse(&text).unwrap();
        prop_assert_eq!(cfg.entries(), &entries);
    }
}
