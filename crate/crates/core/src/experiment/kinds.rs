//! Runners and preset defaults for every experiment kind.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{Artifact, Check, Config, ExperimentKind, Outcome, Stopwatch, SummaryEntry};
use crate::algebra::{preset, QuasiMetricSpec, StratifiedAlgebra};
use crate::counting::{birman_schwinger_check, semiclassical_sweep, PotentialSplit};
use crate::covering::{
    build_covering, covering_equivalence_check, mixed_norm, mixed_norm_log, BoxRegion, Covering, CoveringOptions,
};
use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::grid::{GridSpec, Lattice, SampledFunction};
use crate::numerics::linear_fit;
use crate::operator::{
    assemble_sublaplacian, fourier_block_decompose, heat_traces, multiplier_samples, DiscreteOperator, Matrix,
    Scheme,
};
use crate::spectral::{
    asymptotic_fit, connes_trace_check, cwikel_ratio_experiment, group_constant, sandwich_spectrum, zeta_trace,
    CwikelCase, FitWindow, Provenance, SpectralReport, SpectrumMethod, Variant,
};

type Defaults = Vec<(&'static str, &'static str)>;

/// Presets with tuned defaults for `kind`; an empty list means the kind
/// does not need a grid.
pub(super) fn tuned_presets(kind: ExperimentKind) -> Vec<&'static str> {
    use ExperimentKind::*;
    match kind {
        ValidateAlgebra | Covering | MixedNorm | BsCheck => vec![],
        HeatTrace | Asymptotic | Connes => vec!["r1", "r2", "r3", "h1"],
        Zeta | CwikelRatio => vec!["r1", "r2", "h1"],
        Semiclassical => vec!["r1", "r3", "h1"],
    }
}

fn gaussian_defaults(prefix: &'static str, preset: &str) -> Defaults {
    let keys: [&'static str; 3] = match prefix {
        "potential" => ["potential.center", "potential.width", "potential.amplitude"],
        _ => ["function.center", "function.width", "function.amplitude"],
    };
    let amplitude = if prefix == "potential" { "-1" } else { "1" };
    let (center, width) = match preset {
        "r1" => ("0", "1"),
        "r2" => ("0,0", "1,1"),
        "r3" => ("0,0,0", "1,1,1"),
        "h1" => ("0,0,0", "1,1,inf"),
        _ => return vec![],
    };
    vec![(keys[0], center), (keys[1], width), (keys[2], amplitude)]
}

/// Default keys for `kind` on `preset`; user keys take precedence.
pub(super) fn defaults(kind: ExperimentKind, preset: Option<&str>) -> Defaults {
    use ExperimentKind::*;
    let p = preset.unwrap_or("");
    let mut d: Defaults = vec![("seed", "7")];
    if !tuned_presets(kind).is_empty() && !tuned_presets(kind).contains(&p) {
        return d;
    }
    match kind {
        ValidateAlgebra | BsCheck => {}
        Covering | MixedNorm => {
            d.extend([
                ("covering.lo", "-2"),
                ("covering.hi", "2"),
                ("covering.separation", "1"),
                ("covering.radius", "1"),
            ]);
            if kind == MixedNorm {
                d.extend([
                    ("function.kind", "gaussian"),
                    ("function.center", "0"),
                    ("function.width", "1"),
                    ("function.amplitude", "1"),
                    ("norm.p", "1"),
                    ("norm.q", "3"),
                    ("norm.cells", "24"),
                    ("covering.alt_radius", "2"),
                ]);
            }
        }
        Asymptotic | Connes => {
            d.extend(gaussian_defaults("function", p));
            d.push(("function.kind", "gaussian"));
            d.extend(match p {
                "r1" => vec![
                    ("grid.n", "2048"),
                    ("grid.half_width", "20"),
                    ("grid.scheme", "fourier"),
                    ("fit.lo", "20"),
                    ("fit.hi", "100"),
                    ("check.tolerance", "0.12"),
                ],
                "r2" => vec![
                    ("grid.n", "64"),
                    ("grid.half_width", "8"),
                    ("grid.scheme", "fourier"),
                    ("fit.lo", "20"),
                    ("fit.hi", "200"),
                    ("check.tolerance", "0.15"),
                ],
                "r3" => vec![
                    ("grid.n", "16"),
                    ("grid.half_width", "4"),
                    ("grid.scheme", "fourier"),
                    ("fit.lo", "20"),
                    ("fit.hi", "200"),
                    ("check.tolerance", "0.25"),
                ],
                _ => vec![
                    ("grid.n", "32"),
                    ("grid.half_width", "3"),
                    ("grid.scheme", "fourier"),
                    ("grid.blocks", "true"),
                    ("fit.lo", "50"),
                    ("fit.hi", "500"),
                    ("spectrum.method", "lanczos"),
                    ("spectrum.count", "501"),
                    ("check.tolerance", "0.25"),
                ],
            });
            if kind == Asymptotic {
                d.push(("operator.k", if p == "h1" { "2" } else { "1" }));
            }
        }
        HeatTrace => {
            d.extend([("heat.s_min", "0.05"), ("heat.s_max", "0.4"), ("heat.points", "8")]);
            d.extend([("check.slope_tolerance", "0.15"), ("check.factor", "1.5"), ("grid.scheme", "fourier")]);
            d.extend(match p {
                "r1" => vec![("grid.n", "256"), ("grid.half_width", "8")],
                "r2" => vec![("grid.n", "32"), ("grid.half_width", "4")],
                "r3" => vec![("grid.n", "16"), ("grid.half_width", "4")],
                _ => vec![("grid.n", "16"), ("grid.half_width", "4"), ("grid.blocks", "true")],
            });
        }
        Zeta => {
            d.extend([("zeta.re", "3"), ("zeta.im", "0"), ("function.kind", "gaussian"), ("grid.scheme", "fourier")]);
            d.extend(match p {
                "r1" => vec![
                    ("grid.n", "2048"),
                    ("grid.half_width", "20"),
                    ("function.center", "0"),
                    ("function.width", "2.449489742783178"),
                    ("function.amplitude", "1"),
                    ("check.tolerance", "0.02"),
                ],
                "r2" => vec![
                    ("grid.n", "64"),
                    ("grid.half_width", "8"),
                    ("function.center", "0,0"),
                    ("function.width", "2,2"),
                    ("function.amplitude", "1"),
                    ("check.tolerance", "0.05"),
                ],
                _ => vec![
                    ("grid.n", "16"),
                    ("grid.half_width", "4"),
                    ("grid.blocks", "true"),
                    ("zeta.re", "6"),
                    ("function.center", "0,0,0"),
                    ("function.width", "1.5,1.5,inf"),
                    ("function.amplitude", "1"),
                    ("check.tolerance", "0.25"),
                ],
            });
        }
        CwikelRatio => {
            d.extend(gaussian_defaults("function", p));
            d.extend([
                ("function.kind", "gaussian"),
                ("cwikel.case", "lebesgue"),
                ("cwikel.scales", "0.5,1,2"),
                ("grid.scheme", "fourier"),
                ("covering.separation", "1"),
                ("covering.radius", "1"),
            ]);
            d.extend(match p {
                "r1" => vec![("grid.n", "256"), ("grid.half_width", "10")],
                "r2" => vec![("grid.n", "32"), ("grid.half_width", "6")],
                _ => vec![("grid.n", "12"), ("grid.half_width", "4"), ("grid.blocks", "true")],
            });
        }
        Semiclassical => {
            d.extend(gaussian_defaults("potential", p));
            d.extend([("potential.kind", "gaussian"), ("check.final_tolerance", "0.2")]);
            d.extend(match p {
                "r1" => vec![
                    ("grid.n", "256"),
                    ("grid.half_width", "8"),
                    ("grid.scheme", "forward"),
                    ("semiclassical.h", "0.4,0.2,0.1,0.05"),
                ],
                "r3" => vec![
                    ("grid.n", "32"),
                    ("grid.half_width", "4"),
                    ("grid.scheme", "forward"),
                    ("semiclassical.h", "0.5,0.35,0.25,0.18"),
                ],
                _ => vec![
                    ("grid.n", "16,16,16"),
                    ("grid.half_width", "4"),
                    ("grid.scheme", "fourier"),
                    ("grid.blocks", "true"),
                    ("semiclassical.h", "0.5,0.35,0.25"),
                ],
            });
        }
    }
    d
}

pub(super) fn run(kind: ExperimentKind, cfg: &Config) -> Result<Outcome> {
    use ExperimentKind::*;
    // Every kind accepts a seed, even the deterministic ones.
    let _ = cfg.raw("seed");
    match kind {
        ValidateAlgebra => validate_algebra(cfg),
        Covering => covering(cfg),
        MixedNorm => mixed_norm_kind(cfg),
        HeatTrace => heat_trace(cfg),
        Asymptotic => asymptotic(cfg),
        CwikelRatio => cwikel(cfg),
        Zeta => zeta(cfg),
        BsCheck => bs_check(cfg),
        Semiclassical => semiclassical(cfg),
        Connes => connes(cfg),
    }
}

// ---- configuration readers ----

fn parse_enum<T: std::str::FromStr<Err = Error>>(cfg: &Config, key: &str, default: T) -> Result<T> {
    cfg.raw(key).map(str::parse).transpose().map(|v| v.unwrap_or(default))
}

fn algebra(cfg: &Config) -> Result<StratifiedAlgebra> {
    if let Some(path) = cfg.raw("algebra.file") {
        let text = std::fs::read_to_string(path)?;
        return StratifiedAlgebra::parse(&text);
    }
    preset(cfg.required("preset")?)
}

fn broadcast<T: Clone>(key: &str, v: Vec<T>, dim: usize) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); dim]),
        n if n == dim => Ok(v),
        n => Err(Error::Config(format!("`{key}` has {n} entries, expected 1 or {dim}"))),
    }
}

fn grid(cfg: &Config, dim: usize) -> Result<GridSpec> {
    let n = broadcast("grid.n", cfg.require_list("grid.n")?, dim)?;
    let l = broadcast("grid.half_width", cfg.require_list("grid.half_width")?, dim)?;
    GridSpec::new(n, l)
}

fn function(cfg: &Config, prefix: &str, dim: usize) -> Result<FunctionSpec> {
    let key = |k: &str| format!("{prefix}.{k}");
    let vec_of = |k: &str| -> Result<Vec<f64>> { broadcast(&key(k), cfg.require_list(&key(k))?, dim) };
    let amplitude = cfg.get_or(&key("amplitude"), 1.0)?;
    let f = match cfg.raw(&key("kind")).unwrap_or("gaussian") {
        "gaussian" => FunctionSpec::Gaussian {
            center: vec_of("center")?,
            width: vec_of("width")?,
            amplitude,
        },
        "bump" => FunctionSpec::Bump {
            center: vec_of("center")?,
            radius: cfg.require(&key("radius"))?,
            amplitude,
        },
        "indicator" => FunctionSpec::Indicator {
            lo: vec_of("lo")?,
            hi: vec_of("hi")?,
            amplitude,
        },
        "constant" => FunctionSpec::Constant {
            value: cfg.require(&key("value"))?,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown {prefix}.kind `{other}` (expected gaussian, bump, indicator or constant)"
            )))
        }
    };
    f.check_dimension(dim)?;
    Ok(f)
}

struct Setup {
    alg: StratifiedAlgebra,
    grid: GridSpec,
    scheme: Scheme,
    lap: DiscreteOperator,
    d_hom: f64,
}

/// Algebra, grid and sub-Laplacian; `f` must not vary along the
/// decomposition axis when blocks are requested.
fn setup(cfg: &Config, f: Option<&FunctionSpec>) -> Result<Setup> {
    let alg = algebra(cfg)?;
    let grid = grid(cfg, alg.dimension())?;
    let scheme = parse_enum(cfg, "grid.scheme", Scheme::default())?;
    let lap = if cfg.get_or("grid.blocks", false)? {
        fourier_block_decompose(&alg, &grid, scheme, f)?
    } else {
        assemble_sublaplacian(&alg, &grid, scheme)?
    };
    let d_hom = alg.homogeneous_dimension() as f64;
    Ok(Setup {
        alg,
        grid,
        scheme,
        lap,
        d_hom,
    })
}

fn window(cfg: &Config) -> Result<FitWindow> {
    Ok(FitWindow::new(cfg.require("fit.lo")?, cfg.require("fit.hi")?))
}

fn spectrum_method(cfg: &Config) -> Result<SpectrumMethod> {
    match cfg.raw("spectrum.method").unwrap_or("dense") {
        "dense" => Ok(SpectrumMethod::Dense),
        "lanczos" => Ok(SpectrumMethod::Lanczos {
            count: cfg.require("spectrum.count")?,
        }),
        other => Err(Error::Config(format!("unknown spectrum.method `{other}` (expected dense or lanczos)"))),
    }
}

fn entry(name: &str, value: f64, provenance: Provenance) -> SummaryEntry {
    SummaryEntry {
        name: name.to_string(),
        value,
        provenance,
    }
}

fn artifact(file_name: &str, contents: String) -> Artifact {
    Artifact {
        file_name: file_name.to_string(),
        contents,
    }
}

fn csv_from(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Input(e.to_string()))
}

/// Two-column plot data.
fn plot(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (x, y) in points {
        let _ = writeln!(s, "{x:e} {y:e}");
    }
    s
}

/// Constant of the group, as a summary entry.
fn constant(alg: &StratifiedAlgebra) -> Result<(f64, SummaryEntry)> {
    let (c, prov) = group_constant(alg)?;
    Ok((c, entry("c_G", c, prov)))
}

fn grid_json(s: &Setup) -> serde_json::Value {
    json!({
        "dims": s.grid.dims(),
        "half_widths": s.grid.half_widths(),
        "scheme": s.scheme.to_string(),
        "blocks": s.lap.blocks().is_some(),
    })
}

// ---- runners ----

fn validate_algebra(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    cfg.ensure_all_used()?;
    let v = alg.validate();
    sw.lap("validate");
    let d_hom = alg.homogeneous_dimension();
    let report = json!({
        "algebra": alg.name(),
        "status": if v.is_valid() { "valid" } else { "invalid" },
        "d_hom": d_hom,
        "layers": alg.layer_dims(),
        "filtration": v.filtration,
        "violations": v.violations,
    });
    Ok(Outcome {
        kind: ExperimentKind::ValidateAlgebra,
        report,
        summary: vec![entry("d_hom", d_hom as f64, Provenance::PaperFormula)],
        checks: vec![Check::holds("stratified", v.is_valid())],
        artifacts: vec![],
        stages: sw.finish(),
    })
}

fn region(cfg: &Config, dim: usize) -> Result<BoxRegion> {
    BoxRegion::new(
        broadcast("covering.lo", cfg.require_list("covering.lo")?, dim)?,
        broadcast("covering.hi", cfg.require_list("covering.hi")?, dim)?,
    )
}

fn covering_options(cfg: &Config, radius_key: &str) -> Result<CoveringOptions> {
    Ok(CoveringOptions {
        separation: cfg.get_or("covering.separation", 1.0)?,
        base_radius: cfg.get_or(radius_key, 1.0)?,
        lattice_step: cfg.get("covering.step")?,
    })
}

fn covering(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    let region = region(cfg, alg.dimension())?;
    let opts = covering_options(cfg, "covering.radius")?;
    cfg.ensure_all_used()?;
    let cov = build_covering(&region, &alg, &QuasiMetricSpec::for_algebra(&alg), opts)?;
    sw.lap("build");
    let check = cov.check(&alg);
    sw.lap("check");
    let centers = csv_from(|w| cov.write_centers_csv(w))?;
    Ok(Outcome {
        kind: ExperimentKind::Covering,
        report: json!({ "algebra": alg.name(), "covering": &cov, "check": &check }),
        summary: vec![
            entry("centers", check.centers as f64, Provenance::Fit),
            entry("min_separation", check.min_separation, Provenance::Fit),
            entry("max_multiplicity", check.max_multiplicity as f64, Provenance::Fit),
            entry("multiplicity_bound", check.multiplicity_bound, Provenance::PaperFormula),
        ],
        checks: vec![
            Check::holds("separated", check.min_separation >= opts.separation),
            Check::at_most("uncovered", check.uncovered as f64, 0.0),
            Check::at_most("multiplicity", check.max_multiplicity as f64, check.multiplicity_bound),
        ],
        artifacts: vec![artifact("centers.csv", centers)],
        stages: sw.finish(),
    })
}

fn dilate(f: &FunctionSpec, s: f64) -> FunctionSpec {
    match f.clone() {
        FunctionSpec::Gaussian { center, width, amplitude } => FunctionSpec::Gaussian {
            center,
            width: width.iter().map(|w| w * s).collect(),
            amplitude,
        },
        FunctionSpec::Bump { center, radius, amplitude } => FunctionSpec::Bump {
            center,
            radius: radius * s,
            amplitude,
        },
        FunctionSpec::Indicator { lo, hi, amplitude } => FunctionSpec::Indicator {
            lo: lo.iter().map(|x| x * s).collect(),
            hi: hi.iter().map(|x| x * s).collect(),
            amplitude,
        },
        c @ FunctionSpec::Constant { .. } => c,
    }
}

fn mixed_norm_kind(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    let dim = alg.dimension();
    let region = region(cfg, dim)?;
    let opts = covering_options(cfg, "covering.radius")?;
    let alt = covering_options(cfg, "covering.alt_radius")?;
    let f = function(cfg, "function", dim)?;
    let p: f64 = cfg.require("norm.p")?;
    let q: f64 = cfg.require("norm.q")?;
    let cells = broadcast("norm.cells", cfg.require_list::<usize>("norm.cells")?, dim)?;
    let scales: Vec<f64> = cfg.list("norm.scales")?.unwrap_or_else(|| vec![1.0]);
    cfg.ensure_all_used()?;
    let spec = QuasiMetricSpec::for_algebra(&alg);
    let a = build_covering(&region, &alg, &spec, opts)?;
    let b = build_covering(&region, &alg, &spec, alt)?;
    sw.lap("coverings");
    let lattice = Lattice::midpoints(&region.lo, &region.hi, &cells)?;
    let family: Vec<SampledFunction> = scales
        .iter()
        .map(|&s| {
            let g = dilate(&f, s);
            SampledFunction::from_fn(lattice.clone(), |x| g.eval(x))
        })
        .collect();
    let norm = mixed_norm(&alg, &family[0], &a, p, q)?;
    let norm_log = mixed_norm_log(&alg, &family[0], &a, p, q)?;
    let tiles = a.tile_norms(&alg, &family[0], q)?;
    let eq = covering_equivalence_check(&alg, &family, &a, &b, p, q)?;
    sw.lap("norms");
    let mut csv = String::from("tile,norm\n");
    for (i, t) in tiles.iter().enumerate() {
        let _ = writeln!(csv, "{i},{t:e}");
    }
    Ok(Outcome {
        kind: ExperimentKind::MixedNorm,
        report: json!({
            "algebra": alg.name(),
            "p": p,
            "q": q,
            "mixed_norm": norm,
            "mixed_norm_log": norm_log,
            "tiles": a.len(),
            "alt_tiles": b.len(),
            "equivalence": &eq,
        }),
        summary: vec![
            entry("mixed_norm", norm, Provenance::Quadrature),
            entry("mixed_norm_log", norm_log, Provenance::Quadrature),
            entry("equivalence_constant", eq.constant, Provenance::Quadrature),
        ],
        checks: vec![Check::holds("log norm dominates", norm_log >= norm * (2f64.ln()).powf(1.0 / p) * (1.0 - 1e-12))],
        artifacts: vec![artifact("tiles.csv", csv)],
        stages: sw.finish(),
    })
}

fn heat_trace(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let s = setup(cfg, None)?;
    let s_min: f64 = cfg.require("heat.s_min")?;
    let s_max: f64 = cfg.require("heat.s_max")?;
    let points: usize = cfg.require("heat.points")?;
    let slope_tol: f64 = cfg.require("check.slope_tolerance")?;
    let factor: f64 = cfg.require("check.factor")?;
    cfg.ensure_all_used()?;
    if points < 2 || !(s_max > s_min) {
        return Err(Error::Config("heat window needs s_max > s_min and at least 2 points".into()));
    }
    let (c, c_entry) = constant(&s.alg)?;
    sw.lap("assemble");
    let times: Vec<f64> = (0..points)
        .map(|i| s_min * (s_max / s_min).powf(i as f64 / (points - 1) as f64))
        .collect();
    let traces = heat_traces(&s.lap, &times, s.d_hom)?;
    sw.lap("eigensolve");
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = traces.iter().map(|t| t.trace.ln()).collect();
    let slope = linear_fit(&x, &y).map(|f| f.slope).ok_or_else(|| Error::Fit("degenerate heat window".into()))?;
    let worst = traces.iter().map(|t| (t.c_hat / c).max(c / t.c_hat)).fold(1.0, f64::max);
    let mut csv = String::from("s,trace,c_hat\n");
    for t in &traces {
        let _ = writeln!(csv, "{:e},{:e},{:e}", t.s, t.trace, t.c_hat);
    }
    let mut summary = vec![c_entry, entry("slope", slope, Provenance::Fit), entry("worst_factor", worst, Provenance::Fit)];
    summary.extend(traces.iter().map(|t| entry(&format!("c_hat({})", t.s), t.c_hat, Provenance::Fit)));
    Ok(Outcome {
        kind: ExperimentKind::HeatTrace,
        report: json!({
            "algebra": s.alg.name(),
            "d_hom": s.d_hom,
            "grid": grid_json(&s),
            "slope": slope,
            "expected_slope": -s.d_hom / 2.0,
            "c_G": c,
            "traces": traces,
        }),
        summary,
        checks: vec![
            Check::at_most("slope", (slope + s.d_hom / 2.0).abs(), slope_tol),
            Check::at_most("c_hat factor", worst, factor),
        ],
        artifacts: vec![
            artifact("heat.csv", csv),
            artifact("heat.dat", plot(traces.iter().map(|t| (t.s, t.c_hat)))),
        ],
        stages: sw.finish(),
    })
}

fn asymptotic(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    let f = function(cfg, "function", alg.dimension())?;
    let s = setup(cfg, Some(&f))?;
    let k: f64 = cfg.get_or("operator.k", s.d_hom)?;
    let variant = parse_enum(cfg, "operator.variant", Variant::Bessel)?;
    let method = spectrum_method(cfg)?;
    let win = window(cfg)?;
    let tol: f64 = cfg.require("check.tolerance")?;
    cfg.ensure_all_used()?;
    let p = s.d_hom / k;
    let (c, c_entry) = constant(&s.alg)?;
    let integral = multiplier_samples(&f, &s.lap)?.iter().map(|v| v.abs().powf(p)).sum::<f64>() * s.lap.sample_volume();
    let target = c * integral;
    sw.lap("assemble");
    let values = sandwich_spectrum(&f, k, variant, &s.lap, method)?;
    sw.lap("spectrum");
    let mut report = SpectralReport::new(format!("J^(-{k}/2) M_f J^(-{k}/2)"), values)?;
    let fit = asymptotic_fit(&report, p, win, Some(target))?;
    report.fit = Some(fit.clone());
    sw.lap("fit");
    let deviation = fit.deviation.unwrap_or(f64::NAN);
    let spectrum = csv_from(|w| report.write_csv(p, w))?;
    let scaled = report
        .singular_values
        .iter()
        .enumerate()
        .map(|(n, m)| (n as f64, (n + 1) as f64 * m.powf(p)));
    Ok(Outcome {
        kind: ExperimentKind::Asymptotic,
        report: json!({
            "algebra": s.alg.name(),
            "d_hom": s.d_hom,
            "k": k,
            "p": p,
            "variant": variant,
            "grid": grid_json(&s),
            "method": method,
            "values": report.len(),
            "integral": integral,
            "target": target,
            "fit": fit,
        }),
        summary: vec![
            c_entry,
            entry("integral", integral, Provenance::Quadrature),
            entry("target", target, Provenance::Quadrature),
            entry("fitted_constant", fit.fitted_constant, Provenance::Fit),
            entry("slope", fit.slope, Provenance::Fit),
            entry("residual_spread", fit.residual_spread, Provenance::Fit),
            entry("deviation", deviation, Provenance::Fit),
        ],
        checks: vec![Check::at_most("deviation", deviation.abs(), tol)],
        artifacts: vec![artifact("spectrum.csv", spectrum), artifact("asymptotic.dat", plot(scaled))],
        stages: sw.finish(),
    })
}

fn connes(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    let f = function(cfg, "function", alg.dimension())?;
    let s = setup(cfg, Some(&f))?;
    let method = spectrum_method(cfg)?;
    let win = window(cfg)?;
    let tol: f64 = cfg.require("check.tolerance")?;
    cfg.ensure_all_used()?;
    let (c, c_entry) = constant(&s.alg)?;
    sw.lap("assemble");
    let r = connes_trace_check(&f, &s.lap, s.d_hom, c, win, method)?;
    sw.lap("spectrum");
    let deviation = r.fit.as_ref().and_then(|f| f.deviation).unwrap_or(0.0);
    let spectrum = csv_from(|w| r.spectrum.write_csv(1.0, w))?;
    Ok(Outcome {
        kind: ExperimentKind::Connes,
        report: json!({
            "algebra": s.alg.name(),
            "d_hom": s.d_hom,
            "grid": grid_json(&s),
            "target": r.target,
            "fitted_constant": r.fitted_constant,
            "fit": r.fit,
        }),
        summary: vec![
            c_entry,
            entry("target", r.target, Provenance::Quadrature),
            entry("fitted_constant", r.fitted_constant, Provenance::Fit),
            entry("deviation", deviation, Provenance::Fit),
        ],
        checks: vec![Check::at_most("deviation", deviation.abs(), tol)],
        artifacts: vec![artifact("spectrum.csv", spectrum)],
        stages: sw.finish(),
    })
}

fn zeta(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    let f = function(cfg, "function", alg.dimension())?;
    let s = setup(cfg, Some(&f))?;
    let z = Complex64::new(cfg.require("zeta.re")?, cfg.get_or("zeta.im", 0.0)?);
    let tol: f64 = cfg.require("check.tolerance")?;
    cfg.ensure_all_used()?;
    let (c, c_entry) = constant(&s.alg)?;
    sw.lap("assemble");
    let r = zeta_trace(&f, z, &s.lap, s.d_hom, c)?;
    sw.lap("eigensolve");
    Ok(Outcome {
        kind: ExperimentKind::Zeta,
        report: json!({ "algebra": s.alg.name(), "d_hom": s.d_hom, "grid": grid_json(&s), "result": &r }),
        summary: vec![
            c_entry,
            entry("trace_re", r.trace_re, Provenance::Quadrature),
            entry("trace_im", r.trace_im, Provenance::Quadrature),
            entry("expected_re", r.expected_re, Provenance::Quadrature),
            entry("expected_im", r.expected_im, Provenance::Quadrature),
            entry("deviation", r.deviation, Provenance::Quadrature),
        ],
        checks: vec![Check::at_most("deviation", r.deviation, tol)],
        artifacts: vec![],
        stages: sw.finish(),
    })
}

fn cwikel(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    let f = function(cfg, "function", alg.dimension())?;
    let s = setup(cfg, Some(&f))?;
    let q: f64 = cfg.get_or("cwikel.q", 4.0)?;
    let case = match cfg.raw("cwikel.case").unwrap_or("lebesgue") {
        "lebesgue" => CwikelCase::Lebesgue { p: cfg.get_or("cwikel.p", 3.0)? },
        "mixed" => CwikelCase::Mixed { p: cfg.get_or("cwikel.p", 1.0)?, q },
        "log" => CwikelCase::Logarithmic { q },
        other => return Err(Error::Config(format!("unknown cwikel.case `{other}` (expected lebesgue, mixed or log)"))),
    };
    let scales: Vec<f64> = cfg.require_list("cwikel.scales")?;
    let opts = covering_options(cfg, "covering.radius")?;
    let max_ratio: Option<f64> = cfg.get("check.max_ratio")?;
    cfg.ensure_all_used()?;
    let cov: Option<Covering> = match case {
        CwikelCase::Lebesgue { .. } => None,
        _ => {
            let hw = s.grid.half_widths();
            let region = BoxRegion::new(hw.iter().map(|l| -l).collect(), hw.to_vec())?;
            Some(build_covering(&region, &s.alg, &QuasiMetricSpec::for_algebra(&s.alg), opts)?)
        }
    };
    sw.lap("assemble");
    let family: Vec<FunctionSpec> = scales.iter().map(|&k| dilate(&f, k)).collect();
    let table = cwikel_ratio_experiment(&family, case, &s.alg, &s.lap, cov.as_ref())?;
    sw.lap("spectra");
    let mut csv = String::from("index,scale,lhs,rhs,ratio\n");
    for (r, sc) in table.rows.iter().zip(&scales) {
        let _ = writeln!(csv, "{},{sc:e},{:e},{:e},{:e}", r.index, r.lhs, r.rhs, r.ratio);
    }
    let mut checks = vec![Check::holds("finite ratios", table.rows.iter().all(|r| r.ratio.is_finite()))];
    if let Some(m) = max_ratio {
        checks.push(Check::at_most("sup ratio", table.sup_ratio, m));
    }
    Ok(Outcome {
        kind: ExperimentKind::CwikelRatio,
        report: json!({ "algebra": s.alg.name(), "grid": grid_json(&s), "scales": scales, "table": &table }),
        summary: vec![entry("sup_ratio", table.sup_ratio, Provenance::Fit)],
        checks,
        artifacts: vec![
            artifact("cwikel.csv", csv),
            artifact("cwikel.dat", plot(table.rows.iter().zip(&scales).map(|(r, &sc)| (sc, r.ratio)))),
        ],
        stages: sw.finish(),
    })
}

/// A random pair `T = BBᵀ ≥ 0`, `V = σ(C + Cᵀ)` of dimension `n`.
pub fn random_bs_pair(rng: &mut impl Rng, n: usize, sigma: f64) -> (Matrix, Matrix) {
    let b = faer::Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let c = faer::Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let t = &b * b.transpose();
    let v = (&c + c.transpose()) * faer::Scale(sigma);
    (Matrix::Dense(t), Matrix::Dense(v))
}

fn bs_check(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let seed: u64 = cfg.get_or("seed", 7)?;
    let trials: usize = cfg.get_or("bs.trials", 100)?;
    let max_dim: usize = cfg.get_or("bs.max_dim", 50)?;
    let lo: f64 = cfg.get_or("bs.lambda_min", 0.1)?;
    let hi: f64 = cfg.get_or("bs.lambda_max", 2.0)?;
    let sigma: f64 = cfg.get_or("bs.v_scale", 1.5)?;
    // The group is irrelevant here; accept one so presets can be passed uniformly.
    let _ = cfg.raw("preset");
    cfg.ensure_all_used()?;
    if max_dim == 0 || !(hi > lo) || !(lo > 0.0) {
        return Err(Error::Config("bs-check needs max_dim ≥ 1 and 0 < lambda_min < lambda_max".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("trial,dim,lambda,lhs,rhs,equal\n");
    let mut equal = 0;
    for trial in 0..trials {
        let n = rng.random_range(1..=max_dim);
        let (t, v) = random_bs_pair(&mut rng, n, sigma);
        let lambda = rng.random_range(lo..hi);
        let r = birman_schwinger_check(&t, &v, lambda)?;
        equal += usize::from(r.equal);
        let _ = writeln!(csv, "{trial},{n},{:e},{},{},{}", r.lambda, r.lhs, r.rhs, r.equal);
    }
    sw.lap("trials");
    Ok(Outcome {
        kind: ExperimentKind::BsCheck,
        report: json!({ "trials": trials, "equal": equal, "seed": seed }),
        summary: vec![entry("equal_fraction", equal as f64 / trials.max(1) as f64, Provenance::Fit)],
        checks: vec![Check::holds("all trials equal", equal == trials)],
        artifacts: vec![artifact("bs.csv", csv)],
        stages: sw.finish(),
    })
}

fn semiclassical(cfg: &Config) -> Result<Outcome> {
    let mut sw = Stopwatch::start();
    let alg = algebra(cfg)?;
    let v = function(cfg, "potential", alg.dimension())?;
    let s = setup(cfg, Some(&v))?;
    let h_list: Vec<f64> = cfg.require_list("semiclassical.h")?;
    let final_tol: f64 = cfg.require("check.final_tolerance")?;
    cfg.ensure_all_used()?;
    let (c, c_entry) = constant(&s.alg)?;
    let split = PotentialSplit::for_operator(&v, &s.lap)?;
    sw.lap("assemble");
    let r = semiclassical_sweep(&s.lap, &split, &h_list, s.d_hom, c)?;
    sw.lap("counts");
    // The semiclassical law is not claimed for the first Heisenberg group.
    let exploratory = !r.law_applies || s.alg == preset("h1")?;
    let mut checks = Vec::new();
    if !exploratory {
        checks.push(Check::holds("deviation decreasing", r.deviation_decreasing()));
        let last = r.deviations.last().map_or(f64::INFINITY, |d| d.abs());
        checks.push(Check::at_most("final deviation", last, final_tol));
    }
    let csv = csv_from(|w| r.write_csv(w))?;
    let mut summary = vec![c_entry, entry("target", r.target, Provenance::Quadrature)];
    for (h, sc) in r.h_list.iter().zip(&r.scaled) {
        summary.push(entry(&format!("scaled({h})"), *sc, Provenance::Fit));
    }
    Ok(Outcome {
        kind: ExperimentKind::Semiclassical,
        report: json!({
            "algebra": s.alg.name(),
            "grid": grid_json(&s),
            "exploratory": exploratory,
            "sweep": &r,
        }),
        summary,
        checks,
        artifacts: vec![
            artifact("counts.csv", csv),
            artifact("semiclassical.dat", plot(r.h_list.iter().copied().zip(r.scaled.iter().copied()))),
        ],
        stages: sw.finish(),
    })
}
