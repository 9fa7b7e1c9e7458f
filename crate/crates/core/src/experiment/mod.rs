//! Batch experiments: configuration, per-kind runners, checks against
//! tolerances and deterministic artifact emission.

mod config;
mod kinds;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::algebra::presets;
use crate::error::{Error, Result};
use crate::spectral::Provenance;

pub use config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ValidateAlgebra,
    Covering,
    MixedNorm,
    HeatTrace,
    Asymptotic,
    CwikelRatio,
    Zeta,
    BsCheck,
    Semiclassical,
    Connes,
}

impl ExperimentKind {
    pub const ALL: [Self; 10] = [
        Self::ValidateAlgebra,
        Self::Covering,
        Self::MixedNorm,
        Self::HeatTrace,
        Self::Asymptotic,
        Self::CwikelRatio,
        Self::Zeta,
        Self::BsCheck,
        Self::Semiclassical,
        Self::Connes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ValidateAlgebra => "validate-algebra",
            Self::Covering => "covering",
            Self::MixedNorm => "mixed-norm",
            Self::HeatTrace => "heat-trace",
            Self::Asymptotic => "asymptotic",
            Self::CwikelRatio => "cwikel-ratio",
            Self::Zeta => "zeta",
            Self::BsCheck => "bs-check",
            Self::Semiclassical => "semiclassical",
            Self::Connes => "connes",
        }
    }

    /// The statement each kind exercises.
    pub fn anchor(self) -> &'static str {
        match self {
            Self::ValidateAlgebra => "stratification and homogeneous dimension",
            Self::Covering => "coverings of bounded multiplicity by quasi-balls",
            Self::MixedNorm => "mixed norms l_p(L_q) and l_{p,log}(L_q)",
            Self::HeatTrace => "small-time heat trace t^{d/2} h_t(1)",
            Self::Asymptotic => "Weyl asymptotics of J^{-k/2} M_f J^{-k/2}",
            Self::CwikelRatio => "Cwikel estimates in L_p, l_p(L_q) and l_{2,log}(L_q)",
            Self::Zeta => "zeta-function trace formula",
            Self::BsCheck => "Birman-Schwinger principle",
            Self::Semiclassical => "semiclassical count of -h^2 Delta + V",
            Self::Connes => "Connes trace formula",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// One tolerance check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    /// A yes/no condition, recorded as `1` or `0` against the limit `1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            limit: 1.0,
            passed: ok,
        }
    }
}

/// A reported number with its provenance tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryEntry {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// A text artifact: CSV tables and two-column plot data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: ExperimentKind,
    pub report: serde_json::Value,
    pub summary: Vec<SummaryEntry>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    pub stages: Vec<Stage>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    pub config: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    pub stages: Vec<Stage>,
    pub summary: Vec<SummaryEntry>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Collects per-stage wall-clock times.
#[derive(Debug)]
pub(crate) struct Stopwatch {
    last: Instant,
    stages: Vec<Stage>,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            last: Instant::now(),
            stages: Vec::new(),
        }
    }

    pub(crate) fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push(Stage {
            name: name.to_string(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }

    pub(crate) fn finish(self) -> Vec<Stage> {
        self.stages
    }
}

/// Resolves the defaults of `kind` for the configured preset, runs the
/// experiment and returns its outcome together with the resolved config.
pub fn run(kind: ExperimentKind, cfg: Config) -> Result<(Outcome, Config)> {
    let preset = cfg.entries().get("preset").cloned();
    let cfg = cfg.with_defaults(&kinds::defaults(kind, preset.as_deref()));
    let outcome = kinds::run(kind, &cfg)?;
    Ok((outcome, cfg))
}

pub fn manifest(outcome: &Outcome, cfg: &Config) -> RunManifest {
    let versions = BTreeMap::from([("subspectra".to_string(), env!("CARGO_PKG_VERSION").to_string())]);
    RunManifest {
        kind: outcome.kind,
        config: cfg.entries().clone(),
        versions,
        stages: outcome.stages.clone(),
        summary: outcome.summary.clone(),
        checks: outcome.checks.clone(),
        passed: outcome.passed(),
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(dir.join(name)).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Writes `report.json`, `manifest.json` and every artifact into `dir`,
/// each through a temporary file and a rename.
pub fn write_outputs(outcome: &Outcome, manifest: &RunManifest, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut report = serde_json::to_vec_pretty(&outcome.report)?;
    report.push(b'\n');
    write_atomic(dir, "report.json", &report)?;
    for a in &outcome.artifacts {
        write_atomic(dir, &a.file_name, a.contents.as_bytes())?;
    }
    let mut m = serde_json::to_vec_pretty(manifest)?;
    m.push(b'\n');
    write_atomic(dir, "manifest.json", &m)?;
    Ok(())
}

/// Shipped groups and experiment kinds, in a fixed order.
pub fn list_presets() -> String {
    let mut out = String::from("groups\n");
    for p in presets() {
        out += &format!(
            "  {:<6} d_hom={:<2} layers={:<9} {}\n",
            p.name,
            p.d_hom,
            format!("{:?}", p.layers),
            p.description
        );
    }
    out += "experiments\n";
    for k in ExperimentKind::ALL {
        let tuned = kinds::tuned_presets(k);
        let tuned = if tuned.is_empty() { "any".to_string() } else { tuned.join(",") };
        out += &format!("  {:<17} presets={:<12} {}\n", k.name(), tuned, k.anchor());
    }
    out
}
