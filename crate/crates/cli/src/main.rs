use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{info, warn};
use subspectra::experiment::{self, Config, ExperimentKind};

/// Runs one experiment and writes `report.json`, `manifest.json` and the
/// CSV / plot-data artifacts. `subspectra presets` lists groups and kinds.
#[derive(Debug, Parser)]
#[command(name = "subspectra", version)]
struct Cli {
    /// Experiment kind, or `presets`.
    kind: String,
    #[arg(long)]
    preset: Option<String>,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with status 2 when a tolerance check fails.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `results/<kind>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shorthand for `--set bs.trials=N`.
    #[arg(long)]
    trials: Option<usize>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

enum Status {
    Passed,
    CheckFailed,
}

fn threads_from_env() {
    let Ok(v) = std::env::var("SUBSPECTRA_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("cannot set thread count: {e}");
            }
        }
        _ => warn!("ignoring SUBSPECTRA_THREADS={v}"),
    }
}

fn config(cli: &Cli) -> subspectra::Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::parse(&std::fs::read_to_string(path)?)?,
        None => Config::default(),
    };
    if let Some(p) = &cli.preset {
        cfg.set("preset", p.as_str())?;
    }
    if let Some(s) = cli.seed {
        cfg.set("seed", s.to_string())?;
    }
    if let Some(t) = cli.trials {
        cfg.set("bs.trials", t.to_string())?;
    }
    cfg.apply_overrides(cli.overrides.iter().map(String::as_str))?;
    Ok(cfg)
}

fn run(cli: &Cli) -> subspectra::Result<Status> {
    if cli.kind == "presets" {
        print!("{}", experiment::list_presets());
        return Ok(Status::Passed);
    }
    let kind: ExperimentKind = cli.kind.parse()?;
    let (outcome, cfg) = experiment::run(kind, config(cli)?)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("results").join(kind.name()));
    let manifest = experiment::manifest(&outcome, &cfg);
    experiment::write_outputs(&outcome, &manifest, &dir)?;
    info!("wrote {}", dir.display());

    for e in &outcome.summary {
        println!("{:<22} {:>14.6e} {}", e.name, e.value, e.provenance);
    }
    for c in &outcome.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<20} {:.6e} <= {:.6e}", c.name, c.value, c.limit);
    }
    Ok(if outcome.passed() { Status::Passed } else { Status::CheckFailed })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    threads_from_env();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::CheckFailed) if cli.check => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
