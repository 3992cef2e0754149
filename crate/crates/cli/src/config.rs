//! Command-line flags, the optional TOML run file, and their resolution
//! into a validated [`RunConfig`].
//!
//! Flags override run-file keys; `RAREFALL_SEED` supplies the seed when
//! neither sets it. Every validation message names the flag or the
//! `file:line` of the key it refers to.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use toml::Spanned;

use rarefall::estimators::DEFAULT_TARGET_REL_ERR;
use rarefall::mrc_oracle::MAX_ORDERED_BRANCHES;
use rarefall::scenarios::db_to_linear;
use rarefall::{FadingScenario, Method};

use crate::error::{config, Result};

pub const SEED_ENV: &str = "RAREFALL_SEED";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_ESN0_DB: f64 = 1.0;
/// Sample budget of `estimate` and `sweep` runs.
pub const DEFAULT_SAMPLES: u64 = 500_000;
/// Sample budget of the sphere-IS run behind each `efficiency` row.
pub const DEFAULT_EFFICIENCY_SAMPLES: u64 = 1_000_000;
const MAX_GRID_POINTS: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "rarefall", version, about = "Rare-event estimation of EGC and GSC/EGC outage probabilities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the outage probability at a single threshold.
    Estimate(RunArgs),
    /// Estimate the outage probability over a threshold grid.
    Sweep(RunArgs),
    /// Required simulation runs per method over a threshold grid.
    Efficiency(RunArgs),
    /// Check the implementation against the oracle fixtures.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    /// Independent, not necessarily identical Rayleigh branches.
    #[value(name = "inid-rayleigh", alias = "rayleigh", alias = "iid-rayleigh")]
    InidRayleigh,
    /// Exponentially correlated Rayleigh branches.
    #[value(name = "corr-rayleigh", alias = "correlated")]
    CorrRayleigh,
    /// Independent, identical Rice branches.
    #[value(name = "iid-rice", alias = "rice")]
    Rice,
    /// GSC/EGC: the N strongest of L independent Rayleigh branches.
    #[value(name = "ordered-rayleigh", alias = "ordered", alias = "gsc")]
    Ordered,
}

/// Form of the squared coefficient of variation used for sphere-IS runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum CvForm {
    /// `P̃/P − 1` with the estimated `P`.
    #[default]
    Theoretical,
    /// `(1 − q)/q` from the hit fraction `q` of the run.
    Empirical,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML run file; its keys are the long flag names.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioKind>,

    /// Average branch power in dB; repeat once per branch, or give one
    /// value shared by `--branches` branches.
    #[arg(long = "omega-db", value_name = "DB", allow_negative_numbers = true)]
    pub omega_db: Vec<f64>,

    /// Per-component Gaussian standard deviation (correlated scenario).
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Correlation coefficient between adjacent branches, in [0, 0.99].
    #[arg(long)]
    pub rho: Option<f64>,

    /// Rice factor K (linear).
    #[arg(long = "rice-k")]
    pub rice_k: Option<f64>,

    /// Number of branches L; repeat or comma-separate for several curves.
    #[arg(long, value_delimiter = ',')]
    pub branches: Vec<usize>,

    /// Number N of combined branches (ordered scenario).
    #[arg(long = "select-n")]
    pub select_n: Option<usize>,

    /// Transmit SNR per symbol Es/N0 in dB [default: 1].
    #[arg(long = "esn0-db", allow_negative_numbers = true)]
    pub esn0_db: Option<f64>,

    /// Single SNR threshold in dB.
    #[arg(long = "gamma-th-db", allow_negative_numbers = true, conflicts_with = "gamma_grid")]
    pub gamma_th_db: Option<f64>,

    /// Threshold grid `start:stop[:step]` in dB, inclusive (step 1 dB).
    #[arg(long = "gamma-grid", value_name = "START:STOP[:STEP]", allow_hyphen_values = true)]
    pub gamma_grid: Option<String>,

    /// Estimators: naive, sphere-is, box-is; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<String>,

    /// Samples per estimate (accepts forms such as 5e5).
    #[arg(long, value_parser = parse_count)]
    pub samples: Option<u64>,

    /// Seed of the random streams [env: RAREFALL_SEED, default: 1].
    #[arg(long)]
    pub seed: Option<u64>,

    /// Work partitions processed concurrently; never changes the output.
    #[arg(long)]
    pub chunks: Option<usize>,

    /// Target relative error ε for the required-runs columns [default: 0.05].
    #[arg(long = "target-rel-err")]
    pub target_rel_err: Option<f64>,

    /// CV² form for sphere-IS required runs in `efficiency` output.
    #[arg(long = "cv-form", value_enum)]
    pub cv_form: Option<CvForm>,

    /// Output CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ValidateArgs {
    /// Fixture table [default: the table shipped with the binary].
    #[arg(long, value_name = "FILE")]
    pub fixtures: Option<PathBuf>,

    /// Also run the full acceptance suite (several minutes).
    #[arg(long)]
    pub full: bool,

    /// Work partitions for the Monte Carlo checks.
    #[arg(long)]
    pub chunks: Option<usize>,

    /// Report path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse a sample count written as an integer or an exact float (`5e5`).
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let clean = s.replace('_', "");
    if let Ok(n) = clean.parse::<u64>() {
        return Ok(n);
    }
    match clean.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(format!("expected a non-negative integer count, got {s:?}")),
    }
}

/// Parse `start:stop[:step]` (dB) into the inclusive grid it describes.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(format!("expected start:stop[:step], got {s:?}"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("{p:?} is not a number"));
    let start = num(parts[0])?;
    let stop = num(parts[1])?;
    let step = if parts.len() == 3 { num(parts[2])? } else { 1.0 };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err("grid bounds must be finite".into());
    }
    if step <= 0.0 {
        return Err(format!("step must be positive, got {step}"));
    }
    if start > stop {
        return Err(format!("start {start} exceeds stop {stop}"));
    }
    let span = (stop - start) / step;
    if span >= MAX_GRID_POINTS as f64 {
        return Err(format!("grid has more than {MAX_GRID_POINTS} points"));
    }
    let n = (span + 1e-9).floor() as usize + 1;
    // round away accumulated binary noise so CSV cells read as typed
    Ok((0..n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9 + 0.0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Estimate,
    Sweep,
    Efficiency,
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: RunKind,
    pub scenarios: Vec<FadingScenario>,
    pub esn0_db: f64,
    pub grid: Vec<f64>,
    pub methods: Vec<Method>,
    pub samples: u64,
    pub seed: u64,
    pub chunks: usize,
    pub target_rel_err: f64,
    pub cv_form: CvForm,
    pub out: Option<PathBuf>,
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone)]
enum Origin {
    Flag(&'static str),
    File { path: PathBuf, line: usize, key: &'static str },
    Env(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag(name) => write!(f, "--{name}"),
            Origin::File { path, line, key } => write!(f, "{}:{line}: {key}", path.display()),
            Origin::Env(name) => write!(f, "${name}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Src<T> {
    v: T,
    at: Origin,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct RunFile {
    scenario: Option<Spanned<String>>,
    omega_db: Option<Spanned<OneOrMany<f64>>>,
    sigma: Option<Spanned<f64>>,
    rho: Option<Spanned<f64>>,
    rice_k: Option<Spanned<f64>>,
    branches: Option<Spanned<OneOrMany<usize>>>,
    select_n: Option<Spanned<usize>>,
    esn0_db: Option<Spanned<f64>>,
    gamma_th_db: Option<Spanned<f64>>,
    gamma_grid: Option<Spanned<String>>,
    method: Option<Spanned<OneOrMany<String>>>,
    samples: Option<Spanned<u64>>,
    seed: Option<Spanned<u64>>,
    chunks: Option<Spanned<usize>>,
    target_rel_err: Option<Spanned<f64>>,
    cv_form: Option<Spanned<String>>,
    out: Option<Spanned<String>>,
}

struct FileCtx<'a> {
    path: &'a Path,
    text: &'a str,
}

impl FileCtx<'_> {
    fn origin<T>(&self, s: &Spanned<T>, key: &'static str) -> Origin {
        let line = self.text[..s.span().start].matches('\n').count() + 1;
        Origin::File { path: self.path.to_path_buf(), line, key }
    }
}

/// Flag value if given, else the run-file value.
fn pick<T>(flag: Option<T>, name: &'static str, file: Option<Spanned<T>>, ctx: Option<&FileCtx>) -> Option<Src<T>> {
    match (flag, file, ctx) {
        (Some(v), _, _) => Some(Src { v, at: Origin::Flag(name) }),
        (None, Some(s), Some(ctx)) => {
            let at = ctx.origin(&s, name);
            Some(Src { v: s.into_inner(), at })
        }
        _ => None,
    }
}

fn pick_list<T>(
    flag: Vec<T>,
    name: &'static str,
    file: Option<Spanned<OneOrMany<T>>>,
    ctx: Option<&FileCtx>,
) -> Option<Src<Vec<T>>> {
    let flag = (!flag.is_empty()).then_some(flag);
    let file = file.map(|s| {
        let span = s.span();
        Spanned::new(span, s.into_inner().into_vec())
    });
    pick(flag, name, file, ctx)
}

/// Raw settings after merging flags over the run file.
struct Merged {
    scenario: Option<Src<ScenarioKind>>,
    omega_db: Option<Src<Vec<f64>>>,
    sigma: Option<Src<f64>>,
    rho: Option<Src<f64>>,
    rice_k: Option<Src<f64>>,
    branches: Option<Src<Vec<usize>>>,
    select_n: Option<Src<usize>>,
    esn0_db: Option<Src<f64>>,
    gamma_th_db: Option<Src<f64>>,
    gamma_grid: Option<Src<String>>,
    method: Option<Src<Vec<String>>>,
    samples: Option<Src<u64>>,
    seed: Option<Src<u64>>,
    chunks: Option<Src<usize>>,
    target_rel_err: Option<Src<f64>>,
    cv_form: Option<Src<CvForm>>,
    out: Option<Src<PathBuf>>,
}

fn merge(args: RunArgs) -> Result<Merged> {
    let text;
    let mut file = RunFile::default();
    let ctx = match &args.config {
        Some(path) => {
            text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            file = toml::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
            Some(FileCtx { path, text: &text })
        }
        None => None,
    };
    let ctx = ctx.as_ref();
    let scenario = match (args.scenario, file.scenario) {
        (Some(v), _) => Some(Src { v, at: Origin::Flag("scenario") }),
        (None, Some(s)) => {
            let at = ctx.unwrap().origin(&s, "scenario");
            let v = ScenarioKind::from_str(s.get_ref(), true).map_err(|_| {
                let names: Vec<_> = ScenarioKind::value_variants()
                    .iter()
                    .filter_map(|k| k.to_possible_value().map(|p| p.get_name().to_owned()))
                    .collect();
                config(format!("{at}: unknown scenario {:?} (expected one of {})", s.get_ref(), names.join(", ")))
            })?;
            Some(Src { v, at })
        }
        (None, None) => None,
    };
    let cv_form = match (args.cv_form, file.cv_form) {
        (Some(v), _) => Some(Src { v, at: Origin::Flag("cv-form") }),
        (None, Some(s)) => {
            let at = ctx.unwrap().origin(&s, "cv-form");
            let v = CvForm::from_str(s.get_ref(), true)
                .map_err(|_| config(format!("{at}: expected theoretical or empirical, got {:?}", s.get_ref())))?;
            Some(Src { v, at })
        }
        (None, None) => None,
    };
    let seed = match pick(args.seed, "seed", file.seed, ctx) {
        Some(s) => Some(s),
        None => match std::env::var(SEED_ENV) {
            Ok(raw) => {
                let v = raw
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| config(format!("${SEED_ENV}: expected an unsigned integer, got {raw:?}")))?;
                Some(Src { v, at: Origin::Env(SEED_ENV) })
            }
            Err(_) => None,
        },
    };
    Ok(Merged {
        scenario,
        omega_db: pick_list(args.omega_db, "omega-db", file.omega_db, ctx),
        sigma: pick(args.sigma, "sigma", file.sigma, ctx),
        rho: pick(args.rho, "rho", file.rho, ctx),
        rice_k: pick(args.rice_k, "rice-k", file.rice_k, ctx),
        branches: pick_list(args.branches, "branches", file.branches, ctx),
        select_n: pick(args.select_n, "select-n", file.select_n, ctx),
        esn0_db: pick(args.esn0_db, "esn0-db", file.esn0_db, ctx),
        gamma_th_db: pick(args.gamma_th_db, "gamma-th-db", file.gamma_th_db, ctx),
        gamma_grid: pick(args.gamma_grid, "gamma-grid", file.gamma_grid, ctx),
        method: pick_list(args.method, "method", file.method, ctx),
        samples: pick(args.samples, "samples", file.samples, ctx),
        seed,
        chunks: pick(args.chunks, "chunks", file.chunks, ctx),
        target_rel_err: pick(args.target_rel_err, "target-rel-err", file.target_rel_err, ctx),
        cv_form,
        out: pick(args.out, "out", file.out.map(|s| Spanned::new(s.span(), PathBuf::from(s.into_inner()))), ctx),
    })
}

fn required<T>(v: Option<Src<T>>, flag: &str, kind: ScenarioKind) -> Result<Src<T>> {
    v.ok_or_else(|| config(format!("--{flag} is required for the {} scenario", kind_name(kind))))
}

fn forbid<T>(v: &Option<Src<T>>, kind: ScenarioKind) -> Result<()> {
    match v {
        Some(s) => Err(config(format!("{}: does not apply to the {} scenario", s.at, kind_name(kind)))),
        None => Ok(()),
    }
}

fn kind_name(kind: ScenarioKind) -> String {
    kind.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default()
}

fn finite(s: &Src<f64>) -> Result<f64> {
    if s.v.is_finite() {
        Ok(s.v)
    } else {
        Err(config(format!("{}: must be finite, got {}", s.at, s.v)))
    }
}

/// Branch-power vectors: one per `--branches` value when a single power is
/// shared, otherwise exactly the listed powers.
fn power_vectors(omega: &Src<Vec<f64>>, branches: &Option<Src<Vec<usize>>>) -> Result<Vec<Vec<f64>>> {
    if omega.v.is_empty() {
        return Err(config(format!("{}: at least one branch power is needed", omega.at)));
    }
    if let Some(bad) = omega.v.iter().find(|x| !x.is_finite()) {
        return Err(config(format!("{}: branch powers must be finite, got {bad}", omega.at)));
    }
    let lin: Vec<f64> = omega.v.iter().map(|&d| db_to_linear(d)).collect();
    match branches {
        None => Ok(vec![lin]),
        Some(b) if lin.len() == 1 => Ok(b.v.iter().map(|&l| vec![lin[0]; l]).collect()),
        Some(b) if b.v == [lin.len()] => Ok(vec![lin]),
        Some(b) => {
            Err(config(format!("{}: {:?} conflicts with the {} powers given by {}", b.at, b.v, lin.len(), omega.at)))
        }
    }
}

fn build_scenarios(m: &Merged) -> Result<Vec<FadingScenario>> {
    let kind = required_scenario(&m.scenario)?;
    let at = &m.scenario.as_ref().unwrap().at;
    let wrap = |r: rarefall::Result<FadingScenario>| r.map_err(|e| config(format!("{at}: {e}")));
    if let Some(b) = &m.branches {
        if let Some(bad) = b.v.iter().find(|&&l| l == 0) {
            return Err(config(format!("{}: branch counts must be positive, got {bad}", b.at)));
        }
    }
    match kind {
        ScenarioKind::InidRayleigh | ScenarioKind::Ordered => {
            forbid(&m.sigma, kind)?;
            forbid(&m.rho, kind)?;
            forbid(&m.rice_k, kind)?;
            let omega = required(m.omega_db.clone(), "omega-db", kind)?;
            let vectors = power_vectors(&omega, &m.branches)?;
            if kind == ScenarioKind::InidRayleigh {
                forbid(&m.select_n, kind)?;
                return vectors.into_iter().map(|o| wrap(FadingScenario::inid_rayleigh(o))).collect();
            }
            let n = required(m.select_n.clone(), "select-n", kind)?;
            vectors
                .into_iter()
                .map(|o| {
                    let l = o.len();
                    if n.v == 0 || n.v > l {
                        return Err(config(format!("{}: N = {} must lie in 1..={l}", n.at, n.v)));
                    }
                    if l > MAX_ORDERED_BRANCHES {
                        return Err(config(format!(
                            "{}: the ordered scenario supports at most {MAX_ORDERED_BRANCHES} branches, got {l}",
                            omega.at
                        )));
                    }
                    wrap(FadingScenario::ordered_inid_rayleigh(o, n.v))
                })
                .collect()
        }
        ScenarioKind::CorrRayleigh => {
            forbid(&m.omega_db, kind)?;
            forbid(&m.rice_k, kind)?;
            forbid(&m.select_n, kind)?;
            let sigma = required(m.sigma.clone(), "sigma", kind)?;
            let rho = required(m.rho.clone(), "rho", kind)?;
            let branches = required(m.branches.clone(), "branches", kind)?;
            let (s, r) = (finite(&sigma)?, finite(&rho)?);
            branches
                .v
                .iter()
                .map(|&l| {
                    FadingScenario::exp_corr_rayleigh(s, r, l)
                        .map_err(|e| config(format!("{} / {}: {e}", sigma.at, rho.at)))
                })
                .collect()
        }
        ScenarioKind::Rice => {
            forbid(&m.sigma, kind)?;
            forbid(&m.rho, kind)?;
            forbid(&m.select_n, kind)?;
            let k = required(m.rice_k.clone(), "rice-k", kind)?;
            let omega = required(m.omega_db.clone(), "omega-db", kind)?;
            let branches = required(m.branches.clone(), "branches", kind)?;
            if omega.v.len() != 1 {
                return Err(config(format!("{}: the Rice scenario takes a single branch power", omega.at)));
            }
            let o = db_to_linear(finite(&Src { v: omega.v[0], at: omega.at.clone() })?);
            let k = finite(&k).and_then(|v| {
                FadingScenario::iid_rice(v, o, 1).map(|_| v).map_err(|e| config(format!("{}: {e}", k.at)))
            })?;
            branches.v.iter().map(|&l| wrap(FadingScenario::iid_rice(k, o, l))).collect()
        }
    }
}

fn required_scenario(s: &Option<Src<ScenarioKind>>) -> Result<ScenarioKind> {
    s.as_ref().map(|s| s.v).ok_or_else(|| config("--scenario is required"))
}

fn resolve_grid(kind: RunKind, m: &Merged) -> Result<Vec<f64>> {
    match (&m.gamma_th_db, &m.gamma_grid) {
        (Some(a), Some(b)) => Err(config(format!("{} and {} are mutually exclusive", a.at, b.at))),
        (Some(t), None) => Ok(vec![finite(t)?]),
        (None, Some(g)) if kind == RunKind::Estimate => {
            Err(config(format!("{}: estimate takes a single --gamma-th-db; use sweep for grids", g.at)))
        }
        (None, Some(g)) => parse_grid(&g.v).map_err(|e| config(format!("{}: {e}", g.at))),
        (None, None) => Err(config("a threshold is required: --gamma-th-db or --gamma-grid")),
    }
}

fn resolve_methods(kind: RunKind, m: &Merged, scenarios: &[FadingScenario]) -> Result<Vec<Method>> {
    let Some(src) = &m.method else {
        let mut methods = vec![Method::Naive, Method::SphereIs];
        if kind == RunKind::Efficiency && scenarios.iter().all(|s| Method::BoxIs.supports(s)) {
            methods.push(Method::BoxIs);
        }
        return Ok(methods);
    };
    let mut methods = Vec::new();
    for name in &src.v {
        let method = Method::from_str(name.trim()).map_err(|e| config(format!("{}: {e}", src.at)))?;
        if let Some(s) = scenarios.iter().find(|s| !method.supports(s)) {
            return Err(config(format!("{}: {method} is not supported for the {} scenario", src.at, s.name())));
        }
        if !methods.contains(&method) {
            methods.push(method);
        }
    }
    Ok(methods)
}

fn default_chunks() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunConfig {
    pub fn resolve(kind: RunKind, args: RunArgs) -> Result<Self> {
        let m = merge(args)?;
        let scenarios = build_scenarios(&m)?;
        let grid = resolve_grid(kind, &m)?;
        let methods = resolve_methods(kind, &m, &scenarios)?;
        let esn0_db = m.esn0_db.as_ref().map(finite).transpose()?.unwrap_or(DEFAULT_ESN0_DB);
        let samples = match &m.samples {
            Some(s) if s.v == 0 => return Err(config(format!("{}: must be at least 1", s.at))),
            Some(s) => s.v,
            None if kind == RunKind::Efficiency => DEFAULT_EFFICIENCY_SAMPLES,
            None => DEFAULT_SAMPLES,
        };
        let chunks = match &m.chunks {
            Some(c) if c.v == 0 => return Err(config(format!("{}: must be at least 1", c.at))),
            Some(c) => c.v,
            None => default_chunks(),
        };
        let target_rel_err = match &m.target_rel_err {
            Some(t) if !(t.v > 0.0 && t.v.is_finite()) => {
                return Err(config(format!("{}: must be positive and finite, got {}", t.at, t.v)))
            }
            Some(t) => t.v,
            None => DEFAULT_TARGET_REL_ERR,
        };
        if let Some(c) = &m.cv_form {
            if kind != RunKind::Efficiency {
                return Err(config(format!("{}: only applies to efficiency runs", c.at)));
            }
        }
        Ok(Self {
            kind,
            scenarios,
            esn0_db,
            grid,
            methods,
            samples,
            seed: m.seed.map_or(DEFAULT_SEED, |s| s.v),
            chunks,
            target_rel_err,
            cv_form: m.cv_form.map(|c| c.v).unwrap_or_default(),
            out: m.out.map(|o| o.v),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> RunArgs {
        RunArgs {
            scenario: Some(ScenarioKind::InidRayleigh),
            omega_db: vec![10.0],
            branches: vec![4, 5],
            gamma_grid: Some("-9:1".into()),
            seed: Some(3),
            ..Default::default()
        }
    }

    #[test]
    fn grid_is_inclusive_and_clean() {
        assert_eq!(parse_grid("-9:1").unwrap().len(), 11);
        assert_eq!(parse_grid("0:1:0.1").unwrap()[3], 0.3);
        assert_eq!(parse_grid("2:2").unwrap(), vec![2.0]);
        assert_eq!(parse_grid("-0.5:0:0.5").unwrap(), vec![-0.5, 0.0]);
        for bad in ["1:0", "0:1:0", "0:1:-1", "a:1", "0", "0:1:2:3", "0:1e9:1e-9"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("5e5").unwrap(), 500_000);
        assert_eq!(parse_count("1_000").unwrap(), 1000);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn shared_power_expands_per_branch_count() {
        let c = RunConfig::resolve(RunKind::Sweep, args()).unwrap();
        assert_eq!(c.scenarios.len(), 2);
        assert_eq!(c.scenarios[1].branches(), 5);
        assert_eq!(c.methods, vec![Method::Naive, Method::SphereIs]);
        assert_eq!(c.samples, DEFAULT_SAMPLES);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn efficiency_adds_box_where_supported() {
        let c = RunConfig::resolve(RunKind::Efficiency, args()).unwrap();
        assert_eq!(c.methods, vec![Method::Naive, Method::SphereIs, Method::BoxIs]);
        assert_eq!(c.samples, DEFAULT_EFFICIENCY_SAMPLES);
    }

    #[test]
    fn errors_name_the_flag() {
        let err = |a: RunArgs| RunConfig::resolve(RunKind::Sweep, a).unwrap_err().to_string();
        assert!(err(RunArgs { rho: Some(0.5), ..args() }).contains("--rho"));
        assert!(err(RunArgs { samples: Some(0), ..args() }).contains("--samples"));
        assert!(err(RunArgs { gamma_grid: Some("1:0".into()), ..args() }).contains("--gamma-grid"));
        assert!(err(RunArgs { method: vec!["bogus".into()], ..args() }).contains("--method"));
        let corr = RunArgs {
            scenario: Some(ScenarioKind::CorrRayleigh),
            omega_db: vec![],
            sigma: Some(1.0),
            rho: Some(0.5),
            method: vec!["box-is".into()],
            ..args()
        };
        assert!(err(corr).contains("not supported"));
    }

    #[test]
    fn run_file_errors_carry_line_numbers() {
        let dir = std::env::temp_dir().join(format!("rarefall-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "scenario = \"ordered\"\nomega-db = [5, 5, 8, 8]\nselect-n = 6\ngamma-th-db = -13\n")
            .unwrap();
        let e = RunConfig::resolve(RunKind::Estimate, RunArgs { config: Some(path.clone()), ..Default::default() })
            .unwrap_err()
            .to_string();
        assert!(e.contains("run.toml:3: select-n"), "{e}");

        std::fs::write(&path, "scenario = \"ordered\"\nomega-db = [5, 5, 8, 8]\nselect-n = 2\ngamma-th-db = -13\n")
            .unwrap();
        let c = RunConfig::resolve(
            RunKind::Estimate,
            RunArgs { config: Some(path.clone()), samples: Some(7), ..Default::default() },
        )
        .unwrap();
        assert_eq!(c.scenarios[0].combined_branches(), 2);
        assert_eq!(c.samples, 7);

        std::fs::write(&path, "scenario = \"ordered\"\nsamples = -4\n").unwrap();
        let e = RunConfig::resolve(RunKind::Estimate, RunArgs { config: Some(path), ..Default::default() })
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 2"), "{e}");
        std::fs::remove_dir_all(dir).ok();
    }
}
