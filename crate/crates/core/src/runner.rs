//! Experiment configs, subcommand dispatch and report files.
//!
//! A run reads one JSON [`ExperimentConfig`], executes a [`Subcommand`] and
//! writes `{subcommand}_{seed}.json` / `.csv` (plus subcommand-specific
//! tables) into the output directory. Exit codes: 0 when every executed
//! check holds, 2 for configuration errors, 3 for solver divergence and 4 for
//! failed checks.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    check_bdg, check_boundedness, check_chebyshev, check_coefficients, check_error_estimate,
    check_exponential, check_picard_decay, check_uniqueness, fit_growth, picard_decay_table,
    BdgConstants, BdgKind, BoundConstants, BoundReport, Experiment, Integrand, Verdict,
};
use crate::error::{Error, Result};
use crate::scenarios::{
    derive_seed, DrivingPath, JumpLaw, LevyScenario, Scenario, ScenarioFamily, TimeGrid,
    VolatilityControl,
};
use crate::sfde::{euler_solve, InitialData, InitialSegment, Model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

/// Thresholds used by the capacity tail check.
pub const CHEBYSHEV_THRESHOLDS: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "T", alias = "horizon")]
    pub horizon: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolatilityKindConfig {
    Constant,
    BangBang,
    PiecewiseRandom,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum JumpsConfig {
    /// `[[size, probability], ...]`
    Atoms(Vec<(f64, f64)>),
    /// `[lo, hi]`
    Uniform((f64, f64)),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LevyConfig {
    pub intensity: f64,
    pub jumps: JumpsConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub volatility: VolatilityKindConfig,
    /// `[σ_lo, σ_hi]`
    pub band: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_offset: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levy: Option<LevyConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Sum of library terms, e.g. `"gbm(0.05,0.2) + jump_linear(0.1)"`.
    pub name: String,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum InitialSegmentConfig {
    Constant(f64),
    Affine { at_zero: f64, slope: f64 },
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BdgOverrides {
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessConfig {
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_offset() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    40
}
fn default_tol() -> f64 {
    1e-8
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        Self {
            offset: default_offset(),
            max_iter: default_max_iter(),
            tol: default_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialConfig {
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    /// Grid steps per unit of time; defaults to the main grid's resolution.
    pub steps_per_unit: Option<usize>,
}

fn default_m_max() -> usize {
    20
}

impl Default for ExponentialConfig {
    fn default() -> Self {
        Self {
            m_max: default_m_max(),
            steps_per_unit: None,
        }
    }
}

/// One experiment, as read from JSON. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub scenarios: Vec<ScenarioConfig>,
    pub model: ModelConfig,
    pub delay_window: f64,
    pub initial_segment: InitialSegmentConfig,
    pub n_paths: usize,
    pub n_iter: usize,
    pub seed: u64,
    #[serde(default)]
    pub bdg: BdgOverrides,
    #[serde(default)]
    pub uniqueness: UniquenessConfig,
    #[serde(default)]
    pub exponential: ExponentialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A config after validation, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: TimeGrid,
    pub family: ScenarioFamily,
    pub model: Model,
    pub initial: InitialSegment,
    pub delay_window: f64,
    pub n_paths: usize,
    pub n_iter: usize,
    pub seed: u64,
    pub bdg: BdgConstants,
    pub uniqueness: UniquenessConfig,
    pub m_max: usize,
    pub steps_per_unit: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." {
                "<root>".to_string()
            } else {
                key
            };
            Error::config(key, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let grid = TimeGrid::new(self.grid.horizon, self.grid.n_steps)?;
        let scenarios = self
            .scenarios
            .iter()
            .enumerate()
            .map(|(j, s)| s.to_scenario(j))
            .collect::<Result<Vec<_>>>()?;
        let family = ScenarioFamily::new(scenarios)?;
        let model = Model::parse(&self.model.name, self.model.c1, self.model.c2)?;
        let initial = match &self.initial_segment {
            InitialSegmentConfig::Constant(c) => InitialSegment::Constant(*c),
            InitialSegmentConfig::Affine { at_zero, slope } => InitialSegment::Affine {
                at_zero: *at_zero,
                slope: *slope,
            },
            InitialSegmentConfig::Values(v) => InitialSegment::Values(v.clone()),
        };
        InitialData::new(&initial, self.delay_window, grid.dt())?;
        if self.n_paths < 2 {
            return Err(Error::config(
                "n_paths",
                "at least 2 paths are needed for a standard error",
            ));
        }
        if self.n_iter < 3 {
            return Err(Error::config(
                "n_iter",
                "at least 3 Picard iterations are needed",
            ));
        }
        let defaults = BdgConstants::defaults(family.sigma_bar());
        let pick = |key: &str, v: Option<f64>, d: f64| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => {
                Err(Error::config(format!("bdg.{key}"), "must be positive"))
            }
            Some(x) => Ok(x),
            None => Ok(d),
        };
        let bdg = BdgConstants {
            k1: pick("k1", self.bdg.k1, defaults.k1)?,
            k2: pick("k2", self.bdg.k2, defaults.k2)?,
            k3: pick("k3", self.bdg.k3, defaults.k3)?,
        };
        let u = self.uniqueness;
        if !(u.tol > 0.0) || u.max_iter == 0 || !u.offset.is_finite() {
            return Err(Error::config(
                "uniqueness",
                "need tol > 0, max_iter >= 1 and a finite offset",
            ));
        }
        if self.exponential.m_max < 4 {
            return Err(Error::config("exponential.m_max", "must be at least 4"));
        }
        let steps_per_unit = match self.exponential.steps_per_unit {
            Some(0) => {
                return Err(Error::config(
                    "exponential.steps_per_unit",
                    "must be positive",
                ))
            }
            Some(s) => s,
            None => ((self.grid.n_steps as f64 / self.grid.horizon).round() as usize).max(1),
        };
        Ok(Resolved {
            grid,
            family,
            model,
            initial,
            delay_window: self.delay_window,
            n_paths: self.n_paths,
            n_iter: self.n_iter,
            seed: self.seed,
            bdg,
            uniqueness: u,
            m_max: self.exponential.m_max,
            steps_per_unit,
        })
    }
}

impl ScenarioConfig {
    fn to_scenario(&self, j: usize) -> Result<Scenario> {
        let at = |key: &str| format!("scenarios[{j}].{key}");
        let (lo, hi) = self.band;
        let need_period = || {
            self.period
                .ok_or_else(|| Error::config(at("period"), "required for this volatility kind"))
        };
        let volatility = match self.volatility {
            VolatilityKindConfig::Constant => VolatilityControl {
                lo,
                ..VolatilityControl::constant(hi)
            },
            VolatilityKindConfig::BangBang => VolatilityControl::bang_bang(lo, hi, need_period()?),
            VolatilityKindConfig::PiecewiseRandom => VolatilityControl::piecewise_random(
                lo,
                hi,
                need_period()?,
                self.seed_offset.unwrap_or(0),
            ),
        };
        let levy = match &self.levy {
            None => LevyScenario::none(),
            Some(l) => LevyScenario::new(
                l.intensity,
                match &l.jumps {
                    JumpsConfig::Atoms(a) => JumpLaw::Atoms(a.clone()),
                    JumpsConfig::Uniform((lo, hi)) => JumpLaw::Uniform { lo: *lo, hi: *hi },
                },
            ),
        };
        Ok(Scenario::new(volatility, levy))
    }
}

impl Resolved {
    pub fn experiment(&self) -> Experiment<'_, Model> {
        Experiment {
            model: &self.model,
            family: &self.family,
            grid: self.grid,
            initial: &self.initial,
            delay_window: self.delay_window,
            n_paths: self.n_paths,
            seed: self.seed,
        }
    }

    pub fn constants(&self) -> Result<BoundConstants> {
        let zeta = InitialData::new(&self.initial, self.delay_window, self.grid.dt())?.norm_sq();
        BoundConstants::compute(
            self.model.c1,
            self.model.c2,
            self.bdg.k1,
            self.bdg.k2,
            self.bdg.k3,
            self.grid.horizon(),
            zeta,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Picard,
    Verify,
    Bdg,
    ExpEstimate,
}

impl Subcommand {
    pub const ALL: [Subcommand; 5] = [
        Subcommand::Simulate,
        Subcommand::Picard,
        Subcommand::Verify,
        Subcommand::Bdg,
        Subcommand::ExpEstimate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Picard => "picard",
            Subcommand::Verify => "verify",
            Subcommand::Bdg => "bdg",
            Subcommand::ExpEstimate => "exp-estimate",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::usage(format!("unknown subcommand `{s}`")))
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub reports: Vec<BoundReport>,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    /// Exit status implied by the reports.
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().any(|r| r.holds == Verdict::Fails) {
            EXIT_FAILED
        } else {
            EXIT_OK
        }
    }
}

/// Exit status for a run that stopped with an error.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } | Error::NonFinite { .. } => EXIT_DIVERGENCE,
        _ => EXIT_CONFIG,
    }
}

/// Load, validate and run; `out` and `seed` override the config.
pub fn run(
    sub: Subcommand,
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<Outcome> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("gsfde-out"));
    execute(sub, &cfg, &dir)
}

/// Run a parsed config, writing artifacts under `dir`.
pub fn execute(sub: Subcommand, cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let r = cfg.resolve()?;
    prepare_dir(dir)?;
    let exp = r.experiment();
    let mut artifacts = Vec::new();
    let reports = match sub {
        Subcommand::Simulate => {
            artifacts.extend(write_paths(&r, dir)?);
            return Ok(Outcome {
                reports: Vec::new(),
                artifacts,
            });
        }
        Subcommand::Picard => {
            let constants = r.constants()?;
            let table = picard_decay_table(&exp, &constants, r.n_iter)?;
            let path = dir.join(format!("picard_{}_table.csv", r.seed));
            write_csv(&path, |w| {
                w.write_record([
                    "n",
                    "e_n",
                    "stderr",
                    "distance",
                    "envelope",
                    "ratio",
                    "ratio_law",
                ])?;
                for row in &table {
                    w.write_record([
                        row.n.to_string(),
                        row.e_n.to_string(),
                        row.stderr.to_string(),
                        row.distance.to_string(),
                        row.envelope.to_string(),
                        row.ratio.to_string(),
                        row.ratio_law.to_string(),
                    ])?;
                }
                Ok(())
            })?;
            artifacts.push(path);
            let mut reports = check_picard_decay(&exp, &constants, r.n_iter)?;
            reports.extend(check_error_estimate(&exp, &constants, r.n_iter)?);
            reports
        }
        Subcommand::Verify => verify_reports(&r)?,
        Subcommand::Bdg => bdg_reports(&r)?,
        Subcommand::ExpEstimate => {
            let fit = fit_growth(&exp, r.m_max, r.steps_per_unit)?;
            let path = dir.join(format!("exp-estimate_{}_moments.csv", r.seed));
            write_csv(&path, |w| {
                w.write_record(["m", "log_sup_moment"])?;
                for (m, v) in fit.log_moments.iter().enumerate() {
                    w.write_record([(m + 1).to_string(), v.to_string()])?;
                }
                Ok(())
            })?;
            artifacts.push(path);
            check_exponential(&exp, &r.constants()?, r.m_max, r.steps_per_unit)?
        }
    };
    artifacts.extend(emit_report(&reports, dir, sub.as_str(), r.seed)?);
    Ok(Outcome { reports, artifacts })
}

/// Every check of the harness, in a fixed order.
pub fn verify_reports(r: &Resolved) -> Result<Vec<BoundReport>> {
    let exp = r.experiment();
    let constants = r.constants()?;
    let mut out = check_coefficients(&exp)?;
    out.extend(check_boundedness(&exp, &constants)?);
    out.extend(check_picard_decay(&exp, &constants, r.n_iter)?);
    out.extend(check_error_estimate(&exp, &constants, r.n_iter)?);
    out.extend(check_uniqueness(
        &exp,
        r.uniqueness.offset,
        r.uniqueness.max_iter,
        r.uniqueness.tol,
    )?);
    out.extend(bdg_reports(r)?);
    out.extend(check_chebyshev(
        &r.family,
        &r.grid,
        &CHEBYSHEV_THRESHOLDS,
        2.0,
        r.n_paths,
        r.seed,
    )?);
    out.extend(check_exponential(
        &exp,
        &constants,
        r.m_max,
        r.steps_per_unit,
    )?);
    Ok(out)
}

/// BDG checks for all three integral kinds over the built-in integrand corpus.
pub fn bdg_reports(r: &Resolved) -> Result<Vec<BoundReport>> {
    let corpus = Integrand::corpus();
    let mut out = Vec::new();
    for kind in BdgKind::ALL {
        out.extend(check_bdg(
            kind, &corpus, &r.family, &r.grid, &r.bdg, r.n_paths, r.seed,
        )?);
    }
    Ok(out)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write_csv(
    path: &Path,
    body: impl FnOnce(&mut csv::Writer<fs::File>) -> csv::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    body(&mut w)?;
    w.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write `{stem}_{seed}.json` and `{stem}_{seed}.csv`.
pub fn emit_report(
    reports: &[BoundReport],
    dir: &Path,
    stem: &str,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::usage("no reports to emit"));
    }
    let json_path = dir.join(format!("{stem}_{seed}.json"));
    let csv_path = dir.join(format!("{stem}_{seed}.csv"));
    let mut json = serde_json::to_string_pretty(reports)?;
    json.push('\n');
    fs::write(&json_path, json).map_err(|source| Error::Io {
        path: json_path.display().to_string(),
        source,
    })?;
    write_csv(&csv_path, |w| {
        w.write_record([
            "check", "name", "lhs", "rhs", "margin", "holds", "n_paths", "seed",
        ])?;
        for r in reports {
            w.write_record([
                r.check.clone(),
                r.name.clone(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.margin.to_string(),
                r.holds.to_string(),
                r.n_paths.to_string(),
                r.seed.to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(vec![json_path, csv_path])
}

/// Driver and Euler solution for every (scenario, path), plus the jump list.
fn write_paths(r: &Resolved, dir: &Path) -> Result<Vec<PathBuf>> {
    let init = InitialData::new(&r.initial, r.delay_window, r.grid.dt())?;
    let jobs: Vec<(usize, usize)> = (0..r.family.len())
        .flat_map(|j| (0..r.n_paths).map(move |k| (j, k)))
        .collect();
    use rayon::prelude::*;
    let solved = jobs
        .par_iter()
        .map(|&(j, k)| {
            let driver = DrivingPath::generate(
                &r.grid,
                &r.family.scenarios()[j],
                derive_seed(r.seed, j, k),
            )?;
            let x = euler_solve(&r.model, &init, &driver)?;
            Ok((j, k, driver, x))
        })
        .collect::<Result<Vec<_>>>()?;

    let paths = dir.join(format!("simulate_{}_paths.csv", r.seed));
    write_csv(&paths, |w| {
        w.write_record([
            "scenario", "path", "node", "t", "sigma", "b", "qv", "x", "x_left",
        ])?;
        for (j, k, driver, x) in &solved {
            for i in 0..r.grid.n_nodes() {
                let sigma = driver
                    .sigma
                    .get(i)
                    .or(driver.sigma.last())
                    .copied()
                    .unwrap_or(0.0);
                w.write_record([
                    j.to_string(),
                    k.to_string(),
                    i.to_string(),
                    r.grid.node(i).to_string(),
                    sigma.to_string(),
                    driver.b[i].to_string(),
                    driver.qv[i].to_string(),
                    x.values[i].to_string(),
                    x.left[i].to_string(),
                ])?;
            }
        }
        Ok(())
    })?;
    let jumps = dir.join(format!("simulate_{}_jumps.csv", r.seed));
    write_csv(&jumps, |w| {
        w.write_record(["scenario", "path", "time", "size"])?;
        for (j, k, driver, _) in &solved {
            for e in &driver.jumps {
                w.write_record([
                    j.to_string(),
                    k.to_string(),
                    e.time.to_string(),
                    e.size.to_string(),
                ])?;
            }
        }
        Ok(())
    })?;
    Ok(vec![paths, jumps])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> serde_json::Value {
        serde_json::json!({
            "grid": {"T": 1.0, "n_steps": 50},
            "scenarios": [{"volatility": "constant", "band": [1.0, 1.0]}],
            "model": {"name": "zero", "c1": 0.0, "c2": 0.0},
            "delay_window": 0.1,
            "initial_segment": {"constant": 0.0},
            "n_paths": 8,
            "n_iter": 4,
            "seed": 3
        })
    }

    fn key_of(err: Error) -> String {
        match err {
            Error::Config { key, .. } => key,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_resolves() {
        let cfg = ExperimentConfig::from_json(&base_json().to_string()).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.steps_per_unit, 50);
        assert_eq!(r.bdg, BdgConstants::defaults(1.0));
        assert_eq!(r.uniqueness, UniquenessConfig::default());
    }

    #[test]
    fn negative_band_names_its_key() {
        let mut v = base_json();
        v["scenarios"][0]["band"] = serde_json::json!([-1.0, -1.0]);
        let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(key_of(cfg.resolve().unwrap_err()), "scenarios[0].band");
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let mut v = base_json();
        v["grid"]["dt"] = serde_json::json!(0.1);
        let key = key_of(ExperimentConfig::from_json(&v.to_string()).unwrap_err());
        assert_eq!(key, "grid.dt");
        let mut v = base_json();
        v["scenarios"][0]["band"] = serde_json::json!("wide");
        let key = key_of(ExperimentConfig::from_json(&v.to_string()).unwrap_err());
        assert_eq!(key, "scenarios[0].band");
    }

    #[test]
    fn unknown_model_names_its_key() {
        let mut v = base_json();
        v["model"]["name"] = serde_json::json!("cubic(1)");
        let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(key_of(cfg.resolve().unwrap_err()), "model.name");
    }

    #[test]
    fn bdg_overrides_apply() {
        let mut v = base_json();
        v["bdg"] = serde_json::json!({"k3": 2.0});
        let r = ExperimentConfig::from_json(&v.to_string())
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(r.bdg.k3, 2.0);
        assert_eq!(r.bdg.k2, 4.0);
        v["bdg"] = serde_json::json!({"k1": -1.0});
        let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(key_of(cfg.resolve().unwrap_err()), "bdg.k1");
    }

    #[test]
    fn subcommand_names_round_trip() {
        for s in Subcommand::ALL {
            assert_eq!(s.as_str().parse::<Subcommand>().unwrap(), s);
        }
        assert!("plot".parse::<Subcommand>().is_err());
    }

    #[test]
    fn emit_single_report() {
        let dir = std::env::temp_dir().join(format!("gsfde-emit-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let rep = BoundReport::exact("demo", "one", 0.5, 1.0, 1, 7);
        let files = emit_report(&[rep], &dir, "verify", 7).unwrap();
        let csv = fs::read_to_string(&files[1]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines,
            [
                "check,name,lhs,rhs,margin,holds,n_paths,seed",
                "demo,one,0.5,1,0.5,true,1,7"
            ]
        );
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 1);
        assert!(matches!(
            emit_report(&[], &dir, "verify", 7),
            Err(Error::Usage(_))
        ));
        fs::remove_dir_all(&dir).unwrap();
    }
}
