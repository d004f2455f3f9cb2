//! Sweep orchestration and file output behind the `cdma-sigopt` binary.
//!
//! Five modes share one fixed CSV schema (see [`CSV_HEADER`]): columns that
//! do not apply to a mode are left empty, never dropped. The `c` column
//! holds the sweep abscissa — the feedback ratio for the interference
//! modes, the eigenvalue `lambda` for `spectrum_dump`. Every row is a pure
//! function of the configuration and master seed.

pub mod args;
pub mod svg;

use crate::dirmatch::{solve_dirmatch, DirMatchError};
use crate::randmat::{make_scene, RandMatError, SystemDims};
use crate::ratefn::{solve_xc, RateFnContext, RateFnError};
use crate::sim::{
    order_statistic_check, run_sweep, CellSpec, Criterion, McEstimate, SimError, SweepPlan,
};
use crate::spectrum::{make_params, SpectrumError, SpectrumParams};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Stable CSV schema; absent fields are written empty, columns never move.
pub const CSV_HEADER: &str =
    "mode,criterion,model,tau,tall,c,n,m,r_fb,trials,seed,value,std_err,asymptote,rel_err";

/// Residual tolerance for the fixed-point solvers driven by the CLI.
const SOLVER_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidPlan(msg) => CliError::Config(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::InvalidTau(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<RateFnError> for CliError {
    fn from(e: RateFnError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<DirMatchError> for CliError {
    fn from(e: DirMatchError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<RandMatError> for CliError {
    fn from(e: RandMatError) -> Self {
        match e {
            RandMatError::InvalidDims(msg) => CliError::Config(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Asymptotic,
    Simulate,
    Compare,
    SpectrumDump,
    OracleCheck,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Asymptotic => "asymptotic",
            Mode::Simulate => "simulate",
            Mode::Compare => "compare",
            Mode::SpectrumDump => "spectrum_dump",
            Mode::OracleCheck => "oracle_check",
        }
    }
}

/// Interference-matrix width convention: `m` columns (the default used by
/// the asymptotic analysis) or the literal `m - 1` interferers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KInterfChoice {
    M,
    MMinusOne,
}

impl KInterfChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "m" => Some(KInterfChoice::M),
            "m-1" | "m_minus_one" => Some(KInterfChoice::MMinusOne),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub mode: Mode,
    pub tau: f64,
    pub tall: bool,
    pub c_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    pub criteria: Vec<Criterion>,
    pub models: Vec<crate::randmat::MatrixModel>,
    pub output_path: Option<PathBuf>,
    pub emit_svg: bool,
    pub threads: Option<usize>,
    pub k_interf: KInterfChoice,
    /// Feedback-bit grid for `oracle_check`.
    pub r_fb_grid: Vec<u32>,
    /// Conditional-CDF sample budget for `oracle_check`.
    pub z_samples: u64,
    /// Sample count for `spectrum_dump`.
    pub dump_points: usize,
}

/// One line of the fixed-schema CSV.
#[derive(Debug, Clone, Default)]
pub struct CsvRow {
    pub mode: &'static str,
    pub criterion: Option<&'static str>,
    pub model: Option<&'static str>,
    pub tau: Option<f64>,
    pub tall: Option<bool>,
    pub c: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub r_fb: Option<u32>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub value: Option<f64>,
    pub std_err: Option<f64>,
    pub asymptote: Option<f64>,
    pub rel_err: Option<f64>,
}

fn fmt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl CsvRow {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.mode,
            self.criterion.unwrap_or(""),
            self.model.unwrap_or(""),
            fmt_f64(self.tau),
            self.tall.map(|t| t.to_string()).unwrap_or_default(),
            fmt_f64(self.c),
            self.n.map(|v| v.to_string()).unwrap_or_default(),
            self.m.map(|v| v.to_string()).unwrap_or_default(),
            self.r_fb.map(|v| v.to_string()).unwrap_or_default(),
            self.trials.map(|v| v.to_string()).unwrap_or_default(),
            self.seed.map(|v| v.to_string()).unwrap_or_default(),
            fmt_f64(self.value),
            fmt_f64(self.std_err),
            fmt_f64(self.asymptote),
            fmt_f64(self.rel_err),
        )
    }
}

/// Validates the configuration, computes all rows, writes the CSV (file or
/// stdout) and optionally a sibling SVG plot.
pub fn run(config: &SweepConfig) -> Result<(), CliError> {
    validate(config)?;
    let rows = match config.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| compute_rows(config))?
        }
        None => compute_rows(config)?,
    };

    let mut csv = String::with_capacity(64 * (rows.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_line());
        csv.push('\n');
    }
    match &config.output_path {
        Some(path) => fs::write(path, csv.as_bytes())?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }

    if config.emit_svg {
        let path = config
            .output_path
            .as_ref()
            .expect("validated: emit_svg requires an output path");
        let svg_path = path.with_extension("svg");
        let doc = svg::render(config, &rows);
        fs::write(&svg_path, doc.as_bytes())?;
    }
    Ok(())
}

fn validate(config: &SweepConfig) -> Result<(), CliError> {
    if !config.tau.is_finite() || config.tau < 1.0 {
        return Err(CliError::Config(format!(
            "tau must be finite and >= 1, got {}",
            config.tau
        )));
    }
    match config.mode {
        Mode::Asymptotic | Mode::Simulate | Mode::Compare => {
            if config.c_grid.is_empty() {
                return Err(CliError::Config("c grid must not be empty".into()));
            }
            if config.c_grid.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
                return Err(CliError::Config("c values must be positive and finite".into()));
            }
        }
        _ => {}
    }
    match config.mode {
        Mode::Simulate | Mode::Compare | Mode::OracleCheck => {
            if config.n_grid.is_empty() {
                return Err(CliError::Config("n grid must not be empty".into()));
            }
            if config.n_grid.iter().any(|&n| n == 0) {
                return Err(CliError::Config("n values must be positive".into()));
            }
            if config.trials < 2 {
                return Err(CliError::Config(format!(
                    "trials must be at least 2, got {}",
                    config.trials
                )));
            }
            if config.criteria.is_empty() {
                return Err(CliError::Config("criteria must not be empty".into()));
            }
            if config.models.is_empty() {
                return Err(CliError::Config("models must not be empty".into()));
            }
        }
        _ => {}
    }
    if config.mode == Mode::OracleCheck {
        if config.r_fb_grid.is_empty() {
            return Err(CliError::Config("r_fb grid must not be empty".into()));
        }
        if config.z_samples < 100 {
            return Err(CliError::Config("z_samples must be at least 100".into()));
        }
        if config.n_grid.iter().any(|&n| n > 8) {
            return Err(CliError::Config(
                "oracle_check is a small-instance oracle: n must be <= 8".into(),
            ));
        }
    }
    if config.mode == Mode::SpectrumDump && config.dump_points < 2 {
        return Err(CliError::Config("points must be at least 2".into()));
    }
    if config.emit_svg {
        if config.output_path.is_none() {
            return Err(CliError::Config("emit_svg requires an output path".into()));
        }
        if config.mode == Mode::OracleCheck {
            return Err(CliError::Config("emit_svg is not supported for oracle_check".into()));
        }
    }
    Ok(())
}

fn params_of(config: &SweepConfig) -> Result<SpectrumParams, CliError> {
    Ok(make_params(config.tau, config.tall)?)
}

/// Realizes integer dimensions for one grid point; the rounded values are
/// what lands in the CSV so the realization is auditable.
fn realize_dims(config: &SweepConfig, n: usize, r_fb: u32) -> Result<SystemDims, CliError> {
    let m = if config.tall {
        (n as f64 / config.tau).round() as usize
    } else {
        (n as f64 * config.tau).round() as usize
    };
    if m == 0 {
        return Err(CliError::Config(format!(
            "n = {n} with tau = {} rounds to m = 0",
            config.tau
        )));
    }
    if config.tall && m >= n {
        return Err(CliError::Config(format!(
            "tall regime needs m < n; n = {n}, tau = {} give m = {m}",
            config.tau
        )));
    }
    let dims = SystemDims::new(n, m, r_fb)?;
    Ok(match config.k_interf {
        KInterfChoice::M => dims,
        KInterfChoice::MMinusOne => dims.with_m_minus_one()?,
    })
}

fn asymptote_for(
    criterion: Criterion,
    params: &SpectrumParams,
    c: f64,
) -> Result<f64, CliError> {
    match criterion {
        Criterion::MinInterference => {
            let ctx = RateFnContext::new(*params);
            Ok(solve_xc(&ctx, c, SOLVER_TOL)?.asymptotic_interference)
        }
        Criterion::DirectionMatch => {
            Ok(solve_dirmatch(params, c, 1e-10)?.limit_interference)
        }
    }
}

fn compute_rows(config: &SweepConfig) -> Result<Vec<CsvRow>, CliError> {
    match config.mode {
        Mode::Asymptotic => asymptotic_rows(config),
        Mode::Simulate => sweep_rows(config, false),
        Mode::Compare => sweep_rows(config, true),
        Mode::SpectrumDump => spectrum_rows(config),
        Mode::OracleCheck => oracle_rows(config),
    }
}

fn asymptotic_rows(config: &SweepConfig) -> Result<Vec<CsvRow>, CliError> {
    let params = params_of(config)?;
    let mut rows = Vec::new();
    for &c in &config.c_grid {
        for &criterion in &config.criteria {
            let value = asymptote_for(criterion, &params, c)?;
            rows.push(CsvRow {
                mode: config.mode.as_str(),
                criterion: Some(criterion.as_str()),
                tau: Some(config.tau),
                tall: Some(config.tall),
                c: Some(c),
                value: Some(value),
                ..CsvRow::default()
            });
        }
    }
    Ok(rows)
}

fn sweep_rows(config: &SweepConfig, with_asymptote: bool) -> Result<Vec<CsvRow>, CliError> {
    let params = params_of(config)?;
    let mut cells = Vec::new();
    for &c in &config.c_grid {
        for &n in &config.n_grid {
            let r_fb = (c * n as f64).round() as u32;
            let dims = realize_dims(config, n, r_fb)?;
            for &criterion in &config.criteria {
                for &model in &config.models {
                    cells.push(CellSpec {
                        tau: config.tau,
                        tall: config.tall,
                        c,
                        dims,
                        model,
                        criterion,
                    });
                }
            }
        }
    }
    let plan = SweepPlan {
        master_seed: config.master_seed,
        trials: config.trials,
        cells: cells.clone(),
    };
    let estimates = run_sweep(&plan)?;

    // one solve per (criterion, c); every n and model shares it
    let mut asymptotes: BTreeMap<(u8, u64), f64> = BTreeMap::new();
    if with_asymptote {
        for spec in &cells {
            let key = (spec.criterion as u8, spec.c.to_bits());
            if !asymptotes.contains_key(&key) {
                asymptotes.insert(key, asymptote_for(spec.criterion, &params, spec.c)?);
            }
        }
    }

    let mut rows = Vec::new();
    for (spec, est) in cells.iter().zip(&estimates) {
        let (asymptote, rel_err) = if with_asymptote {
            let a = asymptotes[&(spec.criterion as u8, spec.c.to_bits())];
            (Some(a), Some((est.mean - a) / a))
        } else {
            (None, None)
        };
        rows.push(row_for_estimate(config, spec, est, asymptote, rel_err));
    }
    Ok(rows)
}

fn row_for_estimate(
    config: &SweepConfig,
    spec: &CellSpec,
    est: &McEstimate,
    asymptote: Option<f64>,
    rel_err: Option<f64>,
) -> CsvRow {
    CsvRow {
        mode: config.mode.as_str(),
        criterion: Some(spec.criterion.as_str()),
        model: Some(spec.model.as_str()),
        tau: Some(config.tau),
        tall: Some(config.tall),
        c: Some(spec.c),
        n: Some(spec.dims.n),
        m: Some(spec.dims.m),
        r_fb: Some(spec.dims.r_fb),
        trials: Some(est.trials),
        seed: Some(config.master_seed),
        value: Some(est.mean),
        std_err: Some(est.std_error),
        asymptote,
        rel_err,
    }
}

fn spectrum_rows(config: &SweepConfig) -> Result<Vec<CsvRow>, CliError> {
    let params = params_of(config)?;
    let width = params.lambda_plus - params.lambda_minus;
    let pad = width / 16.0;
    let lo = (params.lambda_minus - pad).max(0.0);
    let hi = params.lambda_plus + pad;
    let n = config.dump_points;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        rows.push(CsvRow {
            mode: config.mode.as_str(),
            tau: Some(config.tau),
            tall: Some(config.tall),
            c: Some(lambda),
            value: Some(params.density(lambda)),
            ..CsvRow::default()
        });
    }
    Ok(rows)
}

fn oracle_rows(config: &SweepConfig) -> Result<Vec<CsvRow>, CliError> {
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        for &r_fb in &config.r_fb_grid {
            let dims = realize_dims(config, n, r_fb)?;
            for trial in 0..config.trials {
                let model = config.models[0];
                let scene = make_scene(config.master_seed, trial, &dims, model)?;
                let check = order_statistic_check(
                    &scene,
                    config.master_seed,
                    trial,
                    config.z_samples,
                    r_fb,
                )?;
                let combined = (check.direct_se.powi(2) + check.via_cdf_se.powi(2)).sqrt();
                rows.push(CsvRow {
                    mode: config.mode.as_str(),
                    criterion: Some(Criterion::MinInterference.as_str()),
                    model: Some(model.as_str()),
                    tau: Some(config.tau),
                    tall: Some(config.tall),
                    n: Some(dims.n),
                    m: Some(dims.m),
                    r_fb: Some(r_fb),
                    trials: Some(config.trials),
                    seed: Some(config.master_seed),
                    value: Some(check.direct),
                    std_err: Some(combined),
                    asymptote: Some(check.via_cdf),
                    rel_err: Some((check.direct - check.via_cdf) / check.via_cdf),
                    ..CsvRow::default()
                });
            }
        }
    }
    Ok(rows)
}

/// Parses a `key = value` config file; `#` starts a comment.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "{}:{}: expected `key = value`, got `{raw}`",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
