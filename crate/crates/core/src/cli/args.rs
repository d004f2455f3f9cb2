//! Flag parsing and config-file merging for the thin binary.
//!
//! Every option can come from the command line or from a `key = value`
//! config file passed with `--config`; flags win, file values fill the
//! gaps, and documented defaults cover the rest.

use super::{CliError, KInterfChoice, Mode, SweepConfig};
use crate::randmat::MatrixModel;
use crate::sim::Criterion;
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(
    name = "cdma-sigopt",
    version,
    about = "Asymptotic interference limits for finite-rate-feedback signature selection, \
             with seeded Monte Carlo validation",
    after_help = "EXIT CODES:\n  0  success\n  2  configuration error\n  3  numerical failure"
)]
pub struct CliArgs {
    #[command(subcommand)]
    pub mode: ModeCmd,
}

#[derive(Subcommand, Debug)]
pub enum ModeCmd {
    /// Theoretical limits only, one row per (c, criterion).
    #[command(name = "asymptotic")]
    Asymptotic(CommonArgs),
    /// Monte Carlo estimates for realized finite systems.
    #[command(name = "simulate")]
    Simulate(CommonArgs),
    /// Monte Carlo joined with the limits and a relative-error column.
    #[command(name = "compare")]
    Compare(CommonArgs),
    /// Samples of the limiting eigenvalue density.
    #[command(name = "spectrum_dump")]
    SpectrumDump(CommonArgs),
    /// Order-statistic identity cross-check on small scenes.
    #[command(name = "oracle_check")]
    OracleCheck(CommonArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Optional `key = value` config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Aspect ratio max(n,m)/min(n,m), >= 1.
    #[arg(long)]
    pub tau: Option<f64>,
    /// True for the rank-deficient regime n > m.
    #[arg(long)]
    pub tall: Option<bool>,
    /// Feedback ratios R_fb/n, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,
    /// Processing gains, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Monte Carlo trials per cell.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed; every output row is reproducible from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Subset of {min_interference, direction_match}.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<String>>,
    /// Subset of {gaussian_entries, isotropic_columns}.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a line-plot SVG next to the CSV.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub emit_svg: Option<bool>,
    /// Worker threads for the trial loop (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Interferer columns: `m` (analysis convention) or `m-1` (literal).
    #[arg(long)]
    pub k_interf: Option<String>,
    /// Feedback bits for oracle_check, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r_fb: Option<Vec<u32>>,
    /// Conditional-CDF sample budget for oracle_check.
    #[arg(long)]
    pub z_samples: Option<u64>,
    /// Sample count for spectrum_dump.
    #[arg(long)]
    pub points: Option<usize>,
}

impl CliArgs {
    pub fn into_config(self) -> Result<SweepConfig, CliError> {
        let (mode, args) = match self.mode {
            ModeCmd::Asymptotic(a) => (Mode::Asymptotic, a),
            ModeCmd::Simulate(a) => (Mode::Simulate, a),
            ModeCmd::Compare(a) => (Mode::Compare, a),
            ModeCmd::SpectrumDump(a) => (Mode::SpectrumDump, a),
            ModeCmd::OracleCheck(a) => (Mode::OracleCheck, a),
        };
        build_config(mode, args)
    }
}

fn file_scalar<T: FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("config file: cannot parse {key} = `{raw}`"))),
    }
}

fn file_list<T: FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<Vec<T>>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .split(',')
            .map(|s| s.trim().parse::<T>())
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("config file: cannot parse {key} = `{raw}`"))),
    }
}

fn parse_criteria(items: &[String]) -> Result<Vec<Criterion>, CliError> {
    items
        .iter()
        .map(|s| {
            Criterion::parse(s.trim())
                .ok_or_else(|| CliError::Config(format!("unknown criterion `{s}`")))
        })
        .collect()
}

fn parse_models(items: &[String]) -> Result<Vec<MatrixModel>, CliError> {
    items
        .iter()
        .map(|s| {
            MatrixModel::parse(s.trim())
                .ok_or_else(|| CliError::Config(format!("unknown matrix model `{s}`")))
        })
        .collect()
}

/// Merge order: flag, then config file, then default.
pub fn build_config(mode: Mode, args: CommonArgs) -> Result<SweepConfig, CliError> {
    let file = match &args.config {
        Some(path) => super::parse_config_file(path)?,
        None => BTreeMap::new(),
    };

    let tau = match args.tau.or(file_scalar(&file, "tau")?) {
        Some(v) => v,
        None => return Err(CliError::Config("tau is required (flag or config file)".into())),
    };
    let tall = args.tall.or(file_scalar(&file, "tall")?).unwrap_or(false);
    let c_grid = args.c.or(file_list(&file, "c")?).unwrap_or_default();
    let n_grid = args.n.or(file_list(&file, "n")?).unwrap_or_default();
    let trials = args.trials.or(file_scalar(&file, "trials")?).unwrap_or(2000);
    let master_seed = args.seed.or(file_scalar(&file, "seed")?).unwrap_or(42);

    let criteria_raw = args
        .criteria
        .or(file_list::<String>(&file, "criteria")?)
        .unwrap_or_else(|| vec!["min_interference".into(), "direction_match".into()]);
    let criteria = parse_criteria(&criteria_raw)?;

    let models_raw = args
        .models
        .or(file_list::<String>(&file, "models")?)
        .unwrap_or_else(|| vec!["gaussian_entries".into()]);
    let models = parse_models(&models_raw)?;

    let output_path = args.out.or(file_scalar::<PathBuf>(&file, "out")?);
    let emit_svg = args
        .emit_svg
        .or(file_scalar(&file, "emit_svg")?)
        .unwrap_or(false);
    let threads = args.threads.or(file_scalar(&file, "threads")?);
    let k_interf_raw = args
        .k_interf
        .or(file_scalar::<String>(&file, "k_interf")?)
        .unwrap_or_else(|| "m".into());
    let k_interf = KInterfChoice::parse(&k_interf_raw)
        .ok_or_else(|| CliError::Config(format!("k_interf must be `m` or `m-1`, got `{k_interf_raw}`")))?;
    let r_fb_grid = args
        .r_fb
        .or(file_list(&file, "r_fb")?)
        .unwrap_or_else(|| vec![0, 1, 3]);
    let z_samples = args
        .z_samples
        .or(file_scalar(&file, "z_samples")?)
        .unwrap_or(100_000);
    let dump_points = args.points.or(file_scalar(&file, "points")?).unwrap_or(512);

    Ok(SweepConfig {
        mode,
        tau,
        tall,
        c_grid,
        n_grid,
        trials,
        master_seed,
        criteria,
        models,
        output_path,
        emit_svg,
        threads,
        k_interf,
        r_fb_grid,
        z_samples,
        dump_points,
    })
}
