//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::fitting::{fit_mle, FitOptions};
use crate::io::{
    aggregates_csv, bounds_csv, coefficients_csv, coefficients_table, fmt_sig4, load_csv,
    replications_csv, write_atomic, CsvSchema, FitReport, ResponseSpec, SelectionReport,
};
use crate::model::{Dataset, Family};
use crate::sgpv::{prosgpv, NullBound, SelectionConfig};
use crate::simulation::{
    bound_comparison, preset, presets, run_grid, Method, Scenario, DEFAULT_REPLICATIONS,
};
use crate::spine::{load_spine, run_spine_study, DEFAULT_PATH, DEFAULT_SPLITS};

#[derive(Debug, Parser)]
#[command(name = "prosgpv", version, about = "Penalized regression with second-generation p-values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unpenalized (or Jeffreys-penalized) fit of a fixed model.
    Fit(FitArgs),
    /// Two-stage ProSGPV variable selection.
    Select(SelectArgs),
    /// Monte Carlo support-recovery study.
    Simulate(SimulateArgs),
    /// Repeated 70/30 splits of the vertebral-column data.
    Spine(SpineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_bound(s: &str) -> std::result::Result<NullBound, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub input: PathBuf,
    /// Outcome column (logistic, poisson).
    #[arg(long)]
    pub response: Option<String>,
    /// Follow-up time column (cox).
    #[arg(long)]
    pub time: Option<String>,
    /// Event indicator column (cox).
    #[arg(long)]
    pub status: Option<String>,
    /// Comma-separated predictor columns; default all others.
    #[arg(long, value_delimiter = ',')]
    pub predictors: Option<Vec<String>>,
}

impl DataArgs {
    fn schema(&self) -> Result<CsvSchema> {
        let response = match (&self.response, &self.time, &self.status) {
            (Some(r), None, None) => ResponseSpec::Column(r.clone()),
            (None, Some(t), Some(s)) => ResponseSpec::Survival {
                time: t.clone(),
                status: s.clone(),
            },
            _ => {
                return Err(Error::Config(
                    "give either --response, or both --time and --status".into(),
                ))
            }
        };
        let schema = CsvSchema {
            family: self.family,
            response,
            predictors: self.predictors.clone(),
        };
        schema.validate()?;
        Ok(schema)
    }

    fn load(&self) -> Result<Dataset> {
        load_csv(&self.input, &self.schema()?)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Firth/Jeffreys-prior penalized fit (logistic only).
    #[arg(long)]
    pub jeffreys: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_bound, default_value = "constant")]
    pub bound: NullBound,
    #[arg(long)]
    pub jeffreys: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Named scenario preset (see --list-presets).
    #[arg(long)]
    pub preset: Option<String>,
    /// Print the preset table and exit.
    #[arg(long)]
    pub list_presets: bool,
    /// Family for an explicit scenario (without --preset).
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub beta_l: Option<f64>,
    #[arg(long)]
    pub beta_u: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "prosgpv,lasso-min")]
    pub methods: Vec<Method>,
    /// Record wall-clock runtimes (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Compare five alternative null bounds instead of the methods.
    #[arg(long)]
    pub bound_comparison: bool,
}

#[derive(Debug, Args)]
pub struct SpineArgs {
    #[arg(long, default_value = DEFAULT_PATH)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SPLITS)]
    pub splits: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

/// Runs a parsed command line, returning the text for standard output.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Select(a) => cmd_select(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Spine(a) => cmd_spine(&a),
    }
}

fn emit(output: &OutputArgs, csv: impl FnOnce() -> Result<Vec<u8>>, json: impl FnOnce() -> Result<String>, human: String) -> Result<String> {
    match &output.out {
        Some(path) => {
            let bytes = match output.format {
                Format::Csv => csv()?,
                Format::Json => json()?.into_bytes(),
            };
            write_atomic(path, &bytes)?;
            Ok(human)
        }
        None => match output.format {
            Format::Json => Ok(json()? + "\n"),
            Format::Csv => Ok(human),
        },
    }
}

fn cmd_fit(a: &FitArgs) -> Result<String> {
    let data = a.data.load()?;
    if a.jeffreys && data.family() != Family::Logistic {
        return Err(Error::Config("--jeffreys applies to the logistic family only".into()));
    }
    let all: Vec<usize> = (0..data.p()).collect();
    let options = FitOptions {
        jeffreys: a.jeffreys,
        ..FitOptions::default()
    };
    let fit = fit_mle(data.family(), &data, &all, &options)?;
    let report = FitReport::new(&fit, &data);
    let mut human = coefficients_table(&report.coefficients);
    for w in &report.warnings {
        human.push_str(&format!("warning: {w}\n"));
    }
    emit(&a.output, || coefficients_csv(&report.coefficients), || report.to_json(), human)
}

fn cmd_select(a: &SelectArgs) -> Result<String> {
    let data = a.data.load()?;
    if a.jeffreys && data.family() != Family::Logistic {
        return Err(Error::Config("--jeffreys applies to the logistic family only".into()));
    }
    let config = SelectionConfig {
        bound: a.bound,
        jeffreys: a.jeffreys,
        ..SelectionConfig::default()
    };
    let result = prosgpv(data.family(), &data, &config)?;
    let report = SelectionReport::new(&result, &data);
    let list = |v: &[String]| if v.is_empty() { "(none)".to_string() } else { v.join(", ") };
    let mut human = format!(
        "family: {}  n = {}  p = {}  lambda_gic = {}\ncandidate set: {}\nfinal set: {}\nnull bound: {}\n",
        report.family,
        report.n,
        report.p,
        fmt_sig4(report.lambda_gic),
        list(&report.candidate_set),
        list(&report.final_set),
        report.null_bound.map_or_else(|| "-".into(), fmt_sig4),
    );
    human.push_str(&coefficients_table(&report.coefficients));
    for w in &report.warnings {
        human.push_str(&format!("warning: {w}\n"));
    }
    emit(&a.output, || coefficients_csv(&report.coefficients), || report.to_json(), human)
}

fn scenarios(a: &SimulateArgs) -> Result<Vec<Scenario>> {
    if let Some(name) = &a.preset {
        if a.family.is_some() || a.beta_l.is_some() || a.beta_u.is_some() {
            return Err(Error::Config(
                "--family/--beta-l/--beta-u cannot be combined with --preset".into(),
            ));
        }
        return Ok(preset(name)?.scenarios(a.n, a.p, a.s, a.reps, a.seed));
    }
    match (a.family, a.n, a.p, a.s, a.beta_l, a.beta_u) {
        (Some(f), Some(n), Some(p), Some(s), Some(lo), Some(hi)) => Ok(vec![Scenario::new(f, n, p, s, lo, hi)
            .with_replications(a.reps)
            .with_seed(a.seed)]),
        _ => Err(Error::Config(
            "give --preset, or all of --family --n --p --s --beta-l --beta-u".into(),
        )),
    }
}

fn preset_listing() -> String {
    presets().iter().map(|p| format!("{p}\n")).collect()
}

fn write_outputs(dir: Option<&Path>, files: Vec<(&str, Vec<u8>)>) -> Result<()> {
    if let Some(dir) = dir {
        for (name, bytes) in files {
            write_atomic(dir.join(name), &bytes)?;
        }
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<String> {
    if a.list_presets {
        return Ok(preset_listing());
    }
    if a.reps == 0 {
        return Err(Error::Config("--reps must be positive".into()));
    }
    let scenarios = scenarios(a)?;
    let mut out = String::new();
    if a.bound_comparison {
        let rows = bound_comparison(&scenarios, a.threads)?;
        write_outputs(a.out.as_deref(), vec![("bounds.csv", bounds_csv(&rows)?)])?;
        for r in &rows {
            out.push_str(&format!(
                "{} {:<18} capture {} [{}, {}]  power {}  type1 {}  failures {}\n",
                r.scenario,
                r.bound,
                fmt_sig4(r.capture_rate),
                fmt_sig4(r.capture_ci.0),
                fmt_sig4(r.capture_ci.1),
                fmt_sig4(r.power),
                fmt_sig4(r.type1),
                r.failures
            ));
        }
        return Ok(out);
    }
    let results = run_grid(&scenarios, &a.methods, a.threads)?;
    write_outputs(
        a.out.as_deref(),
        vec![
            ("replications.csv", replications_csv(&results.records, a.timing)?),
            ("aggregate.csv", aggregates_csv(&results.aggregates, a.timing)?),
        ],
    )?;
    for r in &results.aggregates {
        out.push_str(&format!(
            "{} {:<16} capture {} [{}, {}]  mae median {}  score median {}  failures {}\n",
            r.scenario,
            r.method,
            fmt_sig4(r.capture_rate),
            fmt_sig4(r.capture_ci.0),
            fmt_sig4(r.capture_ci.1),
            fmt_sig4(r.mae[1]),
            r.score.map_or_else(|| "-".into(), |q| fmt_sig4(q[1])),
            r.failures
        ));
    }
    Ok(out)
}

fn cmd_spine(a: &SpineArgs) -> Result<String> {
    let data = load_spine(&a.input)?;
    let study = run_spine_study(&data, a.splits, a.seed, a.threads)?;
    write_outputs(
        a.out.as_deref(),
        vec![
            ("spine_splits.csv", study.splits_csv()?),
            ("spine_summary.csv", study.summary_csv()?),
        ],
    )?;
    let mut out = String::new();
    for s in &study.summaries {
        let model: Vec<&str> = s.top_model.iter().map(|&j| study.names[j].as_str()).collect();
        out.push_str(&format!(
            "{:<10} median size {}  median AUC {}  mean AUC {}  top model [{}] x{}  failures {}\n",
            s.method,
            fmt_sig4(s.median_size),
            fmt_sig4(s.median_auc),
            fmt_sig4(s.mean_auc),
            model.join(", "),
            s.top_count,
            s.failures
        ));
    }
    Ok(out)
}
