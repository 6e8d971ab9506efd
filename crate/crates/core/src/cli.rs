//! Command-line front end: `estimate`, `simulate`, `residuals`, `experiment`.
//!
//! Settings resolve as flag, then `--config` file, then the `DIFFYW_SEED`
//! environment variable (seed only), then built-in defaults.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::decorrelate::one_step_residuals;
use crate::error::{Error, Result};
use crate::estimators::{
    ar1seg_estimate, classical_yule_walker, diff_yule_walker, rolling_window_yw,
    segmented_yule_walker, with_bootstrap, EstimationReport, Method,
};
use crate::experiments::{self, ScenarioSpec};
use crate::io::{self, Truth};
use crate::model::{self, ARModel, ChangepointConfig, Series};
use crate::rng;

pub const SEED_ENV: &str = "DIFFYW_SEED";

#[derive(Debug, Parser)]
#[command(name = "diffyw", version, about = "Changepoint-robust AR estimation")]
pub struct Cli {
    /// TOML file with defaults for p, method, window, bootstrap_reps, seed, column, out_dir.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit AR coefficients to a series.
    Estimate(EstimateArgs),
    /// Simulate an AR series with mean shifts.
    Simulate(SimulateArgs),
    /// Write one-step prediction residuals of a difference-estimator fit.
    Residuals(ResidualsArgs),
    /// Run a Monte Carlo experiment described by a spec file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV column holding the series (header row required).
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub p: Option<usize>,
    /// diff, ar1seg, rolling, classical or segmented.
    #[arg(long)]
    pub method: Option<Method>,
    /// Run every applicable estimator.
    #[arg(long)]
    pub all: bool,
    /// Rolling window length.
    #[arg(long)]
    pub window: Option<usize>,
    /// Known changepoint times t1,t2,... for the segmented estimator.
    #[arg(long, value_delimiter = ',')]
    pub changepoints: Option<Vec<usize>>,
    /// Parametric bootstrap replications for the difference estimator.
    #[arg(long)]
    pub bootstrap_reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truth sidecar written by `simulate`; adds estimation errors to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Directory for report.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// AR coefficients φ1,φ2,...
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub phi: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub noise_var: f64,
    #[arg(long)]
    pub n: usize,
    /// Changepoint times t1,t2,...
    #[arg(long, value_delimiter = ',')]
    pub changepoints: Option<Vec<usize>>,
    /// Segment means, one more than the changepoints.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub means: Option<Vec<f64>>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResidualsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Scenario spec, TOML or JSON.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<usize>,
    pub method: Option<Method>,
    pub window: Option<usize>,
    pub bootstrap_reps: Option<usize>,
    pub seed: Option<u64>,
    pub column: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: format!("{}: {}", path.display(), e.message()),
        })
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Error::invalid_input(format!("{SEED_ENV}='{s}' is not an unsigned integer"))
        }),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64> {
    Ok(match flag.or(file.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(rng::DEFAULT_SEED),
    })
}

fn out_dir(flag: Option<PathBuf>, file: &FileConfig) -> PathBuf {
    flag.or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Parse arguments and run, writing the human-readable summary to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let text = match cli.command {
        Command::Estimate(args) => cmd_estimate(args, &file)?,
        Command::Simulate(args) => cmd_simulate(args, &file)?,
        Command::Residuals(args) => cmd_residuals(args, &file)?,
        Command::Experiment(args) => cmd_experiment(args, &file)?,
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFailure {
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub method: Method,
    pub coeff_errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_var_error: Option<f64>,
}

/// Structured output of `estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDocument {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub estimates: Vec<EstimationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<MethodFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<Truth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<Score>,
}

pub const REPORT_FILE: &str = "report.json";
pub const SERIES_FILE: &str = "series.txt";
pub const TRUTH_FILE: &str = "truth.json";
pub const RESIDUALS_FILE: &str = "residuals.txt";

fn estimate_one(
    method: Method,
    series: &Series,
    p: usize,
    window: Option<usize>,
    changepoints: Option<&[usize]>,
) -> Result<EstimationReport> {
    match method {
        Method::Diff => diff_yule_walker(series, p),
        Method::Classical => classical_yule_walker(series, p),
        Method::Ar1seg => {
            if p != 1 {
                return Err(Error::InvalidOrder("ar1seg fits order 1 only".into()));
            }
            ar1seg_estimate(series)
        }
        Method::Rolling => {
            let w = window.ok_or_else(|| Error::invalid_input("rolling needs --window"))?;
            rolling_window_yw(series, p, w)
        }
        Method::Segmented => {
            let times = changepoints
                .ok_or_else(|| Error::invalid_input("segmented needs --changepoints"))?
                .to_vec();
            let means = vec![0.0; times.len() + 1];
            segmented_yule_walker(series, p, &ChangepointConfig::new(times, means)?)
        }
    }
}

fn tagged(method: Method, err: Error) -> Error {
    match err {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{method}: {m}")),
        Error::InvalidModel(m) => Error::InvalidModel(format!("{method}: {m}")),
        Error::InvalidConfig(m) => Error::InvalidConfig(format!("{method}: {m}")),
        Error::InvalidOrder(m) => Error::InvalidOrder(format!("{method}: {m}")),
        Error::DegenerateSeries(m) => Error::DegenerateSeries(format!("{method}: {m}")),
        Error::NumericalDegeneracy { condition, context } => Error::NumericalDegeneracy {
            condition,
            context: format!("{method}: {context}"),
        },
        Error::CannotBootstrap(m) => Error::CannotBootstrap(format!("{method}: {m}")),
        other => other,
    }
}

fn cmd_estimate(args: EstimateArgs, file: &FileConfig) -> Result<String> {
    let p = args.p.or(file.p).unwrap_or(1);
    if p < 1 {
        return Err(Error::InvalidOrder("--p must be at least 1".into()));
    }
    let seed = resolve_seed(args.seed, file)?;
    let window = args.window.or(file.window);
    let bootstrap_reps = args.bootstrap_reps.or(file.bootstrap_reps);
    let column = args.input.column.or_else(|| file.column.clone());
    let series = io::read_series(&args.input.input, column.as_deref())?;
    let changepoints = args.changepoints.as_deref();

    let methods: Vec<Method> = if args.all {
        let mut m = vec![Method::Classical];
        if p == 1 {
            m.push(Method::Ar1seg);
        }
        m.push(Method::Diff);
        if changepoints.is_some() {
            m.push(Method::Segmented);
        }
        if window.is_some() {
            m.push(Method::Rolling);
        }
        m
    } else {
        vec![args.method.or(file.method).unwrap_or(Method::Diff)]
    };

    let mut estimates = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    for method in methods {
        let fitted =
            estimate_one(method, &series, p, window, changepoints).and_then(
                |r| match bootstrap_reps {
                    Some(reps) if method == Method::Diff => with_bootstrap(r, &series, reps, seed),
                    _ => Ok(r),
                },
            );
        match fitted {
            Ok(r) => estimates.push(r),
            Err(e) => {
                let e = tagged(method, e);
                failures.push(MethodFailure {
                    method,
                    error: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    if estimates.is_empty() {
        return Err(first_error.expect("at least one method runs"));
    }

    let truth = args.truth.as_deref().map(io::read_truth).transpose()?;
    let scores = truth
        .as_ref()
        .map(|t| {
            estimates
                .iter()
                .filter(|r| r.order == t.coeffs.len())
                .map(|r| Score {
                    method: r.method,
                    coeff_errors: r.coeffs.iter().zip(&t.coeffs).map(|(e, t)| e - t).collect(),
                    noise_var_error: r.noise_var.map(|v| v - t.noise_var),
                })
                .collect()
        })
        .unwrap_or_default();

    let doc = EstimateDocument {
        input: args.input.input.display().to_string(),
        column,
        n: series.len(),
        p,
        seed,
        estimates,
        failures,
        truth,
        scores,
    };
    if let Some(dir) = args.out_dir.or_else(|| file.out_dir.clone()) {
        io::write_json(&dir.join(REPORT_FILE), &doc)?;
    }
    Ok(format_estimates(&doc))
}

fn format_estimates(doc: &EstimateDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} (n = {}, p = {})", doc.input, doc.n, doc.p);
    let _ = writeln!(
        s,
        "{:<38} {:>30} {:>10}",
        "method", "coefficients", "sigma^2"
    );
    for r in &doc.estimates {
        let coeffs = r
            .coeffs
            .iter()
            .map(|c| format!("{c:.4}"))
            .collect::<Vec<_>>()
            .join(", ");
        let var = r.noise_var.map_or("-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            s,
            "{:<38} {:>30} {:>10}",
            r.method.description(),
            coeffs,
            var
        );
        if let Some(se) = &r.diagnostics.bootstrap_se {
            let se = se
                .iter()
                .map(|c| format!("{c:.4}"))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(s, "{:<38} {:>30}", "  bootstrap s.e.", se);
        }
        for w in &r.diagnostics.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
    }
    for f in &doc.failures {
        let _ = writeln!(s, "{:<38} failed: {}", f.method.description(), f.error);
    }
    s
}

fn cmd_simulate(args: SimulateArgs, file: &FileConfig) -> Result<String> {
    let seed = resolve_seed(args.seed, file)?;
    let model = ARModel::new(args.phi, args.noise_var)?;
    let config = match (args.changepoints, args.means) {
        (None, None) => ChangepointConfig::constant(0.0),
        (Some(times), Some(means)) => ChangepointConfig::new(times, means)?,
        (Some(times), None) => {
            let m = times.len();
            ChangepointConfig::new(times, model::alternating_means(m, 1.0))?
        }
        (None, Some(means)) if means.len() == 1 => ChangepointConfig::constant(means[0]),
        (None, Some(_)) => {
            return Err(Error::invalid_config(
                "--means with several values needs --changepoints",
            ))
        }
    };
    config.validate_for(args.n)?;
    let burnin = args
        .burnin
        .unwrap_or_else(|| model::default_burnin(model.order()));
    let clean = model::simulate_ar(&model, args.n, seed, burnin)?;
    let series = model::apply_mean_shifts(&clean, &config)?;
    let truth = Truth::new(&model, &config, args.n, seed, burnin);

    let dir = out_dir(args.out_dir, file);
    let series_path = dir.join(SERIES_FILE);
    io::write_text(&series_path, &io::format_series(series.values(), &[]))?;
    io::write_json(&dir.join(TRUTH_FILE), &truth)?;
    Ok(format!(
        "wrote {} values to {} (seed {seed})\n",
        series.len(),
        series_path.display()
    ))
}

fn cmd_residuals(args: ResidualsArgs, file: &FileConfig) -> Result<String> {
    let p = args.p.or(file.p).unwrap_or(1);
    let column = args.input.column.or_else(|| file.column.clone());
    let series = io::read_series(&args.input.input, column.as_deref())?;
    let fit = diff_yule_walker(&series, p).map_err(|e| tagged(Method::Diff, e))?;
    let residuals = one_step_residuals(&series, &fit.coeffs)?;
    let header = vec![
        format!("method {}", fit.method),
        format!("order {}", fit.order),
        format!(
            "coeffs {}",
            fit.coeffs
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
        format!(
            "noise_var {}",
            fit.noise_var.map_or("NA".into(), |v| v.to_string())
        ),
        format!("offset {}", residuals.offset),
    ];
    let dir = out_dir(args.out_dir, file);
    let path = dir.join(RESIDUALS_FILE);
    io::write_text(&path, &io::format_series(&residuals.values, &header))?;
    Ok(format!(
        "wrote {} residuals to {}\n",
        residuals.len(),
        path.display()
    ))
}

/// Read a scenario spec. A seed given in the file wins over the config
/// file and environment; `--seed` and `--reps` win over the file.
pub fn load_spec(
    path: &Path,
    seed: Option<u64>,
    reps: Option<usize>,
    fallback_seed: u64,
) -> Result<ScenarioSpec> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let mut value: serde_json::Value = if is_json {
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?
    } else {
        let table: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        serde_json::to_value(table).map_err(|e| Error::invalid_config(e.to_string()))?
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::invalid_config("spec must be a table"))?;
    if let Some(s) = seed {
        obj.insert("seed".into(), s.into());
    } else if !obj.contains_key("seed") {
        obj.insert("seed".into(), fallback_seed.into());
    }
    if let Some(r) = reps {
        obj.insert("reps".into(), r.into());
    }
    let spec: ScenarioSpec =
        serde_json::from_value(value).map_err(|e| Error::invalid_config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

fn cmd_experiment(args: ExperimentArgs, file: &FileConfig) -> Result<String> {
    let fallback = resolve_seed(None, file)?;
    let spec = load_spec(&args.spec, args.seed, args.reps, fallback)?;
    let result = match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::invalid_input(e.to_string()))?
            .install(|| experiments::run(&spec))?,
        None => experiments::run(&spec)?,
    };
    let dir = out_dir(args.out_dir, file);
    io::write_experiment(&dir, &result)?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} reps={} seed={} -> {}",
        spec.design.name(),
        spec.reps,
        spec.seed,
        dir.display()
    );
    let _ = writeln!(
        s,
        "{:<20} {:<18} {:<6} {:>6} {:>10} {:>10} {:>10} {:>10}",
        "cell", "estimator", "target", "fails", "mean", "bias", "sd", "rmse"
    );
    for r in &result.summary {
        let _ = writeln!(
            s,
            "{:<20} {:<18} {:<6} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.cell, r.estimator, r.target, r.failures, r.mean_estimate, r.bias, r.sd, r.rmse
        );
    }
    Ok(s)
}
