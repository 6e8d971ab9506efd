//! Seeded Monte Carlo studies of the estimators and of changepoint detection
//! on decorrelated residuals.
//!
//! Replication `r` draws its scenario parameters from one stream and its
//! innovations from another, both keyed by `(seed, design, r)`. All grid
//! cells of a replication share those streams, so cells are compared under
//! common random numbers, and results do not depend on the thread count.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::changepoint::{
    default_penalty, pelt_meanshift, penalty_for_variance, wbs_meanshift, DEFAULT_WBS_INTERVALS,
    DEFAULT_WBS_THRESHOLD,
};
use crate::decorrelate::one_step_residuals;
use crate::error::{Error, Result};
use crate::estimators::{ar1seg_estimate, diff_yule_walker, rolling_window_yw};
use crate::model::{
    self, alternating_means, apply_mean_shifts, random_changepoint_times, ARModel,
    ChangepointConfig, Series,
};
use crate::rng::{self, SimRng};
use crate::stats;

/// Largest share of failed replications tolerated in any summary cell.
pub const MAX_FAILURE_SHARE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ar1CompareParams {
    pub n: usize,
    pub max_changepoints: usize,
    /// Segment means are drawn from `Uniform(−mean_bound, mean_bound)`.
    pub mean_bound: f64,
    /// φ is drawn from `Uniform(−phi_bound, phi_bound)`.
    pub phi_bound: f64,
    /// Rolling windows of length `n / divisor`.
    pub window_divisors: Vec<usize>,
}

impl Default for Ar1CompareParams {
    fn default() -> Self {
        Self {
            n: 1000,
            max_changepoints: 10,
            mean_bound: 1.5,
            phi_bound: 0.95,
            window_divisors: vec![1, 2, 5, 10, 20, 50],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsistencyParams {
    pub ns: Vec<usize>,
    /// Equally spaced changepoints.
    pub changepoints: usize,
    /// Size of the alternating shifts, the first one upward.
    pub shift: f64,
    /// Bound on the inverse-root moduli (AR(4) design only).
    pub root_bound: f64,
}

impl Default for ConsistencyParams {
    fn default() -> Self {
        Self {
            ns: vec![1000, 4000, 16000],
            changepoints: 9,
            shift: 2.0,
            root_bound: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftSensitivityParams {
    pub n: usize,
    pub changepoints: usize,
    pub shift_sizes: Vec<f64>,
    pub phi_bound: f64,
}

impl Default for ShiftSensitivityParams {
    fn default() -> Self {
        Self {
            n: 1000,
            changepoints: 9,
            shift_sizes: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            phi_bound: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Table1Params {
    pub n: usize,
    pub phis: Vec<f64>,
    /// Numbers of equally spaced changepoints.
    pub changepoint_counts: Vec<usize>,
    /// `|Δ| / √(σ²/(1 − φ²))`.
    pub snr: f64,
    pub noise_var: f64,
    pub wbs_intervals: usize,
    pub wbs_threshold: f64,
    /// Fixed PELT penalty. When absent, `3 σ̂² log N` with σ̂² the innovation
    /// variance of the difference-estimator fit, shared by the raw and the
    /// decorrelated search.
    pub pelt_penalty: Option<f64>,
}

impl Default for Table1Params {
    fn default() -> Self {
        Self {
            n: 500,
            phis: vec![0.25, 0.5, 0.75],
            changepoint_counts: vec![0, 3],
            snr: 2.0,
            noise_var: 1.0,
            wbs_intervals: DEFAULT_WBS_INTERVALS,
            wbs_threshold: DEFAULT_WBS_THRESHOLD,
            pelt_penalty: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum Design {
    #[serde(alias = "AR1Compare")]
    Ar1Compare(Ar1CompareParams),
    #[serde(alias = "AR2Consistency")]
    Ar2Consistency(ConsistencyParams),
    #[serde(alias = "AR4Consistency")]
    Ar4Consistency(ConsistencyParams),
    #[serde(alias = "ShiftSensitivity")]
    ShiftSensitivity(ShiftSensitivityParams),
    #[serde(alias = "Table1")]
    Table1(Table1Params),
}

impl Design {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ar1Compare(_) => "ar1_compare",
            Self::Ar2Consistency(_) => "ar2_consistency",
            Self::Ar4Consistency(_) => "ar4_consistency",
            Self::ShiftSensitivity(_) => "shift_sensitivity",
            Self::Table1(_) => "table1",
        }
    }
}

/// A fully resolved experiment: design, replication count and master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub design: Design,
    pub reps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    rng::DEFAULT_SEED
}

impl ScenarioSpec {
    pub fn new(design: Design, reps: usize, seed: u64) -> Self {
        Self { design, reps, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: &str| Err(Error::invalid_config(format!("{name}: {msg}")));
        if self.reps < 1 {
            return field("reps", "must be at least 1");
        }
        match &self.design {
            Design::Ar1Compare(p) => {
                if p.n < 10 {
                    return field("n", "must be at least 10");
                }
                if p.max_changepoints >= p.n - 1 {
                    return field("max_changepoints", "must be below n - 1");
                }
                if !(p.phi_bound > 0.0 && p.phi_bound < 1.0) {
                    return field("phi_bound", "must lie in (0, 1)");
                }
                if !(p.mean_bound >= 0.0) {
                    return field("mean_bound", "must be non-negative");
                }
                if p.window_divisors.iter().any(|&d| d == 0 || p.n / d < 3) {
                    return field(
                        "window_divisors",
                        "every window n / divisor must hold at least 3 points",
                    );
                }
            }
            Design::Ar2Consistency(p) | Design::Ar4Consistency(p) => {
                if p.ns.is_empty() || p.ns.windows(2).any(|w| w[0] >= w[1]) {
                    return field("ns", "must be non-empty and strictly increasing");
                }
                if p.ns[0] < 4 * (p.changepoints + 1) {
                    return field("ns", "smallest length too short for the changepoints");
                }
                if !(p.root_bound > 0.0 && p.root_bound < 1.0) {
                    return field("root_bound", "must lie in (0, 1)");
                }
                if !p.shift.is_finite() {
                    return field("shift", "must be finite");
                }
            }
            Design::ShiftSensitivity(p) => {
                if p.shift_sizes.is_empty() || p.shift_sizes.iter().any(|s| !s.is_finite()) {
                    return field("shift_sizes", "must be a non-empty list of finite sizes");
                }
                if p.changepoints >= p.n - 1 || p.n < 10 {
                    return field("n", "too short for the changepoints");
                }
                if !(p.phi_bound > 0.0 && p.phi_bound < 1.0) {
                    return field("phi_bound", "must lie in (0, 1)");
                }
            }
            Design::Table1(p) => {
                if p.phis.is_empty() || p.phis.iter().any(|f| !(f.abs() < 1.0)) {
                    return field("phis", "must be a non-empty list inside (-1, 1)");
                }
                if p.changepoint_counts.iter().any(|&m| m + 1 > p.n / 2) {
                    return field("changepoint_counts", "too many changepoints for n");
                }
                if !(p.noise_var > 0.0) {
                    return field("noise_var", "must be positive");
                }
                if p.wbs_intervals < 1 {
                    return field("wbs_intervals", "must be at least 1");
                }
                if matches!(p.pelt_penalty, Some(v) if !(v > 0.0)) {
                    return field("pelt_penalty", "must be positive");
                }
                if p.n < 10 {
                    return field("n", "must be at least 10");
                }
            }
        }
        Ok(())
    }
}

/// One estimate of one target in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub cell: String,
    pub rep: usize,
    pub estimator: String,
    pub target: String,
    pub truth: f64,
    pub estimate: Option<f64>,
    pub failure: Option<String>,
}

/// Statistics of `estimate − truth` over the successful replications of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell: String,
    pub estimator: String,
    pub target: String,
    pub replications: usize,
    pub failures: usize,
    pub mean_estimate: f64,
    pub bias: f64,
    pub sd: f64,
    pub rmse: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub spec: ScenarioSpec,
    pub records: Vec<ReplicationRecord>,
    pub summary: Vec<SummaryRow>,
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl AggregateResult {
    pub fn row(&self, cell: &str, estimator: &str, target: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.cell == cell && r.estimator == estimator && r.target == target)
    }
}

struct Outcome {
    cell: String,
    estimator: String,
    target: String,
    truth: f64,
    estimate: Result<f64>,
}

impl Outcome {
    fn new(cell: &str, estimator: &str, target: &str, truth: f64, estimate: Result<f64>) -> Self {
        Self {
            cell: cell.to_string(),
            estimator: estimator.to_string(),
            target: target.to_string(),
            truth,
            estimate,
        }
    }
}

fn coefficient_outcomes(
    cell: &str,
    estimator: &str,
    truth: &[f64],
    fit: Result<Vec<f64>>,
) -> Vec<Outcome> {
    truth
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let target = format!("phi{}", j + 1);
            let est = match &fit {
                Ok(c) => Ok(c[j]),
                Err(e) => Err(e.clone()),
            };
            Outcome::new(cell, estimator, &target, t, est)
        })
        .collect()
}

struct Streams {
    params: SimRng,
    noise_key: (u64, u64, u64),
}

impl Streams {
    fn new(seed: u64, design: &str, rep: usize) -> Self {
        Self {
            params: rng::stream(
                seed,
                rng::domain_tag(&format!("{design}:params")),
                rep as u64,
            ),
            noise_key: (
                seed,
                rng::domain_tag(&format!("{design}:noise")),
                rep as u64,
            ),
        }
    }

    /// Fresh copy of the replication's innovation stream.
    fn noise(&self) -> SimRng {
        let (seed, domain, rep) = self.noise_key;
        rng::stream(seed, domain, rep)
    }
}

fn simulate(
    model: &ARModel,
    n: usize,
    config: &ChangepointConfig,
    rng: &mut SimRng,
) -> Result<Series> {
    let clean = model::simulate_ar_with(
        model,
        n,
        model::default_burnin(model.order()),
        rng,
        &StandardNormal,
    )?;
    apply_mean_shifts(&clean, config)
}

/// Draw `(φ₁, φ₂)` uniformly from the causal triangle.
pub fn draw_ar2_triangle<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    loop {
        let phi1 = rng.random_range(-2.0..2.0);
        let phi2 = rng.random_range(-1.0..1.0);
        if phi1 + phi2 < 1.0 && phi2 - phi1 < 1.0 {
            let coeffs = vec![phi1, phi2];
            if model::check_causal(&coeffs).unwrap_or(false) {
                return coeffs;
            }
        }
    }
}

/// Real AR coefficients of `φ(z) = Π (1 − r_k z)` for inverse roots `r_k`
/// that are real or come in conjugate pairs.
pub fn coeffs_from_inverse_roots(roots: &[Complex64]) -> Result<Vec<f64>> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * r;
        }
        poly = next;
    }
    if let Some(c) = poly.iter().find(|c| c.im.abs() >= 1e-12) {
        return Err(Error::invalid_model(format!(
            "inverse roots are not closed under conjugation (imaginary residue {})",
            c.im
        )));
    }
    Ok(poly[1..].iter().map(|c| -c.re).collect())
}

/// Two real inverse roots in `(−bound, bound)` and a conjugate pair drawn
/// uniformly from the disc of radius `bound`.
pub fn draw_ar4_roots<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> Vec<Complex64> {
    let r1 = rng.random_range(-bound..bound);
    let r2 = rng.random_range(-bound..bound);
    let radius = bound * rng.random::<f64>().sqrt();
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let r3 = Complex64::from_polar(radius, angle);
    vec![
        Complex64::new(r1, 0.0),
        Complex64::new(r2, 0.0),
        r3,
        r3.conj(),
    ]
}

fn ar1_compare(p: &Ar1CompareParams, seed: u64, rep: usize) -> Vec<Outcome> {
    let mut streams = Streams::new(seed, "ar1_compare", rep);
    let rng = &mut streams.params;
    let phi = rng.random_range(-p.phi_bound..p.phi_bound);
    let m = rng.random_range(0..=p.max_changepoints);
    let cell = format!("N={}", p.n);
    let setup = random_changepoint_times(p.n, m, rng).and_then(|times| {
        let means = (0..=m)
            .map(|_| rng.random_range(-p.mean_bound..=p.mean_bound))
            .collect();
        ChangepointConfig::new(times, means)
    });
    let series = setup.and_then(|config| {
        let model = ARModel::ar1(phi, 1.0)?;
        simulate(&model, p.n, &config, &mut streams.noise())
    });
    let mut out = Vec::new();
    let fit = |f: &dyn Fn(&Series) -> Result<Vec<f64>>| match &series {
        Ok(s) => f(s),
        Err(e) => Err(e.clone()),
    };
    out.extend(coefficient_outcomes(
        &cell,
        "ar1seg",
        &[phi],
        fit(&|s| ar1seg_estimate(s).map(|r| r.coeffs)),
    ));
    out.extend(coefficient_outcomes(
        &cell,
        "diff",
        &[phi],
        fit(&|s| diff_yule_walker(s, 1).map(|r| r.coeffs)),
    ));
    for &d in &p.window_divisors {
        let label = if d == 1 {
            "N".to_string()
        } else {
            format!("N/{d}")
        };
        let w = p.n / d;
        out.extend(coefficient_outcomes(
            &cell,
            &label,
            &[phi],
            fit(&|s| rolling_window_yw(s, 1, w).map(|r| r.coeffs)),
        ));
    }
    out
}

fn consistency(design: &str, p: &ConsistencyParams, seed: u64, rep: usize) -> Vec<Outcome> {
    let mut streams = Streams::new(seed, design, rep);
    let coeffs = if design == "ar4_consistency" {
        coeffs_from_inverse_roots(&draw_ar4_roots(&mut streams.params, p.root_bound))
    } else {
        Ok(draw_ar2_triangle(&mut streams.params))
    };
    let order = if design == "ar4_consistency" { 4 } else { 2 };
    let mut out = Vec::new();
    for &n in &p.ns {
        let cell = format!("N={n}");
        let truth = coeffs.clone().unwrap_or_else(|_| vec![f64::NAN; order]);
        let fit = coeffs.clone().and_then(|c| {
            let model = ARModel::new(c, 1.0)?;
            let config =
                ChangepointConfig::equally_spaced(n, alternating_means(p.changepoints, p.shift))?;
            let series = simulate(&model, n, &config, &mut streams.noise())?;
            diff_yule_walker(&series, order).map(|r| r.coeffs)
        });
        out.extend(coefficient_outcomes(&cell, "diff", &truth, fit));
    }
    out
}

fn shift_sensitivity(p: &ShiftSensitivityParams, seed: u64, rep: usize) -> Vec<Outcome> {
    let mut streams = Streams::new(seed, "shift_sensitivity", rep);
    let phi = streams.params.random_range(-p.phi_bound..p.phi_bound);
    let times = random_changepoint_times(p.n, p.changepoints, &mut streams.params);
    let mut out = Vec::new();
    for &size in &p.shift_sizes {
        let cell = format!("shift={size}");
        let fit = times.clone().and_then(|t| {
            let config = ChangepointConfig::new(t, alternating_means(p.changepoints, size))?;
            let model = ARModel::ar1(phi, 1.0)?;
            let series = simulate(&model, p.n, &config, &mut streams.noise())?;
            diff_yule_walker(&series, 1).map(|r| r.coeffs)
        });
        out.extend(coefficient_outcomes(&cell, "diff", &[phi], fit));
    }
    out
}

/// Shift size giving the requested signal-to-noise ratio for an AR(1).
pub fn snr_shift(snr: f64, phi: f64, noise_var: f64) -> f64 {
    snr * (noise_var / (1.0 - phi * phi)).sqrt()
}

fn table1(p: &Table1Params, seed: u64, rep: usize) -> Vec<Outcome> {
    let mut streams = Streams::new(seed, "table1", rep);
    let wbs_seed: u64 = streams.params.random();
    let mut out = Vec::new();
    for &phi in &p.phis {
        for &m in &p.changepoint_counts {
            let cell = format!("phi={phi},m={m}");
            let delta = snr_shift(p.snr, phi, p.noise_var);
            let series = ARModel::ar1(phi, p.noise_var).and_then(|model| {
                let config = ChangepointConfig::equally_spaced(p.n, alternating_means(m, delta))?;
                simulate(&model, p.n, &config, &mut streams.noise())
            });
            let fit = series.clone().and_then(|s| diff_yule_walker(&s, 1));
            let residuals = match (&series, &fit) {
                (Ok(s), Ok(fit)) => one_step_residuals(s, &fit.coeffs).and_then(|r| r.to_series()),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            let fitted_var = fit
                .as_ref()
                .ok()
                .and_then(|f| f.noise_var)
                .filter(|v| *v > 0.0);
            let detect = |s: &Result<Series>, wbs: bool| -> Result<f64> {
                let s = s.as_ref().map_err(|e| e.clone())?;
                let seg = if wbs {
                    wbs_meanshift(s, p.wbs_intervals, p.wbs_threshold, wbs_seed)?
                } else {
                    let penalty = p.pelt_penalty.unwrap_or_else(|| match fitted_var {
                        Some(v) => penalty_for_variance(v, s.len()),
                        None => default_penalty(s.values()),
                    });
                    pelt_meanshift(s, penalty)?
                };
                Ok(seg.num_changepoints() as f64)
            };
            let truth = m as f64;
            out.push(Outcome::new(
                &cell,
                "wbs",
                "m",
                truth,
                detect(&series, true),
            ));
            out.push(Outcome::new(
                &cell,
                "wbs_decorrelated",
                "m",
                truth,
                detect(&residuals, true),
            ));
            out.push(Outcome::new(
                &cell,
                "pelt",
                "m",
                truth,
                detect(&series, false),
            ));
            out.push(Outcome::new(
                &cell,
                "pelt_decorrelated",
                "m",
                truth,
                detect(&residuals, false),
            ));
        }
    }
    out
}

fn summarise(records: &[ReplicationRecord]) -> Result<Vec<SummaryRow>> {
    let mut keys: Vec<(&str, &str, &str)> = Vec::new();
    for r in records {
        let key = (r.cell.as_str(), r.estimator.as_str(), r.target.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(cell, estimator, target)| {
            let group: Vec<&ReplicationRecord> = records
                .iter()
                .filter(|r| r.cell == cell && r.estimator == estimator && r.target == target)
                .collect();
            let ok: Vec<(f64, f64)> = group
                .iter()
                .filter_map(|r| r.estimate.map(|e| (r.truth, e)))
                .collect();
            let failures = group.len() - ok.len();
            if failures as f64 > MAX_FAILURE_SHARE * group.len() as f64 {
                let reason = group
                    .iter()
                    .find_map(|r| r.failure.clone())
                    .unwrap_or_default();
                return Err(Error::degenerate(format!(
                    "{failures} of {} replications failed in cell {cell}, estimator {estimator}: {reason}",
                    group.len()
                )));
            }
            let errors: Vec<f64> = ok.iter().map(|(t, e)| e - t).collect();
            let estimates: Vec<f64> = ok.iter().map(|(_, e)| *e).collect();
            let mut sorted = errors.clone();
            sorted.sort_by(f64::total_cmp);
            let q = |level| stats::quantile_sorted(&sorted, level);
            Ok(SummaryRow {
                cell: cell.to_string(),
                estimator: estimator.to_string(),
                target: target.to_string(),
                replications: ok.len(),
                failures,
                mean_estimate: stats::mean(&estimates),
                bias: stats::mean(&errors),
                sd: stats::std_dev(&errors),
                rmse: (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt(),
                q05: q(0.05),
                q25: q(0.25),
                q50: q(0.5),
                q75: q(0.75),
                q95: q(0.95),
            })
        })
        .collect()
}

/// Run a scenario. Replications run in parallel on the current rayon pool;
/// the output is identical for any pool size.
pub fn run(spec: &ScenarioSpec) -> Result<AggregateResult> {
    spec.validate()?;
    let start = Instant::now();
    let seed = spec.seed;
    let per_rep: Vec<Vec<Outcome>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| match &spec.design {
            Design::Ar1Compare(p) => ar1_compare(p, seed, rep),
            Design::Ar2Consistency(p) => consistency("ar2_consistency", p, seed, rep),
            Design::Ar4Consistency(p) => consistency("ar4_consistency", p, seed, rep),
            Design::ShiftSensitivity(p) => shift_sensitivity(p, seed, rep),
            Design::Table1(p) => table1(p, seed, rep),
        })
        .collect();
    let records: Vec<ReplicationRecord> = per_rep
        .into_iter()
        .enumerate()
        .flat_map(|(rep, outcomes)| {
            outcomes.into_iter().map(move |o| {
                let (estimate, failure) = match o.estimate {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                ReplicationRecord {
                    cell: o.cell,
                    rep,
                    estimator: o.estimator,
                    target: o.target,
                    truth: o.truth,
                    estimate,
                    failure,
                }
            })
        })
        .collect();
    let summary = summarise(&records)?;
    Ok(AggregateResult {
        spec: spec.clone(),
        records,
        summary,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run_ar1_compare(
    params: Ar1CompareParams,
    reps: usize,
    seed: u64,
) -> Result<AggregateResult> {
    run(&ScenarioSpec::new(Design::Ar1Compare(params), reps, seed))
}

pub fn run_ar2_consistency(
    params: ConsistencyParams,
    reps: usize,
    seed: u64,
) -> Result<AggregateResult> {
    run(&ScenarioSpec::new(
        Design::Ar2Consistency(params),
        reps,
        seed,
    ))
}

pub fn run_ar4_consistency(
    params: ConsistencyParams,
    reps: usize,
    seed: u64,
) -> Result<AggregateResult> {
    run(&ScenarioSpec::new(
        Design::Ar4Consistency(params),
        reps,
        seed,
    ))
}

pub fn run_shift_sensitivity(
    params: ShiftSensitivityParams,
    reps: usize,
    seed: u64,
) -> Result<AggregateResult> {
    run(&ScenarioSpec::new(
        Design::ShiftSensitivity(params),
        reps,
        seed,
    ))
}

pub fn run_table1(params: Table1Params, reps: usize, seed: u64) -> Result<AggregateResult> {
    run(&ScenarioSpec::new(Design::Table1(params), reps, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ar4_expansion_oracle() {
        let roots = [
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.0, -0.5),
        ];
        let c = coeffs_from_inverse_roots(&roots).unwrap();
        assert_abs_diff_eq!(c[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[3], 0.0625, epsilon = 1e-15);
    }

    #[test]
    fn unpaired_complex_root_rejected() {
        assert!(coeffs_from_inverse_roots(&[Complex64::new(0.1, 0.4)]).is_err());
    }

    #[test]
    fn snr_arithmetic() {
        assert_abs_diff_eq!(
            snr_shift(2.0, 0.5, 1.0),
            2.309_401_076_758_503,
            epsilon = 1e-12
        );
    }

    #[test]
    fn validation_names_fields() {
        let spec = ScenarioSpec::new(
            Design::Ar2Consistency(ConsistencyParams {
                ns: vec![4000, 1000],
                ..Default::default()
            }),
            5,
            1,
        );
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("ns"), "{err}");
        let spec = ScenarioSpec::new(Design::Table1(Table1Params::default()), 0, 1);
        assert!(spec.validate().unwrap_err().to_string().contains("reps"));
    }

    #[test]
    fn spec_parses_from_toml_with_defaults() {
        let spec: ScenarioSpec = toml::from_str("design = \"table1\"\nreps = 7\n").unwrap();
        assert_eq!(spec.reps, 7);
        assert_eq!(spec.seed, rng::DEFAULT_SEED);
        assert_eq!(spec.design, Design::Table1(Table1Params::default()));
        let spec: ScenarioSpec =
            serde_json::from_str(r#"{"design":"AR2Consistency","reps":3,"seed":5,"ns":[100,200]}"#)
                .unwrap();
        match spec.design {
            Design::Ar2Consistency(p) => assert_eq!(p.ns, vec![100, 200]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_ar1_compare_is_reproducible() {
        let a = run_ar1_compare(Ar1CompareParams::default(), 10, 3).unwrap();
        let b = run_ar1_compare(Ar1CompareParams::default(), 10, 3).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.summary, b.summary);
        // ar1seg, diff and six window lengths
        assert_eq!(a.summary.len(), 8);
    }

    #[test]
    fn consistency_cells_share_parameters() {
        let params = ConsistencyParams {
            ns: vec![200, 400],
            ..Default::default()
        };
        let res = run_ar2_consistency(params, 4, 9).unwrap();
        for rep in 0..4 {
            let truths: Vec<f64> = res
                .records
                .iter()
                .filter(|r| r.rep == rep && r.target == "phi1")
                .map(|r| r.truth)
                .collect();
            assert_eq!(truths.len(), 2);
            assert_eq!(truths[0], truths[1]);
        }
    }

    #[test]
    fn generated_parameters_stay_in_support() {
        let mut rng = rng::rng_from_seed(12);
        for _ in 0..2000 {
            let c = draw_ar2_triangle(&mut rng);
            assert!(c[0] + c[1] < 1.0 && c[1] - c[0] < 1.0 && c[1].abs() < 1.0);
            let roots = draw_ar4_roots(&mut rng, 0.9);
            assert!(roots.iter().all(|r| r.norm() < 0.9));
            let coeffs = coeffs_from_inverse_roots(&roots).unwrap();
            assert!(model::check_causal(&coeffs).unwrap());
        }
    }
}
