//! Autoregressive estimators for series with mean shifts.
//!
//! [`diff_yule_walker`] fits the AR(p) coefficients from the sample
//! autocorrelations of the first differences. A piecewise-constant mean is
//! annihilated by differencing everywhere except at the shift times, so the
//! estimator needs no knowledge of the changepoints. The other estimators
//! here are the usual points of comparison.

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acf::{sample_acvf, sample_diff_acf, AcfEstimate};
use crate::error::{Error, Result};
use crate::linalg::{self, Solved};
use crate::model::{self, difference, ARModel, ChangepointConfig, Series};
use crate::rng;
use crate::stats;

/// Share of rolling windows allowed to fail before the estimate is rejected.
pub const MAX_SKIPPED_WINDOW_SHARE: f64 = 0.5;

/// Fewest bootstrap replications accepted by [`bootstrap_se`].
pub const MIN_BOOTSTRAP_REPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Yule-Walker on the autocorrelations of the first differences.
    Diff,
    /// Median-of-differences AR(1) estimator.
    Ar1seg,
    /// Median of classical Yule-Walker fits over rolling windows.
    Rolling,
    /// Yule-Walker on the mean-corrected series, ignoring changepoints.
    Classical,
    /// Yule-Walker after subtracting known segment means.
    Segmented,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Diff => "diff",
            Self::Ar1seg => "ar1seg",
            Self::Rolling => "rolling",
            Self::Classical => "classical",
            Self::Segmented => "segmented",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Diff => "Difference Yule-Walker estimator",
            Self::Ar1seg => "Robust median estimator (AR1seg)",
            Self::Rolling => "Rolling-window Yule-Walker (median)",
            Self::Classical => "Yule-Walker ignoring changepoints",
            Self::Segmented => "Yule-Walker given changepoint times",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diff" | "diffyw" => Ok(Self::Diff),
            "ar1seg" => Ok(Self::Ar1seg),
            "rolling" | "window" => Ok(Self::Rolling),
            "classical" | "yw" => Ok(Self::Classical),
            "segmented" => Ok(Self::Segmented),
            other => Err(Error::invalid_input(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    pub causal: bool,
    pub max_inverse_root_modulus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_var_valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows_skipped: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_se: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Output of every estimator.
///
/// Non-causal coefficients and non-positive variance estimates are reported
/// as computed and flagged in the diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub method: Method,
    pub order: usize,
    pub coeffs: Vec<f64>,
    pub noise_var: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl EstimationReport {
    fn new(method: Method, coeffs: Vec<f64>, noise_var: Option<f64>) -> Result<Self> {
        let causality = model::causality(&coeffs).map_err(|_| Error::NumericalDegeneracy {
            condition: f64::INFINITY,
            context: format!("{method} produced non-finite coefficients"),
        })?;
        let mut diagnostics = Diagnostics {
            causal: causality.causal,
            max_inverse_root_modulus: causality.max_inverse_root_modulus,
            ..Diagnostics::default()
        };
        if !causality.causal {
            diagnostics.warnings.push(format!(
                "fitted model is not causal (max inverse root modulus {:.4})",
                causality.max_inverse_root_modulus
            ));
        }
        if let Some(v) = noise_var {
            let valid = v > 0.0 && v.is_finite();
            diagnostics.noise_var_valid = Some(valid);
            if !valid {
                diagnostics
                    .warnings
                    .push(format!("innovation variance estimate {v} is not positive"));
            }
        }
        Ok(Self {
            method,
            order: coeffs.len(),
            coeffs,
            noise_var,
            diagnostics,
        })
    }

    /// Fitted model, when the estimate is a valid causal AR process.
    pub fn to_model(&self) -> Result<ARModel> {
        let var = self.noise_var.ok_or_else(|| {
            Error::invalid_model(format!("{} has no variance estimate", self.method))
        })?;
        ARModel::new(self.coeffs.clone(), var)
    }
}

fn check_order(p: usize) -> Result<()> {
    if p < 1 {
        return Err(Error::InvalidOrder("order must be at least 1".into()));
    }
    Ok(())
}

/// The linear system `M φ = ρ_d` linking difference autocorrelations to φ.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffYwSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl DiffYwSystem {
    pub fn solve(&self) -> Result<Solved> {
        linalg::solve(&self.matrix, &self.rhs, "difference Yule-Walker system")
    }
}

/// Build `M` and `ρ_d` from difference autocorrelations `rho = ρ_d(0..=p)`.
///
/// Row 1 is `(½, −½, −(½+ρ_d(1)), …, −(½+Σ_{j≤p−2} ρ_d(j)))` with right-hand
/// side `ρ_d(1) + ½`. Rows `h = 2..p` are `(ρ_d(h−1), …, ρ_d(|h−p|))` with
/// right-hand side `ρ_d(h)`.
pub fn build_diff_yw_system(rho: &[f64], p: usize) -> Result<DiffYwSystem> {
    check_order(p)?;
    if rho.len() < p + 1 {
        return Err(Error::invalid_input(format!(
            "order {p} needs difference autocorrelations up to lag {p}, got {} values",
            rho.len()
        )));
    }
    let mut matrix = DMatrix::<f64>::zeros(p, p);
    matrix[(0, 0)] = 0.5;
    let mut partial = 0.5;
    for j in 1..p {
        // column j (0-based) carries -(½ + ρ_d(1) + … + ρ_d(j-1))
        if j >= 2 {
            partial += rho[j - 1];
        }
        matrix[(0, j)] = -partial;
    }
    for h in 1..p {
        for j in 0..p {
            matrix[(h, j)] = rho[h.abs_diff(j)];
        }
    }
    let mut rhs = DVector::<f64>::zeros(p);
    rhs[0] = rho[1] + 0.5;
    for h in 1..p {
        rhs[h] = rho[h + 1];
    }
    Ok(DiffYwSystem { matrix, rhs })
}

/// `σ² = Σ_j φ_j γ_d(j−1) − γ_d(1)`, from multiplying the differenced AR
/// recursion by `d_{t−1}` and taking expectations.
pub fn innovation_variance(coeffs: &[f64], diff_acvf: &[f64]) -> f64 {
    let ar: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, phi)| phi * diff_acvf[j])
        .sum();
    ar - diff_acvf[1]
}

/// Difference Yule-Walker fit from (sample or exact) difference moments.
pub fn diff_yule_walker_from_acf(acf: &AcfEstimate, p: usize) -> Result<EstimationReport> {
    check_order(p)?;
    if acf.maxlag() < p {
        return Err(Error::invalid_input(format!(
            "order {p} needs moments up to lag {p}, have {}",
            acf.maxlag()
        )));
    }
    let solved = build_diff_yw_system(&acf.acf, p)?.solve()?;
    let noise_var = innovation_variance(&solved.x, &acf.acvf);
    let mut report = EstimationReport::new(Method::Diff, solved.x, Some(noise_var))?;
    report.diagnostics.condition_number = Some(solved.condition);
    Ok(report)
}

/// Fit AR(p) by Yule-Walker equations on the lag-1 differenced series.
pub fn diff_yule_walker(series: &Series, p: usize) -> Result<EstimationReport> {
    check_order(p)?;
    if series.len() < p + 3 {
        return Err(Error::invalid_input(format!(
            "order {p} needs at least {} observations, got {}",
            p + 3,
            series.len()
        )));
    }
    let acf = sample_diff_acf(&difference(series), p)?;
    diff_yule_walker_from_acf(&acf, p)
}

/// `φ̂ = (med|X_{t+2} − X_t|)² / (med|X_{t+1} − X_t|)² − 1`.
pub fn ar1seg_estimate(series: &Series) -> Result<EstimationReport> {
    let x = series.values();
    if x.len() < 3 {
        return Err(Error::invalid_input(format!(
            "AR1seg needs at least 3 observations, got {}",
            x.len()
        )));
    }
    let lag1: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let lag2: Vec<f64> = x.windows(3).map(|w| (w[2] - w[0]).abs()).collect();
    let denom = stats::median(&lag1);
    if denom == 0.0 {
        return Err(Error::degenerate(
            "median absolute lag-1 difference is zero",
        ));
    }
    let phi = (stats::median(&lag2) / denom).powi(2) - 1.0;
    EstimationReport::new(Method::Ar1seg, vec![phi], None)
}

fn yule_walker_values(values: &[f64], p: usize) -> Result<(Vec<f64>, f64)> {
    let acf = sample_acvf(values, p)?;
    let lev = linalg::levinson_durbin(&acf.acvf, p)?;
    let explained: f64 = lev
        .coeffs
        .iter()
        .zip(&acf.acf[1..])
        .map(|(a, r)| a * r)
        .sum();
    Ok((lev.coeffs, acf.acvf[0] * (1.0 - explained)))
}

/// Classical Yule-Walker on the mean-corrected series.
pub fn classical_yule_walker(series: &Series, p: usize) -> Result<EstimationReport> {
    check_order(p)?;
    if series.len() < p + 2 {
        return Err(Error::invalid_input(format!(
            "order {p} needs at least {} observations, got {}",
            p + 2,
            series.len()
        )));
    }
    let (coeffs, var) = yule_walker_values(series.values(), p)?;
    EstimationReport::new(Method::Classical, coeffs, Some(var))
}

/// Coordinate-wise median of classical Yule-Walker fits over all
/// `N − w + 1` windows of length `w`.
pub fn rolling_window_yw(series: &Series, p: usize, window: usize) -> Result<EstimationReport> {
    check_order(p)?;
    let n = series.len();
    if window < p + 2 || window > n {
        return Err(Error::invalid_input(format!(
            "window length {window} must lie in [{}, {n}]",
            p + 2
        )));
    }
    let fits: Vec<Option<(Vec<f64>, f64)>> = series
        .values()
        .windows(window)
        .map(|w| yule_walker_values(w, p).ok())
        .collect();
    let total = fits.len();
    let ok: Vec<(Vec<f64>, f64)> = fits.into_iter().flatten().collect();
    let skipped = total - ok.len();
    if ok.is_empty() || skipped as f64 > MAX_SKIPPED_WINDOW_SHARE * total as f64 {
        return Err(Error::degenerate(format!(
            "{skipped} of {total} windows could not be fitted"
        )));
    }
    let coeffs = (0..p)
        .map(|j| stats::median(&ok.iter().map(|(c, _)| c[j]).collect::<Vec<_>>()))
        .collect();
    let var = stats::median(&ok.iter().map(|(_, v)| *v).collect::<Vec<_>>());
    let mut report = EstimationReport::new(Method::Rolling, coeffs, Some(var))?;
    report.diagnostics.window = Some(window);
    report.diagnostics.windows_used = Some(ok.len());
    report.diagnostics.windows_skipped = Some(skipped);
    Ok(report)
}

/// Classical Yule-Walker after subtracting each segment's sample mean.
pub fn segmented_yule_walker(
    series: &Series,
    p: usize,
    config: &ChangepointConfig,
) -> Result<EstimationReport> {
    check_order(p)?;
    let n = series.len();
    config.validate_for(n)?;
    if series.len() < p + 2 {
        return Err(Error::invalid_input(format!(
            "order {p} needs at least {} observations, got {n}",
            p + 2
        )));
    }
    let mut centered = series.values().to_vec();
    for range in config.segments(n) {
        if range.is_empty() {
            return Err(Error::invalid_config(format!(
                "empty segment ending at time {}",
                range.end
            )));
        }
        let seg = &mut centered[range];
        let mean = stats::mean(seg);
        seg.iter_mut().for_each(|v| *v -= mean);
    }
    let (coeffs, var) = yule_walker_values(&centered, p)?;
    EstimationReport::new(Method::Segmented, coeffs, Some(var))
}

/// Parametric bootstrap standard errors of the difference estimator.
///
/// Replication `r` simulates a shift-free series of the input length from the
/// fitted model on its own random stream and refits it. Replications whose
/// refit fails are dropped.
pub fn bootstrap_se(series: &Series, p: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if reps < MIN_BOOTSTRAP_REPS {
        return Err(Error::CannotBootstrap(format!(
            "at least {MIN_BOOTSTRAP_REPS} replications are required, got {reps}"
        )));
    }
    let fit = diff_yule_walker(series, p)?;
    let model = fit
        .to_model()
        .map_err(|e| Error::CannotBootstrap(format!("fitted model unusable: {e}")))?;
    bootstrap_model_se(&model, series.len(), reps, seed)
}

pub(crate) fn bootstrap_model_se(
    model: &ARModel,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let p = model.order();
    let burnin = model::default_burnin(p);
    let domain = rng::domain_tag("bootstrap");
    let estimates: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, domain, r);
            let sim = model::simulate_ar_with(model, n, burnin, &mut rng, &StandardNormal).ok()?;
            diff_yule_walker(&sim, p).ok().map(|rep| rep.coeffs)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    if estimates.len() < MIN_BOOTSTRAP_REPS {
        return Err(Error::CannotBootstrap(format!(
            "only {} of {reps} bootstrap refits succeeded",
            estimates.len()
        )));
    }
    Ok((0..p)
        .map(|j| stats::std_dev(&estimates.iter().map(|c| c[j]).collect::<Vec<_>>()))
        .collect())
}

/// Attach bootstrap standard errors to a difference-estimator report.
pub fn with_bootstrap(
    mut report: EstimationReport,
    series: &Series,
    reps: usize,
    seed: u64,
) -> Result<EstimationReport> {
    let se = bootstrap_se(series, report.order, reps, seed)?;
    report.diagnostics.bootstrap_se = Some(se);
    report.diagnostics.bootstrap_reps = Some(reps);
    Ok(report)
}
