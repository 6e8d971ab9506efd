//! Empirical checks of the large-sample behaviour of the difference
//! estimator: the linear map from autocorrelations to difference
//! autocorrelations, √N-scaling of the estimation error, and the size of the
//! perturbation that mean shifts cause in the sample autocovariances.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acf::sample_diff_acf;
use crate::error::{Error, Result};
use crate::estimators::diff_yule_walker;
use crate::model::{
    self, alternating_means, apply_mean_shifts, difference, random_changepoint_times, ARModel,
    ChangepointConfig, Series,
};
use crate::rng;
use crate::stats::{self, Shape};

/// Accepted band for the max/min ratio of scaled standard deviations across N.
pub const SD_RATIO_BAND: (f64, f64) = (0.75, 1.33);
/// Largest accepted |z| of the skewness and kurtosis tests.
pub const NORMALITY_Z: f64 = 4.0;
/// Largest accepted |mean| / sd of the scaled error at any N.
pub const MAX_STANDARDIZED_BIAS: f64 = 0.5;

/// Maps `(ρ(0), …, ρ(k+1))` to `(ρ_d(1), …, ρ_d(k))` through the stencil
/// `(−1, 2, −1) / (2(1 − ρ(1)))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BMatrix {
    pub k: usize,
    pub rho1: f64,
    /// `k × (k+2)` row-major entries, scale included.
    pub entries: Vec<Vec<f64>>,
}

impl BMatrix {
    pub fn scale(&self) -> f64 {
        1.0 / (2.0 * (1.0 - self.rho1))
    }

    /// Apply to `ρ(0..=k+1)`.
    pub fn apply(&self, rho: &[f64]) -> Result<Vec<f64>> {
        if rho.len() != self.k + 2 {
            return Err(Error::invalid_input(format!(
                "B needs {} autocorrelations, got {}",
                self.k + 2,
                rho.len()
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|row| row.iter().zip(rho).map(|(b, r)| b * r).sum())
            .collect())
    }

    /// The `k × (k+1)` block acting on `ρ(1..=k+1)`; `ρ(0) = 1` has no
    /// sampling variability, so its column drops out of the limit law.
    pub fn perturbation_block(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|row| row[1..].to_vec()).collect()
    }
}

pub fn build_b(rho1: f64, k: usize) -> Result<BMatrix> {
    if k < 1 {
        return Err(Error::invalid_input("B needs dimension k >= 1"));
    }
    if !rho1.is_finite() || rho1.abs() >= 1.0 {
        return Err(Error::SingularScale(format!(
            "1/(2(1 − ρ(1))) requires |ρ(1)| < 1, got {rho1}"
        )));
    }
    let scale = 1.0 / (2.0 * (1.0 - rho1));
    let entries = (0..k)
        .map(|i| {
            let mut row = vec![0.0; k + 2];
            row[i] = -scale;
            row[i + 1] = 2.0 * scale;
            row[i + 2] = -scale;
            row
        })
        .collect();
    Ok(BMatrix { k, rho1, entries })
}

/// How mean shifts are injected into each simulated series of length `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftScheme {
    None,
    /// `⌊√N / divisor⌋` alternating shifts of fixed size at random times.
    SqrtN {
        divisor: f64,
        size: f64,
    },
    /// `⌊fraction · N⌋` alternating shifts of fixed size at random times.
    Proportional {
        fraction: f64,
        size: f64,
    },
}

impl ShiftScheme {
    pub fn count(&self, n: usize) -> usize {
        match *self {
            Self::None => 0,
            Self::SqrtN { divisor, .. } => ((n as f64).sqrt() / divisor).floor() as usize,
            Self::Proportional { fraction, .. } => (fraction * n as f64).floor() as usize,
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<ChangepointConfig> {
        let size = match *self {
            Self::None => return Ok(ChangepointConfig::constant(0.0)),
            Self::SqrtN { size, .. } | Self::Proportional { size, .. } => size,
        };
        let m = self.count(n);
        let times = random_changepoint_times(n, m, rng)?;
        ChangepointConfig::new(times, alternating_means(m, size))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltCheckReport {
    pub ns: Vec<usize>,
    pub reps: usize,
    /// Replications per N whose fit failed.
    pub failures: Vec<usize>,
    /// Standard deviation of `√N (φ̂_j − φ_j)`, indexed `[n][j]`.
    pub coeff_sd: Vec<Vec<f64>>,
    /// Mean of `√N (φ̂_j − φ_j)`, indexed `[n][j]`.
    pub coeff_mean: Vec<Vec<f64>>,
    /// Standard deviation of `√N (ρ̂_d(h) − ρ_d(h))`, indexed `[n][h − 1]`.
    pub rho_sd: Vec<Vec<f64>>,
    pub coeff_sd_ratio: Vec<f64>,
    pub rho_sd_ratio: Vec<f64>,
    /// Shape of the scaled coefficient errors at the largest (last) N.
    pub shape: Vec<Shape>,
    pub ratio_ok: bool,
    pub normality_ok: bool,
    pub bias_ok: bool,
    pub passed: bool,
}

fn ratio(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn clt_replication<R: Rng + ?Sized>(
    model: &ARModel,
    scheme: &ShiftScheme,
    n: usize,
    burnin: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = model.order();
    let clean = model::simulate_ar_with(model, n, burnin, rng, &StandardNormal)?;
    let config = scheme.generate(n, rng)?;
    let series = apply_mean_shifts(&clean, &config)?;
    let fit = diff_yule_walker(&series, p)?;
    let acf = sample_diff_acf(&difference(&series), p)?;
    Ok((fit.coeffs, acf.acf))
}

/// Simulate `reps` shifted series at every N and summarise the scaled errors
/// of the difference estimator and of the difference autocorrelations.
pub fn clt_scaling_check(
    model: &ARModel,
    scheme: &ShiftScheme,
    ns: &[usize],
    reps: usize,
    seed: u64,
) -> Result<CltCheckReport> {
    if ns.len() < 2 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid_input(
            "at least two strictly increasing series lengths are required",
        ));
    }
    if reps < 200 {
        return Err(Error::invalid_input(format!(
            "at least 200 replications are required, got {reps}"
        )));
    }
    let p = model.order();
    let truth = model.coeffs();
    let rho_true = model::diff_acf(model, p)?;
    let burnin = model::default_burnin(p);

    let mut report = CltCheckReport {
        ns: ns.to_vec(),
        reps,
        failures: Vec::new(),
        coeff_sd: Vec::new(),
        coeff_mean: Vec::new(),
        rho_sd: Vec::new(),
        coeff_sd_ratio: Vec::new(),
        rho_sd_ratio: Vec::new(),
        shape: Vec::new(),
        ratio_ok: false,
        normality_ok: false,
        bias_ok: false,
        passed: false,
    };
    let mut last_errors: Vec<Vec<f64>> = Vec::new();
    for &n in ns {
        let domain = rng::domain_tag("clt") ^ n as u64;
        let outcomes: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..reps as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng::stream(seed, domain, r);
                clt_replication(model, scheme, n, burnin, &mut rng).ok()
            })
            .collect();
        let ok: Vec<(Vec<f64>, Vec<f64>)> = outcomes.into_iter().flatten().collect();
        report.failures.push(reps - ok.len());
        if ok.len() < 2 {
            return Err(Error::degenerate(format!(
                "all replications failed at N = {n}"
            )));
        }
        let root_n = (n as f64).sqrt();
        let coeff_errors: Vec<Vec<f64>> = (0..p)
            .map(|j| ok.iter().map(|(c, _)| root_n * (c[j] - truth[j])).collect())
            .collect();
        let rho_errors: Vec<Vec<f64>> = (1..=p)
            .map(|h| {
                ok.iter()
                    .map(|(_, r)| root_n * (r[h] - rho_true[h]))
                    .collect()
            })
            .collect();
        report
            .coeff_sd
            .push(coeff_errors.iter().map(|e| stats::std_dev(e)).collect());
        report
            .coeff_mean
            .push(coeff_errors.iter().map(|e| stats::mean(e)).collect());
        report
            .rho_sd
            .push(rho_errors.iter().map(|e| stats::std_dev(e)).collect());
        last_errors = coeff_errors;
    }
    report.coeff_sd_ratio = (0..p)
        .map(|j| ratio(report.coeff_sd.iter().map(|s| s[j])))
        .collect();
    report.rho_sd_ratio = (0..p)
        .map(|h| ratio(report.rho_sd.iter().map(|s| s[h])))
        .collect();
    report.shape = last_errors.iter().map(|e| stats::shape(e)).collect();
    report.ratio_ok = report
        .coeff_sd_ratio
        .iter()
        .all(|r| (SD_RATIO_BAND.0..=SD_RATIO_BAND.1).contains(r));
    report.normality_ok = report
        .shape
        .iter()
        .all(|s| s.skewness_z.abs() < NORMALITY_Z && s.kurtosis_z.abs() < NORMALITY_Z);
    report.bias_ok = report
        .coeff_mean
        .iter()
        .zip(&report.coeff_sd)
        .all(|(m, s)| {
            m.iter()
                .zip(s)
                .all(|(m, s)| m.abs() / s < MAX_STANDARDIZED_BIAS)
        });
    report.passed = report.ratio_ok && report.normality_ok && report.bias_ok;
    Ok(report)
}

fn diff_acvf_at(values: &[f64], h: usize) -> f64 {
    let d: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let n = d.len();
    let mean = d.iter().sum::<f64>() / n as f64;
    d[..n - h]
        .iter()
        .zip(&d[h..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum::<f64>()
        / n as f64
}

/// `√N · |γ̂_d(h; shifted) − γ̂_d(h; clean)|`.
pub fn changepoint_discrepancy(clean: &Series, shifted: &Series, h: usize) -> Result<f64> {
    if clean.len() != shifted.len() {
        return Err(Error::invalid_input(format!(
            "series lengths differ: {} vs {}",
            clean.len(),
            shifted.len()
        )));
    }
    if h + 1 >= clean.len() {
        return Err(Error::invalid_input(format!(
            "lag {h} too large for {} observations",
            clean.len()
        )));
    }
    let diff = diff_acvf_at(shifted.values(), h) - diff_acvf_at(clean.values(), h);
    Ok((clean.len() as f64).sqrt() * diff.abs())
}
