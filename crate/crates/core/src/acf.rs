//! Sample autocovariances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiffSeries;

/// Sample autocovariances and autocorrelations up to a maximum lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfEstimate {
    pub acvf: Vec<f64>,
    pub acf: Vec<f64>,
    /// Number of observations the estimate was computed from.
    pub n: usize,
}

impl AcfEstimate {
    pub fn maxlag(&self) -> usize {
        self.acvf.len() - 1
    }

    /// Wrap exact moments so that they can be fed to the estimators.
    pub fn from_acvf(acvf: Vec<f64>, n: usize) -> Result<Self> {
        if acvf.is_empty() || !(acvf[0] > 0.0) {
            return Err(Error::degenerate("lag-0 autocovariance must be positive"));
        }
        let acf = acvf.iter().map(|g| g / acvf[0]).collect();
        Ok(Self { acvf, acf, n })
    }
}

/// Biased, mean-corrected autocovariances `n⁻¹ Σ_{t=1}^{n−h} (x_t − x̄)(x_{t+h} − x̄)`.
///
/// Fails with a degenerate-series error when the data are constant.
pub fn sample_acvf(values: &[f64], maxlag: usize) -> Result<AcfEstimate> {
    let n = values.len();
    if n < maxlag + 2 {
        return Err(Error::invalid_input(format!(
            "autocovariances to lag {maxlag} need at least {} observations, got {n}",
            maxlag + 2
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let acvf: Vec<f64> = (0..=maxlag)
        .map(|h| {
            centered[..n - h]
                .iter()
                .zip(&centered[h..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let scale = values
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    if !(acvf[0] > (scale * 1e-14).powi(2)) {
        return Err(Error::degenerate("series has zero sample variance"));
    }
    let acf = acvf.iter().map(|g| g / acvf[0]).collect();
    Ok(AcfEstimate { acvf, acf, n })
}

/// Sample autocovariances and autocorrelations of the differenced series.
pub fn sample_diff_acf(diff: &DiffSeries, maxlag: usize) -> Result<AcfEstimate> {
    sample_acvf(diff.values(), maxlag)
}
