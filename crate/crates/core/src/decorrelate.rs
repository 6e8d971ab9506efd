//! One-step-ahead prediction residuals of a fitted autoregression.
//!
//! Residuals of a correctly specified AR(p) are uncorrelated, so detectors that
//! assume independent errors can be run on them instead of the raw series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Series;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub values: Vec<f64>,
    /// Number of leading observations without a full predictor (equals p).
    pub offset: usize,
}

impl ResidualSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_series(&self) -> Result<Series> {
        Series::new(self.values.clone())
    }
}

/// `e_t = X_t − Σ_j φ_j X_{t−j}` for `t = p+1, …, N`.
pub fn one_step_residuals(series: &Series, coeffs: &[f64]) -> Result<ResidualSeries> {
    let p = coeffs.len();
    let x = series.values();
    if x.len() <= p {
        return Err(Error::invalid_input(format!(
            "{} observations cannot be predicted with order {p}",
            x.len()
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid_input("coefficients must be finite"));
    }
    let values = (p..x.len())
        .map(|t| {
            x[t] - coeffs
                .iter()
                .enumerate()
                .map(|(j, phi)| phi * x[t - 1 - j])
                .sum::<f64>()
        })
        .collect();
    Ok(ResidualSeries { values, offset: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_coefficients_copy_the_tail() {
        let s = Series::new(vec![1.0, -2.0, 3.5, 0.25]).unwrap();
        let r = one_step_residuals(&s, &[0.0]).unwrap();
        assert_eq!(r.values, vec![-2.0, 3.5, 0.25]);
        assert_eq!(r.offset, 1);
    }

    #[test]
    fn recovers_known_innovations() {
        let z = [0.3, -1.1, 0.8, 2.0, -0.4, 0.05];
        let mut x = vec![z[0]];
        for &zt in &z[1..] {
            x.push(0.5 * x.last().unwrap() + zt);
        }
        let r = one_step_residuals(&Series::new(x).unwrap(), &[0.5]).unwrap();
        for (e, zt) in r.values.iter().zip(&z[1..]) {
            assert_abs_diff_eq!(e, zt, epsilon = 1e-14);
        }
    }

    #[test]
    fn step_response() {
        // level 0 then Δ from t = 6; with no noise the residual jumps by Δ
        // at the step and settles at Δ(1 − φ)
        let (phi, delta) = (0.6, 2.0);
        let x: Vec<f64> = (0..12).map(|t| if t < 5 { 0.0 } else { delta }).collect();
        let r = one_step_residuals(&Series::new(x).unwrap(), &[phi]).unwrap();
        assert!(r.values[..3].iter().all(|e| *e == 0.0));
        assert_abs_diff_eq!(r.values[4], delta, epsilon = 1e-15);
        for e in &r.values[5..] {
            assert_abs_diff_eq!(*e, delta * (1.0 - phi), epsilon = 1e-15);
        }
    }

    #[test]
    fn too_short_for_order() {
        let s = Series::new(vec![1.0, 2.0]).unwrap();
        assert!(one_step_residuals(&s, &[0.1, 0.2]).is_err());
        assert!(one_step_residuals(&s, &[f64::NAN]).is_err());
    }
}
