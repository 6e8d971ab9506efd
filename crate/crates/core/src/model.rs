//! Mean-shift contaminated autoregressive processes: domain types, causality,
//! simulation, mean-shift injection, differencing and exact moments.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

/// Slack on the unit circle used by the causality test.
pub const CAUSALITY_TOLERANCE: f64 = 1e-10;

/// A causal AR(p) error process `ε_t = φ₁ε_{t−1} + … + φ_pε_{t−p} + Z_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ARModel {
    coeffs: Vec<f64>,
    noise_var: f64,
}

impl ARModel {
    pub fn new(coeffs: Vec<f64>, noise_var: f64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::invalid_model(format!(
                "innovation variance must be positive and finite, got {noise_var}"
            )));
        }
        let diag = causality(&coeffs)?;
        if !diag.causal {
            return Err(Error::invalid_model(format!(
                "coefficients {:?} are not causal: largest inverse root modulus {:.6}{}",
                coeffs,
                diag.max_inverse_root_modulus,
                if (diag.max_inverse_root_modulus - 1.0).abs() < 1e-8 {
                    " (unit root)"
                } else {
                    ""
                }
            )));
        }
        Ok(Self { coeffs, noise_var })
    }

    /// AR(1) shorthand.
    pub fn ar1(phi: f64, noise_var: f64) -> Result<Self> {
        Self::new(vec![phi], noise_var)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Stationary variance `γ(0)` of the process.
    pub fn variance(&self) -> f64 {
        // causal by construction, so the moment system is solvable
        theoretical_acvf(self, 0)
            .map(|m| m.acvf[0])
            .unwrap_or(f64::NAN)
    }
}

/// Diagnostic output of the causality test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Causality {
    pub causal: bool,
    /// Largest modulus of `1/root` over the characteristic roots.
    pub max_inverse_root_modulus: f64,
}

/// Causality diagnostics from companion-matrix eigenvalues.
pub fn causality(coeffs: &[f64]) -> Result<Causality> {
    if coeffs.is_empty() {
        return Err(Error::invalid_input("coefficient vector is empty"));
    }
    if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
        return Err(Error::invalid_input(format!(
            "non-finite coefficient {bad}"
        )));
    }
    let max = linalg::inverse_root_moduli(coeffs)
        .first()
        .copied()
        .unwrap_or(0.0);
    Ok(Causality {
        causal: max < 1.0 - CAUSALITY_TOLERANCE,
        max_inverse_root_modulus: max,
    })
}

/// True iff every root of `1 − φ₁z − … − φ_p z^p` lies outside the unit circle.
pub fn check_causal(coeffs: &[f64]) -> Result<bool> {
    causality(coeffs).map(|c| c.causal)
}

/// Ordered changepoint times `τ₁ < … < τ_m` (1-based) and segment means
/// `μ₀, …, μ_m`. Segment `i` covers times `τᵢ+1 ..= τᵢ₊₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointConfig {
    times: Vec<usize>,
    means: Vec<f64>,
}

impl ChangepointConfig {
    pub fn new(times: Vec<usize>, means: Vec<f64>) -> Result<Self> {
        if means.len() != times.len() + 1 {
            return Err(Error::invalid_config(format!(
                "{} changepoints need {} means, got {}",
                times.len(),
                times.len() + 1,
                means.len()
            )));
        }
        if let Some(&first) = times.first() {
            if first < 2 {
                return Err(Error::invalid_config(format!(
                    "first changepoint time must be at least 2, got {first}"
                )));
            }
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid_config(
                "changepoint times must be strictly increasing",
            ));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid_config("segment means must be finite"));
        }
        Ok(Self { times, means })
    }

    /// No changepoints, constant mean.
    pub fn constant(mean: f64) -> Self {
        Self {
            times: Vec::new(),
            means: vec![mean],
        }
    }

    /// `m` changepoints splitting `n` points into `m + 1` equal-length segments.
    pub fn equally_spaced(n: usize, means: Vec<f64>) -> Result<Self> {
        let m = means.len().saturating_sub(1);
        let times = (1..=m).map(|k| k * n / (m + 1)).collect();
        Self::new(times, means)
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn num_changepoints(&self) -> usize {
        self.times.len()
    }

    /// Mean jumps `μ_k − μ_{k−1}`, one per changepoint.
    pub fn jumps(&self) -> Vec<f64> {
        self.means.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn validate_for(&self, n: usize) -> Result<()> {
        match self.times.last() {
            Some(&last) if last > n => Err(Error::invalid_config(format!(
                "changepoint time {last} exceeds series length {n}"
            ))),
            _ => Ok(()),
        }
    }

    /// Half-open 0-based index ranges of the segments of a length-`n` series.
    pub fn segments(&self, n: usize) -> Vec<std::ops::Range<usize>> {
        let mut bounds = Vec::with_capacity(self.times.len() + 2);
        bounds.push(0);
        bounds.extend(self.times.iter().map(|&t| t.min(n)));
        bounds.push(n);
        bounds.windows(2).map(|w| w[0]..w[1]).collect()
    }

    /// Mean level at every time point of a length-`n` series.
    pub fn mean_path(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (range, &mu) in self.segments(n).into_iter().zip(&self.means) {
            out[range].iter_mut().for_each(|v| *v = mu);
        }
        out
    }
}

/// `m` distinct changepoint times drawn uniformly from `{2, …, n}`, sorted.
pub fn random_changepoint_times<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n < 2 || m > n - 1 {
        return Err(Error::invalid_config(format!(
            "cannot place {m} distinct changepoints in {{2, …, {n}}}"
        )));
    }
    let mut times: Vec<usize> = rand::seq::index::sample(rng, n - 1, m)
        .into_iter()
        .map(|i| i + 2)
        .collect();
    times.sort_unstable();
    Ok(times)
}

/// Means `0, Δ, 0, Δ, …` for `m` shifts of alternating sign, the first upward.
pub fn alternating_means(m: usize, size: f64) -> Vec<f64> {
    (0..=m)
        .map(|k| if k % 2 == 1 { size } else { 0.0 })
        .collect()
}

/// An observed series `X_1, …, X_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    #[serde(default = "default_origin")]
    origin: i64,
}

fn default_origin() -> i64 {
    1
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_origin(values, 1)
    }

    pub fn with_origin(values: Vec<f64>, origin: i64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid_input(format!(
                "a series needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid_input(format!(
                "non-finite value at index {}",
                pos + 1
            )));
        }
        Ok(Self { values, origin })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time label of the first observation.
    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            values,
            origin: self.origin,
        }
    }
}

/// Lag-1 differences `d_t = X_t − X_{t−1}`, `t = 2, …, N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffSeries {
    values: Vec<f64>,
}

impl DiffSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Wrap raw differences, e.g. for oracle studies.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_input("difference series is empty"));
        }
        Ok(Self { values })
    }
}

pub fn difference(series: &Series) -> DiffSeries {
    DiffSeries {
        values: series.values.windows(2).map(|w| w[1] - w[0]).collect(),
    }
}

/// Add the piecewise-constant mean of `config` to `series`.
pub fn apply_mean_shifts(series: &Series, config: &ChangepointConfig) -> Result<Series> {
    config.validate_for(series.len())?;
    let path = config.mean_path(series.len());
    let values = series
        .values
        .iter()
        .zip(path)
        .map(|(x, mu)| x + mu)
        .collect();
    Ok(Series {
        values,
        origin: series.origin,
    })
}

/// Burn-in used when the caller does not choose one.
pub fn default_burnin(order: usize) -> usize {
    10 * order + 500
}

/// Unit-variance Student-t innovations for heavy-tailed studies.
#[derive(Debug, Clone, Copy)]
pub struct StandardizedStudentT {
    dist: StudentT<f64>,
    scale: f64,
}

impl StandardizedStudentT {
    pub fn new(dof: f64) -> Result<Self> {
        if !(dof > 4.0) {
            return Err(Error::invalid_input(format!(
                "degrees of freedom must exceed 4 for a finite fourth moment, got {dof}"
            )));
        }
        let dist = StudentT::new(dof).map_err(|e| Error::invalid_input(e.to_string()))?;
        Ok(Self {
            dist,
            scale: ((dof - 2.0) / dof).sqrt(),
        })
    }
}

impl Distribution<f64> for StandardizedStudentT {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng) * self.scale
    }
}

/// Simulate `n` values of the stationary process with Gaussian innovations.
pub fn simulate_ar(model: &ARModel, n: usize, seed: u64, burnin: usize) -> Result<Series> {
    let mut rng = rng::rng_from_seed(seed);
    simulate_ar_with(model, n, burnin, &mut rng, &StandardNormal)
}

/// Simulate with any unit-variance innovation law; the draws are scaled by `σ`.
pub fn simulate_ar_with<R, D>(
    model: &ARModel,
    n: usize,
    burnin: usize,
    rng: &mut R,
    innovations: &D,
) -> Result<Series>
where
    R: Rng + ?Sized,
    D: Distribution<f64> + ?Sized,
{
    if n < 2 {
        return Err(Error::invalid_input(format!(
            "simulation length must be at least 2, got {n}"
        )));
    }
    let p = model.order();
    let sd = model.noise_var.sqrt();
    let total = n + burnin;
    let mut buf = vec![0.0; total + p];
    for t in p..total + p {
        let ar: f64 = model
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, phi)| phi * buf[t - 1 - j])
            .sum();
        buf[t] = ar + sd * innovations.sample(rng);
    }
    Series::new(buf.split_off(p + burnin))
}

/// Exact autocovariances and autocorrelations of a causal AR(p) up to a lag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoreticalMoments {
    pub acvf: Vec<f64>,
    pub acf: Vec<f64>,
}

impl TheoreticalMoments {
    pub fn maxlag(&self) -> usize {
        self.acvf.len() - 1
    }

    fn gamma(&self, h: isize) -> f64 {
        self.acvf[h.unsigned_abs()]
    }
}

/// Solve the `p + 1` moment equations for `γ(0..=p)`, then extend by the
/// AR recursion `γ(h) = Σ φ_j γ(h − j)`.
pub fn theoretical_acvf(model: &ARModel, maxlag: usize) -> Result<TheoreticalMoments> {
    let p = model.order();
    let phi = model.coeffs();
    let mut a = DMatrix::<f64>::zeros(p + 1, p + 1);
    for h in 0..=p {
        a[(h, h)] += 1.0;
        for (j, &c) in phi.iter().enumerate() {
            a[(h, h.abs_diff(j + 1))] -= c;
        }
    }
    let mut b = DVector::<f64>::zeros(p + 1);
    b[0] = model.noise_var();
    let base = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::invalid_model("moment equations are singular"))?;
    let mut acvf: Vec<f64> = base.iter().copied().collect();
    while acvf.len() <= maxlag {
        let h = acvf.len();
        let next = phi
            .iter()
            .enumerate()
            .map(|(j, c)| c * acvf[h - 1 - j])
            .sum();
        acvf.push(next);
    }
    acvf.truncate(maxlag + 1);
    let acf = acvf.iter().map(|g| g / acvf[0]).collect();
    Ok(TheoreticalMoments { acvf, acf })
}

/// `γ_d(h) = 2γ(h) − γ(h+1) − γ(h−1)` for the lag-1 differences.
pub fn theoretical_diff_acvf(moments: &TheoreticalMoments, h: usize) -> Result<f64> {
    if h + 1 > moments.maxlag() {
        return Err(Error::invalid_input(format!(
            "lag {h} needs moments up to lag {}, have {}",
            h + 1,
            moments.maxlag()
        )));
    }
    let h = h as isize;
    Ok(2.0 * moments.gamma(h) - moments.gamma(h + 1) - moments.gamma(h - 1))
}

/// Exact difference autocovariances `γ_d(0..=maxlag)` of a model.
pub fn diff_acvf(model: &ARModel, maxlag: usize) -> Result<Vec<f64>> {
    let moments = theoretical_acvf(model, maxlag + 1)?;
    (0..=maxlag)
        .map(|h| theoretical_diff_acvf(&moments, h))
        .collect()
}

/// Exact difference autocorrelations `ρ_d(0..=maxlag)` of a model.
pub fn diff_acf(model: &ARModel, maxlag: usize) -> Result<Vec<f64>> {
    let acvf = diff_acvf(model, maxlag)?;
    Ok(acvf.iter().map(|g| g / acvf[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(v: &[f64]) -> Series {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn causality_examples() {
        assert!(check_causal(&[0.5, 0.2]).unwrap());
        assert!(!check_causal(&[1.0]).unwrap());
        assert!(!check_causal(&[0.5, 0.6]).unwrap());
        assert!(check_causal(&[f64::NAN]).is_err());
        assert!(check_causal(&[]).is_err());
    }

    #[test]
    fn explicit_roots_of_non_causal_ar2() {
        // 1 - 0.5z - 0.6z² = 0  →  z = (-0.5 ± sqrt(0.25 + 2.4)) / 1.2
        let disc = (0.25f64 + 2.4).sqrt();
        let small_root = ((-0.5 + disc) / 1.2f64).abs();
        assert!(small_root < 1.0);
        let moduli = linalg::inverse_root_moduli(&[0.5, 0.6]);
        assert_abs_diff_eq!(moduli[0], 1.0 / small_root, epsilon = 1e-10);
    }

    #[test]
    fn unit_root_is_named() {
        let err = ARModel::ar1(1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("unit root"), "{err}");
    }

    #[test]
    fn rejects_bad_variance() {
        assert!(ARModel::ar1(0.2, 0.0).is_err());
        assert!(ARModel::ar1(0.2, f64::INFINITY).is_err());
    }

    #[test]
    fn mean_shift_placement() {
        let cfg = ChangepointConfig::new(vec![4], vec![0.0, 5.0]).unwrap();
        let out = apply_mean_shifts(&series(&[0.0; 6]), &cfg).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0, 0.0, 0.0, 5.0, 5.0]);

        let flat = ChangepointConfig::constant(2.0);
        let out = apply_mean_shifts(&series(&[0.0; 4]), &flat).unwrap();
        assert_eq!(out.values(), &[2.0; 4]);
    }

    #[test]
    fn negated_means_undo_shifts() {
        let s = series(&[0.3, -1.2, 4.0, 2.2, 0.0, 1.5]);
        let cfg = ChangepointConfig::new(vec![2, 5], vec![1.0, -2.0, 0.5]).unwrap();
        let neg = ChangepointConfig::new(vec![2, 5], vec![-1.0, 2.0, -0.5]).unwrap();
        let back = apply_mean_shifts(&apply_mean_shifts(&s, &cfg).unwrap(), &neg).unwrap();
        for (a, b) in back.values().iter().zip(s.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ChangepointConfig::new(vec![1], vec![0.0, 1.0]).is_err());
        assert!(ChangepointConfig::new(vec![3, 3], vec![0.0, 1.0, 2.0]).is_err());
        assert!(ChangepointConfig::new(vec![3], vec![0.0]).is_err());
        let cfg = ChangepointConfig::new(vec![7], vec![0.0, 1.0]).unwrap();
        assert!(apply_mean_shifts(&series(&[0.0; 6]), &cfg).is_err());
        // τ_m = N is allowed; the last segment is empty
        let cfg = ChangepointConfig::new(vec![6], vec![0.0, 1.0]).unwrap();
        assert_eq!(
            apply_mean_shifts(&series(&[0.0; 6]), &cfg)
                .unwrap()
                .values(),
            &[0.0; 6]
        );
    }

    #[test]
    fn equally_spaced_boundaries() {
        let cfg = ChangepointConfig::equally_spaced(1000, vec![0.0; 10]).unwrap();
        assert_eq!(cfg.times(), &[100, 200, 300, 400, 500, 600, 700, 800, 900]);
    }

    #[test]
    fn random_times_are_distinct_and_in_range() {
        let mut rng = rng::rng_from_seed(1);
        for _ in 0..50 {
            let t = random_changepoint_times(20, 7, &mut rng).unwrap();
            assert_eq!(t.len(), 7);
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            assert!(t.iter().all(|&x| (2..=20).contains(&x)));
        }
        assert_eq!(
            random_changepoint_times(5, 4, &mut rng).unwrap(),
            vec![2, 3, 4, 5]
        );
        assert!(random_changepoint_times(5, 5, &mut rng).is_err());
        assert_eq!(alternating_means(3, 2.0), vec![0.0, 2.0, 0.0, 2.0]);
    }

    #[test]
    fn differencing() {
        assert_eq!(difference(&series(&[1.0, 2.0, 4.0])).values(), &[1.0, 2.0]);
        let step: Vec<f64> = (0..10).map(|t| if t < 6 { 1.0 } else { 3.5 }).collect();
        let d = difference(&series(&step));
        assert_eq!(d.len(), 9);
        assert_eq!(d.values().iter().filter(|v| **v != 0.0).count(), 1);
        assert_eq!(d.values()[5], 2.5);
        let trend: Vec<f64> = (1..=20).map(|t| 3.0 + 0.25 * t as f64).collect();
        assert!(difference(&series(&trend))
            .values()
            .iter()
            .all(|v| (v - 0.25).abs() < 1e-12));
    }

    #[test]
    fn series_needs_two_finite_values() {
        assert!(Series::new(vec![1.0]).is_err());
        assert!(Series::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn ar1_moments_closed_form() {
        let m = theoretical_acvf(&ARModel::ar1(0.5, 1.0).unwrap(), 2).unwrap();
        assert_abs_diff_eq!(m.acvf[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.acvf[1], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.acvf[2], 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn ar2_autocorrelations() {
        let m = theoretical_acvf(&ARModel::new(vec![0.5, 0.2], 1.0).unwrap(), 3).unwrap();
        assert_abs_diff_eq!(m.acf[1], 0.625, epsilon = 1e-14);
        assert_abs_diff_eq!(m.acf[2], 0.5125, epsilon = 1e-14);
        assert_abs_diff_eq!(m.acf[3], 0.38125, epsilon = 1e-14);
    }

    #[test]
    fn white_noise_moments() {
        let m = theoretical_acvf(&ARModel::new(vec![0.0, 0.0], 2.5).unwrap(), 5).unwrap();
        assert_abs_diff_eq!(m.acvf[0], 2.5, epsilon = 1e-15);
        assert!(m.acvf[1..].iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn ar1_difference_moments() {
        let m = theoretical_acvf(&ARModel::ar1(0.5, 1.0).unwrap(), 3).unwrap();
        assert_abs_diff_eq!(
            theoretical_diff_acvf(&m, 0).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            theoretical_diff_acvf(&m, 1).unwrap(),
            -1.0 / 3.0,
            epsilon = 1e-14
        );
        assert!(theoretical_diff_acvf(&m, 3).is_err());
        for phi in [-0.9, -0.3, 0.0, 0.45, 0.8] {
            let rho = diff_acf(&ARModel::ar1(phi, 1.0).unwrap(), 1).unwrap();
            assert_abs_diff_eq!(rho[1], (phi - 1.0) / 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let model = ARModel::ar1(0.6, 1.0).unwrap();
        let a = simulate_ar(&model, 50, 9, default_burnin(1)).unwrap();
        let b = simulate_ar(&model, 50, 9, default_burnin(1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_ar(&model, 50, 10, default_burnin(1)).unwrap());
        assert!(simulate_ar(&model, 1, 9, 0).is_err());
    }

    #[test]
    fn white_noise_variance() {
        let s = simulate_ar(&ARModel::ar1(0.0, 1.0).unwrap(), 100_000, 1, 510).unwrap();
        let n = s.len() as f64;
        let mean = s.values().iter().sum::<f64>() / n;
        let var = s.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.03, "{var}");
    }

    #[test]
    fn student_t_innovations_have_unit_variance() {
        let dist = StandardizedStudentT::new(8.0).unwrap();
        let mut rng = rng::rng_from_seed(3);
        let model = ARModel::ar1(0.0, 1.0).unwrap();
        let s = simulate_ar_with(&model, 200_000, 0, &mut rng, &dist).unwrap();
        let var = s.values().iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
        assert!((var - 1.0).abs() < 0.03, "{var}");
        assert!(StandardizedStudentT::new(3.0).is_err());
    }
}
