//! Mean-shift changepoint detectors: penalised exact search (PELT) and wild
//! binary segmentation (WBS) with CUSUM contrasts.
//!
//! Changepoint times follow the model convention: a changepoint at `τ` means
//! the new level starts at time `τ + 1` (times are 1-based).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Series;
use crate::rng;
use crate::stats;

/// Normal consistency constant for the median absolute deviation.
const MAD_NORMAL: f64 = 0.6745;

pub const DEFAULT_WBS_INTERVALS: usize = 5000;
pub const DEFAULT_WBS_THRESHOLD: f64 = 1.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub changepoint_times: Vec<usize>,
    pub segment_means: Vec<f64>,
    /// Residual sum of squares, plus the penalty for penalised searches.
    pub objective: f64,
}

impl Segmentation {
    pub fn num_changepoints(&self) -> usize {
        self.changepoint_times.len()
    }

    fn from_times(x: &[f64], times: Vec<usize>, penalty: f64) -> Self {
        let prefix = Prefix::new(x);
        let mut bounds = vec![0];
        bounds.extend(&times);
        bounds.push(x.len());
        let mut objective = penalty * times.len() as f64;
        let segment_means = bounds
            .windows(2)
            .map(|w| {
                objective += prefix.cost(w[0], w[1]);
                (prefix.sum[w[1]] - prefix.sum[w[0]]) / (w[1] - w[0]) as f64
            })
            .collect();
        Self {
            changepoint_times: times,
            segment_means,
            objective,
        }
    }
}

struct Prefix {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Prefix {
    fn new(x: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(x.len() + 1);
        let mut sum_sq = Vec::with_capacity(x.len() + 1);
        let (mut s, mut q) = (0.0, 0.0);
        sum.push(0.0);
        sum_sq.push(0.0);
        for v in x {
            s += v;
            q += v * v;
            sum.push(s);
            sum_sq.push(q);
        }
        Self { sum, sum_sq }
    }

    /// Gaussian mean-change cost `Σ (x_i − x̄)²` over `x[start..end]`.
    fn cost(&self, start: usize, end: usize) -> f64 {
        let n = (end - start) as f64;
        let s = self.sum[end] - self.sum[start];
        (self.sum_sq[end] - self.sum_sq[start] - s * s / n).max(0.0)
    }

    /// CUSUM contrast on `x[start..end]` split after `x[split - 1]`.
    fn cusum(&self, start: usize, split: usize, end: usize) -> f64 {
        let nl = (split - start) as f64;
        let nr = (end - split) as f64;
        let left = (self.sum[split] - self.sum[start]) / nl;
        let right = (self.sum[end] - self.sum[split]) / nr;
        (nl * nr / (nl + nr)).sqrt() * (right - left)
    }
}

/// Two-sample CUSUM contrast `√(n_l n_r / n)·(x̄_right − x̄_left)` on
/// `x_a, …, x_b` split into `x_a..x_t` and `x_{t+1}..x_b` (1-based, inclusive).
pub fn cusum(series: &Series, a: usize, b: usize, t: usize) -> Result<f64> {
    if a < 1 || !(a <= t && t < b) || b > series.len() {
        return Err(Error::invalid_input(format!(
            "cusum bounds need 1 <= a <= t < b <= {}, got a={a}, t={t}, b={b}",
            series.len()
        )));
    }
    Ok(Prefix::new(series.values()).cusum(a - 1, t, b))
}

/// Robust noise scale: MAD of lag-1 differences over `√2 · 0.6745`.
pub fn robust_sigma(values: &[f64]) -> f64 {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    stats::mad(&diffs) / (std::f64::consts::SQRT_2 * MAD_NORMAL)
}

/// Multiplier of `σ² log N` in the default PELT penalty.
pub const PENALTY_FACTOR: f64 = 3.0;

/// `3 σ² log N` for noise variance `σ²`.
pub fn penalty_for_variance(noise_var: f64, n: usize) -> f64 {
    PENALTY_FACTOR * noise_var * (n as f64).ln()
}

/// [`penalty_for_variance`] with σ̂ from [`robust_sigma`].
pub fn default_penalty(values: &[f64]) -> f64 {
    let mut var = robust_sigma(values).powi(2);
    if !(var > 0.0) {
        var = stats::variance(values);
    }
    if !(var > 0.0) {
        var = 1.0;
    }
    penalty_for_variance(var, values.len())
}

/// Exact penalised least-squares segmentation with PELT pruning.
pub fn pelt_meanshift(series: &Series, penalty: f64) -> Result<Segmentation> {
    if !(penalty > 0.0) || !penalty.is_finite() {
        return Err(Error::invalid_input(format!(
            "penalty must be positive and finite, got {penalty}"
        )));
    }
    let x = series.values();
    let n = x.len();
    let prefix = Prefix::new(x);
    let mut best = vec![0.0; n + 1];
    let mut last = vec![0usize; n + 1];
    best[0] = -penalty;
    let mut candidates: Vec<usize> = vec![0];
    for t in 1..=n {
        let mut min = f64::INFINITY;
        let mut arg = 0;
        let scores: Vec<f64> = candidates
            .iter()
            .map(|&s| best[s] + prefix.cost(s, t))
            .collect();
        for (&s, &score) in candidates.iter().zip(&scores) {
            if score + penalty < min {
                min = score + penalty;
                arg = s;
            }
        }
        best[t] = min;
        last[t] = arg;
        // a candidate whose cost already exceeds the optimum can never win again
        let slack = 1e-9 * (1.0 + min.abs());
        let mut kept: Vec<usize> = candidates
            .iter()
            .zip(&scores)
            .filter(|(_, &score)| score <= min + slack)
            .map(|(&s, _)| s)
            .collect();
        kept.push(t);
        candidates = kept;
    }
    let mut times = Vec::new();
    let mut t = n;
    while t > 0 {
        let s = last[t];
        if s > 0 {
            times.push(s);
        }
        t = s;
    }
    times.reverse();
    Ok(Segmentation::from_times(x, times, penalty))
}

/// Wild binary segmentation with `num_intervals` random intervals and
/// threshold `C · σ̂ · √(2 log N)`.
pub fn wbs_meanshift(
    series: &Series,
    num_intervals: usize,
    threshold_const: f64,
    seed: u64,
) -> Result<Segmentation> {
    let x = series.values();
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid_input(format!(
            "WBS needs at least 3 observations, got {n}"
        )));
    }
    if num_intervals < 1 {
        return Err(Error::invalid_input(
            "WBS needs at least one random interval",
        ));
    }
    if !(threshold_const >= 0.0) || !threshold_const.is_finite() {
        return Err(Error::invalid_input(format!(
            "threshold constant must be non-negative, got {threshold_const}"
        )));
    }
    let prefix = Prefix::new(x);
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let threshold = (threshold_const * robust_sigma(x) * (2.0 * (n as f64).ln()).sqrt())
        .max(1e-9 * (1.0 + scale));

    let mut rng = rng::rng_from_seed(seed);
    let intervals: Vec<(usize, usize, usize, f64)> = (0..num_intervals)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let (start, end) = (a.min(b), a.max(b) + 1);
            let (split, stat) = best_split(&prefix, start, end);
            (start, end, split, stat)
        })
        .collect();

    let mut times = Vec::new();
    let mut stack = vec![(0usize, n)];
    while let Some((start, end)) = stack.pop() {
        if end - start < 2 {
            continue;
        }
        let (mut split, mut stat) = best_split(&prefix, start, end);
        for &(s, e, b, v) in &intervals {
            if s >= start && e <= end && v > stat {
                split = b;
                stat = v;
            }
        }
        if stat > threshold {
            times.push(split);
            stack.push((split, end));
            stack.push((start, split));
        }
    }
    times.sort_unstable();
    Ok(Segmentation::from_times(x, times, 0.0))
}

/// Split of `x[start..end]` maximising `|CUSUM|`; returns the split index
/// (length of the left part measured from 0) and the statistic.
fn best_split(prefix: &Prefix, start: usize, end: usize) -> (usize, f64) {
    let mut best = (start + 1, f64::NEG_INFINITY);
    for split in start + 1..end {
        let v = prefix.cusum(start, split, end).abs();
        if v > best.1 {
            best = (split, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(v: Vec<f64>) -> Series {
        Series::new(v).unwrap()
    }

    #[test]
    fn pelt_noiseless_step() {
        let mut v = vec![0.0; 50];
        v.extend(vec![5.0; 50]);
        let seg = pelt_meanshift(&series(v), 1.0).unwrap();
        assert_eq!(seg.changepoint_times, vec![50]);
        assert_eq!(seg.segment_means, vec![0.0, 5.0]);
        assert_abs_diff_eq!(seg.objective, 1.0);
    }

    #[test]
    fn pelt_constant_series() {
        let seg = pelt_meanshift(&series(vec![2.5; 40]), 0.01).unwrap();
        assert!(seg.changepoint_times.is_empty());
    }

    #[test]
    fn pelt_penalty_limits() {
        let v: Vec<f64> = (0..30)
            .map(|t| ((t * 37 % 17) as f64) * 0.3 + t as f64 * 1e-3)
            .collect();
        assert_eq!(
            pelt_meanshift(&series(v.clone()), 1e12)
                .unwrap()
                .num_changepoints(),
            0
        );
        assert_eq!(
            pelt_meanshift(&series(v), 1e-9).unwrap().num_changepoints(),
            29
        );
        assert!(pelt_meanshift(&series(vec![1.0, 2.0]), 0.0).is_err());
    }

    #[test]
    fn cusum_step() {
        let l = 8;
        let delta = 1.7;
        let mut v = vec![0.0; l];
        v.extend(vec![delta; l]);
        let s = series(v);
        let stat = cusum(&s, 1, 2 * l, l).unwrap();
        assert_abs_diff_eq!(stat, delta * (l as f64 / 2.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn cusum_constant_and_bounds() {
        let s = series(vec![3.0; 10]);
        for t in 1..10 {
            assert_abs_diff_eq!(cusum(&s, 1, 10, t).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert!(cusum(&s, 0, 10, 3).is_err());
        assert!(cusum(&s, 2, 11, 3).is_err());
        assert!(cusum(&s, 4, 10, 3).is_err());
        assert!(cusum(&s, 4, 10, 10).is_err());
    }

    #[test]
    fn cusum_reflection_antisymmetry() {
        let v = vec![0.4, -1.2, 2.0, 0.3, 0.9, -0.1];
        let mut r = v.clone();
        r.reverse();
        let a = cusum(&series(v), 1, 6, 3).unwrap();
        let b = cusum(&series(r), 1, 6, 3).unwrap();
        assert_abs_diff_eq!(a, -b, epsilon = 1e-12);
    }

    #[test]
    fn wbs_noiseless_step() {
        let mut v = vec![0.0; 100];
        v.extend(vec![5.0; 100]);
        let seg = wbs_meanshift(&series(v), 500, 1.3, 4).unwrap();
        assert_eq!(seg.changepoint_times, vec![100]);
    }

    #[test]
    fn wbs_is_deterministic() {
        let v: Vec<f64> = (0..300)
            .map(|t| ((t * 7919 % 101) as f64 / 50.0) + if t > 150 { 3.0 } else { 0.0 })
            .collect();
        let a = wbs_meanshift(&series(v.clone()), 200, 1.0, 9).unwrap();
        let b = wbs_meanshift(&series(v), 200, 1.0, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wbs_validation() {
        assert!(wbs_meanshift(&series(vec![1.0, 2.0]), 10, 1.3, 0).is_err());
        assert!(wbs_meanshift(&series(vec![1.0, 2.0, 3.0]), 0, 1.3, 0).is_err());
        assert!(wbs_meanshift(&series(vec![1.0, 2.0, 3.0]), 5, -1.0, 0).is_err());
    }

    #[test]
    fn robust_sigma_from_differences() {
        // differences (-2, -1, 0, 1, 2) have median 0 and MAD 1
        let v = vec![0.0, -2.0, -3.0, -3.0, -2.0, 0.0];
        assert_abs_diff_eq!(
            robust_sigma(&v),
            1.0 / (2f64.sqrt() * MAD_NORMAL),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            default_penalty(&v),
            3.0 * robust_sigma(&v).powi(2) * 6f64.ln(),
            epsilon = 1e-12
        );
        assert!(default_penalty(&[1.0; 10]) > 0.0);
    }
}
